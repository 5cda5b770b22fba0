#pragma once

#include <functional>
#include <vector>

namespace flowcast {

struct OptimResult {
  std::vector<double> x;
  double fmin = 0.0;
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
};

struct OptimOptions {
  int max_iterations = 200;
  double grad_tol = 1e-6; // infinity norm of the numerical gradient
};

using Objective = std::function<double(const std::vector<double>&)>;

// BFGS with central-difference gradients and a backtracking Armijo line
// search. Non-finite objective values are treated as +inf, so the search
// backs away from invalid parameter regions.
OptimResult bfgs_minimize(const Objective& f, std::vector<double> x0,
                          const OptimOptions& opts = {});

} // namespace flowcast
