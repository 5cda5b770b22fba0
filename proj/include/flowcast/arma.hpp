#pragma once

#include "flowcast/linalg.hpp"

#include <span>
#include <vector>

namespace flowcast {

// Monahan-style reparameterization: unconstrained reals -> partial
// autocorrelations in (-1,1) via tanh -> AR coefficients of a stationary
// polynomial 1 - a_1 L - ... - a_p L^p.
std::vector<double> pacf_to_ar(std::span<const double> raw);

// MA coefficients b for an invertible 1 + b_1 L + ... + b_q L^q.
std::vector<double> pacf_to_ma(std::span<const double> raw);

// Exact Gaussian log-likelihood of an MA(q) sample through the innovations
// algorithm (Brockwell & Davis ch. 5/8). Coefficients follow the
// 1 + b_1 L + ... convention; sigma2 is the innovation variance.
struct MaFilter {
  double loglik = 0.0;
  bool ok = false;
  std::vector<double> innovations; // one-step prediction errors
  std::vector<double> ratio;       // prediction variance ratios r_t -> 1
};
MaFilter ma_innovations(std::span<const double> u, std::span<const double> b,
                        double sigma2);

// Vector MA(1) u_t = e_t + B e_{t-1}, e ~ N(0, Sigma); exact likelihood by
// the multivariate innovations recursion. q = 0 collapses to iid Gaussian.
struct VecMaFilter {
  double loglik = 0.0;
  bool ok = false;
  std::vector<std::vector<double>> innovations;
};
VecMaFilter vecma1_innovations(const std::vector<std::vector<double>>& u,
                               const Matrix* B, const Matrix& Sigma);

// Squashes an arbitrary square matrix to spectral norm < 1 (radial tanh),
// keeping VAR / vector-MA lag matrices inside the stationary region.
Matrix squash_spectral(const Matrix& A);

// Lag coefficients of Gamma(L) (1-L)^d written as 1 - sum_k a_k L^k;
// returns a_1..a_{p+d}. Used to expand a differenced forecast into levels.
std::vector<double> level_lag_coefficients(std::span<const double> ar, int d);

} // namespace flowcast
