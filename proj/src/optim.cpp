#include "flowcast/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flowcast {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const Objective& f, const std::vector<double>& x) {
  const double v = f(x);
  return std::isfinite(v) ? v : kInf;
}

std::vector<double> num_gradient(const Objective& f, const std::vector<double>& x,
                                 double fx) {
  const size_t n = x.size();
  std::vector<double> g(n, 0.0);
  std::vector<double> xp = x;
  for (size_t i = 0; i < n; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    const double fp = safe_eval(f, xp);
    xp[i] = x[i] - h;
    const double fm = safe_eval(f, xp);
    xp[i] = x[i];
    if (std::isfinite(fp) && std::isfinite(fm)) {
      g[i] = (fp - fm) / (2.0 * h);
    } else if (std::isfinite(fp)) {
      g[i] = (fp - fx) / h;
    } else if (std::isfinite(fm)) {
      g[i] = (fx - fm) / h;
    } else {
      g[i] = 0.0;
    }
  }
  return g;
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

} // namespace

OptimResult bfgs_minimize(const Objective& f, std::vector<double> x0,
                          const OptimOptions& opts) {
  const size_t n = x0.size();
  OptimResult res;
  res.x = std::move(x0);
  res.fmin = safe_eval(f, res.x);
  if (!std::isfinite(res.fmin)) return res; // invalid start

  // Inverse Hessian approximation, kept as a flat row-major matrix.
  std::vector<double> H(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;

  std::vector<double> g = num_gradient(f, res.x, res.fmin);
  res.grad_norm = inf_norm(g);

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    res.iterations = iter;
    if (res.grad_norm < opts.grad_tol) {
      res.converged = true;
      return res;
    }

    std::vector<double> p(n, 0.0); // p = -H g
    for (size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (size_t j = 0; j < n; ++j) s += H[i * n + j] * g[j];
      p[i] = -s;
    }
    double gp = 0.0;
    for (size_t i = 0; i < n; ++i) gp += g[i] * p[i];
    if (gp >= 0.0) { // not a descent direction; reset to steepest descent
      std::fill(H.begin(), H.end(), 0.0);
      for (size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;
      for (size_t i = 0; i < n; ++i) p[i] = -g[i];
      gp = 0.0;
      for (size_t i = 0; i < n; ++i) gp += g[i] * p[i];
      if (gp == 0.0) break;
    }

    // Backtracking Armijo search.
    double step = 1.0;
    const double c1 = 1e-4;
    std::vector<double> xn(n);
    double fn = kInf;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (size_t i = 0; i < n; ++i) xn[i] = res.x[i] + step * p[i];
      fn = safe_eval(f, xn);
      if (fn <= res.fmin + c1 * step * gp) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break; // line search failed; report best point so far

    std::vector<double> gn = num_gradient(f, xn, fn);
    std::vector<double> s(n), yv(n);
    for (size_t i = 0; i < n; ++i) {
      s[i] = xn[i] - res.x[i];
      yv[i] = gn[i] - g[i];
    }
    double sy = 0.0;
    for (size_t i = 0; i < n; ++i) sy += s[i] * yv[i];

    const double f_prev = res.fmin;
    res.x = xn;
    res.fmin = fn;
    g = std::move(gn);
    res.grad_norm = inf_norm(g);

    if (sy > 1e-14) {
      // BFGS inverse update: H <- (I - rho s y')H(I - rho y s') + rho s s'
      const double rho = 1.0 / sy;
      std::vector<double> Hy(n, 0.0);
      for (size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (size_t j = 0; j < n; ++j) acc += H[i * n + j] * yv[j];
        Hy[i] = acc;
      }
      double yHy = 0.0;
      for (size_t i = 0; i < n; ++i) yHy += yv[i] * Hy[i];
      for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
          H[i * n + j] += (1.0 + rho * yHy) * rho * s[i] * s[j] -
                          rho * (Hy[i] * s[j] + s[i] * Hy[j]);
    }

    // Objective change at machine precision: the search has stalled.
    if (std::abs(f_prev - res.fmin) <
        1e-14 * std::max(1.0, std::abs(res.fmin))) {
      res.converged = res.grad_norm < 1e-3;
      return res;
    }
  }
  res.converged = res.grad_norm < opts.grad_tol;
  return res;
}

} // namespace flowcast
