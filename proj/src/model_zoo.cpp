#include "flowcast/model_zoo.hpp"

#include "flowcast/arma.hpp"
#include "flowcast/optim.hpp"
#include "flowcast/threadpool.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>

namespace flowcast {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kFeatureRidge = 1e-8;
constexpr double kVarFloor = 1e-12;
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
} // namespace

std::vector<int> ModelSpec::feature_indices() const {
  switch (group) {
    case 0: return {};
    case 1: case 7: return {0};
    case 2: case 8: return {1};
    case 3: case 9: return {0, 1};
    case 4: case 10: return {2};
    case 5: case 11: return {3};
    case 6: case 12: return {2, 3};
    default: return {};
  }
}

int ModelSpec::n_channels() const {
  return is_multivariate() ? 1 + static_cast<int>(feature_indices().size()) : 1;
}

std::string ModelSpec::code() const {
  return "M" + std::to_string(group) + "_" + std::to_string(w) + "_PDQ" +
         std::to_string(p) + std::to_string(d) + std::to_string(q);
}

std::vector<ModelSpec> enumerate_models() {
  std::vector<ModelSpec> out;
  out.reserve(552);
  for (int g = 0; g <= 6; ++g)
    for (int w : {12, 24, 48, 96})
      for (int p = 0; p <= 2; ++p)
        for (int d = 1; d <= 2; ++d)
          for (int q = 0; q <= 2; ++q) out.push_back({g, w, p, d, q});
  for (int g = 7; g <= 12; ++g)
    for (int w : {48, 96})
      for (int d = 1; d <= 2; ++d)
        for (int q = 0; q <= 1; ++q) out.push_back({g, w, 1, d, q});
  return out;
}

int param_dimension(const ModelSpec& spec) {
  if (!spec.is_multivariate())
    return 1 + spec.p + spec.q + static_cast<int>(spec.feature_indices().size()) + 1;
  const int n = spec.n_channels();
  return n + spec.p * n * n + spec.q * n * n + n * n;
}

namespace {

// d-th differences of the bracket VWMs over [start, t]; z[j] corresponds
// to global index start + d + j.
std::vector<double> window_diffs(const BracketSeries& series, int start, int t,
                                 int d) {
  std::vector<double> z;
  z.reserve(t - start + 1);
  for (int g = start; g <= t; ++g) z.push_back(series.brackets[g].y);
  for (int k = 0; k < d; ++k)
    for (size_t i = z.size() - 1; i >= 1; --i) z[i] -= z[i - 1];
  return std::vector<double>(z.begin() + d, z.end());
}

std::vector<int> boundary_indices(const BracketSeries& series, int first,
                                  int last) {
  std::vector<int> out;
  for (int g = first; g <= last; ++g)
    if (series.brackets[g].gap != GapKind::none) out.push_back(g);
  return out;
}

bool ar_is_stationary(const std::vector<double>& a) {
  if (a.empty()) return true;
  if (a.size() == 1) return std::abs(a[0]) < 1.0;
  if (a.size() == 2)
    return a[0] + a[1] < 1.0 && a[1] - a[0] < 1.0 && std::abs(a[1]) < 1.0;
  return false;
}

void check_window(const BracketSeries& series, const ModelSpec& spec, int t) {
  const int start = t - spec.w + 1;
  if (t < 0 || t >= static_cast<int>(series.size()) || start < 0)
    throw FitError("fit: window [" + std::to_string(start) + "," +
                   std::to_string(t) + "] does not fit in the series");
  if (series.x.size() != series.size())
    throw FitError("fit: series has no feature rows");
}

} // namespace

ParamEstimate fit_univariate(const BracketSeries& series, const ModelSpec& spec,
                             int t) {
  check_window(series, spec, t);
  const int start = t - spec.w + 1;
  const int p = spec.p, q = spec.q, d = spec.d;
  const std::vector<int> feats = spec.feature_indices();
  const int k = static_cast<int>(feats.size());

  const std::vector<double> z = window_diffs(series, start, t, d);
  const int m = static_cast<int>(z.size());
  const int N = m - p;
  if (N < 3) throw FitError("fit: window too short for the requested orders");

  // Equation at z index j (global g = start + d + j) regresses on a
  // constant, p lags of z, the features lagged one bracket, and a one-hot
  // dummy per session-boundary bracket inside the equation range.
  const int g0 = start + d + p;
  const std::vector<int> bounds = boundary_indices(series, g0, t);
  const int nd = static_cast<int>(bounds.size());

  ParamEstimate est;
  est.spec = spec;
  est.n_channels = 1;

  auto finish_from_ols = [&](const std::vector<double>& coef, double sse) {
    est.mu = coef[0];
    est.ar.assign(coef.begin() + 1, coef.begin() + 1 + p);
    for (int f = 0; f < k; ++f) est.beta[feats[f]] = coef[1 + p + f];
    est.dummy_coefs.assign(coef.begin() + 1 + p + k, coef.end());
    est.sigma2 = std::max(sse / N, kVarFloor);
    est.loglik = -0.5 * N * (kLog2Pi + std::log(est.sigma2) + 1.0);
    est.converged = true;
  };

  if (q == 0) {
    Matrix X(N, 1 + p + k + nd);
    std::vector<double> y(N);
    std::vector<double> ridge(1 + p + k + nd, 0.0);
    for (int f = 0; f < k; ++f) ridge[1 + p + f] = kFeatureRidge;
    for (int j = p; j < m; ++j) {
      const int row = j - p;
      const int g = start + d + j;
      X(row, 0) = 1.0;
      for (int i = 1; i <= p; ++i) X(row, i) = z[j - i];
      for (int f = 0; f < k; ++f) X(row, 1 + p + f) = series.x[g - 1][feats[f]];
      for (int b = 0; b < nd; ++b)
        X(row, 1 + p + k + b) = (g == bounds[b]) ? 1.0 : 0.0;
      y[row] = z[j];
    }
    try {
      double sse = 0.0;
      const std::vector<double> coef = ridge_ls(X, y, ridge, &sse);
      std::vector<double> ar_part(coef.begin() + 1, coef.begin() + 1 + p);
      if (ar_is_stationary(ar_part)) {
        finish_from_ols(coef, sse);
        return est;
      }
      // Unconstrained optimum sits outside the stationary region; fall
      // through to the transformed quasi-Newton fit.
    } catch (const std::runtime_error&) {
      est.converged = false;
      return est;
    }
  }

  // Quasi-Newton fit on unconstrained transforms: partial autocorrelations
  // for the AR/MA blocks, log variance for sigma^2.
  const int dim = 1 + p + q + k + nd + 1;
  std::vector<double> theta0(dim, 0.0);
  {
    double mean = 0.0;
    for (int j = p; j < m; ++j) mean += z[j];
    mean /= N;
    double var = 0.0;
    for (int j = p; j < m; ++j) var += (z[j] - mean) * (z[j] - mean);
    var = var / N + kVarFloor;
    theta0[0] = mean;
    theta0[dim - 1] = std::log(var);
  }

  std::vector<double> u(N);
  const auto objective = [&](const std::vector<double>& th) -> double {
    const double mu = th[0];
    const std::vector<double> ar =
        pacf_to_ar(std::span<const double>(th.data() + 1, p));
    const std::vector<double> ma =
        pacf_to_ma(std::span<const double>(th.data() + 1 + p, q));
    const double* beta = th.data() + 1 + p + q;
    const double* delta = th.data() + 1 + p + q + k;
    const double sigma2 = std::exp(th[dim - 1]) + kVarFloor;
    for (int j = p; j < m; ++j) {
      const int g = start + d + j;
      double v = z[j] - mu;
      for (int i = 1; i <= p; ++i) v -= ar[i - 1] * z[j - i];
      for (int f = 0; f < k; ++f) v -= beta[f] * series.x[g - 1][feats[f]];
      for (int b = 0; b < nd; ++b)
        if (g == bounds[b]) v -= delta[b];
      u[j - p] = v;
    }
    const MaFilter filt = ma_innovations(u, ma, sigma2);
    if (!filt.ok) return std::numeric_limits<double>::infinity();
    double pen = 0.0;
    for (int f = 0; f < k; ++f) pen += beta[f] * beta[f];
    return -filt.loglik / N + 0.5 * kFeatureRidge * pen;
  };

  const OptimResult opt = bfgs_minimize(objective, theta0);
  est.mu = opt.x[0];
  est.ar = pacf_to_ar(std::span<const double>(opt.x.data() + 1, p));
  est.ma = pacf_to_ma(std::span<const double>(opt.x.data() + 1 + p, q));
  for (int f = 0; f < k; ++f) est.beta[feats[f]] = opt.x[1 + p + q + f];
  est.dummy_coefs.assign(opt.x.begin() + 1 + p + q + k,
                         opt.x.begin() + 1 + p + q + k + nd);
  est.sigma2 = std::exp(opt.x[dim - 1]) + kVarFloor;
  est.converged = opt.converged && std::isfinite(opt.fmin);

  if (est.converged) {
    // Recompute the innovations at the optimum; the newest q of them feed
    // the moving-average part of the forecast.
    objective(opt.x);
    const MaFilter filt = ma_innovations(u, est.ma, est.sigma2);
    est.loglik = filt.loglik;
    for (int j = 1; j <= q && j <= N; ++j)
      est.eps_tail.push_back(filt.innovations[N - j]);
  }
  return est;
}

ParamEstimate fit_multivariate(const BracketSeries& series,
                               const ModelSpec& spec, int t) {
  check_window(series, spec, t);
  const int start = t - spec.w + 1;
  const int d = spec.d, q = spec.q;
  const std::vector<int> feats = spec.feature_indices();
  const int n_full = spec.n_channels();

  const std::vector<double> z = window_diffs(series, start, t, d);
  const int m = static_cast<int>(z.size());
  const int N = m - 1; // VAR lag order is fixed at 1
  if (N < 3) throw FitError("fit: window too short for the requested orders");

  // Stacked observations v_j = (diff^d y, selected features), j aligned
  // with z (global g = start + d + j).
  std::vector<std::vector<double>> v_full(m, std::vector<double>(n_full, 0.0));
  for (int j = 0; j < m; ++j) {
    const int g = start + d + j;
    v_full[j][0] = z[j];
    for (size_t f = 0; f < feats.size(); ++f)
      v_full[j][1 + f] = series.x[g][feats[f]];
  }

  // A feature channel with no variation over the window makes the Gaussian
  // likelihood degenerate; drop it and fit the reduced system (the block-
  // degenerate limit). The y channel is never dropped.
  std::vector<int> live{0};
  std::vector<double> ch_mean(n_full, 0.0);
  for (int c = 1; c < n_full; ++c) {
    double mean = 0.0, var = 0.0;
    for (int j = 0; j < m; ++j) mean += v_full[j][c];
    mean /= m;
    for (int j = 0; j < m; ++j)
      var += (v_full[j][c] - mean) * (v_full[j][c] - mean);
    var /= m;
    ch_mean[c] = mean;
    if (var > 1e-10 * (1.0 + mean * mean)) live.push_back(c);
  }
  const int n = static_cast<int>(live.size());
  std::vector<std::vector<double>> v(m, std::vector<double>(n, 0.0));
  for (int j = 0; j < m; ++j)
    for (int c = 0; c < n; ++c) v[j][c] = v_full[j][live[c]];

  const int g0 = start + d + 1;
  const std::vector<int> bounds = boundary_indices(series, g0, t);
  const int nd = static_cast<int>(bounds.size());

  // theta layout: mu(n) | A_Gamma(n^2) | A_Phi(n^2 if q) | chol(n(n+1)/2)
  //               | dummy rows (n per boundary)
  const int n2 = n * n;
  const int nchol = n * (n + 1) / 2;
  const int dim = n + n2 + q * n2 + nchol + n * nd;
  std::vector<double> theta0(dim, 0.0);
  {
    std::vector<double> mean(n, 0.0), var(n, 0.0);
    for (int j = 1; j < m; ++j)
      for (int c = 0; c < n; ++c) mean[c] += v[j][c];
    for (int c = 0; c < n; ++c) mean[c] /= N;
    for (int j = 1; j < m; ++j)
      for (int c = 0; c < n; ++c)
        var[c] += (v[j][c] - mean[c]) * (v[j][c] - mean[c]);
    for (int c = 0; c < n; ++c) {
      theta0[c] = mean[c];
      var[c] = var[c] / N + kVarFloor;
    }
    // Cholesky diagonal entries are stored in log scale.
    int pos = n + n2 + q * n2;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j, ++pos)
        if (i == j) theta0[pos] = 0.5 * std::log(var[i]);
  }

  const auto unpack = [&](const std::vector<double>& th, std::vector<double>& mu,
                          Matrix& G, Matrix& P, Matrix& Sig, const double** delta) {
    mu.assign(th.begin(), th.begin() + n);
    Matrix A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = th[n + i * n + j];
    G = squash_spectral(A);
    if (q == 1) {
      Matrix B(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) B(i, j) = th[n + n2 + i * n + j];
      P = squash_spectral(B);
    }
    Matrix L(n, n);
    int pos = n + n2 + q * n2;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j, ++pos)
        L(i, j) = (i == j) ? std::exp(th[pos]) : th[pos];
    Sig = matmul(L, transpose(L));
    for (int i = 0; i < n; ++i) Sig(i, i) += kVarFloor;
    *delta = th.data() + n + n2 + q * n2 + nchol;
  };

  std::vector<std::vector<double>> u(N, std::vector<double>(n, 0.0));
  const auto objective = [&](const std::vector<double>& th) -> double {
    std::vector<double> mu;
    Matrix G, P, Sig;
    const double* delta = nullptr;
    unpack(th, mu, G, P, Sig, &delta);
    for (int j = 1; j < m; ++j) {
      const int g = start + d + j;
      for (int c = 0; c < n; ++c) {
        double val = v[j][c] - mu[c];
        for (int l = 0; l < n; ++l) val -= G(c, l) * v[j - 1][l];
        for (int b = 0; b < nd; ++b)
          if (g == bounds[b]) val -= delta[b * n + c];
        u[j - 1][c] = val;
      }
    }
    const VecMaFilter filt =
        vecma1_innovations(u, q == 1 ? &P : nullptr, Sig);
    if (!filt.ok) return std::numeric_limits<double>::infinity();
    return -filt.loglik / (N * n);
  };

  const OptimResult opt = bfgs_minimize(objective, theta0);

  ParamEstimate est;
  est.spec = spec;
  est.n_channels = n_full;
  est.converged = opt.converged && std::isfinite(opt.fmin);

  // Embed the reduced fit at full dimension: dropped channels get zero
  // coefficients, their window mean as the intercept, and the variance
  // floor on the covariance diagonal.
  std::vector<double> mu_r;
  Matrix G_r, P_r, Sig_r;
  const double* delta = nullptr;
  unpack(opt.x, mu_r, G_r, P_r, Sig_r, &delta);

  est.mu_vec.assign(n_full, 0.0);
  est.Gamma1 = Matrix(n_full, n_full);
  if (q == 1) est.Phi1 = Matrix(n_full, n_full);
  est.Sigma = Matrix(n_full, n_full);
  for (int c = 0; c < n_full; ++c) est.Sigma(c, c) = kVarFloor;
  for (int c = 1; c < n_full; ++c) est.mu_vec[c] = ch_mean[c];
  for (int i = 0; i < n; ++i) {
    est.mu_vec[live[i]] = mu_r[i];
    for (int j = 0; j < n; ++j) {
      est.Gamma1(live[i], live[j]) = G_r(i, j);
      if (q == 1) est.Phi1(live[i], live[j]) = P_r(i, j);
      est.Sigma(live[i], live[j]) = Sig_r(i, j);
    }
  }
  est.dummy_coefs.assign(static_cast<size_t>(n_full) * nd, 0.0);
  for (int b = 0; b < nd; ++b)
    for (int i = 0; i < n; ++i)
      est.dummy_coefs[static_cast<size_t>(b) * n_full + live[i]] =
          delta[b * n + i];

  if (est.converged) {
    objective(opt.x);
    const VecMaFilter filt =
        vecma1_innovations(u, q == 1 ? &P_r : nullptr, Sig_r);
    est.loglik = filt.loglik;
    est.eps_last.assign(n_full, 0.0);
    for (int i = 0; i < n; ++i)
      est.eps_last[live[i]] = filt.innovations.back()[i];
  }
  return est;
}

ParamEstimate fit_model(const BracketSeries& series, const ModelSpec& spec,
                        int t) {
  return spec.is_multivariate() ? fit_multivariate(series, spec, t)
                                : fit_univariate(series, spec, t);
}

namespace {

double integrate_diff(double z_next, std::span<const double> y_tail, int d) {
  const size_t L = y_tail.size();
  switch (d) {
    case 0: return z_next;
    case 1: return z_next + y_tail[L - 1];
    case 2: return z_next + 2.0 * y_tail[L - 1] - y_tail[L - 2];
    default: {
      // General case via binomial expansion of (1-L)^d.
      double acc = z_next;
      double coef = 1.0;
      for (int k = 1; k <= d; ++k) {
        coef = -coef * (d - k + 1) / k;
        acc -= coef * y_tail[L - k];
      }
      return acc;
    }
  }
}

std::vector<double> diff_tail(std::span<const double> y_tail, int d,
                              int count) {
  // Last `count` d-th differences of the tail.
  std::vector<double> z(y_tail.begin(), y_tail.end());
  for (int k = 0; k < d; ++k)
    for (size_t i = z.size() - 1; i >= 1; --i) z[i] -= z[i - 1];
  std::vector<double> out;
  for (int i = 0; i < count; ++i)
    out.push_back(z[z.size() - count + i]); // oldest first
  return out;
}

} // namespace

double forecast_one_step(const ParamEstimate& est, std::span<const double> y_tail,
                         const std::array<double, 4>& x_t) {
  const ModelSpec& spec = est.spec;
  const std::vector<int> feats = spec.feature_indices();
  for (int f : feats)
    if (std::isnan(x_t[f]))
      throw std::invalid_argument("forecast_one_step: missing feature");
  if (static_cast<int>(y_tail.size()) < spec.p + spec.d + 1 ||
      static_cast<int>(y_tail.size()) < 2)
    throw std::invalid_argument("forecast_one_step: history too short");

  if (!spec.is_multivariate()) {
    const std::vector<double> ztail = diff_tail(y_tail, spec.d, spec.p);
    double z_next = est.mu;
    for (int i = 1; i <= spec.p; ++i)
      z_next += est.ar[i - 1] * ztail[spec.p - i];
    for (int j = 1; j <= spec.q; ++j)
      if (j <= static_cast<int>(est.eps_tail.size()))
        z_next += est.ma[j - 1] * est.eps_tail[j - 1];
    for (int f : feats) z_next += est.beta[f] * x_t[f];
    return integrate_diff(z_next, y_tail, spec.d);
  }

  const int n = est.n_channels;
  std::vector<double> v_t(n, 0.0);
  v_t[0] = diff_tail(y_tail, spec.d, 1)[0];
  for (size_t f = 0; f < feats.size(); ++f) v_t[1 + f] = x_t[feats[f]];
  std::vector<double> pred = matvec(est.Gamma1, v_t);
  for (int c = 0; c < n; ++c) pred[c] += est.mu_vec[c];
  if (spec.q == 1 && !est.eps_last.empty()) {
    const std::vector<double> ma = matvec(est.Phi1, est.eps_last);
    for (int c = 0; c < n; ++c) pred[c] += ma[c];
  }
  return integrate_diff(pred[0], y_tail, spec.d);
}

double forecast_via_level_expansion(const ParamEstimate& est,
                                    std::span<const double> y_tail,
                                    const std::array<double, 4>& x_t) {
  const ModelSpec& spec = est.spec;
  if (spec.is_multivariate())
    throw std::invalid_argument("level expansion applies to univariate fits");
  const std::vector<double> a = level_lag_coefficients(est.ar, spec.d);
  const size_t L = y_tail.size();
  if (L < a.size())
    throw std::invalid_argument("forecast_via_level_expansion: short history");
  double y_next = est.mu;
  for (size_t kk = 1; kk <= a.size(); ++kk)
    y_next += a[kk - 1] * y_tail[L - kk];
  for (int j = 1; j <= spec.q; ++j)
    if (j <= static_cast<int>(est.eps_tail.size()))
      y_next += est.ma[j - 1] * est.eps_tail[j - 1];
  for (int f : spec.feature_indices()) y_next += est.beta[f] * x_t[f];
  return y_next;
}

std::vector<int> default_forecast_index(const BracketSeries& series,
                                        int min_history) {
  std::vector<int> out;
  for (int t = min_history; t + 1 < static_cast<int>(series.size()); ++t)
    if (series.brackets[t + 1].forecast_eligible) out.push_back(t);
  return out;
}

ForecastTable run_fixed_grid(const BracketSeries& series,
                             const std::vector<ModelSpec>& specs,
                             const std::vector<int>& forecast_index,
                             int threads) {
  for (size_t i = 0; i < forecast_index.size(); ++i) {
    const int t = forecast_index[i];
    if (t + 1 >= static_cast<int>(series.size()) ||
        !series.brackets[t + 1].forecast_eligible)
      throw std::invalid_argument(
          "run_fixed_grid: forecast index must target eligible brackets");
    if (i > 0 && forecast_index[i] <= forecast_index[i - 1])
      throw std::invalid_argument(
          "run_fixed_grid: forecast index must be strictly increasing");
  }

  ForecastTable table;
  table.specs = specs;
  table.times = forecast_index;
  table.cells.assign(specs.size(),
                     std::vector<ForecastCell>(forecast_index.size()));

  parallel_for(specs.size(), threads, [&](size_t si) {
    const ModelSpec& spec = specs[si];
    std::vector<ForecastCell>& row = table.cells[si];
    for (size_t ti = 0; ti < forecast_index.size(); ++ti) {
      const int t = forecast_index[ti];
      ForecastCell& cell = row[ti];
      cell.forecast = kNaN;
      cell.error = kNaN;
      cell.status = FitStatus::failed;
      try {
        const ParamEstimate est = fit_model(series, spec, t);
        if (!est.converged) continue;
        const int tail_len = spec.p + spec.d + 2;
        const int first = std::max(0, t + 1 - tail_len);
        std::vector<double> y_tail;
        for (int g = first; g <= t; ++g) y_tail.push_back(series.brackets[g].y);
        const double fc = forecast_one_step(est, y_tail, series.x[t]);
        if (!std::isfinite(fc)) continue;
        cell.forecast = fc;
        cell.error = series.brackets[t + 1].y - fc;
        cell.status = FitStatus::ok;
      } catch (const std::exception&) {
        // Cell stays missing; a failed fit never fabricates a number.
      }
    }
  });
  return table;
}

std::string forecast_table_to_csv(const ForecastTable& table) {
  CsvWriter w({"group", "w", "p", "d", "q", "t", "forecast", "error", "status"});
  for (size_t si = 0; si < table.specs.size(); ++si) {
    const ModelSpec& s = table.specs[si];
    for (size_t ti = 0; ti < table.times.size(); ++ti) {
      const ForecastCell& c = table.cells[si][ti];
      w.add_row({std::to_string(s.group), std::to_string(s.w),
                 std::to_string(s.p), std::to_string(s.d), std::to_string(s.q),
                 std::to_string(table.times[ti]), fmt_double(c.forecast),
                 fmt_double(c.error),
                 c.status == FitStatus::ok ? "ok" : "failed"});
    }
  }
  return w.to_string();
}

ForecastTable forecast_table_from_csv(const CsvTable& csv) {
  const int ig = csv.column("group"), iw = csv.column("w"), ip = csv.column("p");
  const int id = csv.column("d"), iq = csv.column("q"), it = csv.column("t");
  const int ifc = csv.column("forecast"), ie = csv.column("error");
  const int is = csv.column("status");
  if (ig < 0 || iw < 0 || ip < 0 || id < 0 || iq < 0 || it < 0 || ifc < 0 ||
      ie < 0 || is < 0)
    throw std::invalid_argument("forecast_table_from_csv: missing columns");

  std::map<ModelSpec, std::map<int, ForecastCell>> grid;
  std::vector<int> times;
  for (const auto& row : csv.rows) {
    ModelSpec s{std::atoi(row[ig].c_str()), std::atoi(row[iw].c_str()),
                std::atoi(row[ip].c_str()), std::atoi(row[id].c_str()),
                std::atoi(row[iq].c_str())};
    const int t = std::atoi(row[it].c_str());
    ForecastCell c;
    c.forecast = std::strtod(row[ifc].c_str(), nullptr);
    c.error = std::strtod(row[ie].c_str(), nullptr);
    c.status = row[is] == "ok" ? FitStatus::ok : FitStatus::failed;
    grid[s][t] = c;
    times.push_back(t);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  ForecastTable table;
  table.times = times;
  for (const auto& [spec, row] : grid) {
    table.specs.push_back(spec);
    std::vector<ForecastCell> cells(times.size());
    for (size_t ti = 0; ti < times.size(); ++ti) {
      const auto it2 = row.find(times[ti]);
      if (it2 != row.end()) {
        cells[ti] = it2->second;
      } else {
        cells[ti].forecast = kNaN;
        cells[ti].error = kNaN;
        cells[ti].status = FitStatus::failed;
      }
    }
    table.cells.push_back(std::move(cells));
  }
  return table;
}

} // namespace flowcast
