#pragma once

#include "flowcast/csvio.hpp"
#include "flowcast/linalg.hpp"
#include "flowcast/market_data.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace flowcast {

// One fixed forecasting model h(group, w, p, d, q). Groups 0-6 train a
// univariate ARIMAX, groups 7-12 a VARMA on the stacked (diff y, features)
// vector. Feature usage per group: 0 none; 1,3,7,9 OIB mean; 2,3,8,9 OFI
// mean; 4,6,10,12 OIB p-score; 5,6,11,12 OFI p-score.
struct ModelSpec {
  int group = 0;
  int w = 96;
  int p = 0;
  int d = 1;
  int q = 0;

  bool is_multivariate() const { return group >= 7; }
  std::vector<int> feature_indices() const; // into the 4-dim x row
  int n_channels() const; // 1 (univariate) or 1 + #features
  std::string code() const; // M{group}_{w}_PDQ{p}{d}{q}

  friend bool operator==(const ModelSpec& a, const ModelSpec& b) {
    return a.group == b.group && a.w == b.w && a.p == b.p && a.d == b.d &&
           a.q == b.q;
  }
  friend bool operator<(const ModelSpec& a, const ModelSpec& b) {
    if (a.group != b.group) return a.group < b.group;
    if (a.w != b.w) return a.w < b.w;
    if (a.p != b.p) return a.p < b.p;
    if (a.d != b.d) return a.d < b.d;
    return a.q < b.q;
  }
};

// The full grid: 504 univariate (p,q in {0,1,2}, d in {1,2},
// w in {12,24,48,96}) + 48 multivariate (p=1, q in {0,1}, d in {1,2},
// w in {48,96}) = 552 specs in (group, w, p, d, q) order.
std::vector<ModelSpec> enumerate_models();

// Free-parameter count with the covariance counted as a
// full matrix and dummy coefficients excluded.
int param_dimension(const ModelSpec& spec);

struct ParamEstimate {
  ModelSpec spec;
  bool converged = false;
  double loglik = 0.0;

  // Univariate pieces.
  double mu = 0.0;
  std::vector<double> ar;          // gamma_1..gamma_p
  std::vector<double> ma;          // phi_1..phi_q (1 + phi L ... convention)
  std::array<double, 4> beta{};    // loadings on x, zero off-group
  double sigma2 = 0.0;
  std::vector<double> eps_tail;    // last q innovations, newest first

  // Multivariate pieces.
  int n_channels = 1;
  std::vector<double> mu_vec;
  Matrix Gamma1;
  Matrix Phi1;
  Matrix Sigma;
  std::vector<double> eps_last;    // last innovation vector

  std::vector<double> dummy_coefs; // per boundary bracket (flattened rows
                                   // of n_channels for multivariate)
};

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fits on the window of brackets [t-w+1, t]; features enter lagged one
// bracket, session-boundary brackets inside the equation range get
// one-hot dummy regressors. Throws FitError when the window does not fit
// in the series; numerical failure is reported via converged = false.
ParamEstimate fit_univariate(const BracketSeries& series,
                             const ModelSpec& spec, int t);
ParamEstimate fit_multivariate(const BracketSeries& series,
                               const ModelSpec& spec, int t);
ParamEstimate fit_model(const BracketSeries& series, const ModelSpec& spec,
                        int t);

// One-step conditional mean given the fitted parameters:
//   z_hat = mu + sum gamma_i z_{t+1-i} + sum phi_j eps_{t+1-j} + <beta, x_t>
// integrated back through the d differences. y_tail holds y up to and
// including time t (at least p + d + 1 values).
double forecast_one_step(const ParamEstimate& est, std::span<const double> y_tail,
                         const std::array<double, 4>& x_t);

// Same forecast computed in levels via the expanded lag polynomial of
// Gamma(L)(1-L)^d; used to cross-check the differenced route.
double forecast_via_level_expansion(const ParamEstimate& est,
                                    std::span<const double> y_tail,
                                    const std::array<double, 4>& x_t);

enum class FitStatus { ok, failed };

struct ForecastCell {
  double forecast = 0.0;
  double error = 0.0; // y_{t+1} - forecast
  FitStatus status = FitStatus::failed;
};

struct ForecastTable {
  std::vector<ModelSpec> specs;
  std::vector<int> times; // forecast origins t, strictly increasing
  std::vector<std::vector<ForecastCell>> cells; // [spec][time index]
};

// Origins t with an eligible in-session target t+1 and t >= min_history.
std::vector<int> default_forecast_index(const BracketSeries& series,
                                        int min_history);

// Refits every (spec, t) cell on its own window and forecasts one step.
// Cells are independent; failures become missing entries, never numbers.
ForecastTable run_fixed_grid(const BracketSeries& series,
                             const std::vector<ModelSpec>& specs,
                             const std::vector<int>& forecast_index,
                             int threads = 1);

std::string forecast_table_to_csv(const ForecastTable& table);
ForecastTable forecast_table_from_csv(const CsvTable& csv);

} // namespace flowcast
