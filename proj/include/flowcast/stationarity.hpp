#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowcast {

struct DegenerateInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unit-root test in levels with a constant and fixed lag p = 2:
//   y_t = mu + phi_1 y_{t-1} + phi_2 y_{t-2} + eps_t
//   H0: phi_1 = 1   vs   H1: phi_1 < 1,  t = (phi_1^ - 1) / se(phi_1^)
inline constexpr int kAdfLag = 2;
inline constexpr double kAdfCritical = 0.05;

struct AdfResult {
  double t_stat = 0.0;
  double p_value = 1.0;
  int n_used = 0;
  int lag = kAdfLag;
};

// One-sided p-value for the constant, no-trend Dickey-Fuller distribution
// (MacKinnon response-surface approximation).
double adf_p_value(double t_stat);

struct AdfCriticalValues {
  double pct1 = -3.43;
  double pct5 = -2.86;
  double pct10 = -2.57;
};
// Tabulated asymptotic critical values for cross-checking the surface.
AdfCriticalValues adf_critical_values();

// Throws std::invalid_argument when series.size() < 10 and
// DegenerateInputError when the regressors have no variation.
AdfResult adf_test(std::span<const double> series);

struct RollingAdfScan {
  int window = 0;
  int d_max = 2;
  bool nonstandard_window = false; // window outside the {12,48,96} grid
  std::vector<int> t;              // scan positions; window is [t-w, t-1]
  // p[k][d] = p-value at difference level d; NaN when the iteration
  // stopped before reaching d.
  std::vector<std::array<double, 3>> p;
  std::vector<int> d_star; // smallest d with p < 0.05, capped at d_max
};

// Rolling scan: at each t >= window, tests the w observations strictly
// before t, differencing until p < 0.05 or d_max is reached.
RollingAdfScan rolling_adf(std::span<const double> series, int window,
                           int d_max = 2);

std::string adf_scan_to_csv(const RollingAdfScan& scan);

} // namespace flowcast
