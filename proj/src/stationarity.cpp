#include "flowcast/stationarity.hpp"

#include "flowcast/csvio.hpp"
#include "flowcast/features.hpp"
#include "flowcast/linalg.hpp"

#include <cmath>
#include <limits>

namespace flowcast {

namespace {

// MacKinnon (1994) response-surface coefficients, constant / no-trend case.
constexpr double kTauStar = -1.61;
constexpr double kTauMin = -18.83;
constexpr double kTauMax = 2.74;
constexpr double kSmallP[3] = {2.1659, 1.4412, 0.038269};
constexpr double kLargeP[4] = {1.7339, 0.93202, -0.12745, -0.010368};

} // namespace

double adf_p_value(double t_stat) {
  if (t_stat < kTauMin) return 0.0;
  if (t_stat > kTauMax) return 1.0;
  double z;
  if (t_stat <= kTauStar) {
    z = kSmallP[0] + kSmallP[1] * t_stat + kSmallP[2] * t_stat * t_stat;
  } else {
    z = kLargeP[0] + kLargeP[1] * t_stat + kLargeP[2] * t_stat * t_stat +
        kLargeP[3] * t_stat * t_stat * t_stat;
  }
  return normal_cdf(z);
}

AdfCriticalValues adf_critical_values() { return {}; }

AdfResult adf_test(std::span<const double> series) {
  const int n = static_cast<int>(series.size());
  if (n < 10)
    throw std::invalid_argument("adf_test: need at least 10 observations");

  const int rows = n - kAdfLag;
  Matrix X(rows, 3);
  std::vector<double> y(rows);
  for (int i = 0; i < rows; ++i) {
    const int t = i + kAdfLag;
    X(i, 0) = 1.0;
    X(i, 1) = series[t - 1];
    X(i, 2) = series[t - 2];
    y[i] = series[t];
  }

  OlsFit fit;
  try {
    fit = ols(X, y);
  } catch (const std::runtime_error&) {
    throw DegenerateInputError("adf_test: regressors have no variation");
  }
  if (!(fit.se[1] > 0.0))
    throw DegenerateInputError("adf_test: zero-variance fit");

  AdfResult res;
  res.n_used = rows;
  res.t_stat = (fit.beta[1] - 1.0) / fit.se[1];
  res.p_value = adf_p_value(res.t_stat);
  return res;
}

RollingAdfScan rolling_adf(std::span<const double> series, int window,
                           int d_max) {
  const int n = static_cast<int>(series.size());
  if (d_max < 0 || d_max > 2)
    throw std::invalid_argument("rolling_adf: d_max must be in [0,2]");
  if (window - d_max < 10)
    throw std::invalid_argument("rolling_adf: window too small for lag-2 test");
  if (n <= window + d_max)
    throw std::invalid_argument("rolling_adf: series shorter than window");

  RollingAdfScan scan;
  scan.window = window;
  scan.d_max = d_max;
  scan.nonstandard_window = !(window == 12 || window == 48 || window == 96);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> z;
  for (int t = window; t <= n; ++t) {
    std::array<double, 3> pv = {nan, nan, nan};
    int d_star = d_max;
    z.assign(series.begin() + (t - window), series.begin() + t);
    for (int d = 0; d <= d_max; ++d) {
      if (d > 0)
        for (size_t i = z.size() - 1; i >= 1; --i) z[i] -= z[i - 1];
      std::span<const double> win(z.data() + d, z.size() - d);
      double p;
      try {
        p = adf_test(win).p_value;
      } catch (const DegenerateInputError&) {
        // A constant window is trivially stationary at this level.
        d_star = d;
        break;
      }
      pv[d] = p;
      if (p < kAdfCritical) {
        d_star = d;
        break;
      }
    }
    scan.t.push_back(t);
    scan.p.push_back(pv);
    scan.d_star.push_back(d_star);
  }
  return scan;
}

std::string adf_scan_to_csv(const RollingAdfScan& scan) {
  CsvWriter w({"t", "w", "d", "p_value", "d_star"});
  for (size_t k = 0; k < scan.t.size(); ++k)
    for (int d = 0; d <= scan.d_max; ++d) {
      if (std::isnan(scan.p[k][d]) && d > scan.d_star[k]) continue;
      w.add_row({std::to_string(scan.t[k]), std::to_string(scan.window),
                 std::to_string(d), fmt_double(scan.p[k][d]),
                 std::to_string(scan.d_star[k])});
    }
  return w.to_string();
}

} // namespace flowcast
