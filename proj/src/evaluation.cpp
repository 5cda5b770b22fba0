#include "flowcast/evaluation.hpp"

#include "flowcast/csvio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace flowcast {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int sign(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }
} // namespace

std::pair<double, double> mse_mae(std::span<const double> forecasts,
                                  std::span<const double> actuals) {
  if (forecasts.empty() || forecasts.size() != actuals.size())
    throw std::invalid_argument("mse_mae: empty or misaligned index set");
  double se = 0.0, ae = 0.0;
  for (size_t i = 0; i < forecasts.size(); ++i) {
    if (!std::isfinite(forecasts[i]) || !std::isfinite(actuals[i]))
      throw std::invalid_argument("mse_mae: missing entries are not allowed");
    const double e = forecasts[i] - actuals[i];
    se += e * e;
    ae += std::abs(e);
  }
  const double n = static_cast<double>(forecasts.size());
  return {se / n, ae / n};
}

double session_pl(std::span<const double> prices,
                  std::span<const double> forecasts, bool baseline) {
  if (prices.size() != static_cast<size_t>(kEligiblePerSession))
    throw std::invalid_argument("session_pl: need 18 eligible observations");
  if (baseline) return (prices[17] - prices[0]) / prices[0];
  if (forecasts.size() != static_cast<size_t>(kEligiblePerSession - 1))
    throw std::invalid_argument("session_pl: need 17 in-session forecasts");
  double pl = 0.0;
  for (int i = 0; i < kEligiblePerSession - 1; ++i) {
    if (std::isnan(forecasts[i])) continue; // missing forecast: no trade
    const double alpha = forecasts[i] - prices[i];
    pl += sign(alpha) * (prices[i + 1] - prices[i]) / prices[i];
  }
  return pl;
}

double sharpe(std::span<const double> day_pl) {
  if (day_pl.size() < 2)
    throw std::invalid_argument("sharpe: need at least 2 daily PLs");
  double mean = 0.0;
  for (double v : day_pl) mean += v;
  mean /= static_cast<double>(day_pl.size());
  double ss = 0.0;
  for (double v : day_pl) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(day_pl.size() - 1));
  if (sd == 0.0)
    throw UndefinedSharpeError("sharpe: zero dispersion of daily PL");
  return std::sqrt(252.0) * mean / sd;
}

PerfReport evaluate_forecasts(const BracketSeries& series,
                              const std::vector<int>& times,
                              const std::vector<double>& forecasts,
                              const std::string& model_code, bool baseline) {
  if (times.size() != forecasts.size())
    throw std::invalid_argument("evaluate_forecasts: misaligned inputs");
  PerfReport rep;
  rep.model_code = model_code;

  std::map<int, double> by_origin;
  for (size_t i = 0; i < times.size(); ++i) by_origin[times[i]] = forecasts[i];

  if (!baseline) {
    std::vector<double> fc, actual;
    for (size_t i = 0; i < times.size(); ++i) {
      const int t = times[i];
      if (std::isnan(forecasts[i])) continue;
      if (t + 1 >= static_cast<int>(series.size())) continue;
      fc.push_back(forecasts[i]);
      actual.push_back(series.brackets[t + 1].y);
    }
    rep.n_forecasts = static_cast<long>(fc.size());
    if (!fc.empty()) {
      const auto [mse, mae] = mse_mae(fc, actual);
      rep.mse = mse;
      rep.mae = mae;
    } else {
      rep.mse = kNaN;
      rep.mae = kNaN;
    }
  } else {
    rep.mse = kNaN;
    rep.mae = kNaN;
  }

  // Session PL needs forecasts at the 17 trade origins (brackets 7..23 of
  // the session); a day contributes only when both sessions are covered.
  struct DayAcc {
    double pl = 0.0;
    int sessions = 0;
  };
  std::map<long, DayAcc> day_acc;
  const int B = static_cast<int>(series.size());
  for (int s0 = 0; s0 + kBracketsPerSession <= B; s0 += kBracketsPerSession) {
    bool covered = true;
    std::vector<double> prices(kEligiblePerSession);
    std::vector<double> fc(kEligiblePerSession - 1, kNaN);
    for (int i = 0; i < kEligiblePerSession; ++i)
      prices[i] = series.brackets[s0 + 6 + i].y;
    for (int i = 0; i < kEligiblePerSession - 1; ++i) {
      const int origin = s0 + 6 + i;
      const auto it = by_origin.find(origin);
      if (it == by_origin.end()) {
        covered = false;
        break;
      }
      fc[i] = it->second;
    }
    if (!covered) continue; // baseline too: keep the same session window
    const double pl = session_pl(prices, fc, baseline);
    DayAcc& acc = day_acc[series.brackets[s0].day];
    acc.pl += pl;
    acc.sessions += 1;
  }

  double cum = 0.0;
  for (const auto& [day, acc] : day_acc) {
    if (acc.sessions != 2) continue; // incomplete day
    rep.day_dates.push_back(day);
    rep.day_pl.push_back(acc.pl);
    cum += acc.pl;
    rep.cum_pl.push_back(cum);
  }

  if (!rep.day_pl.empty()) {
    double mean = 0.0, mn = rep.day_pl[0], mx = rep.day_pl[0];
    for (double v : rep.day_pl) {
      mean += v;
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    mean /= static_cast<double>(rep.day_pl.size());
    double ss = 0.0;
    for (double v : rep.day_pl) ss += (v - mean) * (v - mean);
    rep.mean_pl = mean;
    rep.min_pl = mn;
    rep.max_pl = mx;
    rep.std_pl = rep.day_pl.size() >= 2
                     ? std::sqrt(ss / static_cast<double>(rep.day_pl.size() - 1))
                     : 0.0;
  }
  try {
    rep.sr = sharpe(rep.day_pl);
    rep.sr_defined = true;
  } catch (const std::exception&) {
    rep.sr = kNaN;
    rep.sr_defined = false;
  }
  return rep;
}

std::string reports_to_csv(const std::vector<PerfReport>& reports) {
  CsvWriter w({"model_code", "mse", "mae", "sr", "mean_pl", "std_pl", "min_pl",
               "max_pl"});
  for (const PerfReport& r : reports)
    w.add_row({r.model_code, fmt_double(r.mse), fmt_double(r.mae),
               fmt_double(r.sr), fmt_double(r.mean_pl), fmt_double(r.std_pl),
               fmt_double(r.min_pl), fmt_double(r.max_pl)});
  return w.to_string();
}

std::string cum_pl_to_csv(const std::vector<PerfReport>& reports) {
  CsvWriter w({"date", "model_code", "cum_pl"});
  for (const PerfReport& r : reports)
    for (size_t i = 0; i < r.cum_pl.size(); ++i)
      w.add_row({format_date(r.day_dates[i]), r.model_code,
                 fmt_double(r.cum_pl[i])});
  return w.to_string();
}

} // namespace flowcast
