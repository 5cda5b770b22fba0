#pragma once

#include "flowcast/market_data.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace flowcast {

struct UndefinedSharpeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mean squared / absolute one-step forecast error over an aligned,
// complete index set. Throws on empty or misaligned inputs.
std::pair<double, double> mse_mae(std::span<const double> forecasts,
                                  std::span<const double> actuals);

// Session PL over the 18 eligible observations of one session:
// prices[0..17] are the eligible VWMs, forecasts[i] targets prices[i+1].
// Trades run over the 17 consecutive pairs with sign(alpha) positions,
// sign(0) = 0; a NaN forecast is a no-trade. Baseline mode ignores the
// forecasts and buys at the first eligible price, selling at the last.
double session_pl(std::span<const double> prices,
                  std::span<const double> forecasts, bool baseline = false);

inline constexpr int kEligiblePerSession = 18;

// Annualized Sharpe ratio sqrt(252) * mean / sd over daily PLs, sample sd.
// Throws UndefinedSharpeError when the sd is zero.
double sharpe(std::span<const double> day_pl);

struct PerfReport {
  std::string model_code;
  double mse = 0.0;
  double mae = 0.0;
  double sr = 0.0;
  bool sr_defined = false;
  long n_forecasts = 0;
  std::vector<long> day_dates;
  std::vector<double> day_pl;
  std::vector<double> cum_pl;
  double mean_pl = 0.0;
  double std_pl = 0.0;
  double min_pl = 0.0;
  double max_pl = 0.0;
};

// Evaluates a forecast stream (times[i] is the origin bracket of
// forecasts[i]; NaN = missing). Only days whose two sessions are fully
// covered by `times` contribute to the PL series; MSE/MAE run over every
// present forecast. Baseline mode scores buy-and-hold instead.
PerfReport evaluate_forecasts(const BracketSeries& series,
                              const std::vector<int>& times,
                              const std::vector<double>& forecasts,
                              const std::string& model_code,
                              bool baseline = false);

std::string reports_to_csv(const std::vector<PerfReport>& reports);
std::string cum_pl_to_csv(const std::vector<PerfReport>& reports);

} // namespace flowcast
