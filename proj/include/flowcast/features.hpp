#pragma once

#include "flowcast/market_data.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowcast {

struct UndefinedFeatureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FeatureVector {
  double oib_mean = 0.0; // in [-1, 1]
  double ofi_mean = 0.0;
  double oib_pscore = 0.5; // in [0, 1]
  double ofi_pscore = 0.5; // in [0, 1]
};

// Standard normal CDF via erfc; absolute accuracy well below 1e-12.
double normal_cdf(double x);

// Order imbalance (BQ - AQ) / (BQ + AQ). Throws UndefinedFeatureError
// when both quantities are zero.
double oib(const TickRecord& tick);

// Order flow imbalance between consecutive same-session entries:
//   BQ_s 1[BP_s >= BP_{s-1}] - BQ_{s-1} 1[BP_s <= BP_{s-1}]
// + AQ_{s-1} 1[AP_s <= AP_{s-1}] - AQ_s 1[AP_s >= AP_{s-1}]
// Indicators are inclusive, so equal prices fire both terms on that side.
double ofi(const TickRecord& prev, const TickRecord& curr);

// Mean and p-score = Phi(mean / sd) of one bracket's per-entry values,
// with sample (n-1) sd. At sd = 0 the p-score takes the limit value:
// 0.5 when mean = 0, 1 when mean > 0, 0 when mean < 0.
double pscore(std::span<const double> values);
double mean_of(std::span<const double> values);

// One bracket's feature vector from its per-entry OIB and OFI values.
// Empty spans fall back to `carry` (previous bracket's vector), per the
// carry-forward rule for empty brackets.
FeatureVector bracket_features(std::span<const double> oib_values,
                               std::span<const double> ofi_values,
                               const FeatureVector& carry);

// Fills series.x for every bracket from the tick stream the series was
// built on. OFI pairs never straddle a session boundary.
void compute_features(const std::vector<TickRecord>& ticks,
                      BracketSeries& series);

std::string features_to_csv(const BracketSeries& series);

} // namespace flowcast
