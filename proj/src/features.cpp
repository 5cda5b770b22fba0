#include "flowcast/features.hpp"

#include "flowcast/csvio.hpp"

#include <cmath>
#include <cstdio>

namespace flowcast {

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / 1.4142135623730951);
}

double oib(const TickRecord& tick) {
  const double denom = static_cast<double>(tick.bid_qty + tick.ask_qty);
  if (denom <= 0.0)
    throw UndefinedFeatureError("oib: zero total best-quote quantity");
  return static_cast<double>(tick.bid_qty - tick.ask_qty) / denom;
}

double ofi(const TickRecord& prev, const TickRecord& curr) {
  const double bq = static_cast<double>(curr.bid_qty);
  const double bq_prev = static_cast<double>(prev.bid_qty);
  const double aq = static_cast<double>(curr.ask_qty);
  const double aq_prev = static_cast<double>(prev.ask_qty);
  double e = 0.0;
  if (curr.bid_price >= prev.bid_price) e += bq;
  if (curr.bid_price <= prev.bid_price) e -= bq_prev;
  if (curr.ask_price <= prev.ask_price) e += aq_prev;
  if (curr.ask_price >= prev.ask_price) e -= aq;
  return e;
}

double mean_of(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double pscore(std::span<const double> values) {
  const double m = mean_of(values);
  double sd = 0.0;
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  if (sd == 0.0) return m > 0.0 ? 1.0 : (m < 0.0 ? 0.0 : 0.5);
  return normal_cdf(m / sd);
}

FeatureVector bracket_features(std::span<const double> oib_values,
                               std::span<const double> ofi_values,
                               const FeatureVector& carry) {
  FeatureVector f = carry;
  if (!oib_values.empty()) {
    f.oib_mean = mean_of(oib_values);
    f.oib_pscore = pscore(oib_values);
  }
  if (!ofi_values.empty()) {
    f.ofi_mean = mean_of(ofi_values);
    f.ofi_pscore = pscore(ofi_values);
  }
  return f;
}

void compute_features(const std::vector<TickRecord>& ticks,
                      BracketSeries& series) {
  series.x.assign(series.size(), {0.0, 0.0, 0.0, 0.0});
  // Neutral starting vector: carry-forward has nothing to carry before the
  // first populated bracket.
  FeatureVector carry{0.0, 0.0, 0.5, 0.5};

  std::vector<double> oib_vals, ofi_vals;
  for (size_t i = 0; i < series.size(); ++i) {
    const Bracket& b = series.brackets[i];
    oib_vals.clear();
    ofi_vals.clear();
    for (long k = b.tick_begin; k < b.tick_end; ++k) {
      const TickRecord& t = ticks[static_cast<size_t>(k)];
      if (t.bid_qty + t.ask_qty > 0) oib_vals.push_back(oib(t));
      if (k > 0) {
        const TickRecord& p = ticks[static_cast<size_t>(k - 1)];
        const bool same_session = p.ts.day == t.ts.day &&
                                  session_of(p.ts.sec) == session_of(t.ts.sec);
        if (same_session) ofi_vals.push_back(ofi(p, t));
      }
    }
    carry = bracket_features(oib_vals, ofi_vals, carry);
    series.x[i] = {carry.oib_mean, carry.ofi_mean, carry.oib_pscore,
                   carry.ofi_pscore};
  }
}

std::string features_to_csv(const BracketSeries& series) {
  CsvWriter w({"date", "label", "oib_mean", "ofi_mean", "oib_p", "ofi_p"});
  for (size_t i = 0; i < series.size(); ++i) {
    const Bracket& b = series.brackets[i];
    char label[8];
    std::snprintf(label, sizeof(label), "%04d", b.label);
    w.add_row({format_date(b.day), label, fmt_double(series.x[i][0]),
               fmt_double(series.x[i][1]), fmt_double(series.x[i][2]),
               fmt_double(series.x[i][3])});
  }
  return w.to_string();
}

} // namespace flowcast
