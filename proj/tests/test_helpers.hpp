#pragma once

#include "flowcast/market_data.hpp"
#include "flowcast/rng.hpp"

#include <vector>

namespace flowcast::testing {

// Bare series for estimator-level tests: every bracket eligible, no gaps.
inline BracketSeries series_from_y(const std::vector<double>& y) {
  BracketSeries s;
  s.brackets.resize(y.size());
  s.x.assign(y.size(), {0.0, 0.0, 0.0, 0.0});
  for (size_t i = 0; i < y.size(); ++i) {
    s.brackets[i].y = y[i];
    s.brackets[i].forecast_eligible = true;
  }
  return s;
}

// Structured series: per 24-bracket session, session-start gap flags and
// the 6-bracket forecast exemption, as bracketize would produce.
inline BracketSeries session_series(const std::vector<double>& y,
                                    long start_day = 17500) {
  BracketSeries s;
  s.brackets.resize(y.size());
  s.x.assign(y.size(), {0.0, 0.0, 0.0, 0.0});
  for (size_t i = 0; i < y.size(); ++i) {
    Bracket& b = s.brackets[i];
    const size_t in_day = i % kBracketsPerDay;
    const bool morning = in_day < kBracketsPerSession;
    const size_t in_session = in_day % kBracketsPerSession;
    b.day = start_day + static_cast<long>(i / kBracketsPerDay);
    b.session = morning ? Session::morning : Session::afternoon;
    b.label = bracket_label(b.session, static_cast<int>(in_session));
    b.y = y[i];
    b.tick_count = 1;
    b.is_session_start = in_session == 0;
    b.gap = in_session != 0 ? GapKind::none
                            : (morning ? GapKind::day_gap : GapKind::lunch_gap);
    b.forecast_eligible = in_session >= 6;
  }
  return s;
}

inline std::vector<double> random_walk(uint64_t seed, int n, double sigma = 1.0,
                                       double level = 100.0) {
  Rng rng(seed);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    level += sigma * rng.normal();
    y[i] = level;
  }
  return y;
}

inline TickRecord tick(long day, int sec, double last, long vol, double bp,
                       long bq, double ap, long aq) {
  TickRecord t;
  t.ts = Timestamp{day, sec};
  t.last_price = last;
  t.volume = vol;
  t.bid_price = bp;
  t.bid_qty = bq;
  t.ask_price = ap;
  t.ask_qty = aq;
  return t;
}

} // namespace flowcast::testing
