#include "flowcast/market_data.hpp"

#include "flowcast/csvio.hpp"
#include "flowcast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <sstream>

namespace flowcast {

namespace {

bool parse_long(const std::string& s, long& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtol(s.c_str(), &end, 10);
  return end && *end == '\0';
}

bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end && *end == '\0' && std::isfinite(out);
}

} // namespace

ParseResult parse_ticks(std::istream& in, bool cumulative_volume) {
  ParseResult res;
  std::string line;
  size_t line_no = 0;
  bool header_seen = false;
  Timestamp prev_ts{-1, 0};
  bool have_prev = false;

  // Per-day running volume for cumulative feeds.
  long cum_day = -1;
  long cum_prev = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("ts,", 0) == 0) continue; // header row
    }
    const auto cells = split_csv_line(line);
    if (cells.size() != 7) throw ParseError(line_no, "expected 7 fields");

    TickRecord t;
    if (!parse_timestamp(cells[0], t.ts))
      throw ParseError(line_no, "bad timestamp '" + cells[0] + "'");
    if (!parse_real(cells[1], t.last_price) || t.last_price <= 0.0)
      throw ParseError(line_no, "last price must be positive");
    if (!parse_long(cells[2], t.volume) || t.volume < 0)
      throw ParseError(line_no, "volume must be a non-negative integer");
    if (!parse_real(cells[3], t.bid_price) || t.bid_price <= 0.0)
      throw ParseError(line_no, "bid price must be positive");
    if (!parse_long(cells[4], t.bid_qty) || t.bid_qty < 0)
      throw ParseError(line_no, "bid qty must be a non-negative integer");
    if (!parse_real(cells[5], t.ask_price) || t.ask_price <= 0.0)
      throw ParseError(line_no, "ask price must be positive");
    if (!parse_long(cells[6], t.ask_qty) || t.ask_qty < 0)
      throw ParseError(line_no, "ask qty must be a non-negative integer");
    if (t.bid_qty > 0 && t.ask_qty > 0 && t.ask_price < t.bid_price)
      throw ParseError(line_no, "crossed book: ask price below bid price");

    if (have_prev && t.ts < prev_ts)
      throw ParseError(line_no, "timestamps are not non-decreasing");
    prev_ts = t.ts;
    have_prev = true;

    if (cumulative_volume) {
      if (t.ts.day != cum_day) {
        cum_day = t.ts.day;
        cum_prev = 0;
      }
      const long delta = t.volume - cum_prev;
      if (delta < 0)
        throw ParseError(line_no, "cumulative volume decreased within a day");
      cum_prev = t.volume;
      t.volume = delta;
    }

    if (!in_session_hours(t.ts.sec)) {
      ++res.dropped_out_of_session;
      continue;
    }
    res.ticks.push_back(t);
  }
  return res;
}

BracketSeries bracketize(const std::vector<TickRecord>& ticks) {
  if (ticks.empty()) throw std::invalid_argument("bracketize: no ticks");
  for (size_t i = 1; i < ticks.size(); ++i)
    if (ticks[i].ts < ticks[i - 1].ts)
      throw std::invalid_argument("bracketize: ticks must be time-sorted");

  struct Acc {
    double pv = 0.0;
    long vol = 0;
    long count = 0;
    long begin = -1;
    long end = -1;
  };
  // (day, session, bracket index) -> accumulator; days iterate in order.
  std::map<long, std::array<std::array<Acc, kBracketsPerSession>, 2>> days;

  for (size_t i = 0; i < ticks.size(); ++i) {
    const TickRecord& t = ticks[i];
    if (!in_session_hours(t.ts.sec))
      throw std::invalid_argument("bracketize: tick outside session hours");
    const Session s = session_of(t.ts.sec);
    const int b = bracket_index_in_session(t.ts.sec);
    Acc& a = days[t.ts.day][s == Session::morning ? 0 : 1][b];
    a.pv += t.last_price * static_cast<double>(t.volume);
    a.vol += t.volume;
    a.count += 1;
    if (a.begin < 0) a.begin = static_cast<long>(i);
    a.end = static_cast<long>(i) + 1;
  }

  BracketSeries series;
  series.brackets.reserve(days.size() * kBracketsPerDay);
  double prev_y = 0.0;
  bool have_prev = false;

  for (const auto& [day, sessions] : days) {
    for (int si = 0; si < 2; ++si) {
      const Session s = si == 0 ? Session::morning : Session::afternoon;
      long session_ticks = 0;
      for (const Acc& a : sessions[si]) session_ticks += a.count;
      if (session_ticks == 0) {
        std::ostringstream msg;
        msg << "bracketize: no ticks in " << format_date(day)
            << (si == 0 ? " morning" : " afternoon") << " session";
        throw std::runtime_error(msg.str());
      }
      for (int b = 0; b < kBracketsPerSession; ++b) {
        const Acc& a = sessions[si][b];
        Bracket br;
        br.day = day;
        br.session = s;
        br.label = bracket_label(s, b);
        br.tick_count = a.count;
        br.tick_begin = a.begin < 0 ? 0 : a.begin;
        br.tick_end = a.end < 0 ? 0 : a.end;
        br.is_session_start = (b == 0);
        br.gap = b != 0 ? GapKind::none
                        : (s == Session::morning ? GapKind::day_gap
                                                 : GapKind::lunch_gap);
        br.forecast_eligible = (b >= 6);
        if (a.vol > 0) {
          br.y = a.pv / static_cast<double>(a.vol);
        } else {
          // Zero traded volume: carry the previous bracket's VWM forward.
          if (!have_prev)
            throw std::runtime_error(
                "bracketize: first bracket has zero traded volume");
          br.y = prev_y;
        }
        prev_y = br.y;
        have_prev = true;
        series.brackets.push_back(br);
      }
    }
  }
  series.x.assign(series.brackets.size(), {0.0, 0.0, 0.0, 0.0});
  return series;
}

namespace {

GroupStats summarize(const std::vector<double>& v) {
  GroupStats g;
  g.count = static_cast<long>(v.size());
  if (v.empty()) return g;
  double sum = 0.0;
  g.min = v[0];
  g.max = v[0];
  for (double x : v) {
    sum += x;
    g.min = std::min(g.min, x);
    g.max = std::max(g.max, x);
  }
  g.mean = sum / static_cast<double>(v.size());
  if (v.size() >= 2) {
    double ss = 0.0;
    for (double x : v) ss += (x - g.mean) * (x - g.mean);
    g.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return g;
}

} // namespace

GapStats gap_stats(const BracketSeries& series) {
  if (series.size() < 2 * kBracketsPerSession)
    throw std::invalid_argument("gap_stats: need at least 2 sessions");
  std::vector<double> day, lunch, rest;
  for (size_t i = 1; i < series.size(); ++i) {
    const double diff = series.brackets[i].y - series.brackets[i - 1].y;
    switch (series.brackets[i].gap) {
      case GapKind::day_gap: day.push_back(diff); break;
      case GapKind::lunch_gap: lunch.push_back(diff); break;
      case GapKind::none: rest.push_back(diff); break;
    }
  }
  return GapStats{summarize(day), summarize(lunch), summarize(rest)};
}

std::vector<TickRecord> synth_ticks(uint64_t seed, int days,
                                    const SynthParams& params) {
  if (days < 1) throw std::invalid_argument("synth_ticks: days must be >= 1");
  if (params.spread <= 0.0)
    throw std::invalid_argument("synth_ticks: spread must be positive");
  if (params.day_jump_scale <= 0.0 || params.lunch_jump_scale <= 0.0)
    throw std::invalid_argument("synth_ticks: jump scale must be positive");
  if (params.tick_prob <= 0.0 || params.tick_prob > 1.0)
    throw std::invalid_argument("synth_ticks: tick_prob must be in (0,1]");

  const long start_day =
      params.start_day != 0 ? params.start_day
                            : days_from_civil(CivilDate{2017, 11, 10});

  Rng rng(seed);
  std::vector<TickRecord> out;
  const double expected_per_bracket = kBracketSeconds * params.tick_prob;
  const double bracket_sigma =
      params.tick_sigma * std::sqrt(expected_per_bracket);
  double price = params.base_price;

  for (int d = 0; d < days; ++d) {
    const long day = start_day + d;
    if (d > 0) price += params.day_jump_scale * bracket_sigma * rng.normal();
    for (int si = 0; si < 2; ++si) {
      const Session s = si == 0 ? Session::morning : Session::afternoon;
      if (si == 1)
        price += params.lunch_jump_scale * bracket_sigma * rng.normal();
      const int open = session_open(s);
      const int close = s == Session::morning ? kMorningClose : kAfternoonClose;
      for (int sec = open + 1; sec <= close; ++sec) {
        if (rng.uniform() >= params.tick_prob) continue;
        price += params.tick_sigma * rng.normal();
        price = std::max(price, 1.0);
        TickRecord t;
        t.ts = Timestamp{day, sec};
        t.last_price = price;
        t.volume = 1 + rng.uniform_int(0, params.vol_max - 1);
        t.bid_price = std::max(price - params.spread / 2.0, 0.01);
        t.ask_price = price + params.spread / 2.0;
        t.bid_qty = 1 + rng.uniform_int(0, params.qty_max - 1);
        t.ask_qty = 1 + rng.uniform_int(0, params.qty_max - 1);
        out.push_back(t);
      }
    }
  }
  return out;
}

namespace {

// Labels print in HHMM form, zero-padded: 0935 rather than 935.
std::string label_text(int label) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%04d", label);
  return buf;
}

} // namespace

std::string ticks_to_csv(const std::vector<TickRecord>& ticks) {
  CsvWriter w({"ts", "last", "vol", "bp", "bq", "ap", "aq"});
  for (const TickRecord& t : ticks)
    w.add_row({format_timestamp(t.ts), fmt_double(t.last_price),
               std::to_string(t.volume), fmt_double(t.bid_price),
               std::to_string(t.bid_qty), fmt_double(t.ask_price),
               std::to_string(t.ask_qty)});
  return w.to_string();
}

std::string brackets_to_csv(const BracketSeries& series) {
  CsvWriter w({"date", "label", "y", "tick_count", "gap", "eligible"});
  for (const Bracket& b : series.brackets) {
    const char* gap = b.gap == GapKind::none
                          ? "none"
                          : (b.gap == GapKind::day_gap ? "day_gap" : "lunch_gap");
    w.add_row({format_date(b.day), label_text(b.label), fmt_double(b.y),
               std::to_string(b.tick_count), gap,
               b.forecast_eligible ? "1" : "0"});
  }
  return w.to_string();
}

} // namespace flowcast
