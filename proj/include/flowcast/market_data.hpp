#pragma once

#include "flowcast/calendar.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowcast {

struct TickRecord {
  Timestamp ts;
  double last_price = 0.0;
  long volume = 0; // per-entry traded volume
  double bid_price = 0.0;
  long bid_qty = 0;
  double ask_price = 0.0;
  long ask_qty = 0;
};

enum class GapKind { none, day_gap, lunch_gap };

struct Bracket {
  long day = 0;
  int label = 0; // HHMM of bracket end
  Session session = Session::morning;
  double y = 0.0; // volume-weighted mean price
  long tick_count = 0;
  bool is_session_start = false;
  GapKind gap = GapKind::none;
  bool forecast_eligible = false;
  // Member ticks occupy [tick_begin, tick_end) in the source tick vector.
  long tick_begin = 0;
  long tick_end = 0;
};

// Ordered bracket sequence plus the aligned 4-dim feature rows
// (oib_mean, ofi_mean, oib_pscore, ofi_pscore), filled by the features
// module. First 6 brackets of every session are not forecast-eligible.
struct BracketSeries {
  std::vector<Bracket> brackets;
  std::vector<std::array<double, 4>> x;

  size_t size() const { return brackets.size(); }
};

struct ParseError : std::runtime_error {
  size_t line;
  ParseError(size_t line_no, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + what),
        line(line_no) {}
};

struct ParseResult {
  std::vector<TickRecord> ticks;
  long dropped_out_of_session = 0;
};

// Reads the tick CSV (header `ts,last,vol,bp,bq,ap,aq`). Rows outside
// session hours are dropped and counted; a timestamp earlier than its
// predecessor is a hard error. With cumulative_volume the feed's running
// per-day volume column is first-differenced into per-entry volumes.
ParseResult parse_ticks(std::istream& in, bool cumulative_volume = false);

BracketSeries bracketize(const std::vector<TickRecord>& ticks);

struct GroupStats {
  long count = 0;
  double mean = 0.0;
  double stddev = 0.0; // sample sd; 0 when count < 2
  double min = 0.0;
  double max = 0.0;
};

struct GapStats {
  GroupStats day_gap;
  GroupStats lunch_gap;
  GroupStats rest;
};

// Consecutive-VWM differences grouped by overnight / lunch / within-session.
GapStats gap_stats(const BracketSeries& series);

struct SynthParams {
  long start_day = 0; // 0 = default start date below
  double base_price = 4000.0;
  double tick_sigma = 0.02;      // per-tick random-walk sd
  double day_jump_scale = 3.0;   // overnight jump, in one-bracket sds
  double lunch_jump_scale = 1.0; // midday jump, same units
  double spread = 0.4;
  double tick_prob = 0.7; // chance of an entry in any given second
  int qty_max = 50;
  int vol_max = 5;
};

// Deterministic synthetic tick stream over consecutive calendar days.
std::vector<TickRecord> synth_ticks(uint64_t seed, int days,
                                    const SynthParams& params = {});

std::string ticks_to_csv(const std::vector<TickRecord>& ticks);
std::string brackets_to_csv(const BracketSeries& series);

} // namespace flowcast
