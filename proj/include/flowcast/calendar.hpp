#pragma once

#include <string>
#include <string_view>

namespace flowcast {

// Trading clock: two sessions per day, 24 five-minute brackets each.
// A bracket labelled by its end time HHMM covers seconds (HHMM-5:01 ... HHMM:00],
// e.g. label 0935 covers 09:30:01 through 09:35:00.
inline constexpr int kMorningOpen = 9 * 3600 + 30 * 60;   // 09:30:00
inline constexpr int kMorningClose = 11 * 3600 + 30 * 60; // 11:30:00
inline constexpr int kAfternoonOpen = 13 * 3600;          // 13:00:00
inline constexpr int kAfternoonClose = 15 * 3600;         // 15:00:00
inline constexpr int kBracketSeconds = 300;
inline constexpr int kBracketsPerSession = 24;
inline constexpr int kBracketsPerDay = 2 * kBracketsPerSession;

enum class Session { morning, afternoon };

struct CivilDate {
  int y = 1970;
  int m = 1;
  int d = 1;
};

// Days since 1970-01-01 (proleptic Gregorian).
long days_from_civil(const CivilDate& cd);
CivilDate civil_from_days(long z);

struct Timestamp {
  long day = 0; // days since epoch
  int sec = 0;  // second of day

  friend bool operator==(const Timestamp& a, const Timestamp& b) {
    return a.day == b.day && a.sec == b.sec;
  }
  friend bool operator<(const Timestamp& a, const Timestamp& b) {
    return a.day != b.day ? a.day < b.day : a.sec < b.sec;
  }
  friend bool operator<=(const Timestamp& a, const Timestamp& b) {
    return a < b || a == b;
  }
};

// True iff sec falls inside bracket coverage of either session:
// open < sec <= close.
bool in_session_hours(int sec);
Session session_of(int sec);           // pre: in_session_hours(sec)
int bracket_index_in_session(int sec); // 0..23, pre: in_session_hours(sec)
int session_open(Session s);
int bracket_label(Session s, int idx); // HHMM of bracket end

std::string format_date(long day);                  // YYYY-MM-DD
std::string format_timestamp(const Timestamp& ts);  // YYYY-MM-DD HH:MM:SS
// Strict "YYYY-MM-DD HH:MM:SS"; returns false on malformed input.
bool parse_timestamp(std::string_view text, Timestamp& out);
bool parse_date(std::string_view text, long& day_out);

} // namespace flowcast
