#include "flowcast/calendar.hpp"

#include <cstdio>

namespace flowcast {

// Howard Hinnant's civil-days algorithms.
long days_from_civil(const CivilDate& cd) {
  int y = cd.y;
  const int m = cd.m;
  const int d = cd.d;
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

CivilDate civil_from_days(long z) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
                   static_cast<int>(d)};
}

bool in_session_hours(int sec) {
  return (sec > kMorningOpen && sec <= kMorningClose) ||
         (sec > kAfternoonOpen && sec <= kAfternoonClose);
}

Session session_of(int sec) {
  return sec <= kMorningClose ? Session::morning : Session::afternoon;
}

int session_open(Session s) {
  return s == Session::morning ? kMorningOpen : kAfternoonOpen;
}

int bracket_index_in_session(int sec) {
  const int open = session_open(session_of(sec));
  return (sec - open - 1) / kBracketSeconds;
}

int bracket_label(Session s, int idx) {
  const int end_sec = session_open(s) + (idx + 1) * kBracketSeconds;
  return (end_sec / 3600) * 100 + (end_sec % 3600) / 60;
}

std::string format_date(long day) {
  const CivilDate cd = civil_from_days(day);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", cd.y, cd.m, cd.d);
  return buf;
}

std::string format_timestamp(const Timestamp& ts) {
  const CivilDate cd = civil_from_days(ts.day);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", cd.y, cd.m,
                cd.d, ts.sec / 3600, (ts.sec / 60) % 60, ts.sec % 60);
  return buf;
}

bool parse_date(std::string_view text, long& day_out) {
  int y, m, d;
  if (text.size() != 10) return false;
  if (std::sscanf(text.data(), "%4d-%2d-%2d", &y, &m, &d) != 3) return false;
  if (m < 1 || m > 12 || d < 1 || d > 31) return false;
  day_out = days_from_civil(CivilDate{y, m, d});
  return true;
}

bool parse_timestamp(std::string_view text, Timestamp& out) {
  if (text.size() != 19 || text[10] != ' ') return false;
  int y, m, d, hh, mm, ss;
  if (std::sscanf(text.data(), "%4d-%2d-%2d %2d:%2d:%2d", &y, &m, &d, &hh, &mm,
                  &ss) != 6)
    return false;
  if (m < 1 || m > 12 || d < 1 || d > 31) return false;
  if (hh < 0 || hh > 23 || mm < 0 || mm > 59 || ss < 0 || ss > 59) return false;
  out.day = days_from_civil(CivilDate{y, m, d});
  out.sec = hh * 3600 + mm * 60 + ss;
  return true;
}

} // namespace flowcast
