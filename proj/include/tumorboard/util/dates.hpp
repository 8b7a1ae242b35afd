#pragma once

// Calendar arithmetic and ISO-8601 parsing/formatting. All timestamps are
// normalized to UTC on parse. Civil-date algorithms follow the classic
// proleptic Gregorian day-count formulation.

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tumorboard::dates {

struct Civil {
  int year = 1970;
  unsigned month = 1;  // 1..12
  unsigned day = 1;    // 1..31
};

// Days since 1970-01-01.
inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline Civil civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return Civil{static_cast<int>(y + (m <= 2)), m, d};
}

// UTC timestamp with second resolution.
struct Timestamp {
  std::int64_t epoch_seconds = 0;

  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;

  std::int64_t day() const {
    // floor division for pre-1970 values
    std::int64_t s = epoch_seconds;
    return s >= 0 ? s / 86400 : (s - 86399) / 86400;
  }
};

struct Date {
  std::int64_t days = 0;  // days since 1970-01-01

  friend auto operator<=>(const Date&, const Date&) = default;

  Date add_days(std::int64_t n) const { return Date{days + n}; }
  Timestamp start_of_day() const { return Timestamp{days * 86400}; }
  Timestamp end_of_day() const { return Timestamp{days * 86400 + 86399}; }
};

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

inline int parse_int(std::string_view s, std::size_t pos, std::size_t len) {
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (i >= s.size() || !is_digit(s[i])) throw std::invalid_argument("bad date field");
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

// Accepts YYYY-MM-DD.
inline Date parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-')
    throw std::invalid_argument("date must be YYYY-MM-DD: " + std::string(s));
  int y = parse_int(s, 0, 4);
  int m = parse_int(s, 5, 2);
  int d = parse_int(s, 8, 2);
  if (m < 1 || m > 12 || d < 1 || d > 31) throw std::invalid_argument("date out of range: " + std::string(s));
  return Date{days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d))};
}

// Accepts YYYY-MM-DD, YYYY-MM-DDTHH:MM[:SS][Z|±HH:MM|±HHMM].
// A bare date means midnight UTC. Offsets are folded into UTC.
inline Timestamp parse_timestamp(std::string_view s) {
  if (s.size() == 10) return parse_date(s).start_of_day();
  if (s.size() < 16 || (s[10] != 'T' && s[10] != ' '))
    throw std::invalid_argument("bad timestamp: " + std::string(s));
  Date d = parse_date(s.substr(0, 10));
  int hh = parse_int(s, 11, 2);
  int mm = parse_int(s, 14, 2);
  if (s[13] != ':' || hh > 23 || mm > 59) throw std::invalid_argument("bad time: " + std::string(s));
  std::size_t pos = 16;
  int ss = 0;
  if (pos < s.size() && s[pos] == ':') {
    ss = parse_int(s, pos + 1, 2);
    if (ss > 60) throw std::invalid_argument("bad seconds: " + std::string(s));
    pos += 3;
  }
  std::int64_t t = d.days * 86400 + hh * 3600 + mm * 60 + ss;
  if (pos < s.size()) {
    char c = s[pos];
    if (c == 'Z') {
      ++pos;
    } else if (c == '+' || c == '-') {
      int oh = parse_int(s, pos + 1, 2);
      std::size_t mpos = pos + 3;
      if (mpos < s.size() && s[mpos] == ':') ++mpos;
      int om = parse_int(s, mpos, 2);
      std::int64_t off = oh * 3600 + om * 60;
      t += (c == '+') ? -off : off;
      pos = mpos + 2;
    }
    if (pos != s.size()) throw std::invalid_argument("trailing timestamp chars: " + std::string(s));
  }
  return Timestamp{t};
}

inline std::string format_date(Date d) {
  Civil c = civil_from_days(d.days);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", c.year, c.month, c.day);
  return buf;
}

inline std::string format_timestamp(Timestamp t) {
  std::int64_t day = t.day();
  std::int64_t rem = t.epoch_seconds - day * 86400;
  Civil c = civil_from_days(day);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", c.year, c.month, c.day,
                static_cast<int>(rem / 3600), static_cast<int>((rem / 60) % 60),
                static_cast<int>(rem % 60));
  return buf;
}

inline Date date_of(Timestamp t) { return Date{t.day()}; }

// 0 = Monday .. 6 = Sunday (1970-01-01 was a Thursday).
inline int weekday(Date d) {
  std::int64_t w = (d.days + 3) % 7;
  if (w < 0) w += 7;
  return static_cast<int>(w);
}

struct IsoWeek {
  int year = 0;
  int week = 0;  // 1..53

  friend auto operator<=>(const IsoWeek&, const IsoWeek&) = default;

  std::string label() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-W%02d", year, week);
    return buf;
  }
};

inline IsoWeek iso_week(Date d) {
  // ISO week 1 contains the first Thursday of the year.
  Date thursday = d.add_days(3 - weekday(d));
  Civil c = civil_from_days(thursday.days);
  std::int64_t jan1 = days_from_civil(c.year, 1, 1);
  int week = static_cast<int>((thursday.days - jan1) / 7) + 1;
  return IsoWeek{c.year, week};
}

}  // namespace tumorboard::dates
