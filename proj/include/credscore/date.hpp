#pragma once

#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "credscore/error.hpp"

namespace credscore {

using Date = std::chrono::year_month_day;

namespace detail {

inline bool parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

}  // namespace detail

/// Parses `YYYY-MM-DD`. Throws InputError on anything else.
inline Date parse_date(std::string_view s) {
  int y = 0, m = 0, d = 0;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-' || !detail::parse_fixed_int(s, 0, 4, y) ||
      !detail::parse_fixed_int(s, 5, 2, m) || !detail::parse_fixed_int(s, 8, 2, d)) {
    throw InputError("invalid date '" + std::string(s) + "' (expected YYYY-MM-DD)");
  }
  Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) throw InputError("invalid calendar date '" + std::string(s) + "'");
  return date;
}

inline std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

inline Date add_days(const Date& d, int n) {
  return Date{std::chrono::sys_days{d} + std::chrono::days{n}};
}

/// ISO weekday: Monday = 1 ... Sunday = 7.
inline unsigned iso_weekday(const Date& d) {
  return std::chrono::weekday{std::chrono::sys_days{d}}.iso_encoding();
}

inline bool is_weekend(const Date& d) { return iso_weekday(d) >= 6; }

/// A point in time together with the UTC offset it was written with.
struct Timestamp {
  std::chrono::sys_seconds utc{};
  int offset_minutes = 0;

  friend bool operator==(const Timestamp&, const Timestamp&) = default;

  /// Calendar date at the given UTC offset.
  Date date_at_offset(int minutes) const {
    auto local = utc + std::chrono::minutes{minutes};
    return Date{std::chrono::floor<std::chrono::days>(local)};
  }

  /// Calendar date as written in the original timestamp.
  Date local_date() const { return date_at_offset(offset_minutes); }
};

/// Parses `YYYY-MM-DDTHH:MM[:SS][.fff](Z|±HH:MM|±HHMM)`. A missing offset is
/// rejected; timestamps must be timezone-aware.
inline Timestamp parse_timestamp(std::string_view s) {
  auto fail = [&]() -> Timestamp {
    throw InputError("invalid timestamp '" + std::string(s) +
                     "' (expected ISO-8601 with offset, e.g. 2021-03-01T09:30:00+01:00)");
  };
  if (s.size() < 17 || (s[10] != 'T' && s[10] != ' ')) return fail();
  Date date;
  try {
    date = parse_date(s.substr(0, 10));
  } catch (const InputError&) {
    return fail();
  }
  int hh = 0, mm = 0, ss = 0;
  if (!detail::parse_fixed_int(s, 11, 2, hh) || s[13] != ':' || !detail::parse_fixed_int(s, 14, 2, mm))
    return fail();
  std::size_t pos = 16;
  if (pos < s.size() && s[pos] == ':') {
    if (!detail::parse_fixed_int(s, pos + 1, 2, ss)) return fail();
    pos += 3;
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    }
  }
  if (hh > 23 || mm > 59 || ss > 60) return fail();
  int offset = 0;
  if (pos >= s.size()) return fail();
  if (s[pos] == 'Z' && pos + 1 == s.size()) {
    offset = 0;
  } else if (s[pos] == '+' || s[pos] == '-') {
    int oh = 0, om = 0;
    std::string_view rest = s.substr(pos + 1);
    if (rest.size() == 5 && rest[2] == ':') {
      if (!detail::parse_fixed_int(rest, 0, 2, oh) || !detail::parse_fixed_int(rest, 3, 2, om)) return fail();
    } else if (rest.size() == 4) {
      if (!detail::parse_fixed_int(rest, 0, 2, oh) || !detail::parse_fixed_int(rest, 2, 2, om)) return fail();
    } else {
      return fail();
    }
    offset = (oh * 60 + om) * (s[pos] == '-' ? -1 : 1);
  } else {
    return fail();
  }
  auto local = std::chrono::sys_days{date} + std::chrono::hours{hh} + std::chrono::minutes{mm} +
               std::chrono::seconds{ss};
  return Timestamp{std::chrono::sys_seconds{local - std::chrono::minutes{offset}}, offset};
}

inline std::string format_timestamp(const Timestamp& ts) {
  auto local = ts.utc + std::chrono::minutes{ts.offset_minutes};
  auto day = std::chrono::floor<std::chrono::days>(local);
  std::chrono::hh_mm_ss tod{local - day};
  int off = ts.offset_minutes;
  char sign = off < 0 ? '-' : '+';
  if (off < 0) off = -off;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02d%c%02d:%02d", format_date(Date{day}).c_str(),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()), sign, off / 60, off % 60);
  return buf;
}

}  // namespace credscore
