#include "wcam/util/time.hpp"

#include <cctype>
#include <cstdio>

#include "wcam/util/error.hpp"

namespace wcam {

namespace {

struct Fields {
  int year;
  unsigned month, day;
  int hour, minute, second;
};

Fields split(Timestamp t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::year_month_day ymd{day};
  const std::chrono::hh_mm_ss hms{t - day};
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
          static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
          static_cast<int>(hms.seconds().count())};
}

int digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) throw ArgumentError("timestamp too short: '" + std::string(s) + "'");
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) throw ArgumentError("bad timestamp '" + std::string(s) + "'");
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

void expect(std::string_view s, std::size_t pos, char c) {
  if (pos >= s.size() || s[pos] != c) throw ArgumentError("bad timestamp '" + std::string(s) + "'");
}

}  // namespace

Timestamp make_timestamp(int year, unsigned month, unsigned day, int hour, int minute, int second) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
  if (!ymd.ok()) throw ArgumentError("invalid calendar date");
  return std::chrono::sys_days{ymd} + std::chrono::hours{hour} + std::chrono::minutes{minute} +
         std::chrono::seconds{second};
}

std::string format_iso(Timestamp t) {
  const auto f = split(t);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", f.year, f.month, f.day, f.hour, f.minute,
                f.second);
  return buf;
}

std::string format_date(Timestamp t) {
  const auto f = split(t);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", f.year, f.month, f.day);
  return buf;
}

std::string format_compact(Timestamp t) {
  const auto f = split(t);
  char buf[24];
  std::snprintf(buf, sizeof buf, "%04d%02u%02uT%02d%02d%02dZ", f.year, f.month, f.day, f.hour, f.minute, f.second);
  return buf;
}

Timestamp parse_iso(std::string_view s) {
  const int year = digits(s, 0, 4);
  expect(s, 4, '-');
  const int month = digits(s, 5, 2);
  expect(s, 7, '-');
  const int day = digits(s, 8, 2);
  if (s.size() <= 10 || (s[10] != 'T' && s[10] != ' ')) throw ArgumentError("bad timestamp '" + std::string(s) + "'");
  const int hour = digits(s, 11, 2);
  expect(s, 13, ':');
  const int minute = digits(s, 14, 2);
  expect(s, 16, ':');
  const int second = digits(s, 17, 2);
  if (hour > 23 || minute > 59 || second > 60) throw ArgumentError("bad timestamp '" + std::string(s) + "'");
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  Timestamp t = make_timestamp(year, static_cast<unsigned>(month), static_cast<unsigned>(day), hour, minute, second);
  if (pos == s.size()) throw ArgumentError("timestamp without zone: '" + std::string(s) + "'");
  if (s[pos] == 'Z' && pos + 1 == s.size()) return t;
  if ((s[pos] == '+' || s[pos] == '-') && pos + 6 == s.size()) {
    const int oh = digits(s, pos + 1, 2);
    expect(s, pos + 3, ':');
    const int om = digits(s, pos + 4, 2);
    const auto offset = std::chrono::hours{oh} + std::chrono::minutes{om};
    return s[pos] == '+' ? t - offset : t + offset;
  }
  throw ArgumentError("bad timestamp zone in '" + std::string(s) + "'");
}

}  // namespace wcam
