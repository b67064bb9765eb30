#include "claimshift/core/date.hpp"

#include <charconv>
#include <cstdio>

#include "claimshift/core/errors.hpp"

namespace claimshift {

using namespace std::chrono;

bool DateRange::empty() const { return sys_days{last} < sys_days{first}; }

bool DateRange::contains(const Date& d) const {
  return sys_days{first} <= sys_days{d} && sys_days{d} <= sys_days{last};
}

namespace {

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  int y = 0, m = 0, d = 1;
  if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
        !parse_int(text.substr(8, 2), d))
      return std::nullopt;
  } else if (text.size() == 7 && text[4] == '-') {
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m))
      return std::nullopt;
  } else {
    return std::nullopt;
  }
  Date out{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!out.ok()) return std::nullopt;
  return out;
}

Date parse_date_or_throw(std::string_view text) {
  auto d = parse_date(text);
  if (!d) throw ContractError("invalid date: " + std::string(text));
  return *d;
}

std::optional<YearMonth> parse_year_month(std::string_view text) {
  if (text.size() != 7) return std::nullopt;
  auto d = parse_date(text);
  if (!d) return std::nullopt;
  return d->year() / d->month();
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

std::string format_year_month(const YearMonth& ym) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u", static_cast<int>(ym.year()),
                static_cast<unsigned>(ym.month()));
  return buf;
}

std::string format_range(const DateRange& r) {
  return "[" + format_date(r.first) + ", " + format_date(r.last) + "]";
}

Date first_day(const YearMonth& ym) { return ym / day{1}; }

Date last_day(const YearMonth& ym) { return Date{ym / last}; }

Date add_days(const Date& d, int n) { return Date{sys_days{d} + days{n}}; }

int month_distance(const YearMonth& a, const YearMonth& b) {
  return (static_cast<int>(b.year()) - static_cast<int>(a.year())) * 12 +
         (static_cast<int>(static_cast<unsigned>(b.month())) -
          static_cast<int>(static_cast<unsigned>(a.month())));
}

}  // namespace claimshift
