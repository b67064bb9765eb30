#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace claimshift {

using Date = std::chrono::year_month_day;
using YearMonth = std::chrono::year_month;

// Inclusive calendar range. Empty when last < first.
struct DateRange {
  Date first;
  Date last;

  bool empty() const;
  bool contains(const Date& d) const;
  bool operator==(const DateRange&) const = default;
};

// Accepts YYYY-MM-DD and YYYY-MM (snapped to the 1st). Anything else,
// including a bare year, yields nullopt.
std::optional<Date> parse_date(std::string_view text);
Date parse_date_or_throw(std::string_view text);
std::optional<YearMonth> parse_year_month(std::string_view text);

std::string format_date(const Date& d);
std::string format_year_month(const YearMonth& ym);
std::string format_range(const DateRange& r);

Date first_day(const YearMonth& ym);
Date last_day(const YearMonth& ym);
Date add_days(const Date& d, int n);

// Months between two year-months: b - a.
int month_distance(const YearMonth& a, const YearMonth& b);

}  // namespace claimshift
