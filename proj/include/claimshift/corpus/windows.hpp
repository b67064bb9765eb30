#pragma once

#include "claimshift/core/date.hpp"

namespace claimshift::corpus {

struct TemporalWindows {
  YearMonth cutoff;
  DateRange prior_window;
  DateRange new_window;
  DateRange future_window;
};

// The prior window is the prior_span_months whole months ending
// buffer_before_months before the cutoff month; the new window opens
// buffer_after_months after it and closes on new_end; the future window runs
// from the day after new_end through future_end.
struct WindowPolicy {
  int buffer_before_months = 3;
  int buffer_after_months = 3;
  int prior_span_months = 12;
  Date new_end;
  Date future_end;

  // Known model cutoffs (Dec 2023, Oct 2023) reproduce the published
  // date-cutoff layout; any other cutoff gets new_end = end of cutoff+11 and
  // future_end = 1st of cutoff+14.
  static WindowPolicy standard(YearMonth cutoff);
};

inline constexpr int kMinBufferMonths = 3;

// Throws ContractError when the policy yields overlapping, unordered or
// empty windows, or shrinks a buffer below three months.
TemporalWindows window_for(YearMonth cutoff, const WindowPolicy& policy);
TemporalWindows window_for(YearMonth cutoff);

// Independent check of the window invariants; throws ContractError.
void validate_windows(const TemporalWindows& w);

}  // namespace claimshift::corpus
