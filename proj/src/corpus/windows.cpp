#include "claimshift/corpus/windows.hpp"

#include "claimshift/core/errors.hpp"

namespace claimshift::corpus {

using namespace std::chrono;

WindowPolicy WindowPolicy::standard(YearMonth cutoff) {
  WindowPolicy p;
  if (cutoff == 2023y / October) {
    p.new_end = 2024y / November / 30d;
    p.future_end = 2025y / March / 1d;
  } else if (cutoff == 2023y / December) {
    p.new_end = 2024y / November / 30d;
    p.future_end = 2025y / February / 1d;
  } else {
    p.new_end = last_day(cutoff + months{11});
    p.future_end = first_day(cutoff + months{14});
  }
  return p;
}

TemporalWindows window_for(YearMonth cutoff, const WindowPolicy& policy) {
  if (!cutoff.ok()) throw ContractError("invalid cutoff month");
  if (policy.buffer_before_months < kMinBufferMonths ||
      policy.buffer_after_months < kMinBufferMonths)
    throw ContractError("window policy buffer must be at least 3 months on both sides");
  if (policy.prior_span_months < 1) throw ContractError("prior window must span at least a month");
  if (!policy.new_end.ok() || !policy.future_end.ok())
    throw ContractError("window policy has invalid end dates");

  TemporalWindows w;
  w.cutoff = cutoff;
  YearMonth prior_last = cutoff - months{policy.buffer_before_months};
  w.prior_window = {first_day(prior_last - months{policy.prior_span_months - 1}),
                    last_day(prior_last)};
  w.new_window = {first_day(cutoff + months{policy.buffer_after_months}), policy.new_end};
  w.future_window = {add_days(policy.new_end, 1), policy.future_end};
  validate_windows(w);
  return w;
}

TemporalWindows window_for(YearMonth cutoff) {
  return window_for(cutoff, WindowPolicy::standard(cutoff));
}

void validate_windows(const TemporalWindows& w) {
  auto fail = [](const std::string& m) { throw ContractError("invalid windows: " + m); };
  if (w.prior_window.empty()) fail("prior window is empty");
  if (w.new_window.empty()) fail("new window is empty");
  if (w.future_window.empty()) fail("future window is empty");
  if (sys_days{w.prior_window.last} > sys_days{last_day(w.cutoff - months{kMinBufferMonths})})
    fail("prior window ends less than 3 months before the cutoff");
  if (sys_days{w.new_window.first} < sys_days{first_day(w.cutoff + months{kMinBufferMonths})})
    fail("new window starts less than 3 months after the cutoff");
  if (!(sys_days{w.prior_window.last} < sys_days{w.new_window.first}))
    fail("prior and new windows overlap");
  if (!(sys_days{w.new_window.last} < sys_days{w.future_window.first}))
    fail("future window does not start after the new window ends");
}

}  // namespace claimshift::corpus
