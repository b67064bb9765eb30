#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "claimshift/core/errors.hpp"

namespace claimshift {

// Token bucket shared by every caller of one endpoint. rate <= 0 disables it.
class TokenBucket {
 public:
  explicit TokenBucket(double rate_per_second = 0.0, double burst = 1.0);
  void acquire();

 private:
  double rate_;
  double burst_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mu_;
};

// Runs fn(i) for i in [0, n) on at most max_workers threads. The first
// exception is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t max_workers,
                  const std::function<void(std::size_t)>& fn);

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{200};
  double backoff = 2.0;
};

// Retries on TransportError with exponential backoff (QuotaError waits at
// least its retry-after). Other exceptions propagate immediately.
template <typename Fn>
auto with_retries(const RetryPolicy& policy, Fn&& fn) -> decltype(fn()) {
  auto delay = policy.base_delay;
  for (int attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const QuotaError& e) {
      if (attempt >= policy.max_attempts) throw;
      std::this_thread::sleep_for(std::max(delay, e.retry_after()));
    } catch (const TransportError&) {
      if (attempt >= policy.max_attempts) throw;
      std::this_thread::sleep_for(delay);
    }
    delay = std::chrono::milliseconds(
        static_cast<long long>(static_cast<double>(delay.count()) * policy.backoff));
  }
}

}  // namespace claimshift
