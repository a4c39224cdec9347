#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace spike {

/// Worker count: SPIKE_THREADS if set (clamped to at least 1), otherwise the
/// hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("SPIKE_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
    return 1;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs body(i) for i in [0, count) across the workers. Iterations must be
/// independent; result determinism comes from writing to per-index slots.
/// The first exception thrown by any iteration is rethrown here.
template <class Body>
void parallel_for(long long count, const Body& body) {
  if (count <= 0) return;
  const int workers = std::min<long long>(worker_count(), count);
  if (workers <= 1) {
    for (long long i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<long long> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto run = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const long long i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers) - 1);
  for (int w = 1; w < workers; ++w) threads.emplace_back(run);
  run();
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace spike
