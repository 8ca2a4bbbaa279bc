#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace reshare {

/// Runs produce(i) for i in [0, n) on `workers` threads and calls
/// consume(i, result) strictly in index order. Work proceeds in windows of
/// `window` units so at most one window of results is held at a time. The
/// first exception thrown by any producer is rethrown on the caller.
template <class Produce, class Consume>
void ordered_parallel_map(std::size_t n, unsigned workers, std::size_t window, Produce&& produce,
                          Consume&& consume) {
  using Result = decltype(produce(std::size_t{0}));
  workers = std::max(1u, workers);
  window = std::max<std::size_t>(window, 1);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) consume(i, produce(i));
    return;
  }
  std::vector<std::optional<Result>> slots;
  for (std::size_t begin = 0; begin < n; begin += window) {
    const std::size_t end = std::min(n, begin + window);
    slots.clear();
    slots.resize(end - begin);
    std::atomic<std::size_t> next{begin};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> pool;
      const unsigned count = static_cast<unsigned>(std::min<std::size_t>(workers, end - begin));
      pool.reserve(count);
      for (unsigned w = 0; w < count; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next.fetch_add(1); i < end; i = next.fetch_add(1)) {
            try {
              slots[i - begin].emplace(produce(i));
            } catch (...) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
              next.store(end);
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
    for (std::size_t i = begin; i < end; ++i) consume(i, std::move(*slots[i - begin]));
  }
}

}  // namespace reshare
