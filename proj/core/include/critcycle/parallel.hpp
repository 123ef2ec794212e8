#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace critcycle {

/**
 * Calls task(i) for i in [0, count) on up to `workers` threads. Tasks must write
 * only to their own slot of a pre-sized output, which keeps results independent
 * of scheduling. The first exception thrown by any task is rethrown.
 */
template <typename Task>
void parallel_for_index(std::size_t count, int workers, Task&& task) {
  const std::size_t pool =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, workers)));
  if (pool <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  {
    std::vector<std::jthread> threads;
    threads.reserve(pool);
    for (std::size_t w = 0; w < pool; ++w) {
      threads.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            task(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace critcycle
