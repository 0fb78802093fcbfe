#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bosoncert {

/// Worker count: $BOSONCERT_THREADS if set, else the hardware concurrency.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("BOSONCERT_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls body(begin, end) on contiguous chunks of [0, count). The first
/// exception thrown by any chunk is rethrown on the calling thread.
template <typename Body>
void parallel_for(std::size_t count, Body&& body, unsigned threads = 0) {
  if (count == 0) return;
  if (threads == 0) threads = default_thread_count();
  const std::size_t workers = std::min<std::size_t>(threads, count);
  if (workers <= 1) {
    body(std::size_t{0}, count);
    return;
  }
  std::exception_ptr failure;
  std::mutex guard;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard lock(guard);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace bosoncert
