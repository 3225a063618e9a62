#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace gmtlab {

/// Number of worker threads: GMT_LAB_THREADS if set, otherwise the hardware
/// concurrency. A value set through set_worker_count() wins over both.
inline int& worker_override() {
  static int value = 0;
  return value;
}

inline void set_worker_count(int n) { worker_override() = n; }

inline int worker_count() {
  if (worker_override() > 0) return worker_override();
  if (const char* env = std::getenv("GMT_LAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// True on threads spawned by parallel_chunks; nested sweeps then run inline.
inline bool& inside_parallel_region() {
  thread_local bool value = false;
  return value;
}

/// Runs body(chunk_index, begin, end) over a fixed partition of [0, n) into
/// `chunks` contiguous ranges. The partition depends only on n and chunks, not
/// on the worker count, so callers that keep per-chunk results and merge them
/// in chunk order get identical output for any number of threads.
template <typename Body>
void parallel_chunks(std::size_t n, std::size_t chunks, Body&& body) {
  if (n == 0) return;
  chunks = std::max<std::size_t>(1, std::min(chunks, n));
  auto range = [&](std::size_t c) {
    return std::pair{n * c / chunks, n * (c + 1) / chunks};
  };
  const auto workers =
      inside_parallel_region() ? std::size_t{1} : std::min<std::size_t>(chunks, worker_count());
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      auto [b, e] = range(c);
      body(c, b, e);
    }
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      inside_parallel_region() = true;
      try {
        for (std::size_t c = w; c < chunks; c += workers) {
          auto [b, e] = range(c);
          body(c, b, e);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Fixed chunk count used by the data-parallel sweeps.
inline constexpr std::size_t kDefaultChunks = 64;

}  // namespace gmtlab
