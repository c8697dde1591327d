#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dplqr {

//! Runs fn(i) for i in [0, n) on up to `workers` threads. Tasks must write to
//! disjoint outputs. The first exception thrown by any task is rethrown after
//! all threads have joined.
template<class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn)
{
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error)
          error = std::current_exception();
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t)
    pool.emplace_back(run);
  run();
  for (auto& t : pool)
    t.join();
  if (error)
    std::rethrow_exception(error);
}

inline std::size_t default_workers()
{
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

} // namespace dplqr
