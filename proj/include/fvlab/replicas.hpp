#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fvlab {

/// Runs f(replica) for replica = 0..count-1 on `workers` threads and returns
/// the results in replica order. Worker w takes replicas w, w+W, w+2W, ...;
/// since each replica seeds its own stream, results do not depend on W.
/// The first exception thrown by any replica is rethrown.
template <class Result, class F>
std::vector<Result> run_replicas(long count, int workers, F&& f) {
  std::vector<Result> results(static_cast<std::size_t>(std::max(count, 0L)));
  workers = std::max(1, std::min<int>(workers, static_cast<int>(std::max(count, 1L))));
  if (workers == 1) {
    for (long r = 0; r < count; ++r) results[static_cast<std::size_t>(r)] = f(r);
    return results;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (long r = w; r < count; r += workers) results[static_cast<std::size_t>(r)] = f(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace fvlab
