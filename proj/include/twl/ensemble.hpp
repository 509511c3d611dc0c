#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace twl {

// Evaluates f(i) for i in [0, n) on `workers` threads and returns the results
// in index order. f must be a pure function of i, so the output does not
// depend on the worker count. The first exception thrown is rethrown.
template <typename F>
auto run_ensemble(std::uint64_t n, unsigned workers, F&& f)
    -> std::vector<decltype(f(std::uint64_t{}))> {
  using R = decltype(f(std::uint64_t{}));
  std::vector<R> out(n);
  if (n < workers) workers = static_cast<unsigned>(n);
  if (workers <= 1) {
    for (std::uint64_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::uint64_t i = w; i < n; i += workers) out[i] = f(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

inline unsigned default_workers() {
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace twl
