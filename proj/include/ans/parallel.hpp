#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "ans/io.hpp"

namespace ans {

/// Worker count: ANS_WORKERS wins over `requested`; 0 means one per core.
inline int worker_count(int requested = 0) {
  if (const char* env = std::getenv("ANS_WORKERS")) {
    if (const auto v = parse_int(env); v && *v > 0) return static_cast<int>(*v);
  }
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on a small thread pool. Results are stored by
/// index, so the output does not depend on scheduling. The first exception
/// (by index) is rethrown after all workers finish.
template <typename Fn>
auto parallel_map(std::size_t n, int workers, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int w = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (w == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < w; ++k) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace ans
