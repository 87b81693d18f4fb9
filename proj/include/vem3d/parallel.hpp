// Minimal static-partition parallel loop. Each index is processed exactly
// once; results written per index are therefore independent of the thread
// count. The exception of the lowest failing index is rethrown.
#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace vem3d {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

template <typename Fn>
void parallel_for(int n, Fn&& fn, int threads = 0) {
  const int t = std::min(resolve_threads(threads), std::max(n, 1));
  if (t <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (int w = 0; w < t; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += t) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace vem3d
