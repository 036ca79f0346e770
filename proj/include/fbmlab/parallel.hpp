#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace fbmlab {

int default_threads();
void set_default_threads(int n);

// Calls f(i) for i in [0, n) on up to `threads` workers and returns the
// results in index order. The first failing index (lowest i) is rethrown.
template <class T, class F>
std::vector<T> parallel_map(std::int64_t n, int threads, F&& f) {
  std::vector<T> out(static_cast<std::size_t>(std::max<std::int64_t>(n, 0)));
  std::vector<std::exception_ptr> errs(out.size());
  const int workers = static_cast<int>(std::clamp<std::int64_t>(threads, 1, std::max<std::int64_t>(n, 1)));
  auto run = [&](int w) {
    for (std::int64_t i = w; i < n; i += workers) {
      try {
        out[static_cast<std::size_t>(i)] = f(i);
      } catch (...) {
        errs[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace fbmlab
