#pragma once

#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace stmi {

inline int worker_count() {
  if (const char* env = std::getenv("STMI_WORKERS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

// run fn(i) for i in [0, n); results land in index order, so output is
// deterministic regardless of scheduling
template <typename T>
std::vector<T> parallel_map(int n, const std::function<T(int)>& fn) {
  std::vector<T> out(static_cast<size_t>(n));
  int workers = std::min(worker_count(), n > 0 ? n : 1);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) out[i] = fn(i);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace stmi
