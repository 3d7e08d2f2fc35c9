#ifndef DEGCTRL_PARALLEL_HPP
#define DEGCTRL_PARALLEL_HPP

#include <atomic>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace degctrl {

// Resolve the worker count: explicit request > DEGEN_ACTUATOR_THREADS > 1.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DEGEN_ACTUATOR_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

// Deterministic parallel map over task indices 0..n_tasks-1. Each task writes
// only to its own result slot, so outputs are identical for any thread count;
// any reduction over results must happen afterwards in index order.
inline void parallel_for(int n_tasks, int n_threads,
                         const std::function<void(int)>& task) {
  n_threads = resolve_threads(n_threads);
  if (n_threads <= 1 || n_tasks <= 1) {
    for (int i = 0; i < n_tasks; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_tasks) return;
      task(i);
    }
  };
  std::vector<std::thread> pool;
  const int workers = std::min(n_threads, n_tasks);
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace degctrl

#endif
