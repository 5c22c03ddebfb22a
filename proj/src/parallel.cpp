#include "nabif/parallel.hpp"

#include <atomic>

namespace nabif {

namespace {
std::atomic<bool> g_parallel{true};
}

bool parallel_enabled() noexcept { return g_parallel.load(std::memory_order_relaxed); }

void set_parallel_enabled(bool enabled) noexcept {
  g_parallel.store(enabled, std::memory_order_relaxed);
}

void set_thread_count(int threads) noexcept {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

int hardware_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace nabif
