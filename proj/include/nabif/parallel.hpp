#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nabif {

/// Global toggle for the OpenMP execution of batch kernels. Results are
/// index-assembled and therefore identical in serial and parallel mode;
/// the serial path doubles as the reference implementation in tests and
/// in the benchmark tool.
bool parallel_enabled() noexcept;
void set_parallel_enabled(bool enabled) noexcept;

/// Requests a specific worker count (0 = library default).
void set_thread_count(int threads) noexcept;

int hardware_threads() noexcept;

/// Runs body(i) for i in [0, n). Work items must be independent; each
/// writes only its own slot. Exceptions are captured and rethrown on the
/// calling thread after the loop finishes.
template <class F>
void parallel_for(std::size_t n, F&& body) {
#ifdef _OPENMP
  if (parallel_enabled() && n > 1) {
    std::exception_ptr first_error;
    std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
    if (first_error) std::rethrow_exception(first_error);
    return;
  }
#endif
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace nabif
