#pragma once

#include <cstddef>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ssc {

// Worker count: SSC_THREADS if set and > 0, else the OpenMP default.
inline int thread_count() {
  static const int count = [] {
    int n = 0;
    if (const char* env = std::getenv("SSC_THREADS")) {
      try {
        n = std::stoi(env);
      } catch (...) {
        n = 0;
      }
    }
#ifdef _OPENMP
    if (n <= 0) n = omp_get_max_threads();
#else
    n = 1;
#endif
    return n < 1 ? 1 : n;
  }();
  return count;
}

// Runs body(i) for i in [0, n). Each index is handled by exactly one thread
// so per-index reductions keep a fixed order regardless of thread count.
template <typename Body>
void parallel_for(std::ptrdiff_t n, Body&& body) {
#ifdef _OPENMP
  const int threads = thread_count();
  if (threads > 1 && n > 1) {
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    return;
  }
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
}

}  // namespace ssc
