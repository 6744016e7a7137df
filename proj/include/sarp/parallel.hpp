#pragma once

#include <exception>

#ifdef SARP_USE_OPENMP
#include <omp.h>
#endif

namespace sarp {

// Thread count used by the OpenMP kernels; 0 keeps the runtime default.
void set_jobs(int n);
int current_jobs();

// Runs fn(i) for i in [0, n). Results must be written by index, so the
// outcome is identical for any thread count or schedule. The first exception
// thrown by fn is rethrown after the loop completes.
template <typename Fn>
void parallel_for_index(int n, Fn&& fn) {
#ifdef SARP_USE_OPENMP
  std::exception_ptr err = nullptr;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
#pragma omp critical(sarp_parallel_for_err)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
#else
  for (int i = 0; i < n; ++i) fn(i);
#endif
}

// Serial reference for the kernel above, kept for testing and benchmarks.
template <typename Fn>
void serial_for_index(int n, Fn&& fn) {
  for (int i = 0; i < n; ++i) fn(i);
}

#ifdef SARP_USE_OPENMP
inline void set_jobs(int n) {
  if (n > 0) omp_set_num_threads(n);
}
inline int current_jobs() { return omp_get_max_threads(); }
#else
inline void set_jobs(int) {}
inline int current_jobs() { return 1; }
#endif

}  // namespace sarp
