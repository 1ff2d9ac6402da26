#pragma once

#include <cstddef>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace talkit {

// jobs == 0 means "use the OpenMP default"; without OpenMP everything
// degrades to single-threaded execution.
inline int resolve_jobs(int jobs) {
#ifdef _OPENMP
  return jobs > 0 ? jobs : omp_get_max_threads();
#else
  (void)jobs;
  return 1;
#endif
}

// Runs body(i) for i in [0, n). Workers must only write to disjoint,
// index-addressed slots; exceptions are captured and rethrown on the
// calling thread (first one wins).
template <class F>
void parallel_for(std::size_t n, int jobs, F&& body) {
  const int threads = resolve_jobs(jobs);
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
#ifdef _OPENMP
  std::exception_ptr error = nullptr;
#pragma omp parallel for num_threads(threads) schedule(dynamic)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(talkit_parallel_for_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
#else
  for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

}  // namespace talkit
