#pragma once

// Execution policy for the exhaustive data-parallel kernels. Every kernel
// keeps a plain serial path; the tests compare the two and the benchmark
// target times them.

#if defined(_OPENMP)
#include <omp.h>
#define TARSKI_PRAGMA_HELPER(x) _Pragma(#x)
#define TARSKI_OMP(x) TARSKI_PRAGMA_HELPER(omp x)
#else
#define TARSKI_OMP(x)
#endif

#include <cstddef>
#include <exception>
#include <mutex>

namespace tarski {

enum class Exec { Serial, Parallel };

inline int max_threads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// f(0) .. f(n-1), dynamically scheduled under Exec::Parallel. The first
/// exception thrown by any iteration is rethrown after the loop.
template <class F>
void for_each_index(std::size_t n, Exec exec, F&& f) {
  if (exec == Exec::Serial) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr error;
  std::mutex guard;
  const long long total = static_cast<long long>(n);
  TARSKI_OMP(parallel for schedule(dynamic))
  for (long long i = 0; i < total; ++i) {
    try {
      f(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace tarski
