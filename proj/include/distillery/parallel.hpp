#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace distillery {

// Every batch kernel takes an execution policy.  `serial` is the reference
// path the tests compare against; `openmp` must produce bit-identical results
// (per-index RNG streams, order-independent accumulation).
enum class Exec { serial, openmp };

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

template <typename Fn>
void for_each_index(std::size_t count, Exec exec, Fn&& fn) {
#ifdef _OPENMP
  if (exec == Exec::openmp) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
      fn(static_cast<std::size_t>(i));
    }
    return;
  }
#else
  (void)exec;
#endif
  for (std::size_t i = 0; i < count; ++i) fn(i);
}

}  // namespace distillery
