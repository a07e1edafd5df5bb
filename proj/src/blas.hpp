#pragma once

// Internal: OpenBLAS/LAPACKE access. Parallelism is owned by parallel_for,
// so the BLAS is pinned to one thread; this also keeps its reductions
// independent of the machine's core count.

#include <cblas.h>
#include <lapacke.h>

#include <mutex>

namespace rslcr::detail {

inline void ensure_blas_single_threaded() {
  static std::once_flag once;
  std::call_once(once, [] { openblas_set_num_threads(1); });
}

}  // namespace rslcr::detail
