#include <cstdlib>
#include <cstring>

#include "kernel_impls.hpp"
#include "rslcr/kernels.hpp"

namespace rslcr::kernels {

const KernelSet& scalar_kernels() {
  static const KernelSet table{"scalar", scalar::dot, scalar::squared_distances,
                               scalar::weighted_column_sum, scalar::correlate_valid};
  return table;
}

const KernelSet* avx2_kernels() {
#if defined(RSLCR_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  static const KernelSet table{"avx2", avx2::dot, avx2::squared_distances,
                               avx2::weighted_column_sum, avx2::correlate_valid};
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? &table : nullptr;
#else
  return nullptr;
#endif
}

const KernelSet& active() {
  static const KernelSet& chosen = [] () -> const KernelSet& {
    const char* force = std::getenv("RSLCR_SIMD");
    if (force != nullptr && std::strcmp(force, "scalar") == 0) return scalar_kernels();
    if (const KernelSet* wide = avx2_kernels()) return *wide;
    return scalar_kernels();
  }();
  return chosen;
}

}  // namespace rslcr::kernels
