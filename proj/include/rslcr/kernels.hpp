#pragma once

// Data-parallel inner loops used by synthesis and evaluation. Every kernel
// has a scalar reference version and, on x86-64, an AVX2/FMA version; the
// variant is picked once at runtime from CPUID. Setting RSLCR_SIMD=scalar
// in the environment forces the reference path.
//
// Matrices are column-major with an explicit leading dimension (stride
// between column starts, in elements).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace rslcr::kernels {

struct KernelSet {
  const char* name;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // out[k] = || cols[:, k] - query ||^2 for k < count
  void (*squared_distances)(const double* cols, std::size_t dim, std::size_t count,
                            std::size_t ld, const double* query, double* out);

  // out[r] = sum_k weights[k] * y[r, index[k]] for r < rows; out is overwritten
  void (*weighted_column_sum)(const float* y, std::size_t rows, std::size_t ld,
                              const std::uint32_t* index, const double* weights,
                              std::size_t count, double* out);

  // out[i] = sum_t taps[t] * in[i + t], i < n - ntaps + 1 ("valid" correlation)
  void (*correlate_valid)(const double* in, std::size_t n, const double* taps,
                          std::size_t ntaps, double* out);
};

const KernelSet& scalar_kernels();

/// AVX2 table, or nullptr when not compiled in or not supported by this CPU.
const KernelSet* avx2_kernels();

/// The table used by the library.
const KernelSet& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

}  // namespace rslcr::kernels
