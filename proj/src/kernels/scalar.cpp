#include "kernel_impls.hpp"

namespace rslcr::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void squared_distances(const double* cols, std::size_t dim, std::size_t count, std::size_t ld,
                       const double* query, double* out) {
  for (std::size_t k = 0; k < count; ++k) {
    const double* col = cols + k * ld;
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double diff = col[i] - query[i];
      acc += diff * diff;
    }
    out[k] = acc;
  }
}

void weighted_column_sum(const float* y, std::size_t rows, std::size_t ld,
                         const std::uint32_t* index, const double* weights, std::size_t count,
                         double* out) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const float* col = y + static_cast<std::size_t>(index[k]) * ld;
    const double w = weights[k];
    for (std::size_t r = 0; r < rows; ++r) out[r] += w * static_cast<double>(col[r]);
  }
}

void correlate_valid(const double* in, std::size_t n, const double* taps, std::size_t ntaps,
                     double* out) {
  if (n < ntaps) return;
  const std::size_t outputs = n - ntaps + 1;
  for (std::size_t i = 0; i < outputs; ++i) {
    double acc = 0.0;
    for (std::size_t t = 0; t < ntaps; ++t) acc += taps[t] * in[i + t];
    out[i] = acc;
  }
}

}  // namespace rslcr::kernels::scalar
