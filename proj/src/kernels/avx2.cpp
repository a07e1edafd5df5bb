// Built with -mavx2 -mfma. Only reached through the dispatch table after a
// CPUID check.

#include "kernel_impls.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace rslcr::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void squared_distances(const double* cols, std::size_t dim, std::size_t count, std::size_t ld,
                       const double* query, double* out) {
  for (std::size_t k = 0; k < count; ++k) {
    const double* col = cols + k * ld;
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= dim; i += 8) {
      const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(col + i), _mm256_loadu_pd(query + i));
      const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(col + i + 4), _mm256_loadu_pd(query + i + 4));
      acc0 = _mm256_fmadd_pd(d0, d0, acc0);
      acc1 = _mm256_fmadd_pd(d1, d1, acc1);
    }
    for (; i + 4 <= dim; i += 4) {
      const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(col + i), _mm256_loadu_pd(query + i));
      acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < dim; ++i) {
      const double diff = col[i] - query[i];
      acc += diff * diff;
    }
    out[k] = acc;
  }
}

void weighted_column_sum(const float* y, std::size_t rows, std::size_t ld,
                         const std::uint32_t* index, const double* weights, std::size_t count,
                         double* out) {
  std::size_t r = 0;
  // 16 output rows stay in registers while all columns stream past.
  for (; r + 16 <= rows; r += 16) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    for (std::size_t k = 0; k < count; ++k) {
      const float* col = y + static_cast<std::size_t>(index[k]) * ld + r;
      const __m256d w = _mm256_set1_pd(weights[k]);
      const __m256 lo = _mm256_loadu_ps(col);
      const __m256 hi = _mm256_loadu_ps(col + 8);
      acc0 = _mm256_fmadd_pd(w, _mm256_cvtps_pd(_mm256_castps256_ps128(lo)), acc0);
      acc1 = _mm256_fmadd_pd(w, _mm256_cvtps_pd(_mm256_extractf128_ps(lo, 1)), acc1);
      acc2 = _mm256_fmadd_pd(w, _mm256_cvtps_pd(_mm256_castps256_ps128(hi)), acc2);
      acc3 = _mm256_fmadd_pd(w, _mm256_cvtps_pd(_mm256_extractf128_ps(hi, 1)), acc3);
    }
    _mm256_storeu_pd(out + r, acc0);
    _mm256_storeu_pd(out + r + 4, acc1);
    _mm256_storeu_pd(out + r + 8, acc2);
    _mm256_storeu_pd(out + r + 12, acc3);
  }
  for (; r + 4 <= rows; r += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < count; ++k) {
      const float* col = y + static_cast<std::size_t>(index[k]) * ld + r;
      acc = _mm256_fmadd_pd(_mm256_set1_pd(weights[k]), _mm256_cvtps_pd(_mm_loadu_ps(col)), acc);
    }
    _mm256_storeu_pd(out + r, acc);
  }
  for (; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      acc += weights[k] * static_cast<double>(y[static_cast<std::size_t>(index[k]) * ld + r]);
    }
    out[r] = acc;
  }
}

void correlate_valid(const double* in, std::size_t n, const double* taps, std::size_t ntaps,
                     double* out) {
  if (n < ntaps) return;
  const std::size_t outputs = n - ntaps + 1;
  std::size_t i = 0;
  for (; i + 8 <= outputs; i += 8) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    for (std::size_t t = 0; t < ntaps; ++t) {
      const __m256d tap = _mm256_set1_pd(taps[t]);
      acc0 = _mm256_fmadd_pd(tap, _mm256_loadu_pd(in + i + t), acc0);
      acc1 = _mm256_fmadd_pd(tap, _mm256_loadu_pd(in + i + t + 4), acc1);
    }
    _mm256_storeu_pd(out + i, acc0);
    _mm256_storeu_pd(out + i + 4, acc1);
  }
  for (; i < outputs; ++i) {
    double acc = 0.0;
    for (std::size_t t = 0; t < ntaps; ++t) acc += taps[t] * in[i + t];
    out[i] = acc;
  }
}

}  // namespace rslcr::kernels::avx2

#endif
