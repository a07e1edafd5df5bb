#pragma once

// Internal: raw kernel entry points. Kept free of STL templates so the AVX2
// translation unit cannot emit wide-ISA copies of shared inline functions.

#include <cstddef>
#include <cstdint>

namespace rslcr::kernels {

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void squared_distances(const double* cols, std::size_t dim, std::size_t count, std::size_t ld,
                       const double* query, double* out);
void weighted_column_sum(const float* y, std::size_t rows, std::size_t ld,
                         const std::uint32_t* index, const double* weights, std::size_t count,
                         double* out);
void correlate_valid(const double* in, std::size_t n, const double* taps, std::size_t ntaps,
                     double* out);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void squared_distances(const double* cols, std::size_t dim, std::size_t count, std::size_t ld,
                       const double* query, double* out);
void weighted_column_sum(const float* y, std::size_t rows, std::size_t ld,
                         const std::uint32_t* index, const double* weights, std::size_t count,
                         double* out);
void correlate_valid(const double* in, std::size_t n, const double* taps, std::size_t ntaps,
                     double* out);
}  // namespace avx2

}  // namespace rslcr::kernels
