#pragma once

#include <cstddef>

namespace pgds::simd::detail {

double dot_f32_scalar(const float* a, const float* b, std::size_t n);
double dot_f64_scalar(const double* a, const double* b, std::size_t n);
void axpy_f64_scalar(double alpha, const double* x, double* y, std::size_t n);

#if defined(PGDS_HAVE_AVX2_TU)
double dot_f32_avx2(const float* a, const float* b, std::size_t n);
double dot_f64_avx2(const double* a, const double* b, std::size_t n);
void axpy_f64_avx2(double alpha, const double* x, double* y, std::size_t n);
#endif

}  // namespace pgds::simd::detail
