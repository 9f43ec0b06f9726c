#pragma once

#include <cstddef>

namespace dpgnn::simd::detail {

double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double* y, double alpha, const double* x, std::size_t n);

#if defined(DPGNN_HAVE_AVX2)
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double* y, double alpha, const double* x, std::size_t n);
#endif

#if defined(DPGNN_HAVE_NEON)
double dot_neon(const double* a, const double* b, std::size_t n);
void axpy_neon(double* y, double alpha, const double* x, std::size_t n);
#endif

}  // namespace dpgnn::simd::detail
