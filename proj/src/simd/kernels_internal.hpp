#pragma once

#include <cstddef>

namespace spiked::simd::detail {

double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void gemv_scalar(const double* a, std::size_t rows, std::size_t cols,
                 const double* x, double* y);
void gemv_t_scalar(const double* a, std::size_t rows, std::size_t cols,
                   const double* x, double* y);
void rotate_scalar(double* x, double* y, std::size_t n, double c, double s);

#if defined(SPIKED_HAVE_AVX2)
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void gemv_avx2(const double* a, std::size_t rows, std::size_t cols,
               const double* x, double* y);
void gemv_t_avx2(const double* a, std::size_t rows, std::size_t cols,
                 const double* x, double* y);
void rotate_avx2(double* x, double* y, std::size_t n, double c, double s);
#endif

}  // namespace spiked::simd::detail
