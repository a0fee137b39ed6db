#pragma once

// Dense double-precision inner loops used by every numerical module.
//
// Each kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The active table is chosen once at first use from the
// CPU feature flags; SPIKED_LAB_SIMD=scalar in the environment forces the
// reference path. Results of the two paths agree to rounding (different
// summation order), never bit-for-bit.

#include <cstddef>
#include <span>
#include <string_view>

namespace spiked::simd {

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend b);

struct KernelTable {
    Backend backend;

    /// sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);

    /// y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

    /// y = A x, A row-major rows x cols.
    void (*gemv)(const double* a, std::size_t rows, std::size_t cols,
                 const double* x, double* y);

    /// y = A^T x, A row-major rows x cols; y has length cols.
    void (*gemv_t)(const double* a, std::size_t rows, std::size_t cols,
                   const double* x, double* y);

    /// Plane rotation of two rows: x <- c x - s y, y <- s x + c y.
    void (*rotate)(double* x, double* y, std::size_t n, double c, double s);
};

const KernelTable& scalar_kernels();

/// nullptr when not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

/// The table used by the library.
const KernelTable& active();

/// Override the active table (tests and benchmarks). Falls back to scalar
/// when the requested backend is unavailable; returns the backend in effect.
Backend select(Backend b);

// Span conveniences over the active table.

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double norm_sq(std::span<const double> a) {
    return active().dot(a.data(), a.data(), a.size());
}

}  // namespace spiked::simd
