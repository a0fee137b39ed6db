#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "spiked/rng.hpp"
#include "spiked/simd/kernels.hpp"

using namespace spiked;

namespace {

std::vector<double> randn(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return rng.normal_vector(n);
}

// Sizes straddling every unroll boundary of the vector kernels.
const std::size_t kSizes[] = {0, 1, 3, 4, 5, 7, 8, 15, 16, 17, 31, 33, 64, 100, 257};

}  // namespace

TEST(Simd, ScalarTableIsComplete) {
    const auto& s = simd::scalar_kernels();
    EXPECT_EQ(s.backend, simd::Backend::scalar);
    EXPECT_NE(s.dot, nullptr);
    EXPECT_NE(s.axpy, nullptr);
    EXPECT_NE(s.gemv, nullptr);
    EXPECT_NE(s.gemv_t, nullptr);
    EXPECT_NE(s.rotate, nullptr);
}

TEST(Simd, ScalarDotMatchesLongDouble) {
    const auto& s = simd::scalar_kernels();
    for (std::size_t n : kSizes) {
        const auto a = randn(n, 1 + n), b = randn(n, 1000 + n);
        long double ref = 0;
        for (std::size_t i = 0; i < n; ++i) ref += static_cast<long double>(a[i]) * b[i];
        EXPECT_NEAR(s.dot(a.data(), b.data(), n), static_cast<double>(ref), 1e-12) << n;
    }
}

TEST(Simd, DotEquivalence) {
    const auto* v = simd::avx2_kernels();
    if (!v) GTEST_SKIP() << "AVX2 unavailable";
    const auto& s = simd::scalar_kernels();
    for (std::size_t n : kSizes) {
        const auto a = randn(n, 2 + n), b = randn(n, 2000 + n);
        const double ref = s.dot(a.data(), b.data(), n);
        EXPECT_NEAR(v->dot(a.data(), b.data(), n), ref, 1e-13 * (1 + std::sqrt(double(n)))) << n;
    }
}

TEST(Simd, AxpyEquivalence) {
    const auto* v = simd::avx2_kernels();
    if (!v) GTEST_SKIP() << "AVX2 unavailable";
    const auto& s = simd::scalar_kernels();
    for (std::size_t n : kSizes) {
        const auto x = randn(n, 3 + n);
        auto y1 = randn(n, 3000 + n), y2 = y1;
        s.axpy(-0.37, x.data(), y1.data(), n);
        v->axpy(-0.37, x.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-15 * (1 + std::abs(y1[i])));
    }
}

TEST(Simd, GemvEquivalence) {
    const auto* v = simd::avx2_kernels();
    if (!v) GTEST_SKIP() << "AVX2 unavailable";
    const auto& s = simd::scalar_kernels();
    for (std::size_t rows : {1, 5, 16, 33}) {
        for (std::size_t cols : {1, 4, 17, 65}) {
            const auto a = randn(rows * cols, rows * 100 + cols);
            const auto x = randn(cols, 7 + cols), xt = randn(rows, 9 + rows);
            std::vector<double> y1(rows), y2(rows), z1(cols), z2(cols);
            s.gemv(a.data(), rows, cols, x.data(), y1.data());
            v->gemv(a.data(), rows, cols, x.data(), y2.data());
            s.gemv_t(a.data(), rows, cols, xt.data(), z1.data());
            v->gemv_t(a.data(), rows, cols, xt.data(), z2.data());
            for (std::size_t i = 0; i < rows; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-12);
            for (std::size_t j = 0; j < cols; ++j) EXPECT_NEAR(z1[j], z2[j], 1e-12);
        }
    }
}

TEST(Simd, GemvMatchesHandProduct) {
    const auto& s = simd::scalar_kernels();
    const double a[] = {1, 2, 3, 4, 5, 6};  // 2 x 3
    const double x[] = {1, 0, -1};
    const double xt[] = {2, -1};
    double y[2], z[3];
    s.gemv(a, 2, 3, x, y);
    s.gemv_t(a, 2, 3, xt, z);
    EXPECT_DOUBLE_EQ(y[0], -2);
    EXPECT_DOUBLE_EQ(y[1], -2);
    EXPECT_DOUBLE_EQ(z[0], -2);
    EXPECT_DOUBLE_EQ(z[1], -1);
    EXPECT_DOUBLE_EQ(z[2], 0);
}

TEST(Simd, RotateEquivalence) {
    const auto* v = simd::avx2_kernels();
    if (!v) GTEST_SKIP() << "AVX2 unavailable";
    const auto& s = simd::scalar_kernels();
    const double th = 0.7, c = std::cos(th), sn = std::sin(th);
    for (std::size_t n : kSizes) {
        auto x1 = randn(n, 4 + n), y1 = randn(n, 4000 + n);
        auto x2 = x1, y2 = y1;
        s.rotate(x1.data(), y1.data(), n, c, sn);
        v->rotate(x2.data(), y2.data(), n, c, sn);
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_NEAR(x1[i], x2[i], 1e-15 * 4);
            EXPECT_NEAR(y1[i], y2[i], 1e-15 * 4);
        }
    }
}

TEST(Simd, RotatePreservesNorms) {
    const auto& s = simd::scalar_kernels();
    auto x = randn(20, 5), y = randn(20, 6);
    const double before = s.dot(x.data(), x.data(), 20) + s.dot(y.data(), y.data(), 20);
    s.rotate(x.data(), y.data(), 20, std::cos(1.1), std::sin(1.1));
    const double after = s.dot(x.data(), x.data(), 20) + s.dot(y.data(), y.data(), 20);
    EXPECT_NEAR(before, after, 1e-12);
}

TEST(Simd, SelectSwitchesAndRestores) {
    const simd::Backend original = simd::active().backend;
    EXPECT_EQ(simd::select(simd::Backend::scalar), simd::Backend::scalar);
    EXPECT_EQ(simd::active().backend, simd::Backend::scalar);
    const simd::Backend got = simd::select(simd::Backend::avx2);
    EXPECT_EQ(got, simd::avx2_kernels() ? simd::Backend::avx2 : simd::Backend::scalar);
    simd::select(original);
}
