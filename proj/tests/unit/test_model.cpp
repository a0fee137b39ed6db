#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "spiked/model.hpp"
#include "spiked/rng.hpp"
#include "spiked/spectral.hpp"
#include "spiked/tensor.hpp"

using namespace spiked;

namespace {

double dotv(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

struct Moments {
    double mean = 0, var = 0;
};

Moments moments(const std::vector<double>& xs) {
    Moments m;
    for (double x : xs) m.mean += x;
    m.mean /= xs.size();
    for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
    m.var /= xs.size() - 1;
    return m;
}

}  // namespace

TEST(Rng, DeterministicAndSeedSensitive) {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.normal(), b.normal());
    Rng d(42), e(43);
    EXPECT_NE(d.normal(), e.normal());
}

TEST(Rng, NormalMoments) {
    Rng rng(7);
    std::vector<double> xs(200000);
    rng.fill_normal(xs);
    const Moments m = moments(xs);
    EXPECT_NEAR(m.mean, 0.0, 0.01);
    EXPECT_NEAR(m.var, 1.0, 0.01);
}

TEST(Rng, DerivedSeedsDependOnEveryKey) {
    const auto base = derive_seed(1, {2, 3, 4});
    EXPECT_EQ(base, derive_seed(1, {2, 3, 4}));
    EXPECT_NE(base, derive_seed(2, {2, 3, 4}));
    EXPECT_NE(base, derive_seed(1, {3, 2, 4}));
    EXPECT_NE(base, derive_seed(1, {2, 3, 5}));
    EXPECT_NE(base, derive_seed(1, {2, 3}));
    EXPECT_EQ(double_key(0.0), double_key(-0.0));
    EXPECT_NE(double_key(1.0), double_key(1.0000000000000002));
    EXPECT_NE(tag_key("instance"), tag_key("algorithm"));
}

TEST(SampleV0, UnitAndUniform) {
    Rng rng(1);
    const Vec a = sample_v0(10, rng);
    EXPECT_NEAR(norm(a), 1.0, 1e-12);
    Rng other(2);
    const Vec b = sample_v0(10, other);
    EXPECT_NE(a, b);

    const std::size_t n = 20;
    std::vector<double> first(4000);
    for (double& x : first) x = sample_v0(n, rng)[0];
    const Moments m = moments(first);
    EXPECT_NEAR(m.mean, 0.0, 0.02);
    EXPECT_NEAR(m.var, 1.0 / n, 0.1 / n);
    EXPECT_THROW(sample_v0(1, rng), std::invalid_argument);
}

TEST(SampleSpiked, DeterministicGivenSeed) {
    Rng a(5), b(5);
    const SpikedInstance x = sample_spiked(3, 8, 2.0, a);
    const SpikedInstance y = sample_spiked(3, 8, 2.0, b);
    EXPECT_EQ(x.v0, y.v0);
    ASSERT_EQ(x.x.size(), y.x.size());
    EXPECT_TRUE(std::equal(x.x.data().begin(), x.x.data().end(), y.x.data().begin()));
}

TEST(SampleSpiked, SymmetricNoiseIsExactlySymmetric) {
    Rng rng(6);
    const SpikedInstance inst = sample_spiked(4, 5, 1.5, rng);
    const std::size_t n = 5;
    std::array<std::size_t, 4> idx{};
    for (idx[0] = 0; idx[0] < n; ++idx[0])
        for (idx[1] = 0; idx[1] < n; ++idx[1])
            for (idx[2] = 0; idx[2] < n; ++idx[2])
                for (idx[3] = 0; idx[3] < n; ++idx[3]) {
                    auto p = idx;
                    const double ref = inst.x.at(p);
                    std::sort(p.begin(), p.end());
                    do EXPECT_EQ(inst.x.at(p), ref);
                    while (std::next_permutation(p.begin(), p.end()));
                }
}

TEST(SampleSpiked, StorageReuseGivesSameInstance) {
    Rng a(8), b(8);
    const Vec v0a = sample_v0(12, a), v0b = sample_v0(12, b);
    const SpikedInstance x = sample_spiked_with(3, 2.0, v0a, a);
    std::vector<double> junk(12 * 12 * 12, 3.0);
    const SpikedInstance y = sample_spiked_with(3, 2.0, v0b, b, NoiseKind::symmetric, std::move(junk));
    EXPECT_TRUE(std::equal(x.x.data().begin(), x.x.data().end(), y.x.data().begin()));
}

TEST(SampleSpiked, AsymmetricIsSpikePlusScaledGaussian) {
    Rng rng(9);
    const SpikedInstance inst = sample_spiked(3, 10, 0.0, rng, NoiseKind::asymmetric);
    std::vector<double> xs(inst.x.data().begin(), inst.x.data().end());
    const Moments m = moments(xs);
    EXPECT_NEAR(m.var, 0.1, 0.01);
    // Not symmetric in general.
    const std::array<std::size_t, 3> a{0, 1, 2}, b{2, 1, 0};
    EXPECT_NE(inst.x.at(a), inst.x.at(b));
}

TEST(SampleSpiked, NoiseLaw) {
    // Distinct-index entries have variance 1/(n (k-1)!), and the form
    // <Z, v^{(x)k}> has variance k/n for a fixed unit v.
    const int k = 3;
    const std::size_t n = 10;
    Rng vrng(100);
    const Vec v = vrng.unit_sphere(n);
    std::vector<double> entry, form;
    for (int s = 0; s < 400; ++s) {
        Rng rng(derive_seed(1, {static_cast<std::uint64_t>(s)}));
        const SpikedInstance inst = sample_spiked(k, n, 0.0, rng);
        const std::array<std::size_t, 3> idx{1, 4, 7};
        entry.push_back(inst.x.at(idx));
        form.push_back(multilinear_form(inst.x, v));
    }
    EXPECT_NEAR(moments(entry).var, 1.0 / (n * 2), 0.2 * 0.05);
    EXPECT_NEAR(moments(form).var, double(k) / n, 0.2 * 0.3);
}

TEST(SampleSpiked, HugeBetaIsRecovered) {
    Rng rng(10);
    const SpikedInstance inst = sample_spiked(3, 20, 1e6, rng);
    const OperatorNormEstimate est = operator_norm_estimate(inst.x, 2, 100, rng);
    EXPECT_GT(correlation(est.argmax, inst.v0), 0.999);
}

TEST(Loss, Identities) {
    Rng rng(11);
    for (int i = 0; i < 50; ++i) {
        const Vec a = rng.unit_sphere(6), b = rng.unit_sphere(6);
        double dm = 0, dp = 0;
        for (std::size_t j = 0; j < 6; ++j) {
            dm += (a[j] - b[j]) * (a[j] - b[j]);
            dp += (a[j] + b[j]) * (a[j] + b[j]);
        }
        EXPECT_NEAR(loss(a, b), std::min(dm, dp), 1e-12);
        EXPECT_EQ(loss(a, b) + 2 * correlation(a, b), 2.0);
    }
    const Vec v = rng.unit_sphere(4);
    Vec neg = v;
    for (double& x : neg) x = -x;
    EXPECT_NEAR(loss(v, v), 0.0, 1e-15);
    EXPECT_NEAR(loss(v, neg), 0.0, 1e-15);
    const Vec e1{1, 0}, e2{0, 1};
    EXPECT_EQ(loss(e1, e2), 2.0);
    EXPECT_EQ(correlation(e1, e2), 0.0);
    EXPECT_THROW(loss(Vec{1, 1}, e1), std::invalid_argument);
}

TEST(SideInfo, Moments) {
    Rng rng(12);
    const std::size_t n = 50;
    const Vec v0 = sample_v0(n, rng);
    std::vector<double> proj, sq;
    for (int i = 0; i < 2000; ++i) {
        const SideInfo s = sample_side_info(v0, 0.7, rng);
        proj.push_back(dotv(s.y, v0));
    }
    const Moments m = moments(proj);
    EXPECT_NEAR(m.mean, 0.7, 0.015);
    EXPECT_NEAR(m.var, 1.0 / n, 0.1 / n);

    std::vector<double> null_proj;
    for (int i = 0; i < 500; ++i) {
        const SideInfo s = sample_side_info(v0, 0.0, rng);
        sq.push_back(dotv(s.y, s.y));
        null_proj.push_back(dotv(s.y, v0));
    }
    EXPECT_NEAR(moments(sq).mean, 1.0, 0.04);
    EXPECT_NEAR(moments(null_proj).mean, 0.0, 0.03);

    const SideInfo big = sample_side_info(v0, 1e8, rng);
    EXPECT_GT(dotv(big.y, v0) / norm(big.y), 1 - 1e-12);
    EXPECT_THROW(sample_side_info(v0, -1.0, rng), std::invalid_argument);
}

TEST(MatrixObservation, SymmetricAndSpectral) {
    Rng rng(13);
    const std::size_t n = 500;
    const Vec v0 = sample_v0(n, rng);
    const MatrixObservation obs = sample_matrix_observation(v0, 2.0, rng);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) ASSERT_EQ(obs.m(i, j), obs.m(j, i));
    const Vec top = leading_eigenvector(obs.m, rng);
    EXPECT_NEAR(correlation(top, v0), std::sqrt(0.75), 0.05);

    const Vec w0 = sample_v0(200, rng);
    const MatrixObservation null = sample_matrix_observation(w0, 0.0, rng);
    EXPECT_LT(correlation(leading_eigenvector(null.m, rng), w0), 0.3);
}
