#include "spiked/model.hpp"

#include <cmath>
#include <algorithm>
#include <stdexcept>
#include <string>

#include "spiked/rng.hpp"
#include "spiked/simd/kernels.hpp"

namespace spiked {

namespace {

constexpr double kUnitTol = 1e-9;

void require_unit(std::span<const double> v, const char* what) {
    if (std::abs(norm(v) - 1.0) > kUnitTol)
        throw std::invalid_argument(std::string(what) + ": input is not a unit vector");
}

}  // namespace

Vec sample_v0(std::size_t n, Rng& rng) {
    if (n < 2) throw std::invalid_argument("sample_v0: n must be >= 2");
    return rng.unit_sphere(n);
}

SpikedInstance sample_spiked_with(int k, double beta, Vec v0, Rng& rng, NoiseKind noise,
                                  std::vector<double> storage) {
    const std::size_t n = v0.size();
    if (k < 2) throw std::invalid_argument("sample_spiked: k must be >= 2");
    if (n < 2) throw std::invalid_argument("sample_spiked: n must be >= 2");
    if (!(beta >= 0.0)) throw std::invalid_argument("sample_spiked: beta must be >= 0");

    SpikedInstance inst;
    inst.k = k;
    inst.n = n;
    inst.beta = beta;
    inst.noise = noise;
    inst.seed = rng.seed();

    DenseTensor g = DenseTensor::zeros_in(k, n, std::move(storage));
    rng.fill_normal(g.data());
    if (noise == NoiseKind::symmetric) {
        inst.x = symmetrize_add_outer_power(std::move(g), std::sqrt(static_cast<double>(k) / n),
                                            beta, v0);
    } else {
        auto d = g.data();
        scale_in_place(d, 1.0 / std::sqrt(static_cast<double>(n)));
        if (beta != 0.0) {
            const SymmetricTensor s = outer_power(v0, k);
            simd::axpy(beta, s.data(), d);
        }
        inst.x = std::move(g);
    }
    inst.v0 = std::move(v0);
    return inst;
}

SpikedInstance sample_spiked(int k, std::size_t n, double beta, Rng& rng, NoiseKind noise) {
    Vec v0 = sample_v0(n, rng);
    return sample_spiked_with(k, beta, std::move(v0), rng, noise);
}

double correlation(std::span<const double> vhat, std::span<const double> v0) {
    if (vhat.size() != v0.size()) throw std::invalid_argument("correlation: length mismatch");
    require_unit(vhat, "correlation");
    require_unit(v0, "correlation");
    return std::min(1.0, std::abs(simd::dot(vhat, v0)));
}

double loss(std::span<const double> vhat, std::span<const double> v0) {
    return 2.0 - 2.0 * correlation(vhat, v0);
}

SideInfo sample_side_info(std::span<const double> v0, double gamma, Rng& rng) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("sample_side_info: gamma must be >= 0");
    const double sd = 1.0 / std::sqrt(static_cast<double>(v0.size()));
    SideInfo s{gamma, Vec(v0.size())};
    for (std::size_t i = 0; i < v0.size(); ++i) s.y[i] = gamma * v0[i] + sd * rng.normal();
    return s;
}

MatrixObservation sample_matrix_observation(std::span<const double> v0, double lambda, Rng& rng) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("sample_matrix_observation: lambda must be >= 0");
    const std::size_t n = v0.size();
    const double sd = 1.0 / std::sqrt(static_cast<double>(n));
    MatrixObservation obs{lambda, Mat(n, n)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const double val = lambda * v0[i] * v0[j] + sd * rng.normal();
            obs.m(i, j) = val;
            obs.m(j, i) = val;
        }
    return obs;
}

}  // namespace spiked
