#pragma once

// Observation models: the spiked tensor, Gaussian side information about
// the spike, and a spiked Wigner matrix sharing the same spike.

#include <cstdint>

#include "spiked/tensor.hpp"

namespace spiked {

class Rng;

enum class NoiseKind { symmetric, asymmetric };

struct SpikedInstance {
    int k = 0;
    std::size_t n = 0;
    double beta = 0.0;
    Vec v0;
    DenseTensor x;
    NoiseKind noise = NoiseKind::symmetric;
    std::uint64_t seed = 0;
};

struct SideInfo {
    double gamma = 0.0;
    Vec y;
};

struct MatrixObservation {
    double lambda = 0.0;
    Mat m;  // exactly symmetric
};

Vec sample_v0(std::size_t n, Rng& rng);

/// X = beta v0^{(x)k} + noise. Symmetric noise is symmetrize(G, sqrt(k/n)),
/// asymmetric noise is G / sqrt(n), with G i.i.d. standard normal.
/// v0 is drawn first from `rng`, then G.
SpikedInstance sample_spiked(int k, std::size_t n, double beta, Rng& rng,
                             NoiseKind noise = NoiseKind::symmetric);

/// Same, with a caller-supplied unit spike. `storage` may carry the buffer
/// of a released tensor to avoid a fresh allocation.
SpikedInstance sample_spiked_with(int k, double beta, Vec v0, Rng& rng,
                                  NoiseKind noise = NoiseKind::symmetric,
                                  std::vector<double> storage = {});

/// |<vhat, v0>|. Both inputs must be unit vectors (1e-9).
double correlation(std::span<const double> vhat, std::span<const double> v0);
/// 2 - 2 |<vhat, v0>|.
double loss(std::span<const double> vhat, std::span<const double> v0);

/// y = gamma v0 + z, z ~ N(0, I/n).
SideInfo sample_side_info(std::span<const double> v0, double gamma, Rng& rng);

/// M = lambda v0 v0^T + N, N symmetric with N(0, 1/n) entries on and above
/// the diagonal.
MatrixObservation sample_matrix_observation(std::span<const double> v0, double lambda, Rng& rng);

}  // namespace spiked
