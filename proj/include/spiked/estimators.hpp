#pragma once

// Estimators of the spike direction from a single tensor observation.
//
// Every estimator returns a unit vector whose largest-magnitude entry is
// positive. When the true spike is passed in, correlation, loss and the
// per-iteration trajectory are filled; otherwise correlation/loss are NaN.

#include <optional>
#include <span>
#include <string_view>

#include "spiked/tensor.hpp"

namespace spiked {

class Rng;

struct EstimatorResult {
    Vec vhat;
    double correlation = 0.0;  // |<vhat, v0>|
    double loss = 0.0;         // 2 - 2 correlation
    int iterations = 0;
    double rayleigh = 0.0;     // |<X, vhat^{(x)k}>|
    Vec trajectory;            // signed <v^t / |v^t|, v0>, t = 0, 1, ...
    bool converged = true;
};

struct IterOptions {
    int max_iter = 100;
    double tol = 1e-8;
};

/// Fills correlation, loss and rayleigh from vhat (after sign canonicalization).
void finalize(EstimatorResult& r, const DenseTensor& x, std::span<const double> truth);

struct UnfoldPair {
    Vec u;  // length n^floor(k/2)
    Vec w;  // length n^ceil(k/2)
    double sigma = 0.0;
    bool converged = false;
    int iters = 0;
};

/// Top singular pair of matricize(X, floor(k/2)).
UnfoldPair unfold_estimate(const DenseTensor& x, Rng& rng);

/// Spike estimate from the left singular vector of the unfolding; for
/// k >= 4 the left vector is reshaped to n rows and its principal left
/// vector taken.
EstimatorResult unfold(const DenseTensor& x, Rng& rng, std::span<const double> truth = {});

/// Right vector of the unfolding reshaped to n rows; principal left vector.
EstimatorResult recursive_unfold(const DenseTensor& x, Rng& rng,
                                 std::span<const double> truth = {});

/// v <- X{v} / |X{v}| until |<v^{t+1}, v^t>| >= 1 - tol.
EstimatorResult power_iteration(const DenseTensor& x, std::span<const double> v_init,
                                const IterOptions& opt = {}, std::span<const double> truth = {});

/// Memory-term coefficient used by amp().
enum class AmpMemory {
    /// b_t = (k-1) <f(v^t), f(v^{t-1})>^(k-2) / |v^t|. The 1/|v^t| factor is
    /// the mean diagonal derivative of f(x) = x/|x|; with it the iterates
    /// follow state evolution.
    divergence,
    /// b_t = (k-1) <f(v^t), f(v^{t-1})>^(k-2) without the derivative factor.
    literal,
    /// b_t = 0 (plain power iteration on normalized iterates).
    none,
};

/// v^{t+1} = X{f(v^t)} - b_t f(v^{t-1}), f(x) = x/|x|, from v^0 = y and
/// f(v^{-1}) = 0.
EstimatorResult amp(const DenseTensor& x, std::span<const double> y, const IterOptions& opt = {},
                    std::span<const double> truth = {},
                    AmpMemory memory = AmpMemory::divergence);

/// k = 3 only. w^t = P_psd(Mat(X) v^t) with Mat the n^2 x n unfolding,
/// v^{t+1} = Mat(X)^T w^t normalized, from a random unit start.
EstimatorResult psd_constrained_pca(const DenseTensor& x, Rng& rng, const IterOptions& opt = {},
                                    std::span<const double> truth = {});

enum class Initializer { random, unfold, rec_unfold, psd };
enum class Iterator { power, amp };

std::optional<Initializer> parse_initializer(std::string_view s);

/// Initializer followed by an iterator; iterations are summed.
EstimatorResult warm_start(const DenseTensor& x, Initializer init, Iterator iter, Rng& rng,
                           const IterOptions& opt = {}, std::span<const double> truth = {});

/// Multi-restart power iteration keeping the largest |<X, v^{(x)k}>|.
EstimatorResult ml_bruteforce(const DenseTensor& x, int restarts, Rng& rng,
                              const IterOptions& opt = {}, std::span<const double> truth = {});

}  // namespace spiked
