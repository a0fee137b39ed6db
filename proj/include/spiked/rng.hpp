#pragma once

// Seedable random source used by every sampler.
//
// Engine: boost::random::mt19937_64. Normals: boost::random::normal_distribution
// (ziggurat). Streams are reproducible within this implementation only.

#include <cstdint>
#include <string_view>
#include <initializer_list>
#include <span>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "spiked/tensor.hpp"

namespace spiked {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    void fill_normal(std::span<double> out);

    Vec normal_vector(std::size_t n);
    /// Uniform on the unit sphere: a normalized standard normal vector.
    Vec unit_sphere(std::size_t n);

private:
    std::uint64_t seed_;
    boost::random::mt19937_64 engine_;
    boost::random::normal_distribution<double> normal_;
    boost::random::uniform_01<double> uniform_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Folds keys into the master seed with a splitmix64 chain.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys);

/// Bit pattern of a double, for use as a seed key.
std::uint64_t double_key(double x);

/// Stable 64-bit tag from a short string.
std::uint64_t tag_key(std::string_view tag);

}  // namespace spiked
