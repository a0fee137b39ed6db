#include "spiked/rng.hpp"

#include <bit>
#include <cmath>

namespace spiked {

void Rng::fill_normal(std::span<double> out) {
    for (double& x : out) x = normal_(engine_);
}

Vec Rng::normal_vector(std::size_t n) {
    Vec v(n);
    fill_normal(v);
    return v;
}

Vec Rng::unit_sphere(std::size_t n) {
    while (true) {
        Vec v = normal_vector(n);
        const double nv = norm(v);
        if (nv > 0.0) {
            scale_in_place(v, 1.0 / nv);
            return v;
        }
    }
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = splitmix64(master);
    for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k));
    return h;
}

std::uint64_t double_key(double x) {
    if (x == 0.0) x = 0.0;  // fold -0.0 onto +0.0
    return std::bit_cast<std::uint64_t>(x);
}

std::uint64_t tag_key(std::string_view tag) {
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace spiked
