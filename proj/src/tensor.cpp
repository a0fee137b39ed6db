#include "spiked/tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "spiked/rng.hpp"
#include "spiked/simd/kernels.hpp"

namespace spiked {

Mat::Mat(std::size_t r, std::size_t c, std::vector<double> d) : rows(r), cols(c), data(std::move(d)) {
    if (data.size() != r * c) throw std::invalid_argument("Mat: data length != rows*cols");
}

std::size_t ipow(std::size_t base, int exp) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

std::size_t binomial(std::size_t n, int k) {
    if (k < 0 || static_cast<std::size_t>(k) > n) return 0;
    std::size_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - static_cast<std::size_t>(k) + i) / i;
    return r;
}

namespace {

void check_shape(int k, std::size_t n) {
    if (k < 1) throw std::invalid_argument("tensor order must be >= 1");
    if (n < 1) throw std::invalid_argument("tensor dimension must be >= 1");
}

}  // namespace

DenseTensor::DenseTensor(int k, std::size_t n) : k_(k), n_(n) {
    check_shape(k, n);
    data_.assign(ipow(n, k), 0.0);
}

DenseTensor::DenseTensor(int k, std::size_t n, std::vector<double> entries)
    : k_(k), n_(n), data_(std::move(entries)) {
    check_shape(k, n);
    if (data_.size() != ipow(n, k))
        throw std::invalid_argument("DenseTensor: expected " + std::to_string(ipow(n, k)) +
                                    " entries, got " + std::to_string(data_.size()));
    for (double x : data_)
        if (!std::isfinite(x)) throw std::invalid_argument("DenseTensor: non-finite entry");
}

DenseTensor DenseTensor::zeros_in(int k, std::size_t n, std::vector<double> storage) {
    check_shape(k, n);
    DenseTensor t;
    t.k_ = k;
    t.n_ = n;
    t.data_ = std::move(storage);
    t.data_.assign(ipow(n, k), 0.0);
    return t;
}

std::vector<double> DenseTensor::release() && {
    k_ = 0;
    n_ = 0;
    return std::move(data_);
}

std::size_t DenseTensor::offset(std::span<const std::size_t> idx) const {
    if (idx.size() != static_cast<std::size_t>(k_))
        throw std::invalid_argument("DenseTensor::offset: wrong number of indices");
    std::size_t off = 0;
    for (std::size_t i : idx) {
        if (i >= n_) throw std::out_of_range("DenseTensor::offset: index out of range");
        off = off * n_ + i;
    }
    return off;
}

namespace {

// k = 3 orbits visited in cubic tiles so that the six permuted offsets of a
// tile stay cache resident.
template <class Fn>
void orbits_order3(std::size_t n, Fn&& fn) {
    constexpr std::size_t kTile = 24;
    const std::size_t nn = n * n;
    std::array<std::size_t, 3> s{};
    std::array<std::size_t, 6> off{};
    for (std::size_t bi = 0; bi < n; bi += kTile)
        for (std::size_t bj = bi; bj < n; bj += kTile)
            for (std::size_t bl = bj; bl < n; bl += kTile) {
                const std::size_t ei = std::min(n, bi + kTile);
                const std::size_t ej = std::min(n, bj + kTile);
                const std::size_t el = std::min(n, bl + kTile);
                for (std::size_t i = bi; i < ei; ++i)
                    for (std::size_t j = std::max(i, bj); j < ej; ++j)
                        for (std::size_t l = std::max(j, bl); l < el; ++l) {
                            s = {i, j, l};
                            std::size_t m = 0;
                            off[m++] = i * nn + j * n + l;
                            if (i == j && j == l) {
                            } else if (i == j) {
                                off[m++] = i * nn + l * n + j;
                                off[m++] = l * nn + i * n + j;
                            } else if (j == l) {
                                off[m++] = j * nn + i * n + l;
                                off[m++] = j * nn + l * n + i;
                            } else {
                                off[m++] = i * nn + l * n + j;
                                off[m++] = j * nn + i * n + l;
                                off[m++] = j * nn + l * n + i;
                                off[m++] = l * nn + i * n + j;
                                off[m++] = l * nn + j * n + i;
                            }
                            fn(std::span<const std::size_t>(s.data(), 3),
                               std::span<const std::size_t>(off.data(), m));
                        }
            }
}

template <class Fn>
void orbits(int k, std::size_t n, Fn&& fn) {
    check_shape(k, n);
    if (k == 3) {
        orbits_order3(n, fn);
        return;
    }
    const auto ku = static_cast<std::size_t>(k);
    std::vector<std::size_t> sorted(ku, 0), perm(ku);
    std::vector<std::size_t> offs;
    while (true) {
        offs.clear();
        perm = sorted;
        do {
            std::size_t off = 0;
            for (std::size_t i : perm) off = off * n + i;
            offs.push_back(off);
        } while (std::next_permutation(perm.begin(), perm.end()));
        fn(std::span<const std::size_t>(sorted), std::span<const std::size_t>(offs));

        // Next non-decreasing tuple.
        std::size_t pos = ku;
        while (pos > 0 && sorted[pos - 1] == n - 1) --pos;
        if (pos == 0) break;
        const std::size_t v = sorted[pos - 1] + 1;
        for (std::size_t j = pos - 1; j < ku; ++j) sorted[j] = v;
    }
}

}  // namespace

void for_each_orbit(int k, std::size_t n,
                    const std::function<void(std::span<const std::size_t>,
                                             std::span<const std::size_t>)>& fn) {
    orbits(k, n, fn);
}

Vec contract(const DenseTensor& x, std::span<const double> v) {
    const std::size_t n = x.dim();
    if (v.size() != n) throw std::invalid_argument("contract: vector length != tensor dimension");
    const auto& kt = simd::active();
    const int k = x.order();
    if (k == 1) return Vec(x.data().begin(), x.data().end());
    // Peel off the last index repeatedly; the first pass reads the tensor once.
    std::size_t rows = x.size() / n;
    Vec cur(rows);
    kt.gemv(x.data().data(), rows, n, v.data(), cur.data());
    for (int step = 1; step < k - 1; ++step) {
        rows /= n;
        Vec next(rows);
        kt.gemv(cur.data(), rows, n, v.data(), next.data());
        cur.swap(next);
    }
    return cur;
}

double inner(const DenseTensor& x, const DenseTensor& y) {
    if (x.order() != y.order() || x.dim() != y.dim())
        throw std::invalid_argument("inner: shape mismatch");
    return simd::dot(x.data(), y.data());
}

double frobenius(const DenseTensor& x) { return std::sqrt(simd::norm_sq(x.data())); }

double multilinear_form(const DenseTensor& x, std::span<const double> v) {
    const Vec xv = contract(x, v);
    return simd::dot(xv, v);
}

void SymmetricTensor::add_outer_power(double alpha, std::span<const double> v) {
    if (v.size() != dim()) throw std::invalid_argument("add_outer_power: length mismatch");
    auto d = data();
    orbits(order(), dim(),
                   [&](std::span<const std::size_t> s, std::span<const std::size_t> offs) {
                       double p = alpha;
                       for (std::size_t i : s) p *= v[i];
                       // All entries of an orbit hold the same value, so the
                       // same update keeps them equal.
                       const double val = d[offs[0]] + p;
                       for (std::size_t o : offs) d[o] = val;
                   });
}

SymmetricTensor outer_power(std::span<const double> v, int k) {
    if (v.empty()) throw std::invalid_argument("outer_power: empty vector");
    SymmetricTensor t{DenseTensor(k, v.size())};
    t.add_outer_power(1.0, v);
    return t;
}

SymmetricTensor symmetrize(DenseTensor g, double scale) {
    return symmetrize_add_outer_power(std::move(g), scale, 0.0, {});
}

SymmetricTensor symmetrize_add_outer_power(DenseTensor g, double scale, double alpha,
                                           std::span<const double> v) {
    if (alpha != 0.0 && v.size() != g.dim())
        throw std::invalid_argument("symmetrize_add_outer_power: length mismatch");
    auto d = g.data();
    orbits(g.order(), g.dim(), [&](std::span<const std::size_t> s, std::span<const std::size_t> offs) {
        // Mean over distinct arrangements equals the mean over all k!
        // permutations (each arrangement repeats equally often).
        double sum = 0.0;
        for (std::size_t o : offs) sum += d[o];
        double val = scale * (sum / static_cast<double>(offs.size()));
        if (alpha != 0.0) {
            double p = alpha;
            for (std::size_t i : s) p *= v[i];
            val += p;
        }
        for (std::size_t o : offs) d[o] = val;
    });
    return SymmetricTensor{std::move(g)};
}

Mat matricize(const DenseTensor& x, int q) {
    const int k = x.order();
    if (q < 1 || q > k - 1)
        throw std::invalid_argument("matricize: q must lie in [1, k-1]");
    const std::size_t n = x.dim();
    const std::size_t rows = ipow(n, q), cols = ipow(n, k - q);
    Mat m(rows, cols);

    // Destination stride contributed by each tensor index position.
    std::vector<std::size_t> stride(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j)
        stride[static_cast<std::size_t>(j)] = j < q ? ipow(n, j) * cols : ipow(n, j - q);

    const auto src = x.data();
    std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
    std::size_t dst = 0;
    const std::size_t last = static_cast<std::size_t>(k - 1);
    for (std::size_t off = 0; off < src.size(); ++off) {
        m.data[dst] = src[off];
        // Odometer over row-major source order, last index fastest.
        std::size_t p = last;
        while (true) {
            ++idx[p];
            dst += stride[p];
            if (idx[p] < n || p == 0) break;
            dst -= n * stride[p];
            idx[p] = 0;
            --p;
        }
    }
    return m;
}

Mat reshape_vec_to_matrix(std::span<const double> w, std::size_t rows) {
    if (rows == 0 || w.size() % rows != 0)
        throw std::invalid_argument("reshape_vec_to_matrix: length not divisible by rows");
    const std::size_t cols = w.size() / rows;
    Mat m(rows, cols);
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i) m(i, j) = w[i + j * rows];
    return m;
}

Vec strict_upper_embed(const DenseTensor& x) {
    const int k = x.order();
    const std::size_t n = x.dim();
    Vec out;
    if (static_cast<std::size_t>(k) > n) return out;
    out.reserve(binomial(n, k));
    std::vector<std::size_t> idx(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) idx[static_cast<std::size_t>(j)] = static_cast<std::size_t>(j);
    while (true) {
        out.push_back(x.at(idx));
        int p = k - 1;
        while (p >= 0 && idx[static_cast<std::size_t>(p)] == n - static_cast<std::size_t>(k - p)) --p;
        if (p < 0) break;
        ++idx[static_cast<std::size_t>(p)];
        for (int j = p + 1; j < k; ++j)
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

double norm(std::span<const double> v) { return std::sqrt(simd::norm_sq(v)); }

void scale_in_place(std::span<double> v, double s) {
    for (double& x : v) x *= s;
}

void normalize(std::span<double> v) {
    const double nv = norm(v);
    if (!(nv > 0.0) || !std::isfinite(nv)) throw std::domain_error("normalize: zero or non-finite vector");
    scale_in_place(v, 1.0 / nv);
}

void canonicalize_sign(std::span<double> v) {
    if (v.empty()) return;
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[best])) best = i;
    if (v[best] < 0.0) scale_in_place(v, -1.0);
}

OperatorNormEstimate operator_norm_estimate(const DenseTensor& x, int restarts, int iters,
                                            Rng& rng, double tol) {
    if (restarts < 1) throw std::invalid_argument("operator_norm_estimate: restarts must be >= 1");
    OperatorNormEstimate best;
    best.value = -1.0;
    const std::size_t n = x.dim();
    for (int r = 0; r < restarts; ++r) {
        Vec v = rng.unit_sphere(n);
        for (int t = 0; t < iters; ++t) {
            Vec next = contract(x, v);
            ++best.iterations;
            const double nn = norm(next);
            if (!(nn > 0.0)) break;
            scale_in_place(next, 1.0 / nn);
            const double c = std::abs(simd::dot(next, v));
            v.swap(next);
            if (c >= 1.0 - tol) break;
        }
        const double val = std::abs(multilinear_form(x, v));
        if (val > best.value) {
            best.value = val;
            best.argmax = v;
        }
    }
    canonicalize_sign(best.argmax);
    return best;
}

}  // namespace spiked
