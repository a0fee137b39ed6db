#pragma once

// Dense order-k tensors over R^n and the multilinear algebra built on them.
//
// Storage is flat row-major with 0-based indices: (i_1,...,i_k) lives at
// sum_j i_j * n^(k-j), so the last index is contiguous.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace spiked {

class Rng;

using Vec = std::vector<double>;

struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major, rows * cols

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    Mat(std::size_t r, std::size_t c, std::vector<double> d);

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

std::size_t ipow(std::size_t base, int exp);

/// Number of k-subsets of an n-set; 0 when k > n.
std::size_t binomial(std::size_t n, int k);

class DenseTensor {
public:
    DenseTensor() = default;
    DenseTensor(int k, std::size_t n);  // zero tensor
    DenseTensor(int k, std::size_t n, std::vector<double> entries);

    /// Zero tensor built in `storage`, reusing its allocation.
    static DenseTensor zeros_in(int k, std::size_t n, std::vector<double> storage);

    /// Hands back the entry buffer, leaving an empty tensor.
    std::vector<double> release() &&;

    int order() const { return k_; }
    std::size_t dim() const { return n_; }
    std::size_t size() const { return data_.size(); }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    std::size_t offset(std::span<const std::size_t> idx) const;
    double at(std::span<const std::size_t> idx) const { return data_[offset(idx)]; }
    double& at(std::span<const std::size_t> idx) { return data_[offset(idx)]; }

private:
    int k_ = 0;
    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// A DenseTensor that is exactly invariant under index permutations. Only
/// the factory functions below and symmetry-preserving updates create one.
class SymmetricTensor : public DenseTensor {
public:
    SymmetricTensor() = default;

    /// X += alpha * v^{(x)k}; keeps exact symmetry.
    void add_outer_power(double alpha, std::span<const double> v);

    friend SymmetricTensor outer_power(std::span<const double> v, int k);
    friend SymmetricTensor symmetrize_add_outer_power(DenseTensor g, double scale, double alpha,
                                                      std::span<const double> v);

private:
    explicit SymmetricTensor(DenseTensor t) : DenseTensor(std::move(t)) {}
};

/// Calls fn(sorted, offsets) once per permutation orbit of index tuples:
/// `sorted` is the non-decreasing representative and `offsets` are the flat
/// offsets of its distinct permutations (representative first).
void for_each_orbit(int k, std::size_t n,
                    const std::function<void(std::span<const std::size_t>,
                                             std::span<const std::size_t>)>& fn);

/// X{v}_i = sum X_{i,j_1..j_{k-1}} v_{j_1} ... v_{j_{k-1}}
Vec contract(const DenseTensor& x, std::span<const double> v);

double inner(const DenseTensor& x, const DenseTensor& y);
double frobenius(const DenseTensor& x);

/// <X, v^{(x)k}>
double multilinear_form(const DenseTensor& x, std::span<const double> v);

SymmetricTensor outer_power(std::span<const double> v, int k);

/// scale * (1/k!) * sum over permutations of g. Consumes g.
SymmetricTensor symmetrize(DenseTensor g, double scale);

/// symmetrize(g, scale) followed by add_outer_power(alpha, v), in one pass.
SymmetricTensor symmetrize_add_outer_power(DenseTensor g, double scale, double alpha,
                                           std::span<const double> v);

/// n^q x n^(k-q) unfolding. With 1-based indices the row is
/// 1 + sum_{j<=q} (i_j - 1) n^(j-1) and the column is
/// 1 + sum_{j>q} (i_j - 1) n^(j-q-1); the first index of each group varies
/// fastest.
Mat matricize(const DenseTensor& x, int q);

/// Entry (i,j) = w[i + j*rows] (0-based).
Mat reshape_vec_to_matrix(std::span<const double> w, std::size_t rows);

/// Entries with strictly increasing indices, lexicographic order.
Vec strict_upper_embed(const DenseTensor& x);

struct OperatorNormEstimate {
    double value = 0.0;   // max |<X, v^{(x)k}>| over restarts
    Vec argmax;
    int iterations = 0;   // total contractions over all restarts
};

/// Lower bound on the operator norm by multi-restart power iteration.
/// Restarts draw from `rng` in order, so a longer run extends a shorter one.
OperatorNormEstimate operator_norm_estimate(const DenseTensor& x, int restarts, int iters,
                                            Rng& rng, double tol = 1e-8);

// Small vector helpers shared across modules.
double norm(std::span<const double> v);
void scale_in_place(std::span<double> v, double s);
/// Divides by the norm; throws std::domain_error on a zero vector.
void normalize(std::span<double> v);
/// Flips v so its largest-magnitude entry is positive.
void canonicalize_sign(std::span<double> v);

}  // namespace spiked
