#pragma once

// Dense linear algebra needed by the estimators: the dominant singular
// pair of a rectangular matrix, symmetric eigendecomposition by cyclic
// Jacobi, and projection onto the positive semidefinite cone.

#include "spiked/tensor.hpp"

namespace spiked {

class Rng;

struct SingularTriple {
    double sigma = 0.0;
    Vec u;  // left, length rows
    Vec w;  // right, length cols; largest-magnitude entry positive
    int iters = 0;
    bool converged = false;
};

/// Power method on the Gram operator. When min(rows, cols) is small the
/// Gram matrix of that side is formed explicitly; otherwise u and w are
/// updated alternately. Convergence: successive iterates of the iterated
/// side have |correlation| >= 1 - tol. Throws on a zero matrix.
SingularTriple top_singular(const Mat& m, double tol, int max_iter, Rng& rng);
inline constexpr double kSvdTol = 1e-10;
inline constexpr int kSvdMaxIter = 1000;

struct SymEigen {
    Vec values;   // descending
    Mat vectors;  // column j is the eigenvector of values[j]
    int sweeps = 0;
};

/// Cyclic Jacobi. Throws std::invalid_argument if |A - A^T| exceeds 1e-10
/// (relative to the largest entry).
SymEigen sym_eigen(const Mat& a);

/// Eigenvector of the algebraically largest eigenvalue of a symmetric
/// matrix, unit norm, largest-magnitude entry positive.
Vec leading_eigenvector(const Mat& a, Rng& rng);

/// Nearest PSD matrix (Frobenius) to the n x n matrix reshape(w), after
/// taking its symmetric part; returned flattened with the same layout.
Vec psd_project(std::span<const double> w, std::size_t n);

}  // namespace spiked
