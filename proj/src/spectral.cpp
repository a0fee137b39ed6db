#include "spiked/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "spiked/rng.hpp"
#include "spiked/simd/kernels.hpp"

namespace spiked {

namespace {

// Largest Gram side formed explicitly.
constexpr std::size_t kGramLimit = 400;

// G = M^T M (cols x cols), accumulated row by row.
Vec gram_cols(const Mat& m) {
    const auto& kt = simd::active();
    const std::size_t c = m.cols;
    Vec g(c * c, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* row = m.data.data() + r * c;
        for (std::size_t a = 0; a < c; ++a)
            if (row[a] != 0.0) kt.axpy(row[a], row + a, g.data() + a * c + a, c - a);
    }
    for (std::size_t a = 0; a < c; ++a)
        for (std::size_t b = 0; b < a; ++b) g[a * c + b] = g[b * c + a];
    return g;
}

// G = M M^T (rows x rows), one dot per pair.
Vec gram_rows(const Mat& m) {
    const auto& kt = simd::active();
    const std::size_t r = m.rows;
    Vec g(r * r, 0.0);
    for (std::size_t a = 0; a < r; ++a)
        for (std::size_t b = a; b < r; ++b) {
            const double d = kt.dot(m.data.data() + a * m.cols, m.data.data() + b * m.cols, m.cols);
            g[a * r + b] = d;
            g[b * r + a] = d;
        }
    return g;
}

// Dominant eigenvector of a PSD s x s matrix by power iteration.
Vec gram_power(const Vec& g, std::size_t s, double tol, int max_iter, Rng& rng, int& iters,
               bool& converged) {
    const auto& kt = simd::active();
    Vec x = rng.unit_sphere(s);
    Vec y(s);
    iters = 0;
    converged = false;
    for (int t = 0; t < max_iter; ++t) {
        kt.gemv(g.data(), s, s, x.data(), y.data());
        ++iters;
        const double ny = norm(y);
        if (!(ny > 0.0)) break;  // start orthogonal to the range; keep x
        scale_in_place(y, 1.0 / ny);
        const double c = std::abs(kt.dot(x.data(), y.data(), s));
        x.swap(y);
        if (c >= 1.0 - tol) {
            converged = true;
            break;
        }
    }
    return x;
}

}  // namespace

SingularTriple top_singular(const Mat& m, double tol, int max_iter, Rng& rng) {
    if (m.rows == 0 || m.cols == 0 || !(simd::norm_sq(m.data) > 0.0))
        throw std::invalid_argument("top_singular: zero matrix");
    const auto& kt = simd::active();
    SingularTriple out;
    out.u.assign(m.rows, 0.0);
    out.w.assign(m.cols, 0.0);

    if (std::min(m.rows, m.cols) < kGramLimit) {
        if (m.cols <= m.rows) {
            const Vec g = gram_cols(m);
            out.w = gram_power(g, m.cols, tol, max_iter, rng, out.iters, out.converged);
            kt.gemv(m.data.data(), m.rows, m.cols, out.w.data(), out.u.data());
            out.sigma = norm(out.u);
            if (out.sigma > 0.0) scale_in_place(out.u, 1.0 / out.sigma);
        } else {
            const Vec g = gram_rows(m);
            out.u = gram_power(g, m.rows, tol, max_iter, rng, out.iters, out.converged);
            kt.gemv_t(m.data.data(), m.rows, m.cols, out.u.data(), out.w.data());
            out.sigma = norm(out.w);
            if (out.sigma > 0.0) scale_in_place(out.w, 1.0 / out.sigma);
        }
    } else {
        out.w = rng.unit_sphere(m.cols);
        Vec w_next(m.cols);
        for (int t = 0; t < max_iter; ++t) {
            kt.gemv(m.data.data(), m.rows, m.cols, out.w.data(), out.u.data());
            const double nu = norm(out.u);
            if (!(nu > 0.0)) break;
            scale_in_place(out.u, 1.0 / nu);
            kt.gemv_t(m.data.data(), m.rows, m.cols, out.u.data(), w_next.data());
            ++out.iters;
            out.sigma = norm(w_next);
            scale_in_place(w_next, 1.0 / out.sigma);
            const double c = std::abs(kt.dot(w_next.data(), out.w.data(), m.cols));
            out.w.swap(w_next);
            if (c >= 1.0 - tol) {
                out.converged = true;
                break;
            }
        }
        // Make u consistent with the final w.
        kt.gemv(m.data.data(), m.rows, m.cols, out.w.data(), out.u.data());
        out.sigma = norm(out.u);
        if (out.sigma > 0.0) scale_in_place(out.u, 1.0 / out.sigma);
    }

    const std::size_t imax = static_cast<std::size_t>(
        std::max_element(out.w.begin(), out.w.end(),
                         [](double a, double b) { return std::abs(a) < std::abs(b); }) -
        out.w.begin());
    if (out.w[imax] < 0.0) {
        scale_in_place(out.w, -1.0);
        scale_in_place(out.u, -1.0);
    }
    return out;
}

SymEigen sym_eigen(const Mat& a_in) {
    if (a_in.rows != a_in.cols) throw std::invalid_argument("sym_eigen: matrix is not square");
    const std::size_t n = a_in.rows;
    double amax = 0.0;
    for (double x : a_in.data) amax = std::max(amax, std::abs(x));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(a_in(i, j) - a_in(j, i)) > 1e-10 * std::max(1.0, amax))
                throw std::invalid_argument("sym_eigen: matrix is not symmetric");

    const auto& kt = simd::active();
    Mat a = a_in;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) a(j, i) = a(i, j);
    Mat vt(n, n);  // row p holds eigenvector p
    for (std::size_t i = 0; i < n; ++i) vt(i, i) = 1.0;

    const double fro2 = simd::norm_sq(a.data);
    SymEigen out;
    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off <= 1e-24 * fro2 || off == 0.0) break;
        ++out.sweeps;
        bool rotated = false;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double app = a(p, p), aqq = a(q, q);
                // Off-diagonal below the rounding level of both diagonals.
                const double g = 100.0 * std::abs(apq);
                if (sweep > 3 && std::abs(app) + g == std::abs(app) &&
                    std::abs(aqq) + g == std::abs(aqq)) {
                    a(p, q) = a(q, p) = 0.0;
                    continue;
                }
                rotated = true;
                const double theta = (aqq - app) / (2.0 * apq);
                double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                if (theta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                kt.rotate(&a(p, 0), &a(q, 0), n, c, s);
                for (std::size_t i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    a(i, p) = a(p, i);
                    a(i, q) = a(q, i);
                }
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = a(q, p) = 0.0;
                kt.rotate(&vt(p, 0), &vt(q, 0), n, c, s);
            }
        if (!rotated) break;
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
    out.values.resize(n);
    out.vectors = Mat(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = vt(order[j], i);
    }
    return out;
}

Vec leading_eigenvector(const Mat& a, Rng& rng) {
    if (a.rows != a.cols) throw std::invalid_argument("leading_eigenvector: matrix is not square");
    const auto& kt = simd::active();
    SingularTriple st = top_singular(a, kSvdTol, kSvdMaxIter, rng);
    Vec aw(a.rows);
    kt.gemv(a.data.data(), a.rows, a.cols, st.w.data(), aw.data());
    if (kt.dot(aw.data(), st.w.data(), a.rows) >= 0.0) return st.w;

    // Dominant eigenvalue is negative: shift by sigma_max so the spectrum is
    // nonnegative and its top is the algebraically largest eigenvalue.
    Mat shifted = a;
    for (std::size_t i = 0; i < a.rows; ++i) shifted(i, i) += st.sigma;
    return top_singular(shifted, kSvdTol, kSvdMaxIter, rng).w;
}

Vec psd_project(std::span<const double> w, std::size_t n) {
    if (n == 0 || w.size() != n * n) throw std::invalid_argument("psd_project: length is not n*n");
    const Mat b = reshape_vec_to_matrix(w, n);
    Mat s(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) s(i, j) = s(j, i) = 0.5 * (b(i, j) + b(j, i));
    const SymEigen e = sym_eigen(s);

    Mat p(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        const double lam = e.values[j];
        if (!(lam > 0.0)) break;  // descending order
        for (std::size_t r = 0; r < n; ++r) {
            const double vr = lam * e.vectors(r, j);
            for (std::size_t c = r; c < n; ++c) p(r, c) += vr * e.vectors(c, j);
        }
    }
    Vec out(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) out[i + j * n] = out[j + i * n] = p(i, j);
    return out;
}

}  // namespace spiked
