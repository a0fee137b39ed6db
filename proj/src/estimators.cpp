#include "spiked/estimators.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <stdexcept>

#include "spiked/model.hpp"
#include "spiked/rng.hpp"
#include "spiked/simd/kernels.hpp"
#include "spiked/spectral.hpp"

namespace spiked {

namespace {

double int_pow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

void check_order(const DenseTensor& x, const char* what) {
    if (x.order() < 3) throw std::invalid_argument(std::string(what) + ": requires k >= 3");
}

void record(Vec& traj, std::span<const double> v, std::span<const double> truth) {
    if (!truth.empty()) traj.push_back(simd::dot(v, truth));
}

// Left principal vector of reshape(w, n rows).
SingularTriple principal_left(std::span<const double> w, std::size_t n, Rng& rng) {
    const Mat b = reshape_vec_to_matrix(w, n);
    return top_singular(b, kSvdTol, kSvdMaxIter, rng);
}

}  // namespace

void finalize(EstimatorResult& r, const DenseTensor& x, std::span<const double> truth) {
    canonicalize_sign(r.vhat);
    r.rayleigh = std::abs(multilinear_form(x, r.vhat));
    if (truth.empty()) {
        r.correlation = std::numeric_limits<double>::quiet_NaN();
        r.loss = std::numeric_limits<double>::quiet_NaN();
    } else {
        r.correlation = correlation(r.vhat, truth);
        r.loss = 2.0 - 2.0 * r.correlation;
    }
}

UnfoldPair unfold_estimate(const DenseTensor& x, Rng& rng) {
    check_order(x, "unfold_estimate");
    const Mat m = matricize(x, x.order() / 2);
    SingularTriple st = top_singular(m, kSvdTol, kSvdMaxIter, rng);
    return UnfoldPair{std::move(st.u), std::move(st.w), st.sigma, st.converged, st.iters};
}

EstimatorResult unfold(const DenseTensor& x, Rng& rng, std::span<const double> truth) {
    UnfoldPair p = unfold_estimate(x, rng);
    EstimatorResult r;
    r.iterations = p.iters;
    r.converged = p.converged;
    if (x.order() / 2 == 1) {
        r.vhat = std::move(p.u);
    } else {
        SingularTriple st = principal_left(p.u, x.dim(), rng);
        r.vhat = std::move(st.u);
        r.iterations += st.iters;
        r.converged = r.converged && st.converged;
    }
    normalize(r.vhat);
    finalize(r, x, truth);
    return r;
}

EstimatorResult recursive_unfold(const DenseTensor& x, Rng& rng, std::span<const double> truth) {
    UnfoldPair p = unfold_estimate(x, rng);
    SingularTriple st = principal_left(p.w, x.dim(), rng);
    EstimatorResult r;
    r.vhat = std::move(st.u);
    r.iterations = p.iters + st.iters;
    r.converged = p.converged && st.converged;
    normalize(r.vhat);
    finalize(r, x, truth);
    return r;
}

EstimatorResult power_iteration(const DenseTensor& x, std::span<const double> v_init,
                                const IterOptions& opt, std::span<const double> truth) {
    if (v_init.size() != x.dim()) throw std::invalid_argument("power_iteration: length mismatch");
    EstimatorResult r;
    Vec v(v_init.begin(), v_init.end());
    normalize(v);
    record(r.trajectory, v, truth);
    r.converged = false;
    for (int t = 0; t < opt.max_iter; ++t) {
        Vec next = contract(x, v);
        ++r.iterations;
        const double nn = norm(next);
        if (!(nn > 0.0)) break;
        scale_in_place(next, 1.0 / nn);
        const double c = std::abs(simd::dot(next, v));
        v.swap(next);
        record(r.trajectory, v, truth);
        if (c >= 1.0 - opt.tol) {
            r.converged = true;
            break;
        }
    }
    r.vhat = std::move(v);
    finalize(r, x, truth);
    return r;
}

EstimatorResult amp(const DenseTensor& x, std::span<const double> y, const IterOptions& opt,
                    std::span<const double> truth, AmpMemory memory) {
    if (y.size() != x.dim()) throw std::invalid_argument("amp: length mismatch");
    const int k = x.order();
    EstimatorResult r;
    Vec f(y.begin(), y.end());
    double v_norm = norm(f);
    normalize(f);  // f(v^0); f(v^{-1}) = 0
    Vec f_prev;
    record(r.trajectory, f, truth);
    r.converged = false;
    for (int t = 0; t < opt.max_iter; ++t) {
        Vec next = contract(x, f);
        if (memory != AmpMemory::none && !f_prev.empty()) {
            double b = (k - 1) * int_pow(simd::dot(f, f_prev), k - 2);
            if (memory == AmpMemory::divergence) b /= v_norm;
            simd::axpy(-b, f_prev, next);
        }
        ++r.iterations;
        const double nn = norm(next);
        if (!(nn > 0.0)) break;
        v_norm = nn;
        scale_in_place(next, 1.0 / nn);
        const double c = std::abs(simd::dot(next, f));
        f_prev.swap(f);
        f.swap(next);
        record(r.trajectory, f, truth);
        if (c >= 1.0 - opt.tol) {
            r.converged = true;
            break;
        }
    }
    r.vhat = std::move(f);
    finalize(r, x, truth);
    return r;
}

EstimatorResult psd_constrained_pca(const DenseTensor& x, Rng& rng, const IterOptions& opt,
                                    std::span<const double> truth) {
    if (x.order() != 3) throw std::invalid_argument("psd_constrained_pca: requires k = 3");
    const std::size_t n = x.dim();
    const auto& kt = simd::active();
    const Mat m = matricize(x, 2);  // n^2 x n

    EstimatorResult r;
    Vec v = rng.unit_sphere(n);
    Vec mv(n * n);
    record(r.trajectory, v, truth);
    r.converged = false;
    for (int t = 0; t < opt.max_iter; ++t) {
        kt.gemv(m.data.data(), m.rows, m.cols, v.data(), mv.data());
        Vec w = psd_project(mv, n);
        if (t == 0) {
            // The cone is not sign symmetric: start from whichever of +-v
            // keeps more of its projection.
            scale_in_place(mv, -1.0);
            Vec w_neg = psd_project(mv, n);
            if (norm(w_neg) > norm(w)) {
                scale_in_place(v, -1.0);
                w.swap(w_neg);
            }
        }
        ++r.iterations;
        if (!(norm(w) > 0.0)) break;
        Vec next(n);
        kt.gemv_t(m.data.data(), m.rows, m.cols, w.data(), next.data());
        const double nn = norm(next);
        if (!(nn > 0.0)) break;
        scale_in_place(next, 1.0 / nn);
        const double c = std::abs(simd::dot(next, v));
        v.swap(next);
        record(r.trajectory, v, truth);
        if (c >= 1.0 - opt.tol) {
            r.converged = true;
            break;
        }
    }
    r.vhat = std::move(v);
    finalize(r, x, truth);
    return r;
}

std::optional<Initializer> parse_initializer(std::string_view s) {
    if (s == "random") return Initializer::random;
    if (s == "unfold") return Initializer::unfold;
    if (s == "rec_unfold" || s == "rec-unfold") return Initializer::rec_unfold;
    if (s == "psd") return Initializer::psd;
    return std::nullopt;
}

EstimatorResult warm_start(const DenseTensor& x, Initializer init, Iterator iter, Rng& rng,
                           const IterOptions& opt, std::span<const double> truth) {
    Vec v0;
    int init_iters = 0;
    switch (init) {
        case Initializer::random: v0 = rng.unit_sphere(x.dim()); break;
        case Initializer::unfold: {
            EstimatorResult e = unfold(x, rng);
            v0 = std::move(e.vhat);
            init_iters = e.iterations;
            break;
        }
        case Initializer::rec_unfold: {
            EstimatorResult e = recursive_unfold(x, rng);
            v0 = std::move(e.vhat);
            init_iters = e.iterations;
            break;
        }
        case Initializer::psd: {
            EstimatorResult e = psd_constrained_pca(x, rng, opt);
            v0 = std::move(e.vhat);
            init_iters = e.iterations;
            break;
        }
    }
    EstimatorResult r = iter == Iterator::power ? power_iteration(x, v0, opt, truth)
                                                : amp(x, v0, opt, truth);
    r.iterations += init_iters;
    return r;
}

EstimatorResult ml_bruteforce(const DenseTensor& x, int restarts, Rng& rng, const IterOptions& opt,
                              std::span<const double> truth) {
    if (restarts < 1) throw std::invalid_argument("ml_bruteforce: restarts must be >= 1");
    EstimatorResult best;
    best.rayleigh = -1.0;
    int total = 0;
    for (int i = 0; i < restarts; ++i) {
        const Vec v = rng.unit_sphere(x.dim());
        EstimatorResult r = power_iteration(x, v, opt, truth);
        total += r.iterations;
        if (r.rayleigh > best.rayleigh) best = std::move(r);
    }
    best.iterations = total;
    return best;
}

}  // namespace spiked
