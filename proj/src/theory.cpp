#include "spiked/theory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "spiked/tensor.hpp"

namespace spiked::theory {

namespace {

void require_k(int k, int min_k, const char* what) {
    if (k < min_k)
        throw std::invalid_argument(std::string(what) + ": k must be >= " + std::to_string(min_k));
}

// Root of a continuous f with f(lo), f(hi) of opposite signs, bisected
// until the bracket stops shrinking or its width drops below tol.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
    double flo = f(lo);
    for (int i = 0; i < 400; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi || hi - lo <= tol) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

constexpr double kTangencyTol = 1e-9;
constexpr double kEdge = 1e-14;

}  // namespace

double eta_k(int k) { return 2.0 * std::sqrt(static_cast<double>(k - 1)); }

double g_k(double x, int k) {
    require_k(k, 3, "g_k");
    const double eta = eta_k(k);
    if (x < eta) x = eta;
    const double kd = k;
    const double disc = std::max(0.0, x * x - 4.0 * (kd - 1.0));
    const double z = (x - std::sqrt(disc)) / ((kd - 1.0) * std::sqrt(2.0 * kd));
    const double z2 = z * z;
    return 0.5 * ((2.0 - kd) / kd - std::log(kd * z2 / 2.0) + ((kd - 1.0) / 2.0) * z2 -
                  2.0 / (kd * kd * z2));
}

double mu_k(int k, double tol) {
    require_k(k, 3, "mu_k");
    const double lo = eta_k(k);
    const double hi = lo + 10.0 * std::sqrt(static_cast<double>(k));
    if (!(g_k(lo, k) > 0.0) || !(g_k(hi, k) < 0.0))
        throw std::runtime_error("mu_k: root not bracketed for k = " + std::to_string(k));
    return bisect([k](double x) { return g_k(x, k); }, lo, hi, tol);
}

double sudakov_fernique_upper(double beta, int k) {
    require_k(k, 2, "sudakov_fernique_upper");
    if (!(beta >= 0.0)) throw std::invalid_argument("sudakov_fernique_upper: beta must be >= 0");
    // Parametrize by s = tau / sqrt(1 + tau^2) in [0, 1]; s = 1 is tau -> inf.
    auto f = [beta, k](double s) {
        return beta * std::pow(s, k) + k * std::sqrt(std::max(0.0, 1.0 - s * s));
    };
    constexpr int kGrid = 2000;
    int best = 0;
    double fbest = f(0.0);
    for (int i = 1; i <= kGrid; ++i) {
        const double fi = f(static_cast<double>(i) / kGrid);
        if (fi > fbest) {
            fbest = fi;
            best = i;
        }
    }
    double a = std::max(0, best - 1) / static_cast<double>(kGrid);
    double b = std::min(kGrid, best + 1) / static_cast<double>(kGrid);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > 1e-12) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    return std::max({fbest, fc, fd, f(0.5 * (a + b))});
}

double wedin_loss_bound(double beta, double xi) {
    if (!(beta > 2.0 * xi))
        throw NotApplicable("wedin_loss_bound: requires beta > 2 xi");
    return 8.0 * xi * xi / (beta * beta);
}

NormBounds matricized_norm_bounds(int k, double n, int q) {
    require_k(k, 2, "matricized_norm_bounds");
    if (q < 1 || q > k - 1) throw std::invalid_argument("matricized_norm_bounds: q out of range");
    NormBounds b;
    b.upper = std::sqrt(static_cast<double>(k)) *
              (std::pow(n, (q - 1) / 2.0) + std::pow(n, (k - q - 1) / 2.0));
    b.lower = std::pow(n, std::max(q - 1, k - q - 1) / 2.0) / std::sqrt(factorial(k - 1));
    return b;
}

double SETrajectory::correlation(std::size_t t) const {
    const double tau = taus.at(t);
    return tau / std::sqrt(1.0 + tau * tau);
}

SETrajectory state_evolution(double beta, int k, double tau0, int steps) {
    require_k(k, 2, "state_evolution");
    if (!(tau0 >= 0.0)) throw std::invalid_argument("state_evolution: tau0 must be >= 0");
    if (steps < 1) throw std::invalid_argument("state_evolution: steps must be >= 1");
    SETrajectory tr;
    tr.k = k;
    tr.beta = beta;
    tr.tau0 = tau0;
    tr.taus.reserve(static_cast<std::size_t>(steps) + 1);
    tr.taus.push_back(tau0);
    double tau = tau0;
    for (int t = 0; t < steps; ++t) {
        const double t2 = tau * tau;
        const double next = std::sqrt(beta * beta * std::pow(t2 / (1.0 + t2), k - 1));
        if (!tr.fixed_point && std::abs(next - tau) < 1e-12) tr.fixed_point = next;
        tau = next;
        tr.taus.push_back(tau);
    }
    const double limit = tr.fixed_point.value_or(tau);
    tr.converged_to = SeLimit::zero;
    if (k >= 3) {
        const FixedPoints fp = fixed_points(beta, k);
        if (fp.x_lo) {
            const double gs = std::sqrt(*fp.x_lo / (1.0 - *fp.x_lo));
            if (limit >= gs) tr.converged_to = SeLimit::upper;
        }
    } else if (limit > 0.0) {
        tr.converged_to = SeLimit::upper;
    }
    return tr;
}

double omega_k(int k) {
    require_k(k, 3, "omega_k");
    const double a = k - 1, b = k - 2;
    return std::sqrt(std::pow(a, a) / std::pow(b, b));
}

double se_h(double x, int k) { return std::pow(x, k - 2) * (1.0 - x); }

FixedPoints fixed_points(double beta, int k) {
    require_k(k, 3, "fixed_points");
    FixedPoints fp;
    fp.k = k;
    fp.beta = beta;
    fp.x_star = static_cast<double>(k - 2) / (k - 1);
    fp.omega = omega_k(k);
    if (std::abs(beta - fp.omega) <= kTangencyTol) {
        fp.x_lo = fp.x_hi = fp.x_star;
        return fp;
    }
    if (beta < fp.omega) return fp;
    const double target = 1.0 / (beta * beta);
    auto f = [k, target](double x) { return se_h(x, k) - target; };
    fp.x_lo = bisect(f, kEdge, fp.x_star, 0.0);
    fp.x_hi = bisect(f, fp.x_star, 1.0 - kEdge, 0.0);
    return fp;
}

double gamma_star(double beta, int k) {
    const FixedPoints fp = fixed_points(beta, k);
    if (!fp.x_lo)
        throw NotApplicable("gamma_star: undefined for beta < omega_k = " +
                            std::to_string(fp.omega));
    return std::sqrt(*fp.x_lo / (1.0 - *fp.x_lo));
}

double epsilon_k(double beta, int k) {
    require_k(k, 3, "epsilon_k");
    const double om = omega_k(k);
    const double eps_star = 1.0 / (k - 1);
    if (std::abs(beta - om) <= kTangencyTol) return eps_star;
    if (beta < om) throw NotApplicable("epsilon_k: undefined for beta < omega_k");
    const double target = 1.0 / (beta * beta);
    auto f = [k, target](double e) { return std::pow(1.0 - e, k - 2) * e - target; };
    return bisect(f, eps_star, 1.0 - kEdge, 0.0);
}

double amp_limit_correlation(double beta, int k, double gamma, int steps) {
    const SETrajectory tr = state_evolution(beta, k, gamma, steps);
    return tr.correlation(tr.taus.size() - 1);
}

double kl_divergence_exact(std::span<const double> w, std::span<const double> wp, double beta,
                           int k) {
    if (w.size() != wp.size()) throw std::invalid_argument("kl_divergence_exact: length mismatch");
    const std::size_t n = w.size();
    if (k < 1 || static_cast<std::size_t>(k) > n)
        throw std::invalid_argument("kl_divergence_exact: requires 1 <= k <= n");
    const Vec a = strict_upper_embed(outer_power(w, k));
    const Vec b = strict_upper_embed(outer_power(wp, k));
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return static_cast<double>(n) * factorial(k - 1) * beta * beta * s;
}

double kl_bound(double beta, double n, int k, double dot) {
    return (2.0 * n / k) * beta * beta * (1.0 - std::pow(dot, k));
}

double it_lower_bound_beta(int k) { return std::sqrt(k / 10.0); }

bool pi_conditions(double beta, int k, double z_norm, double init_corr) {
    const double e = std::numbers::e;
    if (!(beta >= 2.0 * e * (k - 1) * z_norm)) return false;
    return init_corr >= std::pow((k - 1) * z_norm / beta, 1.0 / (k - 1));
}

double matrix_pca_correlation(double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("matrix_pca_correlation: lambda must be >= 0");
    if (lambda <= 1.0) return 0.0;
    return std::sqrt(1.0 - 1.0 / (lambda * lambda));
}

}  // namespace spiked::theory
