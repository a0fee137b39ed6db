#pragma once

// Closed-form and root-finding calculators: the operator-norm constant
// mu_k, state evolution of AMP and its thresholds, and the information
// and perturbation bounds used as reference values.

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace spiked::theory {

/// Raised when a quantity is undefined for the given parameters.
struct NotApplicable : std::domain_error {
    using std::domain_error::domain_error;
};

/// 2 sqrt(k-1): left end of the region where g_k is not flat.
double eta_k(int k);

/// Complexity function. Constant g_k(eta_k) below eta_k.
double g_k(double x, int k);

/// Root of g_k by bisection on [eta_k, eta_k + 10 sqrt(k)].
double mu_k(int k, double tol = 1e-12);

/// max over tau >= 0 of beta (tau/sqrt(1+tau^2))^k + k / sqrt(1+tau^2).
double sudakov_fernique_upper(double beta, int k);

/// 8 xi^2 / beta^2; NotApplicable unless beta > 2 xi.
double wedin_loss_bound(double beta, double xi);

struct NormBounds {
    double lower = 0.0;
    double upper = 0.0;
};
/// Leading-order bounds on the operator norm of the q-unfolding of
/// symmetric standard noise.
NormBounds matricized_norm_bounds(int k, double n, int q);

enum class SeLimit { zero, upper };

struct SETrajectory {
    int k = 0;
    double beta = 0.0;
    double tau0 = 0.0;
    std::vector<double> taus;  // taus[0] = tau0, length steps + 1
    std::optional<double> fixed_point;
    SeLimit converged_to = SeLimit::zero;

    /// tau_t / sqrt(1 + tau_t^2)
    double correlation(std::size_t t) const;
};

/// tau_{t+1}^2 = beta^2 (tau_t^2 / (1 + tau_t^2))^(k-1).
SETrajectory state_evolution(double beta, int k, double tau0, int steps);

double omega_k(int k);

/// h(x) = x^(k-2) (1 - x)
double se_h(double x, int k);

struct FixedPoints {
    int k = 0;
    double beta = 0.0;
    std::optional<double> x_lo;
    std::optional<double> x_hi;
    double x_star = 0.0;
    double omega = 0.0;
};

/// Roots of h(x) = 1/beta^2 on either side of x_* = (k-2)/(k-1).
FixedPoints fixed_points(double beta, int k);

/// sqrt(x_lo / (1 - x_lo)); NotApplicable when beta < omega_k.
double gamma_star(double beta, int k);

/// Largest root eps of (1-eps)^(k-2) eps = 1/beta^2 (equals 1 - x_lo).
double epsilon_k(double beta, int k);

/// Limiting AMP correlation from state evolution started at gamma.
double amp_limit_correlation(double beta, int k, double gamma, int steps = 10000);

/// n (k-1)! beta^2 |U(w^{(x)k}) - U(wp^{(x)k})|^2 with U the strict upper embedding.
double kl_divergence_exact(std::span<const double> w, std::span<const double> wp, double beta,
                           int k);
/// (2n/k) beta^2 (1 - dot^k)
double kl_bound(double beta, double n, int k, double dot);

/// sqrt(k / 10)
double it_lower_bound_beta(int k);

/// beta >= 2e(k-1) z and init_corr >= ((k-1) z / beta)^(1/(k-1)).
bool pi_conditions(double beta, int k, double z_norm, double init_corr);

/// sqrt(1 - 1/lambda^2) for lambda > 1, else 0.
double matrix_pca_correlation(double lambda);

}  // namespace spiked::theory
