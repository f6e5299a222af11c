#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "causalfp/errors.hpp"
#include "causalfp/lowrank.hpp"
#include "causalfp/types.hpp"

namespace causalfp {

/// Control-run factor F = X0 / sqrt(r0) and the diagonal of the empirical
/// covariance Omega = F F' = X0 X0' / r0. Control runs are fluctuations about
/// zero, so the columns enter uncentered; centering would drop the factor's
/// rank to r0 - 1 and the marginal likelihood below becomes unbounded at
/// a -> 0 whenever r0^2 < n + 1. The full n x n Omega is never formed.
struct EmpiricalCovariance {
    MatrixXd factor;  // n x r0
    VectorXd diag;
    int r0 = 0;
};

inline EmpiricalCovariance empirical_covariance(const Ensemble& control) {
    control.validate();
    const int r0 = control.run_count();
    if (r0 < 2) throw ValidationError("empirical_covariance: needs at least 2 control runs");

    const VectorXd mean = control.runs.rowwise().mean();
    const VectorXd spread = (control.runs.colwise() - mean).rowwise().squaredNorm();
    EmpiricalCovariance out;
    out.factor = control.runs / std::sqrt(static_cast<double>(r0));
    out.diag = out.factor.rowwise().squaredNorm();
    out.r0 = r0;
    for (int i = 0; i < out.diag.size(); ++i)
        if (!(out.diag[i] > 0.0) || !(spread[i] > 0.0))
            throw DegenerateVarianceError("empirical_covariance: control runs have zero variance in cell " +
                                          std::to_string(i));
    return out;
}

/// log of the n-variate gamma function,
///   log Gamma_n(x) = n(n-1)/4 * log(pi) + sum_{j=1..n} log Gamma(x + (1-j)/2),
/// defined for x > (n-1)/2.
inline double log_mv_gamma(int n, double x) {
    if (n < 1) throw ValidationError("log_mv_gamma: n must be >= 1");
    if (!(x > 0.5 * (n - 1)))
        throw ValidationError("log_mv_gamma: argument " + std::to_string(x) +
                              " not above (n-1)/2 = " + std::to_string(0.5 * (n - 1)));
    double s = 0.25 * n * (n - 1) * std::log(M_PI);
    for (int j = 1; j <= n; ++j) s += std::lgamma(x + 0.5 * (1 - j));
    return s;
}

namespace detail {

/// Marginal log-likelihood of the inverse-Wishart prior parameters (a, Delta)
/// given the empirical covariance of the control ensemble:
///
///   l(a, Delta) = (a r0/(1-a) + n + 1) log|a/(1-a) Delta|
///               - (r0/(1-a) + n + 1) log|Omega + a/(1-a) Delta|
///               + 2 log( Gamma_n((r0/(1-a)+n+1)/2) / Gamma_n((a r0/(1-a)+n+1)/2) )
///
/// The middle determinant goes through the Sylvester identity when the
/// control ensemble is smaller than the state dimension, densely otherwise.
inline double marginal_log_likelihood_impl(double a, const VectorXd& delta,
                                           const EmpiricalCovariance& emp) {
    const int n = static_cast<int>(delta.size());
    if (!(a > 0.0 && a < 1.0)) throw ValidationError("marginal_log_likelihood: a must lie in (0,1)");
    for (int i = 0; i < n; ++i)
        if (!(delta[i] > 0.0))
            throw ValidationError("marginal_log_likelihood: target diagonal must be positive");
    if (emp.factor.rows() != n)
        throw ValidationError("marginal_log_likelihood: dimension mismatch between target and control");

    const double q = a / (1.0 - a);
    const double c1 = a * emp.r0 / (1.0 - a) + n + 1;
    const double c2 = emp.r0 / (1.0 - a) + n + 1;

    const double log_det_target = n * std::log(q) + delta.array().log().sum();

    double log_det_mid;
    if (emp.r0 < n) {
        StructuredCovariance mid(q * delta, {LowRankFactor{emp.factor, 1.0}});
        log_det_mid = mid.log_det();
    } else {
        MatrixXd dense = emp.factor * emp.factor.transpose();
        dense += (q * delta).asDiagonal();
        Eigen::LLT<MatrixXd> llt(dense);
        if (llt.info() != Eigen::Success)
            throw NotPositiveDefiniteError("marginal_log_likelihood: dense determinant failed");
        log_det_mid = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    }

    return c1 * log_det_target - c2 * log_det_mid +
           2.0 * (log_mv_gamma(n, 0.5 * c2) - log_mv_gamma(n, 0.5 * c1));
}

}  // namespace detail

inline double marginal_log_likelihood(double a, const VectorXd& delta, const Ensemble& control) {
    return detail::marginal_log_likelihood_impl(a, delta, empirical_covariance(control));
}

/// Fitted shrinkage prior for the internal-variability covariance:
///   C_hat = a_hat * diag(Omega) + (1 - a_hat) * Omega,
/// with intensity a_hat chosen by marginal-likelihood maximization and
/// degrees of freedom nu_hat = 2 + r0 / (1 - a_hat).
struct ShrinkagePrior {
    double a_hat = 0.0;
    VectorXd delta_hat;    // diag(Omega); also the exact diagonal of C_hat
    MatrixXd omega_factor; // F with Omega = F F'
    double nu_hat = 0.0;
    int r0 = 0;
    bool grid_fallback_warning = false;

    StructuredCovariance c_hat() const {
        return StructuredCovariance(a_hat * delta_hat, {LowRankFactor{omega_factor, 1.0 - a_hat}});
    }

    double c_trace() const { return delta_hat.sum(); }
};

inline ShrinkagePrior fit_shrinkage(const Ensemble& control) {
    const EmpiricalCovariance emp = empirical_covariance(control);
    const VectorXd delta = emp.diag;

    const double a_lo = 1e-6;
    const double a_hi = 1.0 - 1e-6;
    auto objective = [&](double a) { return detail::marginal_log_likelihood_impl(a, delta, emp); };

    // 64-point grid scan to bracket the maximum.
    const int grid_points = 64;
    double best_a = a_lo, best_val = -std::numeric_limits<double>::infinity();
    int best_idx = 0;
    std::vector<double> grid(grid_points), vals(grid_points);
    for (int i = 0; i < grid_points; ++i) {
        grid[i] = a_lo + (a_hi - a_lo) * i / (grid_points - 1);
        vals[i] = objective(grid[i]);
        if (vals[i] > best_val) {
            best_val = vals[i];
            best_a = grid[i];
            best_idx = i;
        }
    }

    // Golden-section refinement inside the bracketing grid cells.
    double lo = grid[std::max(0, best_idx - 1)];
    double hi = grid[std::min(grid_points - 1, best_idx + 1)];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = objective(x1);
    double f2 = objective(x2);
    double golden_a = best_a, golden_val = best_val;
    while (hi - lo > 1e-8) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = objective(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = objective(x1);
        }
        if (f1 > golden_val) { golden_val = f1; golden_a = x1; }
        if (f2 > golden_val) { golden_val = f2; golden_a = x2; }
    }

    ShrinkagePrior prior;
    if (golden_val + 1e-9 * std::abs(golden_val) < best_val) {
        // Refinement lost the grid optimum: the bracket was not unimodal.
        prior.a_hat = best_a;
        prior.grid_fallback_warning = true;
    } else {
        prior.a_hat = golden_val >= best_val ? golden_a : best_a;
    }
    prior.delta_hat = delta;
    prior.omega_factor = emp.factor;
    prior.r0 = emp.r0;
    prior.nu_hat = 2.0 + emp.r0 / (1.0 - prior.a_hat);
    return prior;
}

}  // namespace causalfp
