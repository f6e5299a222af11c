#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "causalfp/lowrank.hpp"
#include "causalfp/preprocess.hpp"
#include "causalfp/shrinkage.hpp"
#include "causalfp/types.hpp"

namespace causalfp {

/// Everything the hierarchical observation model needs: ensemble means,
/// run counts, the fitted shrinkage prior and the observation itself.
struct ModelInputs {
    VectorXd mu_hat;            // factual ensemble mean
    MatrixXd x_hat;             // n x p individual-response means
    int r = 0;                  // factual run count
    int r_bar = 0;              // counterfactual run count (0 when absent)
    bool has_counterfactual = false;
    VectorXd mu_bar_hat;        // counterfactual ensemble mean (when present)
    std::vector<int> r_i;       // per-forcing run counts
    std::vector<std::string> forcing_names;
    int forcing_index = 0;
    ShrinkagePrior prior;
    VectorXd y;

    int dim() const { return static_cast<int>(y.size()); }
    int p() const { return static_cast<int>(x_hat.cols()); }
};

/// Fitted variance parameters of the observation model.
struct VarianceParams {
    double sigma = 0.0;   // observational error scale
    double omega = 0.0;   // pattern-scaling spread
    double lambda = 0.0;  // 1/r + omega^2 * sum_i 1/r_i
    double loglik = 0.0;  // maximum over the optimizer's evaluation history
};

enum class World { factual, counterfactual };

/// Multivariate Student-t specification for one world, parameterized by its
/// mean, its variance matrix (not the scale matrix) and degrees of freedom.
struct WorldPdf {
    VectorXd mean;
    StructuredCovariance cov;
    double nu = 0.0;
    World label = World::factual;
};

inline double model_lambda(double omega, int r, const std::vector<int>& r_i) {
    double inv_sum = 0.0;
    for (int ri : r_i) inv_sum += 1.0 / ri;
    return 1.0 / r + omega * omega * inv_sum;
}

inline ModelInputs assemble_inputs(const Dataset& d, const std::string& forcing) {
    d.validate();
    ModelInputs m;
    m.forcing_index = d.forcing_position(forcing);
    m.mu_hat = ensemble_mean(d.factual);
    m.r = d.factual.run_count();
    m.x_hat.resize(d.dim(), d.forcing_count());
    for (int i = 0; i < d.forcing_count(); ++i) {
        m.x_hat.col(i) = ensemble_mean(d.individual[i]);
        m.r_i.push_back(d.individual[i].run_count());
        m.forcing_names.push_back(d.individual[i].name);
    }
    if (auto it = d.counterfactual_for.find(forcing); it != d.counterfactual_for.end()) {
        m.has_counterfactual = true;
        m.mu_bar_hat = ensemble_mean(it->second);
        m.r_bar = it->second.run_count();
    }
    m.prior = fit_shrinkage(d.control);
    m.y = d.y;
    return m;
}

/// Total covariance of the factual world at variance parameters (sigma, omega):
///   Sigma = (1 + lambda) C_hat + sigma^2 I + omega^2 x_hat x_hat'
/// kept in diagonal-plus-low-rank form, control factor innermost.
inline StructuredCovariance total_covariance(const ModelInputs& m, double sigma, double omega) {
    const double lambda = model_lambda(omega, m.r, m.r_i);
    const double shrink = 1.0 + lambda;
    VectorXd diag = shrink * m.prior.a_hat * m.prior.delta_hat;
    diag.array() += sigma * sigma;
    return StructuredCovariance(std::move(diag),
                                {LowRankFactor{m.prior.omega_factor, shrink * (1.0 - m.prior.a_hat)},
                                 LowRankFactor{m.x_hat, omega * omega}});
}

/// Student-t log-likelihood of the observation under the model, up to an
/// additive constant:
///   l(sigma, omega; y) = -1/2 log|Sigma|
///                        -1/2 (nu + n) log(1 + (y-mu)' Sigma^-1 (y-mu) / (nu-2)).
/// Returns -inf when the covariance is not numerically positive definite, so
/// optimizers retreat from the point.
inline double log_likelihood(double sigma, double omega, const ModelInputs& m) {
    try {
        const StructuredCovariance cov = total_covariance(m, sigma, omega);
        const double qf = cov.quad_form(m.y - m.mu_hat);
        const double nu = m.prior.nu_hat;
        return -0.5 * cov.log_det() - 0.5 * (nu + m.dim()) * std::log1p(qf / (nu - 2.0));
    } catch (const NumericalError&) {
        return -std::numeric_limits<double>::infinity();
    }
}

namespace detail {

struct SimplexResult {
    std::array<double, 2> x{};
    double value = -std::numeric_limits<double>::infinity();
    bool converged = false;
};

/// Nelder-Mead ascent in two dimensions with a rejection box.
template <typename F>
SimplexResult nelder_mead_2d(F&& f, std::array<double, 2> start, double step, double lo, double hi,
                             int max_evals) {
    using Point = std::array<double, 2>;
    auto eval = [&](const Point& x, int& count) {
        if (x[0] < lo || x[0] > hi || x[1] < lo || x[1] > hi)
            return -std::numeric_limits<double>::infinity();
        ++count;
        return f(x[0], x[1]);
    };

    std::array<Point, 3> pts = {start, {start[0] + step, start[1]}, {start[0], start[1] + step}};
    std::array<double, 3> vals;
    int evals = 0;
    for (int i = 0; i < 3; ++i) vals[i] = eval(pts[i], evals);

    SimplexResult best;
    auto track = [&](const Point& x, double v) {
        if (v > best.value) { best.value = v; best.x = x; }
    };
    for (int i = 0; i < 3; ++i) track(pts[i], vals[i]);

    while (evals < max_evals) {
        std::array<int, 3> ord = {0, 1, 2};
        std::sort(ord.begin(), ord.end(), [&](int a, int b) { return vals[a] > vals[b]; });
        const int ib = ord[0], im = ord[1], iw = ord[2];

        const double spread = std::max({std::abs(pts[ib][0] - pts[iw][0]), std::abs(pts[ib][1] - pts[iw][1]),
                                        std::abs(pts[ib][0] - pts[im][0]), std::abs(pts[ib][1] - pts[im][1])});
        const double vspread = std::abs(vals[ib] - vals[iw]);
        if (spread < 1e-6 && vspread < 1e-10 * (1.0 + std::abs(vals[ib]))) {
            best.converged = true;
            return best;
        }

        const Point centroid = {0.5 * (pts[ib][0] + pts[im][0]), 0.5 * (pts[ib][1] + pts[im][1])};
        auto along = [&](double t) {
            return Point{centroid[0] + t * (centroid[0] - pts[iw][0]),
                         centroid[1] + t * (centroid[1] - pts[iw][1])};
        };

        const Point refl = along(1.0);
        const double v_refl = eval(refl, evals);
        track(refl, v_refl);
        if (v_refl > vals[ib]) {
            const Point expd = along(2.0);
            const double v_expd = eval(expd, evals);
            track(expd, v_expd);
            if (v_expd > v_refl) { pts[iw] = expd; vals[iw] = v_expd; }
            else { pts[iw] = refl; vals[iw] = v_refl; }
        } else if (v_refl > vals[im]) {
            pts[iw] = refl;
            vals[iw] = v_refl;
        } else {
            const Point contr = along(v_refl > vals[iw] ? 0.5 : -0.5);
            const double v_contr = eval(contr, evals);
            track(contr, v_contr);
            if (v_contr > std::max(v_refl, vals[iw])) {
                pts[iw] = contr;
                vals[iw] = v_contr;
            } else {
                for (int i : {im, iw}) {
                    pts[i] = {0.5 * (pts[i][0] + pts[ib][0]), 0.5 * (pts[i][1] + pts[ib][1])};
                    vals[i] = eval(pts[i], evals);
                    track(pts[i], vals[i]);
                }
            }
        }
    }
    return best;  // not converged
}

}  // namespace detail

/// Maximizes the log-likelihood over (sigma, omega) in log10-variance
/// coordinates, three fixed starts, derivative-free simplex ascent. The
/// search box is [1e-6, 1e6] times the observation variance.
inline VarianceParams fit_variance_params(const ModelInputs& m) {
    const double var_y = std::max((m.y.array() - m.y.mean()).square().sum() /
                                      std::max<int>(1, m.dim() - 1),
                                  1e-300);
    const double center = std::log10(var_y);
    const double lo = center - 6.0, hi = center + 6.0;

    auto objective = [&](double t_sigma, double t_omega) {
        return log_likelihood(std::sqrt(std::pow(10.0, t_sigma)), std::sqrt(std::pow(10.0, t_omega)), m);
    };

    detail::SimplexResult best;
    bool any_converged = false;
    for (const double offset : {-2.0, 0.0, 2.0}) {
        auto res = detail::nelder_mead_2d(objective, {center + offset, center + offset}, 0.5, lo, hi, 10000);
        any_converged = any_converged || res.converged;
        if (res.value > best.value) best = res;
    }

    VarianceParams v;
    v.sigma = std::sqrt(std::pow(10.0, best.x[0]));
    v.omega = std::sqrt(std::pow(10.0, best.x[1]));
    v.lambda = model_lambda(v.omega, m.r, m.r_i);
    v.loglik = best.value;
    if (!any_converged)
        throw OptimizerFailureError("fit_variance_params: no simplex start converged within 10^4 evaluations",
                                    v.sigma, v.omega, v.loglik);
    return v;
}

inline WorldPdf factual_pdf(const ModelInputs& m, const VarianceParams& v) {
    return WorldPdf{m.mu_hat, total_covariance(m, v.sigma, v.omega), m.prior.nu_hat, World::factual};
}

/// Counterfactual world. With an explicit counterfactual ensemble the mean is
/// its ensemble average and the covariance is
///   Sigma_bar = Sigma - omega^2 x_f x_f' + (1/r_bar - 1/r) C_hat;
/// without one, additivity gives mean mu_hat - x_f and the sampling term
/// C_hat / r_f is added instead.
inline WorldPdf counterfactual_pdf(const ModelInputs& m, const VarianceParams& v) {
    const double lambda = v.lambda;
    const double c_extra = m.has_counterfactual ? (1.0 / m.r_bar - 1.0 / m.r)
                                                : (1.0 / m.r_i[m.forcing_index]);
    const double shrink = 1.0 + lambda + c_extra;
    if (!(shrink > 0.0))
        throw NotPositiveDefiniteError("counterfactual_pdf: covariance scale factor is not positive");

    VectorXd mean = m.has_counterfactual ? m.mu_bar_hat
                                         : VectorXd(m.mu_hat - m.x_hat.col(m.forcing_index));

    // Dropping the scrutinized column keeps the remaining pattern term PSD,
    // since x x' - x_f x_f' is the sum over the other columns.
    MatrixXd x_rest(m.x_hat.rows(), m.p() - 1);
    for (int i = 0, c = 0; i < m.p(); ++i)
        if (i != m.forcing_index) x_rest.col(c++) = m.x_hat.col(i);

    VectorXd diag = shrink * m.prior.a_hat * m.prior.delta_hat;
    diag.array() += v.sigma * v.sigma;
    StructuredCovariance cov(std::move(diag),
                             {LowRankFactor{m.prior.omega_factor, shrink * (1.0 - m.prior.a_hat)},
                              LowRankFactor{x_rest, v.omega * v.omega}});
    return WorldPdf{std::move(mean), std::move(cov), m.prior.nu_hat, World::counterfactual};
}

/// Trace shares of the four factual-world uncertainty components,
/// normalized by the total: internal variability C, pattern-scaling model
/// error Q, observational error R and response-sampling S.
struct UncertaintyShares {
    double climate_variability = 0.0;
    double model_pattern_scaling = 0.0;
    double observational = 0.0;
    double sampling = 0.0;
};

inline UncertaintyShares uncertainty_decomposition(const WorldPdf& w, const ModelInputs& m,
                                                   const VarianceParams& v) {
    if (w.label != World::factual)
        throw ValidationError("uncertainty_decomposition: expects the factual world");
    const double tr_c = m.prior.c_trace();
    const double tr_q = v.omega * v.omega * m.x_hat.squaredNorm();
    const double tr_r = v.sigma * v.sigma * m.dim();
    const double tr_s = v.lambda * tr_c;
    const double total = (1.0 + v.lambda) * tr_c + tr_q + tr_r;
    return UncertaintyShares{tr_c / total, tr_q / total, tr_r / total, tr_s / total};
}

}  // namespace causalfp
