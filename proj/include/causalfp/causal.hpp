#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "causalfp/model.hpp"
#include "causalfp/rng.hpp"
#include "causalfp/types.hpp"

namespace causalfp {

// ---------------------------------------------------------------------------
// Probabilities of causation
// ---------------------------------------------------------------------------

/// Probabilities of necessary, sufficient, and necessary-and-sufficient
/// causation for an event with factual probability p and counterfactual
/// probability p_bar, under exogeneity and monotonicity:
///   PN  = max(1 - p_bar / p, 0)
///   PS  = max(1 - (1 - p) / (1 - p_bar), 0)
///   PNS = max(p - p_bar, 0)
/// Boundary conventions: p = 0 gives PN = 0, p_bar = 1 gives PS = 0.
struct CausationTriple {
    double pn = 0.0;
    double ps = 0.0;
    double pns = 0.0;
};

inline CausationTriple causation_probs(double p, double p_bar) {
    if (!(p >= 0.0 && p <= 1.0) || !(p_bar >= 0.0 && p_bar <= 1.0))
        throw ValidationError("causation_probs: probabilities must lie in [0,1]");
    CausationTriple t;
    t.pn = (p <= 0.0) ? 0.0 : std::max(1.0 - p_bar / p, 0.0);
    t.ps = (p_bar >= 1.0) ? 0.0 : std::max(1.0 - (1.0 - p) / (1.0 - p_bar), 0.0);
    t.pns = std::max(p - p_bar, 0.0);
    return t;
}

// ---------------------------------------------------------------------------
// Gaussian CDF / quantile helpers
// ---------------------------------------------------------------------------

inline double gaussian_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

/// Standard normal quantile, Wichura's AS241 (PPND16) algorithm.
inline double gaussian_quantile(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("gaussian_quantile: p must lie in [0,1]");
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r + 6.7265770927008700853e+4) * r +
                    4.5921953931549871457e+4) * r + 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r + 3.9307895800092710610e+4) * r +
                    2.1213794301586595867e+4) * r + 5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r + 1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r +
                     1.27045825245236838258e+0) * r + 3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
                  4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
                (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r +
                     1.48103976427480074590e-1) * r + 6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
                  2.05319162663775882187e+0) * r + 1.0);
    } else {
        r -= 5.0;
        value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r +
                     2.65321895265761230930e-2) * r + 2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
                  5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
                (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r +
                     7.86869131145613259100e-4) * r + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                  5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -value : value;
}

// ---------------------------------------------------------------------------
// Fingerprint indexes
// ---------------------------------------------------------------------------

enum class IndexLabel { optimal, global_mean, pattern_residual, custom };

inline const char* index_label_name(IndexLabel l) {
    switch (l) {
        case IndexLabel::optimal: return "optimal";
        case IndexLabel::global_mean: return "global_mean";
        case IndexLabel::pattern_residual: return "pattern_residual";
        default: return "custom";
    }
}

/// A linear fingerprint index Z = phi' Y.
struct IndexSpec {
    VectorXd phi;
    IndexLabel label = IndexLabel::custom;

    void validate() const {
        if (phi.size() == 0 || !phi.allFinite())
            throw ValidationError("IndexSpec: coefficients must be finite and non-empty");
        if (phi.norm() == 0.0) throw ValidationError("IndexSpec: coefficients must not all be zero");
    }
};

/// Linear-discriminant direction phi* = Sigma^-1 (mu - mu_bar), computed
/// against the factual covariance; returned unnormalized.
inline IndexSpec optimal_index(const WorldPdf& factual, const WorldPdf& counterfactual) {
    if (factual.mean.size() != counterfactual.mean.size())
        throw ValidationError("optimal_index: worlds have different dimensions");
    const VectorXd contrast = factual.mean - counterfactual.mean;
    const double scale = factual.mean.norm() + counterfactual.mean.norm() + 1.0;
    if (contrast.norm() <= 1e-14 * scale)
        throw DegenerateContrastError("optimal_index: factual and counterfactual means coincide");
    return IndexSpec{factual.cov.solve(contrast), IndexLabel::optimal};
}

/// Splits an index into a constant (global-average) component, every
/// coefficient equal to mean(phi), and the remaining pattern component.
/// The two recombine to the original exactly; an all-zero component is
/// reported through its degeneracy flag rather than as a usable index.
struct SplitIndex {
    IndexSpec global;
    IndexSpec residual;
    bool global_degenerate = false;
    bool residual_degenerate = false;
};

inline SplitIndex split_index(const IndexSpec& idx) {
    idx.validate();
    const double g = idx.phi.mean();
    SplitIndex s;
    s.global.phi = VectorXd::Constant(idx.phi.size(), g);
    s.global.label = IndexLabel::global_mean;
    s.residual.phi = idx.phi - s.global.phi;
    s.residual.label = IndexLabel::pattern_residual;
    const double scale = idx.phi.norm();
    s.global_degenerate = s.global.phi.norm() <= 1e-14 * scale;
    s.residual_degenerate = s.residual.phi.norm() <= 1e-14 * scale;
    return s;
}

// ---------------------------------------------------------------------------
// Monte Carlo sampling of index distributions
// ---------------------------------------------------------------------------

namespace detail {

constexpr int kSampleChunk = 8192;

/// Draws N realizations of the indexes phi_k' Y for Y Student-t with the
/// given mean, lower Cholesky factor of the variance matrix, and nu > 2
/// degrees of freedom, via the compound Gaussian / chi-squared construction
///   Z = phi' mu + (phi' L eps) * sqrt((nu - 2) / W),   W ~ chi2(nu).
/// All indexes share the same draws. Samples are generated in fixed-size
/// chunks with per-chunk derived seeds, chunk-major order, so the output is
/// reproducible regardless of how chunks would be scheduled.
inline MatrixXd sample_projected_t(const VectorXd& mean, const MatrixXd& chol_lower, double nu,
                                   const std::vector<VectorXd>& phis, int n_samples, std::uint64_t seed) {
    if (n_samples < 1000) throw ValidationError("sample_index: needs at least 10^3 samples");
    if (!(nu > 2.0)) throw ValidationError("sample_index: degrees of freedom must exceed 2");
    const int n = static_cast<int>(mean.size());
    const int k = static_cast<int>(phis.size());

    MatrixXd w(n, k);  // w_k = L' phi_k, so phi' L eps = w_k . eps
    VectorXd offsets(k);
    for (int j = 0; j < k; ++j) {
        w.col(j) = chol_lower.transpose() * phis[j];
        offsets[j] = phis[j].dot(mean);
    }

    MatrixXd out(n_samples, k);
    VectorXd eps(n);
    const int n_chunks = (n_samples + kSampleChunk - 1) / kSampleChunk;
    for (int c = 0; c < n_chunks; ++c) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
        const int begin = c * kSampleChunk;
        const int end = std::min(n_samples, begin + kSampleChunk);
        for (int s = begin; s < end; ++s) {
            for (int i = 0; i < n; ++i) eps[i] = rng.normal();
            const double scale = std::sqrt((nu - 2.0) / rng.chi_squared(nu));
            out.row(s) = (offsets + scale * (w.transpose() * eps)).transpose();
        }
    }
    return out;
}

inline MatrixXd cholesky_lower(const StructuredCovariance& cov) {
    Eigen::LLT<MatrixXd> llt(cov.materialize());
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefiniteError("covariance factorization failed");
    return llt.matrixL();
}

}  // namespace detail

/// Shared-draw sampling of several indexes against one world.
inline MatrixXd sample_indices(const WorldPdf& w, const std::vector<IndexSpec>& idxs, int n_samples,
                               std::uint64_t seed) {
    std::vector<VectorXd> phis;
    for (const auto& idx : idxs) {
        idx.validate();
        phis.push_back(idx.phi);
    }
    return detail::sample_projected_t(w.mean, detail::cholesky_lower(w.cov), w.nu, phis, n_samples, seed);
}

inline std::vector<double> sample_index(const WorldPdf& w, const IndexSpec& idx, int n_samples,
                                        std::uint64_t seed) {
    const MatrixXd m = sample_indices(w, {idx}, n_samples, seed);
    return std::vector<double>(m.col(0).data(), m.col(0).data() + m.rows());
}

// ---------------------------------------------------------------------------
// Kernel CDF estimation
// ---------------------------------------------------------------------------

/// Gaussian-kernel smoothed CDF on a fixed evaluation grid.
struct CdfEstimate {
    std::vector<double> grid;    // sorted evaluation points
    std::vector<double> values;  // nondecreasing, within [0,1]
    double bandwidth = 0.0;
    int sample_count = 0;

    /// Piecewise-linear evaluation, constant beyond the grid ends.
    double operator()(double u) const {
        if (u <= grid.front()) return values.front();
        if (u >= grid.back()) return values.back();
        const auto it = std::upper_bound(grid.begin(), grid.end(), u);
        const std::size_t i = static_cast<std::size_t>(it - grid.begin());
        const double t = (u - grid[i - 1]) / (grid[i] - grid[i - 1]);
        return values[i - 1] + t * (values[i] - values[i - 1]);
    }
};

namespace detail {

/// Piecewise-linear table of the standard normal CDF on [-8, 8]; keeps the
/// kernel sums cheap without losing monotonicity.
inline double gaussian_cdf_fast(double x) {
    constexpr int kPerUnit = 1024;
    constexpr int kSize = 16 * kPerUnit + 1;
    static const std::vector<double> table = [] {
        std::vector<double> t(kSize);
        for (int i = 0; i < kSize; ++i) t[i] = gaussian_cdf(-8.0 + static_cast<double>(i) / kPerUnit);
        return t;
    }();
    if (x <= -8.0) return 0.0;
    if (x >= 8.0) return 1.0;
    const double pos = (x + 8.0) * kPerUnit;
    const int i = static_cast<int>(pos);
    const double frac = pos - i;
    return table[i] + frac * (table[i + 1] - table[i]);
}

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * (sorted.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - i;
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

}  // namespace detail

/// Kernel CDF with Silverman bandwidth h = 0.9 min(sd, IQR/1.34) N^(-1/5),
/// evaluated exactly on a 2048-point grid spanning [min - 4h, max + 4h].
inline CdfEstimate kernel_cdf(const std::vector<double>& samples) {
    const int n = static_cast<int>(samples.size());
    if (n < 1000) throw ValidationError("kernel_cdf: needs at least 10^3 samples");
    std::vector<double> z = samples;
    std::sort(z.begin(), z.end());
    if (!std::isfinite(z.front()) || !std::isfinite(z.back()))
        throw ValidationError("kernel_cdf: samples must be finite");

    double mean = 0.0;
    for (double v : z) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : z) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1));
    const double iqr = detail::quantile_sorted(z, 0.75) - detail::quantile_sorted(z, 0.25);
    const double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 1e-12 * std::max(1.0, std::abs(mean))))
        throw DegenerateSamplesError("kernel_cdf: sample spread is degenerate");

    CdfEstimate est;
    est.bandwidth = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
    est.sample_count = n;
    const double h = est.bandwidth;
    const double lo = z.front() - 4.0 * h;
    const double hi = z.back() + 4.0 * h;
    const int grid_size = 2048;
    est.grid.resize(grid_size);
    est.values.resize(grid_size);

    // Kernel terms are 0 / 1 outside +-8h, so a sliding window over the
    // sorted samples covers each grid point exactly.
    std::size_t below = 0, upper = 0;
    const double inv_h = 1.0 / h;
    for (int i = 0; i < grid_size; ++i) {
        const double u = lo + (hi - lo) * i / (grid_size - 1);
        while (below < z.size() && z[below] <= u - 8.0 * h) ++below;
        while (upper < z.size() && z[upper] < u + 8.0 * h) ++upper;
        double acc = static_cast<double>(below);
        for (std::size_t jj = below; jj < upper; ++jj) acc += detail::gaussian_cdf_fast((u - z[jj]) * inv_h);
        est.grid[i] = u;
        est.values[i] = acc / n;
    }
    // Guard against rounding in the accumulation: clamp and rebuild monotone.
    double prev = 0.0;
    for (double& v : est.values) {
        v = std::min(1.0, std::max(v, prev));
        prev = v;
    }
    return est;
}

// ---------------------------------------------------------------------------
// Threshold optimization
// ---------------------------------------------------------------------------

enum class Criterion { pns, pn };

inline const char* criterion_name(Criterion c) { return c == Criterion::pns ? "PNS" : "PN"; }

/// Per-threshold curves on the merged evaluation grid; indeterminate ratio
/// probabilities (denominator below 1/N) are NaN.
struct ThresholdCurves {
    std::vector<double> u, g, g_bar, pn, ps, pns;
};

struct ThresholdResult {
    double u_star = 0.0;
    CausationTriple triple;
    bool pn_indeterminate = false;
    bool ps_indeterminate = false;
    ThresholdCurves curves;
};

/// Scans the merged grid of the two CDFs restricted to thresholds below the
/// observed index value, maximizing PNS(u) = G_bar(u) - G(u) (or PN(u) under
/// the PN criterion). Ties break toward the largest threshold.
inline ThresholdResult optimize_threshold(const CdfEstimate& g, const CdfEstimate& g_bar, double z_obs,
                                          Criterion criterion = Criterion::pns) {
    if (!std::isfinite(z_obs)) throw ValidationError("optimize_threshold: observed index must be finite");

    std::vector<double> grid;
    grid.reserve(g.grid.size() + g_bar.grid.size());
    grid.insert(grid.end(), g.grid.begin(), g.grid.end());
    grid.insert(grid.end(), g_bar.grid.begin(), g_bar.grid.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double floor_g = 1.0 / g.sample_count;
    const double floor_gbar = 1.0 / g_bar.sample_count;

    ThresholdResult res;
    auto& cur = res.curves;
    cur.u.reserve(grid.size());

    int best = -1, best_determinate = -1;
    double best_val = -1.0, best_det_val = -1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double u = grid[i];
        const double gv = g(u), gb = g_bar(u);
        const CausationTriple t = causation_probs(1.0 - gv, 1.0 - gb);
        const bool pn_ind = (1.0 - gv) < floor_g;
        const bool ps_ind = gb < floor_gbar;
        cur.u.push_back(u);
        cur.g.push_back(gv);
        cur.g_bar.push_back(gb);
        cur.pn.push_back(pn_ind ? nan : t.pn);
        cur.ps.push_back(ps_ind ? nan : t.ps);
        cur.pns.push_back(t.pns);

        if (u < z_obs) {
            const double val = (criterion == Criterion::pns) ? t.pns : (pn_ind ? nan : t.pn);
            if (!std::isnan(val) && val >= best_det_val) {
                best_det_val = val;
                best_determinate = static_cast<int>(i);
            }
            // Fallback candidate when every feasible PN denominator is floored.
            if (best < 0 || u > grid[best]) best = static_cast<int>(i);
        }
    }
    if (best < 0)
        throw InfeasibleThresholdError("optimize_threshold: no grid threshold lies below the observed value " +
                                       std::to_string(z_obs));
    const int pick = best_determinate >= 0 ? best_determinate : best;
    res.u_star = grid[pick];
    const double gv = g(res.u_star), gb = g_bar(res.u_star);
    res.triple = causation_probs(1.0 - gv, 1.0 - gb);
    res.pn_indeterminate = (1.0 - gv) < floor_g;
    res.ps_indeterminate = gb < floor_gbar;
    return res;
}

// ---------------------------------------------------------------------------
// Closed-form Gaussian reference
// ---------------------------------------------------------------------------

/// Maximized PNS for two equal-covariance Gaussian worlds: with Mahalanobis
/// separation D = sqrt((mu - mu_bar)' Sigma^-1 (mu - mu_bar)), the optimal
/// linear index and midpoint threshold give PNS = 2 F(D/2) - 1. Serves as the
/// analytic oracle for the Monte Carlo pipeline.
inline double analytic_pns_gaussian(const VectorXd& mu, const VectorXd& mu_bar,
                                    const StructuredCovariance& cov) {
    const VectorXd contrast = mu - mu_bar;
    const double scale = mu.norm() + mu_bar.norm() + 1.0;
    if (contrast.norm() <= 1e-14 * scale) return 0.0;
    const double mahalanobis_sq = cov.quad_form(contrast);
    return 2.0 * gaussian_cdf(0.5 * std::sqrt(mahalanobis_sq)) - 1.0;
}

// ---------------------------------------------------------------------------
// Calibrated language
// ---------------------------------------------------------------------------

struct CalibratedLanguage {
    std::string term;
    double sigma_level = 0.0;  // standard-Gaussian quantile of the probability
};

/// IPCC calibrated-terminology band for a probability, plus its expression
/// as a Gaussian exceedance level in numbers of sigma.
inline CalibratedLanguage calibrate_language(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("calibrate_language: p must lie in [0,1]");
    std::string term;
    if (p >= 0.99) term = "virtually certain";
    else if (p >= 0.95) term = "extremely likely";
    else if (p >= 0.90) term = "very likely";
    else if (p >= 0.66) term = "likely";
    else if (p > 0.33) term = "about as likely as not";
    else if (p > 0.10) term = "unlikely";
    else if (p > 0.01) term = "very unlikely";
    else term = "exceptionally unlikely";
    return CalibratedLanguage{std::move(term), gaussian_quantile(p)};
}

// ---------------------------------------------------------------------------
// End-to-end attribution
// ---------------------------------------------------------------------------

struct AttributionOptions {
    int n_samples = 200000;
    std::uint64_t seed = 42;
    Criterion criterion = Criterion::pns;
};

/// One index's attribution: observed value, optimized threshold, causation
/// probabilities and calibrated rendering.
struct SubAttribution {
    IndexLabel label = IndexLabel::custom;
    VectorXd phi;
    double z_obs = 0.0;
    ThresholdResult threshold;
    CalibratedLanguage language;
};

struct CausalReport {
    int schema_version = 1;
    std::string forcing;
    SpaceTimeLayout layout;
    Criterion criterion = Criterion::pns;
    int n_samples = 0;
    std::uint64_t seed = 0;

    // Fitted model echo.
    double sigma_hat = 0.0, omega_hat = 0.0, lambda_hat = 0.0, loglik = 0.0;
    double a_hat = 0.0, nu_hat = 0.0;
    bool shrinkage_grid_fallback = false;
    int r = 0, r_bar = 0, r0 = 0;
    std::vector<std::pair<std::string, int>> run_counts;
    std::string counterfactual_source;  // "ensemble" or "additivity"

    SubAttribution total;                   // optimal index
    std::optional<SubAttribution> global;   // constant-coefficient component
    std::optional<SubAttribution> pattern;  // residual component
    UncertaintyShares decomposition;
};

namespace detail {

template <typename F>
auto run_stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("stage '") + name + "': " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("stage '") + name + "': " + e.what());
    }
}

inline SubAttribution make_sub_attribution(const IndexSpec& idx, const VectorXd& y,
                                           const std::vector<double>& factual_samples,
                                           const std::vector<double>& counterfactual_samples,
                                           Criterion criterion) {
    SubAttribution sub;
    sub.label = idx.label;
    sub.phi = idx.phi;
    sub.z_obs = idx.phi.dot(y);
    const CdfEstimate g = kernel_cdf(factual_samples);
    const CdfEstimate g_bar = kernel_cdf(counterfactual_samples);
    sub.threshold = optimize_threshold(g, g_bar, sub.z_obs, criterion);
    sub.language = calibrate_language(sub.threshold.triple.pns);
    return sub;
}

}  // namespace detail

/// Full pipeline: model fit, world PDFs, optimal index and its global-mean /
/// pattern split, shared-draw Monte Carlo sampling, kernel CDFs, and
/// threshold optimization for each index. Deterministic given the dataset,
/// options and seed.
inline CausalReport attribute(const Dataset& d, const std::string& forcing,
                              const AttributionOptions& opt = {}) {
    using detail::run_stage;

    const ModelInputs m = run_stage("assemble_inputs", [&] { return assemble_inputs(d, forcing); });
    const VarianceParams v = run_stage("fit_variance_params", [&] { return fit_variance_params(m); });
    const WorldPdf factual = run_stage("factual_pdf", [&] { return factual_pdf(m, v); });
    const WorldPdf counterfactual = run_stage("counterfactual_pdf", [&] { return counterfactual_pdf(m, v); });
    const IndexSpec phi_star = run_stage("optimal_index", [&] { return optimal_index(factual, counterfactual); });
    const SplitIndex split = run_stage("split_index", [&] { return split_index(phi_star); });

    std::vector<IndexSpec> idxs = {phi_star};
    if (!split.global_degenerate) idxs.push_back(split.global);
    if (!split.residual_degenerate) idxs.push_back(split.residual);

    const MatrixXd zf = run_stage("sample_index(factual)", [&] {
        return sample_indices(factual, idxs, opt.n_samples, derive_seed(opt.seed, 1));
    });
    const MatrixXd zc = run_stage("sample_index(counterfactual)", [&] {
        return sample_indices(counterfactual, idxs, opt.n_samples, derive_seed(opt.seed, 2));
    });

    CausalReport rep;
    rep.forcing = forcing;
    rep.layout = d.layout;
    rep.criterion = opt.criterion;
    rep.n_samples = opt.n_samples;
    rep.seed = opt.seed;
    rep.sigma_hat = v.sigma;
    rep.omega_hat = v.omega;
    rep.lambda_hat = v.lambda;
    rep.loglik = v.loglik;
    rep.a_hat = m.prior.a_hat;
    rep.nu_hat = m.prior.nu_hat;
    rep.shrinkage_grid_fallback = m.prior.grid_fallback_warning;
    rep.r = m.r;
    rep.r_bar = m.r_bar;
    rep.r0 = m.prior.r0;
    for (std::size_t i = 0; i < m.r_i.size(); ++i) rep.run_counts.emplace_back(m.forcing_names[i], m.r_i[i]);
    rep.counterfactual_source = m.has_counterfactual ? "ensemble" : "additivity";

    auto column = [&](const MatrixXd& mat, int c) {
        return std::vector<double>(mat.col(c).data(), mat.col(c).data() + mat.rows());
    };
    rep.total = run_stage("optimize_threshold", [&] {
        return detail::make_sub_attribution(idxs[0], d.y, column(zf, 0), column(zc, 0), opt.criterion);
    });
    int c = 1;
    if (!split.global_degenerate) {
        rep.global = run_stage("optimize_threshold(global)", [&] {
            return detail::make_sub_attribution(split.global, d.y, column(zf, c), column(zc, c), opt.criterion);
        });
        ++c;
    }
    if (!split.residual_degenerate) {
        rep.pattern = run_stage("optimize_threshold(pattern)", [&] {
            return detail::make_sub_attribution(split.residual, d.y, column(zf, c), column(zc, c), opt.criterion);
        });
    }
    rep.decomposition = uncertainty_decomposition(factual, m, v);
    return rep;
}

}  // namespace causalfp
