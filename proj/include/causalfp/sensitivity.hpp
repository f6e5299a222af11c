#pragma once

#include <string>
#include <vector>

#include "causalfp/causal.hpp"
#include "causalfp/model.hpp"

namespace causalfp {

// ---------------------------------------------------------------------------
// Uncertainty inflation scans
// ---------------------------------------------------------------------------

/// PNS of the total, global-mean, and pattern indexes as both world
/// covariances are inflated by each factor.
struct InflationScan {
    std::vector<double> factors;
    std::vector<double> pns_total;
    std::vector<double> pns_global;
    std::vector<double> pns_pattern;
};

namespace detail {

struct ScanPoint {
    double total = std::numeric_limits<double>::quiet_NaN();
    double global = std::numeric_limits<double>::quiet_NaN();
    double pattern = std::numeric_limits<double>::quiet_NaN();
};

/// One scan evaluation: derive the optimal index for the given pair of
/// world factorizations, split it, sample all indexes with shared draws and
/// maximize PNS per index.
inline ScanPoint scan_point(const VectorXd& mu, const VectorXd& mu_bar, const MatrixXd& chol_f,
                            const MatrixXd& chol_c, const IndexSpec& phi, double nu, const VectorXd& y,
                            int n_samples, std::uint64_t seed, Criterion criterion) {
    const SplitIndex split = split_index(phi);
    std::vector<VectorXd> phis = {phi.phi};
    if (!split.global_degenerate) phis.push_back(split.global.phi);
    if (!split.residual_degenerate) phis.push_back(split.residual.phi);

    const MatrixXd zf = sample_projected_t(mu, chol_f, nu, phis, n_samples, derive_seed(seed, 1));
    const MatrixXd zc = sample_projected_t(mu_bar, chol_c, nu, phis, n_samples, derive_seed(seed, 2));

    auto pns_for = [&](int col, const VectorXd& coeffs) {
        std::vector<double> f(zf.col(col).data(), zf.col(col).data() + zf.rows());
        std::vector<double> c(zc.col(col).data(), zc.col(col).data() + zc.rows());
        return optimize_threshold(kernel_cdf(f), kernel_cdf(c), coeffs.dot(y), criterion).triple.pns;
    };

    ScanPoint pt;
    pt.total = pns_for(0, phi.phi);
    int col = 1;
    if (!split.global_degenerate) pt.global = pns_for(col++, split.global.phi);
    if (!split.residual_degenerate) pt.pattern = pns_for(col, split.residual.phi);
    return pt;
}

}  // namespace detail

/// Rescales both world covariances by each factor (means unchanged), re-derives
/// the optimal index per factor, and records the maximized PNS of the total,
/// global-mean and pattern indexes. The shrinkage and variance fits are done
/// once and shared across the scan.
inline InflationScan inflation_scan(const Dataset& d, const std::string& forcing,
                                    const std::vector<double>& factors, const AttributionOptions& opt = {}) {
    for (double k : factors)
        if (!(k > 0.0)) throw ValidationError("inflation_scan: factors must be positive");

    const ModelInputs m = assemble_inputs(d, forcing);
    const VarianceParams v = fit_variance_params(m);
    const WorldPdf factual = factual_pdf(m, v);
    const WorldPdf counterfactual = counterfactual_pdf(m, v);

    InflationScan scan;
    scan.factors = factors;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        const double k = factors[i];
        const StructuredCovariance cov_f = factual.cov.scaled(k);
        const StructuredCovariance cov_c = counterfactual.cov.scaled(k);
        const IndexSpec phi = optimal_index(WorldPdf{factual.mean, cov_f, factual.nu, World::factual},
                                            WorldPdf{counterfactual.mean, cov_c, counterfactual.nu,
                                                     World::counterfactual});
        const auto pt = detail::scan_point(factual.mean, counterfactual.mean, detail::cholesky_lower(cov_f),
                                           detail::cholesky_lower(cov_c), phi, factual.nu, d.y, opt.n_samples,
                                           derive_seed(opt.seed, 1000 + i), opt.criterion);
        scan.pns_total.push_back(pt.total);
        scan.pns_global.push_back(pt.global);
        scan.pns_pattern.push_back(pt.pattern);
    }
    return scan;
}

/// Correlation-inflation scan: off-diagonal entries of both materialized
/// covariances are rescaled by gamma, the result is re-projected to the
/// nearest symmetric positive definite matrix by eigenvalue flooring at
/// 1e-10 * trace / n, and the scan proceeds as with variance inflation.
/// Valid gamma lie in [0, 1/max|corr|).
struct CorrelationScan {
    std::vector<double> gammas;
    std::vector<double> pns_total;
    std::vector<double> pns_global;
    std::vector<double> pns_pattern;
};

namespace detail {

inline MatrixXd scale_off_diagonal_spd(const MatrixXd& cov, double gamma) {
    MatrixXd out = gamma * cov;
    out.diagonal() = cov.diagonal();
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(out);
    if (eig.info() != Eigen::Success)
        throw NumericalError("correlation_scan: eigendecomposition failed");
    const double floor = 1e-10 * out.trace() / out.rows();
    VectorXd vals = eig.eigenvalues().cwiseMax(floor);
    return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
}

inline double max_abs_correlation(const MatrixXd& cov) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < cov.rows(); ++i)
        for (Eigen::Index j = 0; j < i; ++j)
            m = std::max(m, std::abs(cov(i, j)) / std::sqrt(cov(i, i) * cov(j, j)));
    return m;
}

}  // namespace detail

inline CorrelationScan correlation_scan(const Dataset& d, const std::string& forcing,
                                        const std::vector<double>& gammas,
                                        const AttributionOptions& opt = {}) {
    const ModelInputs m = assemble_inputs(d, forcing);
    const VarianceParams v = fit_variance_params(m);
    const WorldPdf factual = factual_pdf(m, v);
    const WorldPdf counterfactual = counterfactual_pdf(m, v);
    const MatrixXd base_f = factual.cov.materialize();
    const MatrixXd base_c = counterfactual.cov.materialize();

    const double max_corr = detail::max_abs_correlation(base_f);
    const double gamma_limit = max_corr > 0.0 ? 1.0 / max_corr : std::numeric_limits<double>::infinity();
    for (double gamma : gammas)
        if (!(gamma >= 0.0) || gamma >= gamma_limit)
            throw ValidationError("correlation_scan: gamma " + std::to_string(gamma) +
                                  " outside [0, " + std::to_string(gamma_limit) + ")");

    CorrelationScan scan;
    scan.gammas = gammas;
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        const MatrixXd cf = detail::scale_off_diagonal_spd(base_f, gammas[i]);
        const MatrixXd cc = detail::scale_off_diagonal_spd(base_c, gammas[i]);
        const VectorXd contrast = factual.mean - counterfactual.mean;
        Eigen::LDLT<MatrixXd> ldlt(cf);
        if (ldlt.info() != Eigen::Success)
            throw NotPositiveDefiniteError("correlation_scan: scaled covariance not factorizable");
        IndexSpec phi{ldlt.solve(contrast), IndexLabel::optimal};
        phi.validate();
        Eigen::LLT<MatrixXd> llt_f(cf), llt_c(cc);
        if (llt_f.info() != Eigen::Success || llt_c.info() != Eigen::Success)
            throw NotPositiveDefiniteError("correlation_scan: Cholesky factorization failed");
        const auto pt = detail::scan_point(factual.mean, counterfactual.mean, llt_f.matrixL(),
                                           llt_c.matrixL(), phi, factual.nu, d.y, opt.n_samples,
                                           derive_seed(opt.seed, 2000 + i), opt.criterion);
        scan.pns_total.push_back(pt.total);
        scan.pns_global.push_back(pt.global);
        scan.pns_pattern.push_back(pt.pattern);
    }
    return scan;
}

// ---------------------------------------------------------------------------
// Eigen-structure of the optimal index
// ---------------------------------------------------------------------------

/// Eigendecomposition of the factual covariance with the per-eigenvector
/// signal coefficients <v_k | mu - mu_bar> / lambda_k, sorted by descending
/// eigenvalue. Summing coeff_k * v_k reconstructs the optimal index.
struct EigenSpectrum {
    VectorXd eigenvalues;        // descending
    MatrixXd eigenvectors;       // columns aligned with eigenvalues
    VectorXd contrast_projection;  // <v_k | mu - mu_bar>
    VectorXd coefficients;       // contrast_projection / eigenvalue

    VectorXd reconstruct() const { return eigenvectors * coefficients; }
};

inline EigenSpectrum eigen_signal_spectrum(const WorldPdf& factual, const WorldPdf& counterfactual) {
    const int n = static_cast<int>(factual.mean.size());
    if (n > 2000) throw ValidationError("eigen_signal_spectrum: dimension exceeds the 2000 guard");
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(factual.cov.materialize());
    if (eig.info() != Eigen::Success) throw NumericalError("eigen_signal_spectrum: eigensolver failed");

    EigenSpectrum s;
    s.eigenvalues = eig.eigenvalues().reverse();
    s.eigenvectors = eig.eigenvectors().rowwise().reverse();
    const VectorXd contrast = factual.mean - counterfactual.mean;
    s.contrast_projection = s.eigenvectors.transpose() * contrast;
    s.coefficients = s.contrast_projection.cwiseQuotient(s.eigenvalues);
    return s;
}

/// Projects an index onto the span of the k leading eigenvectors of the
/// internal-variability covariance (not of the total covariance).
inline IndexSpec projected_index(const StructuredCovariance& control_cov, int k, const IndexSpec& phi_star) {
    phi_star.validate();
    const int n = control_cov.dim();
    if (k < 1 || k > n) throw ValidationError("projected_index: k must lie in [1, n]");
    if (n > 2000) throw ValidationError("projected_index: dimension exceeds the 2000 guard");
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(control_cov.materialize());
    if (eig.info() != Eigen::Success) throw NumericalError("projected_index: eigensolver failed");
    const MatrixXd leading = eig.eigenvectors().rightCols(k);  // ascending order: rightmost are largest
    IndexSpec out{leading * (leading.transpose() * phi_star.phi), IndexLabel::custom};
    out.validate();
    return out;
}

}  // namespace causalfp
