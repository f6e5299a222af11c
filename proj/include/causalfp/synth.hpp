#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "causalfp/rng.hpp"
#include "causalfp/types.hpp"

namespace causalfp {

/// Ground-truth generative specification for synthetic ensembles: known
/// forced responses, a Kronecker space-time noise covariance (equicorrelated
/// regions x AR(1) periods, optionally rescaled by a per-cell standard
/// deviation profile), pattern-scaling spread omega and observational error
/// sigma, plus the run counts of every ensemble.
struct TruthSpec {
    int n_regions = 0;
    int n_periods = 0;
    MatrixXd x_true;  // n x p individual responses
    std::vector<std::string> forcing_names;
    int forcing_index = 0;  // forcing under scrutiny
    bool additive_mu = true;
    VectorXd mu_true;      // derived as the row sum of x_true when additive
    VectorXd mu_bar_true;  // derived as the sum over the other forcings when additive

    double variance_scale = 1.0;
    VectorXd sd_profile;  // optional, length n; empty means constant 1
    double rho_time = 0.0;
    double rho_space = 0.0;
    double sigma_true = 0.0;
    double omega_true = 0.0;

    int r = 3;
    int r_bar = 3;
    std::vector<int> r_i;
    int r0 = 10;
    bool emit_counterfactual = true;
    std::uint64_t seed = 0;

    int dim() const { return n_regions * n_periods; }
    int p() const { return static_cast<int>(x_true.cols()); }

    void finalize() {
        if (additive_mu) {
            mu_true = x_true.rowwise().sum();
            mu_bar_true = mu_true - x_true.col(forcing_index);
        }
    }

    void validate() const {
        if (n_regions < 1 || n_periods < 1) throw ValidationError("truth spec: layout must be positive");
        const int n = dim();
        if (x_true.rows() != n || x_true.cols() < 1)
            throw ValidationError("truth spec: x_true must be n x p with p >= 1");
        if (static_cast<int>(forcing_names.size()) != p())
            throw ValidationError("truth spec: one name per forcing required");
        if (forcing_index < 0 || forcing_index >= p())
            throw ValidationError("truth spec: forcing_index out of range");
        if (mu_true.size() != n || mu_bar_true.size() != n)
            throw ValidationError("truth spec: response means must have length n");
        if (!(variance_scale > 0.0)) throw ValidationError("truth spec: variance_scale must be positive");
        if (sd_profile.size() != 0 && sd_profile.size() != n)
            throw ValidationError("truth spec: sd_profile must be empty or length n");
        if (!(std::abs(rho_time) < 1.0))
            throw ValidationError("truth spec: rho_time must lie in (-1, 1)");
        // Equicorrelation is positive definite only above -1/(m-1).
        const double rho_s_lo = n_regions > 1 ? -1.0 / (n_regions - 1) : -1.0;
        if (!(rho_space < 1.0 && rho_space > rho_s_lo))
            throw ValidationError("truth spec: rho_space must lie in (" + std::to_string(rho_s_lo) + ", 1)");
        if (!(sigma_true >= 0.0 && omega_true >= 0.0))
            throw ValidationError("truth spec: sigma and omega must be nonnegative");
        if (r < 1 || r_bar < 1 || r0 < 2) throw ValidationError("truth spec: run counts out of range");
        if (static_cast<int>(r_i.size()) != p())
            throw ValidationError("truth spec: one run count per forcing required");
        for (int ri : r_i)
            if (ri < 1) throw ValidationError("truth spec: individual run counts must be >= 1");
    }
};

/// Noise covariance: variance_scale * diag(sd) Kron(equicorr, AR1) diag(sd).
inline MatrixXd truth_covariance(const TruthSpec& t) {
    t.validate();
    const int nr = t.n_regions, np = t.n_periods, n = t.dim();
    MatrixXd ar1(np, np);
    for (int a = 0; a < np; ++a)
        for (int b = 0; b < np; ++b) ar1(a, b) = std::pow(t.rho_time, std::abs(a - b));
    MatrixXd cov(n, n);
    for (int g1 = 0; g1 < nr; ++g1)
        for (int g2 = 0; g2 < nr; ++g2) {
            const double rs = (g1 == g2) ? 1.0 : t.rho_space;
            cov.block(g1 * np, g2 * np, np, np) = rs * ar1;
        }
    cov *= t.variance_scale;
    if (t.sd_profile.size() > 0) {
        cov = t.sd_profile.asDiagonal() * cov * t.sd_profile.asDiagonal();
    }
    return cov;
}

namespace detail {

inline VectorXd standard_normal_vector(Rng& rng, int n) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.normal();
    return v;
}

/// Run = mean + sum_i (beta_i - 1) x_i + correlated noise, with the scaling
/// factors drawn per run.
inline VectorXd draw_run(Rng& rng, const VectorXd& mean, const MatrixXd& patterns, double omega,
                         const MatrixXd& chol_noise) {
    VectorXd run = mean;
    for (Eigen::Index i = 0; i < patterns.cols(); ++i)
        run += (omega * rng.normal()) * patterns.col(i);
    run += chol_noise * standard_normal_vector(rng, static_cast<int>(mean.size()));
    return run;
}

}  // namespace detail

/// Draws a full dataset from the truth: factual runs around mu_true,
/// counterfactual runs around mu_bar_true (scaling only the non-scrutinized
/// patterns), individual-forcing runs, control runs of pure noise, and a
/// single observation with additional isotropic error. Deterministic per
/// seed; every ensemble uses its own derived stream.
inline Dataset generate_dataset(const TruthSpec& t) {
    t.validate();
    const int n = t.dim();
    Eigen::LLT<MatrixXd> llt(truth_covariance(t));
    if (llt.info() != Eigen::Success)
        throw ValidationError("generate_dataset: truth covariance is not positive definite");
    const MatrixXd chol = llt.matrixL();

    MatrixXd patterns_rest(n, t.p() - 1);
    for (int i = 0, c = 0; i < t.p(); ++i)
        if (i != t.forcing_index) patterns_rest.col(c++) = t.x_true.col(i);

    Dataset d;
    d.layout.n_regions = t.n_regions;
    d.layout.n_periods = t.n_periods;

    {
        Rng rng(derive_seed(t.seed, 10));
        d.control.name = "control";
        d.control.runs.resize(n, t.r0);
        for (int j = 0; j < t.r0; ++j) d.control.runs.col(j) = chol * detail::standard_normal_vector(rng, n);
    }
    {
        Rng rng(derive_seed(t.seed, 11));
        d.factual.name = "factual";
        d.factual.runs.resize(n, t.r);
        for (int j = 0; j < t.r; ++j)
            d.factual.runs.col(j) = detail::draw_run(rng, t.mu_true, t.x_true, t.omega_true, chol);
    }
    if (t.emit_counterfactual) {
        Rng rng(derive_seed(t.seed, 12));
        Ensemble cf;
        cf.name = "counterfactual:" + t.forcing_names[t.forcing_index];
        cf.runs.resize(n, t.r_bar);
        for (int j = 0; j < t.r_bar; ++j)
            cf.runs.col(j) = detail::draw_run(rng, t.mu_bar_true, patterns_rest, t.omega_true, chol);
        d.counterfactual_for[t.forcing_names[t.forcing_index]] = std::move(cf);
    }
    for (int i = 0; i < t.p(); ++i) {
        Rng rng(derive_seed(t.seed, 20 + i));
        Ensemble e;
        e.name = t.forcing_names[i];
        e.runs.resize(n, t.r_i[i]);
        for (int j = 0; j < t.r_i[i]; ++j)
            e.runs.col(j) = detail::draw_run(rng, t.x_true.col(i), t.x_true.col(i), t.omega_true, chol);
        d.individual.push_back(std::move(e));
    }
    {
        Rng rng(derive_seed(t.seed, 30));
        d.y = detail::draw_run(rng, t.mu_true, t.x_true, t.omega_true, chol);
        if (t.sigma_true > 0.0) d.y += t.sigma_true * detail::standard_normal_vector(rng, n);
    }
    d.validate();
    return d;
}

/// Zero-signal control: the scrutinized pattern is removed from both worlds,
/// so factual and counterfactual runs come from the same generator and any
/// attribution signal is sampling noise.
inline Dataset null_dataset(const TruthSpec& t) {
    TruthSpec z = t;
    z.x_true.col(z.forcing_index).setZero();
    if (z.additive_mu) {
        z.finalize();
    } else {
        z.mu_true = z.mu_bar_true;
    }
    return generate_dataset(z);
}

// ---------------------------------------------------------------------------
// Truth-spec JSON format
// ---------------------------------------------------------------------------

namespace detail {

/// Named response-pattern generators for truth-spec files. "trend" rises
/// linearly over periods, "oscillation" is a temporal cosine, "checkerboard"
/// alternates sign across both regions and periods. Each accepts an
/// amplitude and optional per-region weights.
inline VectorXd make_pattern(const nlohmann::json& spec, int n_regions, int n_periods) {
    const int n = n_regions * n_periods;
    if (spec.contains("values")) {
        const auto vals = spec.at("values").get<std::vector<double>>();
        if (static_cast<int>(vals.size()) != n)
            throw ValidationError("truth spec pattern: 'values' must have length n");
        return Eigen::Map<const VectorXd>(vals.data(), n);
    }
    const std::string type = spec.at("type").get<std::string>();
    const double amplitude = spec.value("amplitude", 1.0);
    std::vector<double> weights(n_regions, 1.0);
    if (spec.contains("region_weights")) {
        weights = spec.at("region_weights").get<std::vector<double>>();
        if (static_cast<int>(weights.size()) != n_regions)
            throw ValidationError("truth spec pattern: one region weight per region required");
    }
    VectorXd v(n);
    for (int g = 0; g < n_regions; ++g)
        for (int tt = 0; tt < n_periods; ++tt) {
            const double frac = n_periods > 1 ? static_cast<double>(tt) / (n_periods - 1) : 1.0;
            double shape;
            if (type == "trend") {
                shape = frac;
            } else if (type == "oscillation") {
                const double period = spec.value("period", 3.0);
                shape = std::cos(2.0 * M_PI * tt / period);
            } else if (type == "checkerboard") {
                shape = ((g + tt) % 2 == 0) ? 1.0 : -1.0;
            } else if (type == "flat") {
                shape = 1.0;
            } else {
                throw ValidationError("truth spec pattern: unknown type '" + type + "'");
            }
            v[g * n_periods + tt] = amplitude * weights[g] * shape;
        }
    return v;
}

}  // namespace detail

inline TruthSpec truth_spec_from_json(const nlohmann::json& j) {
    TruthSpec t;
    t.n_regions = j.at("n_regions").get<int>();
    t.n_periods = j.at("n_periods").get<int>();
    if (t.n_regions < 1 || t.n_periods < 1) throw ValidationError("truth spec: layout must be positive");

    const auto& forcings = j.at("forcings");
    if (!forcings.is_array() || forcings.empty())
        throw ValidationError("truth spec: 'forcings' must be a non-empty array");
    t.x_true.resize(t.dim(), forcings.size());
    int idx = 0;
    for (const auto& f : forcings) {
        t.forcing_names.push_back(f.at("name").get<std::string>());
        t.x_true.col(idx) = detail::make_pattern(f.at("pattern"), t.n_regions, t.n_periods);
        t.r_i.push_back(f.value("runs", 3));
        ++idx;
    }
    const std::string scrutinized = j.at("forcing").get<std::string>();
    t.forcing_index = -1;
    for (int i = 0; i < t.p(); ++i)
        if (t.forcing_names[i] == scrutinized) t.forcing_index = i;
    if (t.forcing_index < 0)
        throw ValidationError("truth spec: scrutinized forcing '" + scrutinized + "' not among forcings");

    const auto& noise = j.at("noise");
    t.variance_scale = noise.value("variance", 1.0);
    t.rho_time = noise.value("rho_time", 0.0);
    t.rho_space = noise.value("rho_space", 0.0);
    if (noise.contains("sd_profile")) {
        const auto prof = noise.at("sd_profile").get<std::vector<double>>();
        t.sd_profile = Eigen::Map<const VectorXd>(prof.data(), prof.size());
    }
    t.sigma_true = j.value("sigma", 0.0);
    t.omega_true = j.value("omega", 0.0);
    t.r = j.value("factual_runs", 3);
    t.r_bar = j.value("counterfactual_runs", 3);
    t.r0 = j.value("control_runs", 10);
    t.emit_counterfactual = j.value("emit_counterfactual", true);
    t.seed = j.value("seed", 0ULL);
    t.additive_mu = true;
    t.finalize();
    t.validate();
    return t;
}

inline TruthSpec load_truth_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open truth spec '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("truth spec '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return truth_spec_from_json(j);
}

}  // namespace causalfp
