#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "causalfp/causal.hpp"

namespace causalfp {

namespace detail {

inline nlohmann::json vector_to_json(const VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline nlohmann::json sub_attribution_to_json(const SubAttribution& s) {
    nlohmann::json j;
    j["index"] = index_label_name(s.label);
    j["z_obs"] = s.z_obs;
    j["u_star"] = s.threshold.u_star;
    j["pn"] = s.threshold.pn_indeterminate ? nlohmann::json() : nlohmann::json(s.threshold.triple.pn);
    j["ps"] = s.threshold.ps_indeterminate ? nlohmann::json() : nlohmann::json(s.threshold.triple.ps);
    j["pns"] = s.threshold.triple.pns;
    j["pn_indeterminate"] = s.threshold.pn_indeterminate;
    j["ps_indeterminate"] = s.threshold.ps_indeterminate;
    j["language"] = s.language.term;
    j["sigma_level"] = std::isfinite(s.language.sigma_level) ? nlohmann::json(s.language.sigma_level)
                                                             : nlohmann::json();
    j["phi"] = vector_to_json(s.phi);
    return j;
}

}  // namespace detail

inline nlohmann::json report_to_json(const CausalReport& rep) {
    nlohmann::json j;
    j["schema_version"] = rep.schema_version;
    j["forcing"] = rep.forcing;
    j["layout"] = {{"n_regions", rep.layout.n_regions}, {"n_periods", rep.layout.n_periods}};
    j["criterion"] = criterion_name(rep.criterion);
    j["sampling"] = {{"N", rep.n_samples}, {"seed", rep.seed}};

    nlohmann::json model;
    model["sigma_hat"] = rep.sigma_hat;
    model["omega_hat"] = rep.omega_hat;
    model["lambda_hat"] = rep.lambda_hat;
    model["loglik"] = rep.loglik;
    model["a_hat"] = rep.a_hat;
    model["nu_hat"] = rep.nu_hat;
    model["shrinkage_grid_fallback"] = rep.shrinkage_grid_fallback;
    model["r"] = rep.r;
    if (rep.r_bar > 0) model["r_bar"] = rep.r_bar;
    model["r0"] = rep.r0;
    nlohmann::json counts;
    for (const auto& [name, count] : rep.run_counts) counts[name] = count;
    model["r_i"] = counts;
    model["counterfactual_source"] = rep.counterfactual_source;
    j["model"] = model;

    nlohmann::json dec;
    dec["climate_variability"] = rep.decomposition.climate_variability;
    dec["model_pattern_scaling"] = rep.decomposition.model_pattern_scaling;
    dec["observational"] = rep.decomposition.observational;
    dec["sampling"] = rep.decomposition.sampling;
    dec["note"] = "sigma^2 I is reported entirely as observational uncertainty; "
                  "the split against model uncertainty is not identifiable from the observation alone";
    j["decomposition"] = dec;

    j["indexes"]["total"] = detail::sub_attribution_to_json(rep.total);
    if (rep.global) j["indexes"]["global_mean"] = detail::sub_attribution_to_json(*rep.global);
    if (rep.pattern) j["indexes"]["pattern_residual"] = detail::sub_attribution_to_json(*rep.pattern);
    j["notes"] = {{"global_average_convention", "global component uses the mean of the coefficients (sum/n)"}};
    return j;
}

inline void write_report_json(const std::filesystem::path& path, const CausalReport& rep,
                              const nlohmann::json& command_echo = {}) {
    nlohmann::json j = report_to_json(rep);
    if (!command_echo.empty()) j["command"] = command_echo;
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write report '" + path.string() + "'");
    out << j.dump(2) << "\n";
}

/// Plot-ready curve table; fixed column order u, G, G_bar, PN, PS, PNS.
inline void write_curves_csv(const std::filesystem::path& path, const ThresholdCurves& c) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write curves '" + path.string() + "'");
    out << "u,G,G_bar,PN,PS,PNS\n";
    char buf[40];
    auto cell = [&](double v) {
        if (std::isnan(v)) return std::string("nan");
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (std::size_t i = 0; i < c.u.size(); ++i)
        out << cell(c.u[i]) << ',' << cell(c.g[i]) << ',' << cell(c.g_bar[i]) << ',' << cell(c.pn[i]) << ','
            << cell(c.ps[i]) << ',' << cell(c.pns[i]) << "\n";
}

}  // namespace causalfp
