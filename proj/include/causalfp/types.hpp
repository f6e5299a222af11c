#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "causalfp/errors.hpp"

namespace causalfp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Space-time layout of the state vector: cells are flattened in
/// region-major order, i.e. cell index = region * n_periods + period.
struct SpaceTimeLayout {
    int n_regions = 0;
    int n_periods = 0;
    std::vector<std::string> region_labels;
    std::vector<std::string> period_labels;

    int size() const { return n_regions * n_periods; }

    void validate() const {
        if (n_regions < 1 || n_periods < 1)
            throw ValidationError("layout: n_regions and n_periods must be >= 1");
        if (!region_labels.empty() && static_cast<int>(region_labels.size()) != n_regions)
            throw ValidationError("layout: region_labels length does not match n_regions");
        if (!period_labels.empty() && static_cast<int>(period_labels.size()) != n_periods)
            throw ValidationError("layout: period_labels length does not match n_periods");
    }
};

/// A named ensemble of model runs. Columns are runs, rows are flattened
/// space-time cells in the same physical units as the observation.
struct Ensemble {
    std::string name;
    MatrixXd runs;  // n x r

    int dim() const { return static_cast<int>(runs.rows()); }
    int run_count() const { return static_cast<int>(runs.cols()); }

    void validate() const {
        if (runs.cols() < 1)
            throw ValidationError("ensemble '" + name + "': needs at least one run");
        if (!runs.allFinite())
            throw ValidationError("ensemble '" + name + "': contains non-finite values");
    }
};

/// Observation plus the ensembles needed for a counterfactual contrast:
/// the factual (all-forcings) runs, optional explicit counterfactual runs
/// per forcing, the individual-forcing response runs, and control runs.
struct Dataset {
    VectorXd y;
    SpaceTimeLayout layout;
    Ensemble factual;
    std::map<std::string, Ensemble> counterfactual_for;
    std::vector<Ensemble> individual;  // ordered; names are forcing identifiers
    Ensemble control;

    int dim() const { return static_cast<int>(y.size()); }
    int forcing_count() const { return static_cast<int>(individual.size()); }

    int forcing_position(const std::string& forcing) const {
        for (int i = 0; i < forcing_count(); ++i)
            if (individual[i].name == forcing) return i;
        throw ValidationError("forcing '" + forcing + "' not found among individual ensembles");
    }

    void validate() const {
        layout.validate();
        const int n = layout.size();
        if (y.size() != n)
            throw ValidationError("dataset: observation length " + std::to_string(y.size()) +
                                  " does not match layout size " + std::to_string(n));
        if (!y.allFinite()) throw ValidationError("dataset: observation contains non-finite values");
        if (individual.empty()) throw ValidationError("dataset: needs at least one individual ensemble");

        auto check = [n](const Ensemble& e) {
            e.validate();
            if (e.dim() != n)
                throw ValidationError("ensemble '" + e.name + "': " + std::to_string(e.dim()) +
                                      " rows, expected " + std::to_string(n));
        };
        check(factual);
        check(control);
        for (const auto& e : individual) check(e);
        for (const auto& [f, e] : counterfactual_for) check(e);
    }
};

}  // namespace causalfp
