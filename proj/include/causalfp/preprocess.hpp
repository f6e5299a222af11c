#pragma once

#include <vector>

#include "causalfp/types.hpp"

namespace causalfp {

/// Converts runs to anomalies: for each column and each region, subtracts
/// that column's mean over the reference periods from every period of the
/// region. Afterwards the reference-period cells of each region average to
/// zero, per column. Idempotent.
inline MatrixXd to_anomalies(const MatrixXd& runs, const SpaceTimeLayout& layout,
                             const std::vector<int>& reference_periods) {
    layout.validate();
    if (reference_periods.empty()) throw ValidationError("to_anomalies: empty reference period set");
    for (int t : reference_periods)
        if (t < 0 || t >= layout.n_periods)
            throw ValidationError("to_anomalies: reference period " + std::to_string(t) +
                                  " outside [0, " + std::to_string(layout.n_periods) + ")");
    if (runs.rows() != layout.size())
        throw ValidationError("to_anomalies: matrix has " + std::to_string(runs.rows()) +
                              " rows, layout expects " + std::to_string(layout.size()));

    MatrixXd out = runs;
    const double inv_count = 1.0 / static_cast<double>(reference_periods.size());
    for (int c = 0; c < out.cols(); ++c) {
        for (int g = 0; g < layout.n_regions; ++g) {
            const int base = g * layout.n_periods;
            double ref_mean = 0.0;
            for (int t : reference_periods) ref_mean += out(base + t, c);
            ref_mean *= inv_count;
            for (int t = 0; t < layout.n_periods; ++t) out(base + t, c) -= ref_mean;
        }
    }
    return out;
}

/// Arithmetic mean across runs.
inline VectorXd ensemble_mean(const Ensemble& e) {
    e.validate();
    return e.runs.rowwise().mean();
}

}  // namespace causalfp
