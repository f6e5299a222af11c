#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "causalfp/preprocess.hpp"
#include "causalfp/types.hpp"

namespace causalfp {

namespace fs = std::filesystem;

/// Plain CSV matrix: rows are flattened space-time cells (region-major),
/// columns are runs; no header row; LF or CRLF line endings.
inline MatrixXd read_csv_matrix(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open matrix file '" + path.string() + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t pos = 0;
                const double v = std::stod(cell, &pos);
                while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
                if (pos != cell.size()) throw std::invalid_argument(cell);
                row.push_back(v);
            } catch (const std::exception&) {
                throw ValidationError("non-numeric cell '" + cell + "' in '" + path.string() +
                                      "', row " + std::to_string(rows.size() + 1));
            }
        }
        if (width == 0) width = row.size();
        if (row.size() != width)
            throw ValidationError("ragged row " + std::to_string(rows.size() + 1) + " in '" +
                                  path.string() + "'");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ValidationError("empty matrix file '" + path.string() + "'");
    MatrixXd m(rows.size(), width);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j) m(i, j) = rows[i][j];
    if (!m.allFinite())
        throw ValidationError("non-finite value in matrix file '" + path.string() + "'");
    return m;
}

inline void write_csv_matrix(const fs::path& path, const MatrixXd& m) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write matrix file '" + path.string() + "'");
    char buf[40];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out << buf << (j + 1 < m.cols() ? "," : "");
        }
        out << "\n";
    }
}

/// Loads a dataset from a JSON manifest mapping roles to CSV files:
///
/// {
///   "n_regions": 6, "n_periods": 9,
///   "observation": "y.csv",
///   "factual": "hist.csv",
///   "counterfactual": {"ANT": "nat.csv"},
///   "individual": {"NAT": "xnat.csv", "ANT": "xant.csv"},
///   "control": "control.csv",
///   "reference_periods": [0, 1]          // optional
/// }
///
/// Relative file paths resolve against the manifest's directory. When
/// reference_periods is present, the observation and every ensemble are
/// converted to anomalies over those periods. Run column order is preserved.
inline Dataset load_dataset(const fs::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw ValidationError("cannot open manifest '" + manifest_path.string() + "'");
    nlohmann::ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("manifest '" + manifest_path.string() + "' is not valid JSON: " + e.what());
    }

    static const std::set<std::string> known = {"n_regions",      "n_periods", "observation",
                                                "factual",        "counterfactual", "individual",
                                                "control",        "reference_periods"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ValidationError("manifest: unknown role name '" + key + "'");
    for (const char* req : {"n_regions", "n_periods", "observation", "factual", "individual", "control"})
        if (!j.contains(req)) throw ValidationError(std::string("manifest: missing field '") + req + "'");

    const fs::path base = manifest_path.parent_path();
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

    Dataset d;
    d.layout.n_regions = j.at("n_regions").get<int>();
    d.layout.n_periods = j.at("n_periods").get<int>();
    d.layout.validate();
    const int n = d.layout.size();

    auto load_matrix = [&](const std::string& role, const std::string& file) {
        MatrixXd m = read_csv_matrix(resolve(file));
        if (m.rows() != n)
            throw ValidationError("manifest role '" + role + "' ('" + file + "'): " +
                                  std::to_string(m.rows()) + " rows, expected " + std::to_string(n));
        return m;
    };

    MatrixXd ym = load_matrix("observation", j.at("observation").get<std::string>());
    if (ym.cols() != 1) throw ValidationError("observation file must have exactly one column");
    d.y = ym.col(0);

    d.factual = Ensemble{"factual", load_matrix("factual", j.at("factual").get<std::string>())};
    d.control = Ensemble{"control", load_matrix("control", j.at("control").get<std::string>())};

    if (!j.at("individual").is_object() || j.at("individual").empty())
        throw ValidationError("manifest: 'individual' must be a non-empty object keyed by forcing");
    for (const auto& [forcing, file] : j.at("individual").items())
        d.individual.push_back(Ensemble{forcing, load_matrix("individual:" + forcing, file.get<std::string>())});

    if (j.contains("counterfactual")) {
        if (!j.at("counterfactual").is_object())
            throw ValidationError("manifest: 'counterfactual' must be an object keyed by forcing");
        for (const auto& [forcing, file] : j.at("counterfactual").items())
            d.counterfactual_for[forcing] =
                Ensemble{"counterfactual:" + forcing, load_matrix("counterfactual:" + forcing, file.get<std::string>())};
    }

    if (j.contains("reference_periods")) {
        const std::vector<int> refs = j.at("reference_periods").get<std::vector<int>>();
        d.y = to_anomalies(d.y, d.layout, refs).col(0);
        d.factual.runs = to_anomalies(d.factual.runs, d.layout, refs);
        d.control.runs = to_anomalies(d.control.runs, d.layout, refs);
        for (auto& e : d.individual) e.runs = to_anomalies(e.runs, d.layout, refs);
        for (auto& [f, e] : d.counterfactual_for) e.runs = to_anomalies(e.runs, d.layout, refs);
    }

    d.validate();
    return d;
}

/// Writes a dataset in the manifest/CSV format that load_dataset reads.
inline void write_dataset(const Dataset& d, const fs::path& dir) {
    d.validate();
    fs::create_directories(dir);
    nlohmann::ordered_json j;
    j["n_regions"] = d.layout.n_regions;
    j["n_periods"] = d.layout.n_periods;
    j["observation"] = "y.csv";
    write_csv_matrix(dir / "y.csv", d.y);
    j["factual"] = "factual.csv";
    write_csv_matrix(dir / "factual.csv", d.factual.runs);
    if (!d.counterfactual_for.empty()) {
        nlohmann::ordered_json cf;
        for (const auto& [forcing, e] : d.counterfactual_for) {
            const std::string file = "counterfactual_" + forcing + ".csv";
            cf[forcing] = file;
            write_csv_matrix(dir / file, e.runs);
        }
        j["counterfactual"] = cf;
    }
    nlohmann::ordered_json ind;
    for (const auto& e : d.individual) {
        const std::string file = "individual_" + e.name + ".csv";
        ind[e.name] = file;
        write_csv_matrix(dir / file, e.runs);
    }
    j["individual"] = ind;
    j["control"] = "control.csv";
    write_csv_matrix(dir / "control.csv", d.control.runs);

    std::ofstream out(dir / "manifest.json");
    if (!out) throw ValidationError("cannot write manifest in '" + dir.string() + "'");
    out << j.dump(2) << "\n";
}

}  // namespace causalfp
