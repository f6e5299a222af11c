// Command-line front end: attribution reports, uncertainty scans, eigen
// spectra, synthetic-dataset generation and uncertainty decomposition, all
// emitted as JSON/CSV files.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "causalfp/causalfp.hpp"

namespace fs = std::filesystem;
using namespace causalfp;

namespace {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

fs::path default_output_dir() {
    if (const char* env = std::getenv("CAUSALFP_OUTPUT_DIR")) return fs::path(env);
    return fs::path(".");
}

struct CommonArgs {
    std::string manifest;
    std::string forcing;
    int n_samples = 200000;
    std::uint64_t seed = 42;
    std::string criterion = "PNS";
    std::string output_dir = default_output_dir().string();
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_forcing = true) {
    cmd->add_option("--manifest", args.manifest, "Dataset manifest (JSON)")->required();
    if (needs_forcing)
        cmd->add_option("--forcing", args.forcing, "Forcing under scrutiny")->required();
    cmd->add_option("--N", args.n_samples, "Monte Carlo draws per world");
    cmd->add_option("--seed", args.seed, "Random seed");
    cmd->add_option("--criterion", args.criterion, "Threshold criterion: PNS or PN")
        ->check(CLI::IsMember({"PNS", "PN"}));
    cmd->add_option("--output-dir", args.output_dir, "Where to write outputs");
}

AttributionOptions to_options(const CommonArgs& args) {
    AttributionOptions opt;
    opt.n_samples = args.n_samples;
    opt.seed = args.seed;
    opt.criterion = args.criterion == "PN" ? Criterion::pn : Criterion::pns;
    return opt;
}

nlohmann::json command_echo(const std::string& command, const CommonArgs& args) {
    nlohmann::json j;
    j["command"] = command;
    j["manifest"] = args.manifest;
    if (!args.forcing.empty()) j["forcing"] = args.forcing;
    j["N"] = args.n_samples;
    j["seed"] = args.seed;
    j["criterion"] = args.criterion;
    j["output_dir"] = args.output_dir;
    return j;
}

int run_attribute(const CommonArgs& args) {
    const Dataset d = load_dataset(args.manifest);
    const CausalReport rep = attribute(d, args.forcing, to_options(args));
    const fs::path dir(args.output_dir);
    fs::create_directories(dir);
    write_report_json(dir / "report.json", rep, command_echo("attribute", args));
    write_curves_csv(dir / "curves.csv", rep.total.threshold.curves);
    if (rep.global) write_curves_csv(dir / "curves_global_mean.csv", rep.global->threshold.curves);
    if (rep.pattern) write_curves_csv(dir / "curves_pattern_residual.csv", rep.pattern->threshold.curves);
    std::cout << "PNS(" << args.forcing << " -> y) = " << rep.total.threshold.triple.pns << " ("
              << rep.total.language.term << ", " << rep.total.language.sigma_level << " sigma)\n";
    return 0;
}

int run_scan(const CommonArgs& args, const std::vector<double>& factors, const std::vector<double>& gammas) {
    const Dataset d = load_dataset(args.manifest);
    const fs::path dir(args.output_dir);
    fs::create_directories(dir);
    if (!factors.empty()) {
        const InflationScan scan = inflation_scan(d, args.forcing, factors, to_options(args));
        std::ofstream out(dir / "inflation.csv");
        out << "factor,pns_total,pns_global,pns_pattern\n";
        for (std::size_t i = 0; i < scan.factors.size(); ++i)
            out << format_double(scan.factors[i]) << ',' << format_double(scan.pns_total[i]) << ','
                << format_double(scan.pns_global[i]) << ',' << format_double(scan.pns_pattern[i]) << "\n";
        std::cout << "wrote " << (dir / "inflation.csv").string() << "\n";
    }
    if (!gammas.empty()) {
        const CorrelationScan scan = correlation_scan(d, args.forcing, gammas, to_options(args));
        std::ofstream out(dir / "correlation.csv");
        out << "gamma,pns_total,pns_global,pns_pattern\n";
        for (std::size_t i = 0; i < scan.gammas.size(); ++i)
            out << format_double(scan.gammas[i]) << ',' << format_double(scan.pns_total[i]) << ','
                << format_double(scan.pns_global[i]) << ',' << format_double(scan.pns_pattern[i]) << "\n";
        std::cout << "wrote " << (dir / "correlation.csv").string() << "\n";
    }
    return 0;
}

int run_spectrum(const CommonArgs& args, int k) {
    const Dataset d = load_dataset(args.manifest);
    const ModelInputs m = assemble_inputs(d, args.forcing);
    const VarianceParams v = fit_variance_params(m);
    const WorldPdf wf = factual_pdf(m, v);
    const WorldPdf wc = counterfactual_pdf(m, v);
    const EigenSpectrum spec = eigen_signal_spectrum(wf, wc);

    const fs::path dir(args.output_dir);
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "eigen.csv");
        out << "rank,eigenvalue,contrast_projection,signal_coefficient\n";
        for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i)
            out << (i + 1) << ',' << format_double(spec.eigenvalues[i]) << ','
                << format_double(spec.contrast_projection[i]) << ','
                << format_double(spec.coefficients[i]) << "\n";
    }
    {
        const IndexSpec phi_star = optimal_index(wf, wc);
        const IndexSpec phi_plus = projected_index(m.prior.c_hat(), k, phi_star);
        const AttributionOptions opt = to_options(args);
        auto pns_of = [&](const IndexSpec& idx) {
            const MatrixXd zf = sample_indices(wf, {idx}, opt.n_samples, derive_seed(opt.seed, 1));
            const MatrixXd zc = sample_indices(wc, {idx}, opt.n_samples, derive_seed(opt.seed, 2));
            std::vector<double> f(zf.col(0).data(), zf.col(0).data() + zf.rows());
            std::vector<double> c(zc.col(0).data(), zc.col(0).data() + zc.rows());
            return optimize_threshold(kernel_cdf(f), kernel_cdf(c), idx.phi.dot(d.y), opt.criterion)
                .triple.pns;
        };
        std::ofstream out(dir / "projection.csv");
        out << "k,pns_phi_star,pns_phi_plus\n";
        out << k << ',' << format_double(pns_of(phi_star)) << ',' << format_double(pns_of(phi_plus)) << "\n";
    }
    std::cout << "wrote " << (dir / "eigen.csv").string() << " and " << (dir / "projection.csv").string()
              << "\n";
    return 0;
}

int run_simulate(const std::string& spec_path, const std::string& output_dir, bool null_mode) {
    const TruthSpec t = load_truth_spec(spec_path);
    const Dataset d = null_mode ? null_dataset(t) : generate_dataset(t);
    write_dataset(d, output_dir);
    std::cout << "wrote dataset under " << output_dir << "\n";
    return 0;
}

int run_decompose(const CommonArgs& args) {
    const Dataset d = load_dataset(args.manifest);
    const ModelInputs m = assemble_inputs(d, args.forcing);
    const VarianceParams v = fit_variance_params(m);
    const WorldPdf wf = factual_pdf(m, v);
    const UncertaintyShares shares = uncertainty_decomposition(wf, m, v);

    nlohmann::json j;
    j["command"] = command_echo("decompose", args);
    j["shares"] = {{"climate_variability", shares.climate_variability},
                   {"model_pattern_scaling", shares.model_pattern_scaling},
                   {"observational", shares.observational},
                   {"sampling", shares.sampling}};
    j["model"] = {{"sigma_hat", v.sigma}, {"omega_hat", v.omega}, {"lambda_hat", v.lambda},
                  {"a_hat", m.prior.a_hat}, {"nu_hat", m.prior.nu_hat}, {"loglik", v.loglik}};
    const fs::path dir(args.output_dir);
    fs::create_directories(dir);
    std::ofstream out(dir / "decompose.json");
    out << j.dump(2) << "\n";
    std::cout << "wrote " << (dir / "decompose.json").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Counterfactual causal attribution via probabilities of causation"};
    app.require_subcommand(1);

    CommonArgs attr_args;
    CLI::App* attr = app.add_subcommand("attribute", "Full attribution: report.json + curves CSVs");
    add_common(attr, attr_args);

    CommonArgs scan_args;
    std::vector<double> factors, gammas;
    CLI::App* scan = app.add_subcommand("scan", "Uncertainty inflation scan: inflation.csv");
    add_common(scan, scan_args);
    scan->add_option("--factors", factors, "Covariance inflation factors")->delimiter(',');
    scan->add_option("--gammas", gammas, "Off-diagonal correlation scale factors")->delimiter(',');

    CommonArgs spectrum_args;
    int k = 10;
    CLI::App* spectrum = app.add_subcommand("spectrum", "Covariance eigen-spectrum: eigen.csv + projection.csv");
    add_common(spectrum, spectrum_args);
    spectrum->add_option("--k", k, "Leading eigenvectors for the projected index");

    std::string spec_path, sim_output = default_output_dir().string();
    bool null_mode = false;
    CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset from a truth spec");
    simulate->add_option("--spec", spec_path, "Truth specification (JSON)")->required();
    simulate->add_option("--output-dir", sim_output, "Where to write the dataset");
    simulate->add_flag("--null", null_mode, "Zero out the scrutinized forcing in both worlds");

    CommonArgs dec_args;
    CLI::App* decompose = app.add_subcommand("decompose", "Uncertainty trace decomposition: decompose.json");
    add_common(decompose, dec_args);

    try {
        app.parse(argc, argv);
        if (app.got_subcommand(attr)) return run_attribute(attr_args);
        if (app.got_subcommand(scan)) {
            if (factors.empty() && gammas.empty())
                throw ValidationError("scan: provide --factors and/or --gammas");
            return run_scan(scan_args, factors, gammas);
        }
        if (app.got_subcommand(spectrum)) return run_spectrum(spectrum_args, k);
        if (app.got_subcommand(simulate)) return run_simulate(spec_path, sim_output, null_mode);
        if (app.got_subcommand(decompose)) return run_decompose(dec_args);
        return 1;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
