// Command-line front end: `run` drives the candidate search from a config
// file and persists records + plots, `verify` runs the invariant suite,
// `correlation` sweeps the expectation/residual relationship per depth.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "quva/config.hpp"
#include "quva/parallel.hpp"
#include "quva/report.hpp"
#include "quva/search.hpp"
#include "quva/verify.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
    std::optional<long long> seed;
    std::optional<std::string> output_dir;
    std::optional<long long> shots;
    bool no_plots = false;
};

void apply_overrides(quva::ExperimentConfig& cfg, const Overrides& ov) {
    if (ov.seed) {
        cfg.search.seed = static_cast<std::uint64_t>(*ov.seed);
        cfg.measurement.seed = static_cast<std::uint64_t>(*ov.seed);
        cfg.correlation.seed = static_cast<std::uint64_t>(*ov.seed);
    }
    if (ov.output_dir) cfg.output_dir = *ov.output_dir;
    if (ov.shots)
        cfg.measurement = quva::MeasurementConfig::with_shots(*ov.shots, cfg.measurement.seed ? cfg.measurement.seed
                                                                                              : cfg.search.seed);
    if (ov.no_plots) cfg.emit_plots = false;
}

void copy_config_into(const quva::ExperimentConfig& cfg, const fs::path& dir) {
    fs::path name = fs::path(cfg.source_path).filename();
    if (name.empty() || cfg.source_path == "<inline>") name = "config.cfg";
    std::ofstream out(dir / name);
    out << cfg.source_text;
}

std::vector<quva::ClassicalSolution> oracle_solutions(const quva::ExperimentConfig& cfg) {
    std::vector<quva::ClassicalSolution> solutions;
    if (!cfg.oracle.enabled) return solutions;
    const quva::DEProblem& p = cfg.de;
    if (cfg.potential.kind == quva::PotentialKind::Harmonic && cfg.potential.v_max == 0.0 && p.kappa_n == 0.0 &&
        p.kappa2 != 0.0) {
        solutions.push_back(
            quva::analytic_2o_solution(p.kappa1 / p.kappa2, p.kappa0 / p.kappa2, cfg.oracle.f0, p.n_qubits));
    } else {
        solutions = quva::periodic_solutions(p, cfg.potential, cfg.oracle.f0);
    }
    return solutions;
}

int cmd_run(const std::string& config_path, const Overrides& ov) {
    quva::ExperimentConfig cfg;
    try {
        cfg = quva::parse_experiment_config(config_path);
        apply_overrides(cfg, ov);
    } catch (const quva::ConfigError& e) {
        std::cerr << "quva run: config error: " << e.what();
        if (!e.field().empty()) std::cerr << " (field '" << e.field() << "')";
        std::cerr << "\n";
        return kExitConfig;
    }

    const fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        std::cerr << "quva run: cannot create output dir '" << cfg.output_dir << "': " << ec.message() << "\n";
        return kExitConfig;
    }
    copy_config_into(cfg, dir);

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<quva::CandidateRecord> records;
    try {
        records = quva::run_search(cfg.de, cfg.potential, cfg.ansatz, cfg.search, cfg.measurement);
    } catch (const std::exception& e) {
        std::cerr << "quva run: numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }

    std::vector<quva::ClassicalSolution> solutions;
    try {
        solutions = oracle_solutions(cfg);
        quva::annotate_fidelity(records, cfg.ansatz, solutions);
    } catch (const std::exception& e) {
        std::cerr << "quva run: oracle solve failed: " << e.what() << "\n";
        return kExitNumerical;
    }

    quva::RunSummary summary = quva::summarize(records, cfg.search.seed);
    summary.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    {
        nlohmann::json oj;
        oj["enabled"] = cfg.oracle.enabled;
        oj["n_solutions"] = solutions.size();
        nlohmann::json residues = nlohmann::json::array();
        for (const auto& s : solutions) residues.push_back(s.periodicity_residue);
        oj["periodicity_residues"] = residues;
        bool any_feasible = false;
        for (const auto& s : solutions) any_feasible |= s.feasible;
        oj["feasible"] = any_feasible;
        summary.oracle_info = oj;
    }

    quva::write_records_csv((dir / "records.csv").string(), records);
    quva::write_records_json((dir / "records.json").string(), records);
    quva::write_summary_json((dir / "summary.json").string(), summary, cfg);

    if (cfg.emit_plots) {
        // landscape slices through the best |total| point
        if (summary.best_abs_total_index >= 0) {
            const auto& center = records[static_cast<size_t>(summary.best_abs_total_index)].lambda;
            quva::write_landscape_slices((dir / "landscape.svg").string(), cfg.de, cfg.potential, cfg.ansatz, center);
        }
        if (summary.best_fidelity) {
            const auto& best = records[static_cast<size_t>(*summary.best_fidelity_index)];
            quva::write_solution_plot((dir / "solution.svg").string(), quva::build_ansatz(cfg.ansatz, best.lambda),
                                      solutions, *summary.best_fidelity);
        }
    }

    std::cout << "records: " << summary.n_records << ", candidates (|total| <= " << cfg.search.p_c
              << "): " << summary.candidate_count;
    if (summary.best_fidelity) std::cout << ", best candidate fidelity: " << *summary.best_fidelity;
    std::cout << ", elapsed: " << summary.elapsed_seconds << " s\n";
    std::cout << "results in " << dir.string() << "\n";

    if (summary.failed_evals > 0) {
        for (const auto& r : records) {
            if (!r.eval_ok) {
                std::cerr << "quva run: numerical failure at record " << r.eval_index << ": " << r.error << "\n";
                break;
            }
        }
        return kExitNumerical;
    }
    return 0;
}

int cmd_correlation(const std::string& config_path, const Overrides& ov) {
    quva::ExperimentConfig cfg;
    try {
        if (config_path.empty()) {
            cfg = quva::parse_experiment_config_text("[de]\nkappa0 = 0\n[search]\np_c = 1\n", "<defaults>");
        } else {
            cfg = quva::parse_experiment_config(config_path);
        }
        apply_overrides(cfg, ov);
    } catch (const quva::ConfigError& e) {
        std::cerr << "quva correlation: config error: " << e.what();
        if (!e.field().empty()) std::cerr << " (field '" << e.field() << "')";
        std::cerr << "\n";
        return kExitConfig;
    }

    const fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        std::cerr << "quva correlation: cannot create output dir: " << ec.message() << "\n";
        return kExitConfig;
    }

    const int depths[] = {0, 1, 2, 3};
    std::vector<quva::CorrelationDataset> datasets(4);
    try {
        quva::parallel_for(4, [&](int i) {
            quva::AnsatzSpec ansatz{3, depths[i], quva::AnsatzLayout::SixParam};
            datasets[static_cast<size_t>(i)] = quva::correlation_study(ansatz, cfg.correlation);
        });
    } catch (const std::exception& e) {
        std::cerr << "quva correlation: numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }

    nlohmann::json j;
    j["n_samples"] = cfg.correlation.n_samples;
    j["seed"] = cfg.correlation.seed;
    nlohmann::json per_depth = nlohmann::json::array();
    for (const auto& ds : datasets) {
        quva::write_correlation_csv((dir / ("correlation_d" + std::to_string(ds.depth) + ".csv")).string(), ds);
        if (cfg.emit_plots)
            quva::write_correlation_svg((dir / ("correlation_d" + std::to_string(ds.depth) + ".svg")).string(), ds);
        nlohmann::json dj;
        dj["depth"] = ds.depth;
        dj["spearman"] = ds.spearman_abs_total_vs_res;
        dj["cauchy_schwarz_violations"] = ds.cauchy_schwarz_violations;
        per_depth.push_back(dj);
        std::cout << "depth " << ds.depth << ": Spearman(|total|, residual) = " << ds.spearman_abs_total_vs_res
                  << ", CS violations = " << ds.cauchy_schwarz_violations << "\n";
    }
    j["depths"] = per_depth;
    std::ofstream out(dir / "correlation_summary.json");
    out << j.dump(2) << "\n";
    std::cout << "results in " << dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"variational differential-equation solver (simulated control-qubit protocols + GP root search)"};
    app.require_subcommand(1);

    Overrides ov;
    std::string config_path;

    CLI::App* run = app.add_subcommand("run", "run the candidate search from a config file");
    run->add_option("config", config_path, "experiment config file")->required();
    run->add_option("--seed", ov.seed, "override the search seed");
    run->add_option("--output-dir", ov.output_dir, "override the output directory");
    run->add_option("--shots", ov.shots, "sample protocols with this many shots instead of exact statistics");
    run->add_flag("--no-plots", ov.no_plots, "skip SVG plot emission");

    bool corrupt_shift = false;
    CLI::App* verify = app.add_subcommand("verify", "run the oracle-equivalence and identity suite");
    verify->add_flag("--corrupt-shift", corrupt_shift,
                     "negative control: corrupt the shift convention so the translation check fails");

    CLI::App* corr = app.add_subcommand("correlation", "expectation/residual correlation sweep per depth");
    corr->add_option("config", config_path, "experiment config file (optional)");
    corr->add_option("--seed", ov.seed, "override the sweep seed");
    corr->add_option("--output-dir", ov.output_dir, "override the output directory");
    corr->add_flag("--no-plots", ov.no_plots, "skip SVG plot emission");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, ov);
        if (verify->parsed()) return quva::print_verification(std::cout, {corrupt_shift}) == 0 ? 0 : 1;
        if (corr->parsed()) return cmd_correlation(config_path, ov);
    } catch (const std::exception& e) {
        std::cerr << "quva: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
