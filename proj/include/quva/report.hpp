#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "quva/config.hpp"
#include "quva/oracles.hpp"
#include "quva/search.hpp"
#include "quva/svg.hpp"

namespace quva {

/// Every float is serialized with 17 significant digits so a parse of the
/// CSV reproduces the binary value exactly.
inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// fidelity annotation

/// Attaches max-fidelity-vs-oracle to every record (several periodic oracle
/// solutions may exist; any of them solves the problem).
inline void annotate_fidelity(std::vector<CandidateRecord>& records, const AnsatzSpec& ansatz,
                              const std::vector<ClassicalSolution>& solutions) {
    std::vector<const ClassicalSolution*> usable;
    for (const auto& s : solutions)
        if (s.feasible && s.normalized) usable.push_back(&s);
    if (usable.empty()) return;
    for (auto& rec : records) {
        if (!rec.eval_ok) continue;
        const Statevector state = build_ansatz(ansatz, rec.lambda);
        double best = 0.0;
        for (const ClassicalSolution* s : usable) best = std::max(best, fidelity(state, *s));
        rec.fidelity_vs_oracle = best;
    }
}

// ---------------------------------------------------------------------------
// records persistence

inline std::string records_csv_header(int n_params) {
    std::string h = "eval_index";
    for (int j = 1; j <= n_params; ++j) h += ",lambda" + std::to_string(j);
    h += ",re_a_dagger,pot_overlap,nl_overlap,total,res_q,fidelity_vs_oracle,flagged,phase";
    return h;
}

inline void write_records_csv(const std::string& path, const std::vector<CandidateRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    const int n_params = records.empty() ? 6 : static_cast<int>(records.front().lambda.size());
    out << records_csv_header(n_params) << "\n";
    for (const auto& r : records) {
        out << r.eval_index;
        for (double l : r.lambda) out << "," << format_g17(l);
        out << "," << format_g17(r.re_a_dagger) << "," << format_g17(r.pot_overlap) << ","
            << format_g17(r.nl_overlap) << "," << format_g17(r.total) << "," << format_g17(r.res_q) << ",";
        if (r.fidelity_vs_oracle) out << format_g17(*r.fidelity_vs_oracle);
        out << "," << (r.flagged ? "true" : "false") << "," << phase_name(r.phase) << "\n";
    }
}

inline nlohmann::json record_to_json(const CandidateRecord& r) {
    nlohmann::json j;
    j["eval_index"] = r.eval_index;
    j["lambda"] = r.lambda;
    j["re_a_dagger"] = r.re_a_dagger;
    j["pot_overlap"] = r.pot_overlap;
    j["nl_overlap"] = r.nl_overlap;
    j["total"] = r.total;
    j["res_q"] = r.res_q;
    if (r.fidelity_vs_oracle) j["fidelity_vs_oracle"] = *r.fidelity_vs_oracle;
    else j["fidelity_vs_oracle"] = nullptr;
    j["flagged"] = r.flagged;
    j["phase"] = phase_name(r.phase);
    if (!r.eval_ok) j["error"] = r.error;
    return j;
}

inline void write_records_json(const std::string& path, const std::vector<CandidateRecord>& records) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) arr.push_back(record_to_json(r));
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << arr.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// run summary

struct RunSummary {
    int n_records = 0;
    int candidate_count = 0;
    std::optional<double> best_fidelity;       // best among flagged candidates
    std::optional<int> best_fidelity_index;
    double best_abs_total = 0.0;
    int best_abs_total_index = -1;
    int failed_evals = 0;
    std::uint64_t seed = 0;
    double elapsed_seconds = 0.0;
    nlohmann::json oracle_info;
};

inline RunSummary summarize(const std::vector<CandidateRecord>& records, std::uint64_t seed) {
    RunSummary s;
    s.n_records = static_cast<int>(records.size());
    s.seed = seed;
    double best_abs = std::numeric_limits<double>::infinity();
    for (const auto& r : records) {
        if (!r.eval_ok) {
            ++s.failed_evals;
            continue;
        }
        if (r.flagged) {
            ++s.candidate_count;
            if (r.fidelity_vs_oracle && (!s.best_fidelity || *r.fidelity_vs_oracle > *s.best_fidelity)) {
                s.best_fidelity = *r.fidelity_vs_oracle;
                s.best_fidelity_index = r.eval_index;
            }
        }
        if (std::abs(r.total) < best_abs) {
            best_abs = std::abs(r.total);
            s.best_abs_total = r.total;
            s.best_abs_total_index = r.eval_index;
        }
    }
    return s;
}

inline void write_summary_json(const std::string& path, const RunSummary& s, const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["config"] = cfg.source_path;
    j["seed"] = s.seed;
    j["n_records"] = s.n_records;
    j["candidate_count"] = s.candidate_count;
    j["p_c"] = cfg.search.p_c;
    if (s.best_fidelity) {
        j["best_fidelity"] = *s.best_fidelity;
        j["best_fidelity_index"] = *s.best_fidelity_index;
    } else {
        j["best_fidelity"] = nullptr;
    }
    j["best_abs_total"] = s.best_abs_total;
    j["best_abs_total_index"] = s.best_abs_total_index;
    j["failed_evals"] = s.failed_evals;
    j["elapsed_seconds"] = s.elapsed_seconds;
    j["oracle"] = s.oracle_info;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// plots

/// Best flagged candidate amplitudes against the oracle solution(s), sign-
/// aligned for display (fidelity itself is sign-invariant).
inline void write_solution_plot(const std::string& path, const Statevector& candidate,
                                const std::vector<ClassicalSolution>& solutions, double fidelity_value) {
    SvgCanvas svg(640, 420);
    AxisMap ax;
    ax.x_min = 0.0;
    ax.x_max = 1.0;
    double lo = 0.0, hi = 0.0;
    for (Eigen::Index g = 0; g < candidate.dim(); ++g) {
        lo = std::min(lo, candidate.amplitude(static_cast<std::uint64_t>(g)).real());
        hi = std::max(hi, candidate.amplitude(static_cast<std::uint64_t>(g)).real());
    }
    for (const auto& s : solutions)
        if (s.feasible)
            for (Eigen::Index g = 0; g < s.samples.size(); ++g) {
                lo = std::min(lo, s.samples(g));
                hi = std::max(hi, s.samples(g));
            }
    ax.y_min = lo - 0.05;
    ax.y_max = hi + 0.05;
    ax.draw_frame(svg, "x", "normalized f(x)");

    const Eigen::Index dim = candidate.dim();
    auto xof = [&](Eigen::Index g) { return static_cast<double>(g) / static_cast<double>(dim); };

    const char* oracle_colors[] = {"#2166ac", "#4393c3", "#92c5de"};
    int ci = 0;
    for (const auto& s : solutions) {
        if (!s.feasible) continue;
        std::vector<std::pair<double, double>> pts;
        for (Eigen::Index g = 0; g < s.samples.size(); ++g) pts.emplace_back(ax.x(xof(g)), ax.y(s.samples(g)));
        svg.polyline(pts, oracle_colors[ci % 3], 1.5);
        ++ci;
    }

    // Sign-align the candidate to the first oracle solution for display.
    double sign = 1.0;
    for (const auto& s : solutions) {
        if (!s.feasible) continue;
        double dot = 0.0;
        for (Eigen::Index g = 0; g < dim; ++g)
            dot += candidate.amplitude(static_cast<std::uint64_t>(g)).real() * s.samples(g);
        if (dot < 0.0) sign = -1.0;
        break;
    }
    std::vector<std::pair<double, double>> cand;
    for (Eigen::Index g = 0; g < dim; ++g)
        cand.emplace_back(ax.x(xof(g)), ax.y(sign * candidate.amplitude(static_cast<std::uint64_t>(g)).real()));
    svg.polyline(cand, "#b2182b", 2.0);
    for (const auto& [x, y] : cand) svg.circle(x, y, 3.0, "#b2182b");

    svg.text(ax.px + 8, ax.py + 14, "oracle solution(s)", 12, "start", "#2166ac");
    svg.text(ax.px + 8, ax.py + 30, "best candidate (fidelity " + AxisMap::format_tick(fidelity_value) + ")", 12,
             "start", "#b2182b");
    std::ofstream out(path);
    out << svg.str();
}

/// One-dimensional slices of the total-expectation landscape through a
/// parameter point: each curve varies one angle with the others held fixed.
inline void write_landscape_slices(const std::string& path, const DEProblem& problem,
                                   const PotentialSpec& potential, const AnsatzSpec& ansatz,
                                   const ParameterVector& center) {
    const int k = static_cast<int>(center.size());
    const int samples = 64;
    std::vector<std::vector<std::pair<double, double>>> curves(static_cast<size_t>(k));
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int j = 0; j < k; ++j) {
        for (int i = 0; i <= samples; ++i) {
            ParameterVector lam = center;
            lam[static_cast<size_t>(j)] = 2.0 * std::numbers::pi * i / samples;
            const double v =
                total_expectation(problem, potential, ansatz, lam, MeasurementConfig::exact()).total;
            curves[static_cast<size_t>(j)].emplace_back(lam[static_cast<size_t>(j)], v);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    SvgCanvas svg(640, 420);
    AxisMap ax;
    ax.x_min = 0.0;
    ax.x_max = 2.0 * std::numbers::pi;
    ax.y_min = lo;
    ax.y_max = hi;
    ax.draw_frame(svg, "lambda_j", "total expectation");
    const char* colors[] = {"#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#a65628"};
    for (int j = 0; j < k; ++j) {
        std::vector<std::pair<double, double>> pts;
        for (auto& [x, y] : curves[static_cast<size_t>(j)]) pts.emplace_back(ax.x(x), ax.y(y));
        svg.polyline(pts, colors[j % 6], 1.5);
        svg.text(ax.px + ax.pw - 70, ax.py + 14 + 14 * j, "lambda" + std::to_string(j + 1), 11, "start",
                 colors[j % 6]);
    }
    // zero level
    if (lo < 0.0 && hi > 0.0) svg.line(ax.x(ax.x_min), ax.y(0.0), ax.x(ax.x_max), ax.y(0.0), "#999", 1.0);
    std::ofstream out(path);
    out << svg.str();
}

/// log-log scatter of |total expectation| against the residual.
inline void write_correlation_svg(const std::string& path, const CorrelationDataset& ds) {
    SvgCanvas svg(520, 420);
    AxisMap ax;
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : ds.points) {
        const double lx = std::log10(std::max(std::abs(p.total), 1e-12));
        const double ly = std::log10(std::max(p.res_q, 1e-12));
        pts.emplace_back(lx, ly);
        xlo = std::min(xlo, lx);
        xhi = std::max(xhi, lx);
        ylo = std::min(ylo, ly);
        yhi = std::max(yhi, ly);
    }
    ax.x_min = xlo;
    ax.x_max = xhi;
    ax.y_min = ylo;
    ax.y_max = yhi;
    ax.pw = 400;
    ax.draw_frame(svg, "log10 |total expectation|", "log10 residual");
    for (auto& [x, y] : pts) svg.circle(ax.x(x), ax.y(y), 2.0, "#377eb8", 0.6);
    svg.text(ax.px + 8, ax.py + 14,
             "depth " + std::to_string(ds.depth) + ", Spearman " + AxisMap::format_tick(ds.spearman_abs_total_vs_res),
             12);
    std::ofstream out(path);
    out << svg.str();
}

inline void write_correlation_csv(const std::string& path, const CorrelationDataset& ds) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    const int k = ds.points.empty() ? 6 : static_cast<int>(ds.points.front().lambda.size());
    out << "depth,kappa0,kappa1";
    for (int j = 1; j <= k; ++j) out << ",lambda" << j;
    out << ",total,res_q\n";
    for (const auto& p : ds.points) {
        out << p.depth << "," << format_g17(p.kappa0) << "," << format_g17(p.kappa1);
        for (double l : p.lambda) out << "," << format_g17(l);
        out << "," << format_g17(p.total) << "," << format_g17(p.res_q) << "\n";
    }
}

}  // namespace quva
