#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "quva/expectation.hpp"
#include "quva/gpr.hpp"
#include "quva/oracles.hpp"
#include "quva/parallel.hpp"

namespace quva {

enum class SearchPhase { Random, Guided };

inline const char* phase_name(SearchPhase p) { return p == SearchPhase::Random ? "random" : "guided"; }

/// One evaluated parameter set: the per-term protocol outcomes, the assembled
/// total, the residual, and the candidate flag |total| <= p_c. Fidelity is
/// attached later by the harness when a classical oracle solution exists.
struct CandidateRecord {
    int eval_index = 0;
    ParameterVector lambda;
    double re_a_dagger = 0.0;
    double pot_overlap = 0.0;
    double nl_overlap = 0.0;
    double total = 0.0;
    double res_q = 0.0;
    std::optional<double> fidelity_vs_oracle;
    bool flagged = false;
    SearchPhase phase = SearchPhase::Random;
    bool eval_ok = true;
    std::string error;
};

namespace detail {

/// Propagated single-shot standard error of the assembled total, used to
/// raise the GP noise floor in Shots mode.
inline double shot_noise_floor(const DEProblem& p, const PotentialSpec& potential, const MeasurementConfig& meas) {
    if (meas.mode != MeasurementConfig::Mode::Shots) return 0.0;
    const double dl = p.delta_l();
    const double c_re = 2.0 * p.kappa2 / (dl * dl) - p.kappa1 / dl;
    const double c_im = p.kappa1 / dl;
    const double v_scale = potential.diag(p.n_qubits).sum();
    const double c2 = c_re * c_re + c_im * c_im + v_scale * v_scale + p.kappa_n * p.kappa_n;
    return std::sqrt(c2 / static_cast<double>(meas.shots));
}

inline CandidateRecord evaluate_candidate(const DEProblem& problem, const PotentialSpec& potential,
                                          const AnsatzSpec& ansatz, ParameterVector lambda,
                                          const MeasurementConfig& meas, int eval_index, SearchPhase phase,
                                          double p_c) {
    CandidateRecord rec;
    rec.eval_index = eval_index;
    rec.lambda = std::move(lambda);
    rec.phase = phase;
    MeasurementConfig cfg = meas;
    if (cfg.mode == MeasurementConfig::Mode::Shots)
        cfg.seed = rng::mix(meas.seed, static_cast<std::uint64_t>(eval_index));
    try {
        const ExpectationBreakdown bd = total_expectation(problem, potential, ansatz, rec.lambda, cfg);
        rec.re_a_dagger = bd.re_a_dagger;
        rec.pot_overlap = bd.pot_overlap;
        rec.nl_overlap = bd.nl_overlap;
        rec.total = bd.total;
        const Statevector state = build_ansatz(ansatz, rec.lambda);
        rec.res_q = quantum_residual(state, problem, potential).res_q;
        rec.flagged = std::abs(rec.total) <= p_c;
    } catch (const std::exception& e) {
        rec.eval_ok = false;
        rec.error = e.what();
        rec.total = std::numeric_limits<double>::quiet_NaN();
        rec.res_q = std::numeric_limits<double>::quiet_NaN();
        rec.flagged = false;
    }
    return rec;
}

}  // namespace detail

/// The full candidate search: n_random_init seeded random parameter sets,
/// then n_guided surrogate-proposed sets with the model data extended after
/// every evaluation and hyperparameters refreshed every refit_every
/// evaluations. Guided proposals alternate between the acquisition argmax
/// (contour localization) and |posterior-mean| descent from the best
/// observed anchors (dense sampling inside the |total| <= p_c band; the
/// acquisition alone proposes only where the uncertainty is still large, so
/// its band hits stay sparse). Failed evaluations are recorded with their
/// error and skipped as training data. Deterministic for a given
/// (cfg.seed, problem).
inline std::vector<CandidateRecord> run_search(const DEProblem& problem, const PotentialSpec& potential,
                                               const AnsatzSpec& ansatz, const SearchConfig& cfg,
                                               const MeasurementConfig& meas = MeasurementConfig::exact()) {
    cfg.validate();
    const int k = parameter_count(ansatz);
    const double noise_floor = detail::shot_noise_floor(problem, potential, meas);

    std::vector<CandidateRecord> records;
    records.reserve(static_cast<size_t>(cfg.n_random_init + cfg.n_guided));

    // Random phase: draw all parameter sets up front, evaluate in parallel,
    // keep records ordered by evaluation index.
    rng::Stream init_stream(rng::mix(cfg.seed, 0x1A17ULL));
    std::vector<ParameterVector> init_lambdas(static_cast<size_t>(cfg.n_random_init), ParameterVector(k));
    for (auto& lam : init_lambdas)
        for (double& v : lam) v = init_stream.uniform(0.0, 2.0 * std::numbers::pi);

    std::vector<CandidateRecord> random_recs(init_lambdas.size());
    parallel_for(cfg.n_random_init, [&](int i) {
        random_recs[static_cast<size_t>(i)] = detail::evaluate_candidate(
            problem, potential, ansatz, init_lambdas[static_cast<size_t>(i)], meas, i, SearchPhase::Random, cfg.p_c);
    });
    for (auto& r : random_recs) records.push_back(std::move(r));

    if (cfg.n_guided == 0) return records;

    auto training = [&]() {
        std::pair<std::vector<ParameterVector>, std::vector<double>> data;
        for (const auto& r : records) {
            if (!r.eval_ok) continue;
            data.first.push_back(r.lambda);
            data.second.push_back(r.total);
        }
        return data;
    };

    auto refit = [&]() {
        auto [xs, ys] = training();
        Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
        return fit(xs, ys, HyperFixed{default_kernel_params(yv, noise_floor)});
    };

    // Anchors for the exploitation half: one representative per discovered
    // near-zero region. Walking the records in ascending |total| and keeping
    // every point that has no better neighbor within the exclusion radius
    // yields the local |total| minima of the sampled landscape, so each basin
    // the explorer has touched gets driven toward the band, not just the
    // globally best one. Ties break on evaluation order (deterministic).
    constexpr double kRegionRadius = 1.0;  // lifted-space exclusion radius
    auto region_representatives = [&](size_t count) {
        std::vector<const CandidateRecord*> ok;
        for (const auto& r : records)
            if (r.eval_ok) ok.push_back(&r);
        std::sort(ok.begin(), ok.end(), [](const CandidateRecord* a, const CandidateRecord* b) {
            const double fa = std::abs(a->total), fb = std::abs(b->total);
            if (fa != fb) return fa < fb;
            return a->eval_index < b->eval_index;
        });
        std::vector<const CandidateRecord*> reps;
        std::vector<Eigen::RowVectorXd> rep_lifted;
        for (const CandidateRecord* r : ok) {
            const Eigen::RowVectorXd z = detail::lift_angles(r->lambda);
            bool covered = false;
            for (const auto& zr : rep_lifted) {
                if ((z - zr).norm() < kRegionRadius) {
                    covered = true;
                    break;
                }
            }
            if (covered) continue;
            reps.push_back(r);
            rep_lifted.push_back(z);
            if (reps.size() >= count) break;
        }
        return reps;
    };

    // Secant step between the best opposite-sign pair inside a region: the
    // value along the wrapped segment crosses zero, so the interpolated
    // crossing converges onto the level set in a few evaluations. Falls back
    // to surrogate polishing while the region has no sign change yet.
    auto wrap_angle = [](double a) {
        const double two_pi = 2.0 * std::numbers::pi;
        a = std::fmod(a, two_pi);
        return a < 0.0 ? a + two_pi : a;
    };
    auto region_proposal = [&](const GPRModel& model, const CandidateRecord& anchor,
                               std::uint64_t round) -> ParameterVector {
        const Eigen::RowVectorXd za = detail::lift_angles(anchor.lambda);
        const CandidateRecord* pos = nullptr;
        const CandidateRecord* neg = nullptr;
        for (const auto& r : records) {
            if (!r.eval_ok) continue;
            if ((detail::lift_angles(r.lambda) - za).norm() > 0.9) continue;
            if (r.total > 0.0 && (!pos || r.total < pos->total)) pos = &r;
            if (r.total < 0.0 && (!neg || r.total > neg->total)) neg = &r;
        }
        if (!pos || !neg) return polish_toward_zero(model, anchor.lambda, cfg, round);
        double s = pos->total / (pos->total - neg->total);
        s = std::min(0.95, std::max(0.05, s));
        rng::Stream jitter(rng::mix(cfg.seed, 0x5EC0ULL + round));
        ParameterVector x(static_cast<size_t>(k));
        for (int j = 0; j < k; ++j) {
            double d = neg->lambda[static_cast<size_t>(j)] - pos->lambda[static_cast<size_t>(j)];
            d = std::remainder(d, 2.0 * std::numbers::pi);
            x[static_cast<size_t>(j)] =
                wrap_angle(pos->lambda[static_cast<size_t>(j)] + s * d + jitter.uniform(-0.01, 0.01));
        }
        return x;
    };

    GPRModel model = refit();
    for (int t = 0; t < cfg.n_guided; ++t) {
        if (t > 0 && t % cfg.refit_every == 0) model = refit();
        const int eval_index = cfg.n_random_init + t;
        ParameterVector lam;
        if (t % 2 == 1) {
            const auto anchors = region_representatives(24);
            const auto* anchor = anchors[static_cast<size_t>(t / 2) % anchors.size()];
            lam = region_proposal(model, *anchor, static_cast<std::uint64_t>(t));
        } else {
            lam = propose_next(model, cfg, static_cast<std::uint64_t>(t));
        }
        CandidateRecord rec = detail::evaluate_candidate(problem, potential, ansatz, std::move(lam), meas,
                                                         eval_index, SearchPhase::Guided, cfg.p_c);
        const bool ok = rec.eval_ok;
        const double total = rec.total;
        const ParameterVector& lam_ref = rec.lambda;
        if (ok) append_observation(model, lam_ref, total);
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace quva
