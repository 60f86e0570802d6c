// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances and budgets are pinned in code.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "quva/config.hpp"
#include "quva/report.hpp"
#include "quva/search.hpp"
#include "quva/verify.hpp"

using namespace quva;

namespace {

struct Criterion {
    int id;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

// --- 1: protocol vs dense oracle across the three problem families ---------
Criterion criterion_protocol_oracle() {
    Criterion c{1, "protocol-oracle equivalence (3 families x 200, 1e-9)"};
    const double t0 = now_seconds();
    struct Family {
        DEProblem p;
        double v_max;
        const char* name;
    };
    const std::vector<Family> families = {
        {{1.0, 0.0, 8.0, 0.0, 0.0, 3, 2}, 0.0, "helmholtz"},
        {{1.0, 3.0, 25.0, 0.0, 0.0, 3, 3}, 0.0, "second-order"},
        {{1.0, 1.0, 40.0, 40.0, 500.0, 3, 1}, 40.0, "nonlinear"},
    };
    double worst = 0.0;
    rng::Stream stream(1001);
    for (const auto& fam : families) {
        PotentialSpec pot;
        pot.v_max = fam.v_max;
        const AnsatzSpec spec{3, fam.p.depth, AnsatzLayout::SixParam};
        for (int rep = 0; rep < 200; ++rep) {
            ParameterVector lam(6);
            for (double& l : lam) l = stream.uniform(0.0, 2.0 * std::numbers::pi);
            const double engine = total_expectation(fam.p, pot, spec, lam, MeasurementConfig::exact()).total;
            const Statevector psi = build_ansatz(spec, lam);
            const double direct = direct_expectation(psi, total_operator(fam.p, pot, &psi)).real();
            worst = std::max(worst, std::abs(engine - direct));
        }
    }
    c.seconds = now_seconds() - t0;
    c.pass = worst <= 1e-9 && c.seconds < 30.0;
    std::ostringstream d;
    d << "max |engine - oracle| = " << worst << ", " << c.seconds << " s";
    c.detail = d.str();
    return c;
}

// --- 2: translation convention ----------------------------------------------
Criterion criterion_translation() {
    Criterion c{2, "grid-shift translation (20 trig polys, N in {3,4,5}, 1e-12)"};
    const double t0 = now_seconds();
    double worst = 0.0;
    rng::Stream stream(1002);
    for (int n : {3, 4, 5}) {
        const DenseOperator adag = subtractor(n);
        for (int rep = 0; rep < 20; ++rep) {
            auto [v, shifted] = quva::detail::random_trig_poly(n, stream);
            worst = std::max(worst, (adag * v.cast<Complex>() - shifted.cast<Complex>()).cwiseAbs().maxCoeff());
        }
    }
    c.seconds = now_seconds() - t0;
    c.pass = worst <= 1e-12;
    c.detail = "max deviation = " + std::to_string(worst);
    return c;
}

// --- 3: circulant spectrum ---------------------------------------------------
Criterion criterion_spectrum() {
    Criterion c{3, "second-difference circulant spectrum (N <= 5, 1e-9)"};
    const double t0 = now_seconds();
    double worst = 0.0;
    for (int n = 1; n <= 5; ++n) {
        const Eigen::Index dim = Eigen::Index(1) << n;
        const double dl = 1.0 / static_cast<double>(dim);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(second_derivative_op(n).real());
        Eigen::VectorXd expected(dim);
        for (Eigen::Index k = 0; k < dim; ++k)
            expected(k) = 2.0 / (dl * dl) *
                          (std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(dim)) - 1.0);
        std::sort(expected.data(), expected.data() + dim);
        worst = std::max(worst, (es.eigenvalues() - expected).cwiseAbs().maxCoeff());
    }
    c.seconds = now_seconds() - t0;
    c.pass = worst <= 1e-9;
    c.detail = "max eigenvalue deviation = " + std::to_string(worst);
    return c;
}

// --- 4: state-prep + decoherence + mixed swap --------------------------------
Criterion criterion_mixed_protocols() {
    Criterion c{4, "state-prep/decoherence consistency and mixed swap (1e-10 / 1e-12)"};
    const double t0 = now_seconds();
    Eigen::VectorXd chi(8);
    chi << 4, 3, 2, 1, 0, 1, 2, 3;
    chi /= 2.0 * std::sqrt(11.0);
    const PreparedState prep = prepare_target_state(chi);
    const DiagonalMixedState rho = decohere_via_circuit(prep.state);
    const double prep_dev = (rho.diag - harmonic_potential_diag(3, 1.0).rho_chi.diag).cwiseAbs().maxCoeff();

    double swap_dev = 0.0;
    rng::Stream stream(1004);
    for (int rep = 0; rep < 50; ++rep) {
        const Statevector pure = quva::detail::random_state(3, stream);
        Eigen::VectorXd d(8);
        for (Eigen::Index g = 0; g < 8; ++g) d(g) = stream.uniform();
        d /= d.sum();
        const double via_protocol = swap_mixed(pure, {3, d}, MeasurementConfig::exact());
        const double direct = (d.array() * pure.amplitudes().cwiseAbs2().array()).sum();
        swap_dev = std::max(swap_dev, std::abs(via_protocol - direct));
    }
    c.seconds = now_seconds() - t0;
    c.pass = prep_dev <= 1e-10 && swap_dev <= 1e-12;
    std::ostringstream d;
    d << "prep dev = " << prep_dev << ", swap dev = " << swap_dev;
    c.detail = d.str();
    return c;
}

// --- 5: residual identity + Cauchy-Schwarz -----------------------------------
Criterion criterion_residual_identity() {
    Criterion c{5, "residual overlap identity and Cauchy-Schwarz (500 pairs, 1e-12)"};
    const double t0 = now_seconds();
    rng::Stream stream(1005);
    double worst_id = 0.0;
    int cs_violations = 0;
    for (int rep = 0; rep < 500; ++rep) {
        const int n = 2 + rep % 3;
        const Statevector psi = quva::detail::random_state(n, stream);
        const Eigen::Index dim = Eigen::Index(1) << n;
        DenseOperator op(dim, dim);
        for (Eigen::Index i = 0; i < dim; ++i)
            for (Eigen::Index j = 0; j < dim; ++j) op(i, j) = Complex(stream.normal(), stream.normal());
        op /= std::sqrt(static_cast<double>(dim));  // keep the scale O(1)
        const Eigen::VectorXcd delta = op * psi.amplitudes();
        const double lhs = psi.amplitudes().dot(delta).real();
        const double rhs = delta.dot(psi.amplitudes()).real();
        worst_id = std::max(worst_id, std::abs(lhs - rhs));
        const double res = delta.squaredNorm();
        if (lhs * lhs > res * (1.0 + 1e-12) + 1e-12) ++cs_violations;
        quantum_residual(psi, op);  // internal assertion must hold as well
    }
    c.seconds = now_seconds() - t0;
    c.pass = worst_id <= 1e-12 && cs_violations == 0;
    std::ostringstream d;
    d << "max identity deviation = " << worst_id << ", CS violations = " << cs_violations;
    c.detail = d.str();
    return c;
}

// --- 6: end-to-end searches reach the reference solutions --------------------
Criterion criterion_search_fidelity() {
    Criterion c{6, "search reproduces reference solutions (fidelity >= 0.85)"};
    const double t0 = now_seconds();
    struct Demo {
        DEProblem p;
        double v_max;
        double p_c;
        double f0;
        const char* name;
    };
    const std::vector<Demo> demos = {
        {{1.0, -1.0, 8.0, 0.0, 0.0, 3, 2}, 0.0, 4.0, -1.0, "second-order d=2"},
        {{1.0, 3.0, 25.0, 32.0, 0.0, 3, 3}, 32.0, 2.0, -0.19, "harmonic-well d=3"},
        {{1.0, 1.0, 40.0, 40.0, 500.0, 3, 1}, 40.0, 0.2, 0.54, "nonlinear d=1"},
    };
    bool all_ok = true;
    std::ostringstream detail;
    for (const auto& demo : demos) {
        const double td = now_seconds();
        PotentialSpec pot;
        pot.v_max = demo.v_max;
        const AnsatzSpec spec{3, demo.p.depth, AnsatzLayout::SixParam};

        std::vector<ClassicalSolution> solutions;
        if (demo.v_max == 0.0 && demo.p.kappa_n == 0.0)
            solutions.push_back(analytic_2o_solution(demo.p.kappa1, demo.p.kappa0, demo.f0));
        else
            solutions = periodic_solutions(demo.p, pot, demo.f0);

        double best_fid = 0.0;
        std::uint64_t found_seed = 0;
        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
            SearchConfig cfg;
            cfg.n_random_init = 600;
            cfg.n_guided = 600;
            cfg.p_c = demo.p_c;
            cfg.seed = seed;
            std::vector<CandidateRecord> records = run_search(demo.p, pot, spec, cfg);
            annotate_fidelity(records, spec, solutions);
            for (const auto& r : records)
                if (r.flagged && r.fidelity_vs_oracle && *r.fidelity_vs_oracle > best_fid) best_fid = *r.fidelity_vs_oracle;
            if (best_fid >= 0.85) {
                found_seed = seed;
                break;
            }
        }
        const double elapsed = now_seconds() - td;
        const bool ok = best_fid >= 0.85 && elapsed < 3.0 * 300.0;
        all_ok = all_ok && ok;
        detail << demo.name << ": fidelity " << best_fid << (found_seed ? " (seed " + std::to_string(found_seed) + ")" : "")
               << " in " << static_cast<int>(elapsed) << " s; ";
    }
    c.seconds = now_seconds() - t0;
    c.pass = all_ok;
    c.detail = detail.str();
    return c;
}

// --- 7: expectation/residual correlation -------------------------------------
Criterion criterion_correlation() {
    Criterion c{7, "expectation/residual Spearman > 0.5 at every depth"};
    const double t0 = now_seconds();
    bool ok = true;
    std::ostringstream d;
    CorrelationConfig cfg;
    cfg.n_samples = 500;
    cfg.seed = 1007;
    for (int depth = 0; depth <= 3; ++depth) {
        const CorrelationDataset ds = correlation_study({3, depth, AnsatzLayout::SixParam}, cfg);
        ok = ok && ds.spearman_abs_total_vs_res > 0.5 && ds.cauchy_schwarz_violations == 0;
        d << "d" << depth << ": " << ds.spearman_abs_total_vs_res << " ";
    }
    c.seconds = now_seconds() - t0;
    c.pass = ok;
    c.detail = d.str();
    return c;
}

// --- 8: shift-independent regime ---------------------------------------------
Criterion criterion_degenerate() {
    Criterion c{8, "kappa1 = 16 at N = 3: total == kappa0 (100 angles, 1e-9)"};
    const double t0 = now_seconds();
    DEProblem p{1.0, 16.0, 25.0, 0.0, 0.0, 3, 2};
    PotentialSpec none;
    none.v_max = 0.0;
    const AnsatzSpec spec{3, 2, AnsatzLayout::SixParam};
    rng::Stream stream(1008);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        ParameterVector lam(6);
        for (double& l : lam) l = stream.uniform(0.0, 2.0 * std::numbers::pi);
        worst = std::max(worst,
                         std::abs(total_expectation(p, none, spec, lam, MeasurementConfig::exact()).total - 25.0));
    }
    c.seconds = now_seconds() - t0;
    c.pass = worst <= 1e-9;
    c.detail = "max |total - kappa0| = " + std::to_string(worst);
    return c;
}

// --- 9: shot statistics --------------------------------------------------------
Criterion criterion_shots() {
    Criterion c{9, "10^4-shot estimates within 0.05 of exact in >= 95% of trials"};
    const double t0 = now_seconds();
    rng::Stream stream(1009);
    int within = 0, total = 0;
    for (int s = 0; s < 20; ++s) {
        const Statevector psi = quva::detail::random_state(3, stream);
        const double exact = hadamard_test_shift(psi, MeasurementConfig::exact());
        for (int trial = 0; trial < 10; ++trial) {
            const double est = hadamard_test_shift(
                psi, MeasurementConfig::with_shots(10000, rng::mix(777, static_cast<std::uint64_t>(s * 100 + trial))));
            ++total;
            if (std::abs(est - exact) < 0.05) ++within;
        }
    }
    c.seconds = now_seconds() - t0;
    const double frac = static_cast<double>(within) / total;
    c.pass = frac >= 0.95;
    std::ostringstream d;
    d << within << "/" << total << " within 0.05";
    c.detail = d.str();
    return c;
}

// --- 10: surrogate sanity -------------------------------------------------------
Criterion criterion_gpr() {
    Criterion c{10, "surrogate interpolation, acquisition monotonicity, basin localization"};
    const double t0 = now_seconds();

    // interpolation at training points
    rng::Stream stream(1010);
    std::vector<ParameterVector> xs;
    std::vector<double> ys;
    for (int i = 0; i < 10; ++i) {
        xs.push_back({stream.uniform(0, 6.28), stream.uniform(0, 6.28), stream.uniform(0, 6.28)});
        ys.push_back(std::sin(xs.back()[0]) + std::cos(xs.back()[1]) * std::sin(xs.back()[2]));
    }
    const GPRModel model = fit(xs, ys, HyperFixed{{1.0, 1.0, 1e-7}});
    double interp_dev = 0.0;
    for (size_t i = 0; i < xs.size(); ++i)
        interp_dev = std::max(interp_dev, std::abs(posterior(model, xs[i]).mean - ys[i]));

    // monotonicity grid
    bool mono = true;
    for (int mi = 0; mi <= 20 && mono; ++mi) {
        for (int si = 1; si <= 20 && mono; ++si) {
            const double m = 10.0 * mi / 20.0, s = 10.0 * si / 20.0;
            if (mi + 1 <= 20 && acquisition_value(m, s) <= acquisition_value(10.0 * (mi + 1) / 20.0, s)) mono = false;
            if (si + 1 <= 20 && acquisition_value(m, 10.0 * (si + 1) / 20.0) <= acquisition_value(m, s)) mono = false;
        }
    }

    // zero-basin localization on a synthetic objective with one root region
    const double c1 = 2.0, c2 = 4.0;
    auto objective = [&](const ParameterVector& l) {
        return 3.0 - 2.0 * std::cos(l[0] - c1) - 2.0 * std::cos(l[1] - c2);
    };
    auto wrapped = [](double a) {
        a = std::fmod(std::abs(a), 2.0 * std::numbers::pi);
        return std::min(a, 2.0 * std::numbers::pi - a);
    };
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        rng::Stream draw(rng::mix(4242, seed));
        std::vector<ParameterVector> tx;
        std::vector<double> ty;
        for (int i = 0; i < 60; ++i) {
            tx.push_back({draw.uniform(0, 2.0 * std::numbers::pi), draw.uniform(0, 2.0 * std::numbers::pi)});
            ty.push_back(objective(tx.back()));
        }
        Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(ty.data(), 60);
        const GPRModel m = fit(tx, ty, HyperFixed{default_kernel_params(yv)});
        SearchConfig cfg;
        cfg.seed = seed;
        cfg.candidate_pool_size = 128;
        const ParameterVector prop = propose_next(m, cfg, 0);
        const double dist = std::hypot(wrapped(prop[0] - c1), wrapped(prop[1] - c2));
        if (dist <= 1.3) ++hits;
    }

    c.seconds = now_seconds() - t0;
    c.pass = interp_dev <= 1e-8 && mono && hits >= 18;
    std::ostringstream d;
    d << "interp dev = " << interp_dev << ", monotone = " << (mono ? "yes" : "no") << ", basin hits = " << hits
      << "/20";
    c.detail = d.str();
    return c;
}

}  // namespace

int main() {
    std::vector<Criterion> results;
    results.push_back(criterion_protocol_oracle());
    results.push_back(criterion_translation());
    results.push_back(criterion_spectrum());
    results.push_back(criterion_mixed_protocols());
    results.push_back(criterion_residual_identity());
    results.push_back(criterion_search_fidelity());
    results.push_back(criterion_correlation());
    results.push_back(criterion_degenerate());
    results.push_back(criterion_shots());
    results.push_back(criterion_gpr());

    int failures = 0;
    for (const auto& c : results) {
        std::printf("[%2d] %s %s -- %s (%.1f s)\n", c.id, c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str(),
                    c.seconds);
        if (!c.pass) ++failures;
    }
    std::printf("acceptance: %zu/%zu criteria passed\n", results.size() - failures, results.size());
    return failures == 0 ? 0 : 1;
}
