#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "quva/expectation.hpp"
#include "quva/pde_operators.hpp"
#include "quva/statevector.hpp"

namespace quva {

// ---------------------------------------------------------------------------
// direct expectations and the quantum residual

/// Plain <psi|op|psi> by matrix-vector product.
inline Complex direct_expectation(const Statevector& system, const DenseOperator& op) {
    if (op.rows() != system.dim() || op.cols() != system.dim())
        throw std::invalid_argument("operator dimension does not match state");
    return system.amplitudes().dot(op * system.amplitudes());
}

/// Residual norm ||op |psi>||^2 together with the overlap identity
/// Re<psi|op|psi> = Re<delta|psi> for delta = op|psi>, which is asserted on
/// every call (a violation indicates an operator-assembly bug).
struct ResidualReport {
    double res_q = 0.0;
    double total_expectation = 0.0;
    double delta_overlap_re = 0.0;
};

namespace detail {

inline ResidualReport residual_from_delta(const Statevector& system, const Eigen::VectorXcd& delta) {
    ResidualReport r;
    r.res_q = delta.squaredNorm();
    r.total_expectation = system.amplitudes().dot(delta).real();
    r.delta_overlap_re = delta.dot(system.amplitudes()).real();
    const double scale = std::max(1.0, std::sqrt(r.res_q));
    if (std::abs(r.total_expectation - r.delta_overlap_re) > 1e-12 * scale)
        throw std::runtime_error("residual overlap identity violated (operator assembly bug?)");
    return r;
}

}  // namespace detail

inline ResidualReport quantum_residual(const Statevector& system, const DenseOperator& op_total) {
    if (op_total.rows() != system.dim() || op_total.cols() != system.dim())
        throw std::invalid_argument("operator dimension does not match state");
    return detail::residual_from_delta(system, op_total * system.amplitudes());
}

/// Same report through the structured O(2^N) operator application.
inline ResidualReport quantum_residual(const Statevector& system, const DEProblem& problem,
                                       const PotentialSpec& potential) {
    return detail::residual_from_delta(system, apply_total_operator(problem, potential, system).amplitudes());
}

// ---------------------------------------------------------------------------
// rank statistics

/// Spearman rank correlation with average ranks on ties.
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("spearman needs two equal-length series");
    auto ranks = [](const std::vector<double>& v) {
        const size_t n = v.size();
        std::vector<size_t> idx(n);
        std::iota(idx.begin(), idx.end(), size_t{0});
        std::sort(idx.begin(), idx.end(), [&](size_t i, size_t j) { return v[i] < v[j]; });
        std::vector<double> r(n);
        size_t i = 0;
        while (i < n) {
            size_t j = i;
            while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const std::vector<double> ra = ranks(a), rb = ranks(b);
    const size_t n = a.size();
    double ma = 0, mb = 0;
    for (size_t i = 0; i < n; ++i) { ma += ra[i]; mb += rb[i]; }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double cov = 0, va = 0, vb = 0;
    for (size_t i = 0; i < n; ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va <= 0 || vb <= 0) return 0.0;
    return cov / std::sqrt(va * vb);
}

// ---------------------------------------------------------------------------
// expectation / residual correlation sweep

struct CorrelationPoint {
    int depth = 0;
    double kappa0 = 0.0, kappa1 = 0.0;
    ParameterVector lambda;
    double total = 0.0;
    double res_q = 0.0;
};

struct CorrelationDataset {
    int depth = 0;
    std::vector<CorrelationPoint> points;
    double spearman_abs_total_vs_res = 0.0;
    int cauchy_schwarz_violations = 0;
};

struct CorrelationConfig {
    double kappa_min = -50.0;
    double kappa_max = 50.0;
    int n_samples = 500;
    std::uint64_t seed = 1;
};

/// Random sweep over second-order problems (kappa2 = 1, no potential or
/// nonlinearity) at a fixed circuit depth: records (<O_tot>, Res) pairs for
/// random coefficients and random angles, the Spearman correlation between
/// |<O_tot>| and the residual, and any Cauchy-Schwarz violations
/// (|<O_tot>|^2 <= Res must hold for normalized states).
inline CorrelationDataset correlation_study(const AnsatzSpec& ansatz, const CorrelationConfig& cfg) {
    if (cfg.n_samples < 100) throw std::invalid_argument("correlation study needs n_samples >= 100");
    CorrelationDataset out;
    out.depth = ansatz.depth;
    out.points.reserve(static_cast<size_t>(cfg.n_samples));

    rng::Stream stream(rng::mix(cfg.seed, 0xC0DAULL + static_cast<std::uint64_t>(ansatz.depth)));
    const int k = parameter_count(ansatz);
    PotentialSpec no_pot;
    no_pot.kind = PotentialKind::Harmonic;
    no_pot.v_max = 0.0;

    std::vector<double> abs_totals, residuals;
    for (int i = 0; i < cfg.n_samples; ++i) {
        CorrelationPoint pt;
        pt.depth = ansatz.depth;
        pt.kappa0 = stream.uniform(cfg.kappa_min, cfg.kappa_max);
        pt.kappa1 = stream.uniform(cfg.kappa_min, cfg.kappa_max);
        pt.lambda.resize(k);
        for (double& l : pt.lambda) l = stream.uniform(0.0, 2.0 * std::numbers::pi);

        DEProblem problem;
        problem.kappa2 = 1.0;
        problem.kappa1 = pt.kappa1;
        problem.kappa0 = pt.kappa0;
        problem.n_qubits = ansatz.n_qubits;
        problem.depth = ansatz.depth;

        pt.total = total_expectation(problem, no_pot, ansatz, pt.lambda, MeasurementConfig::exact()).total;
        const Statevector state = build_ansatz(ansatz, pt.lambda);
        const ResidualReport rr = quantum_residual(state, problem, no_pot);
        pt.res_q = rr.res_q;

        if (pt.total * pt.total > pt.res_q * (1.0 + 1e-12) + 1e-12) ++out.cauchy_schwarz_violations;
        abs_totals.push_back(std::abs(pt.total));
        residuals.push_back(pt.res_q);
        out.points.push_back(std::move(pt));
    }
    out.spearman_abs_total_vs_res = spearman(abs_totals, residuals);
    return out;
}

// ---------------------------------------------------------------------------
// classical solutions

/// Discretized classical solution on the 2^N left-endpoint grid x_g = g/2^N.
struct ClassicalSolution {
    double f0 = 0.0;
    double fprime0 = 0.0;
    Eigen::VectorXd samples;
    bool normalized = false;
    double periodicity_residue = 0.0;  // |f(1) - f(0)| of the raw solution
    bool feasible = true;
    std::string note;

    ClassicalSolution normalized_copy() const {
        ClassicalSolution c = *this;
        const double n = samples.norm();
        if (n <= 0.0) {
            c.feasible = false;
            c.note = "zero solution cannot be normalized";
            return c;
        }
        c.samples /= n;
        c.normalized = true;
        return c;
    }
};

/// Closed-form periodic solution of f'' + kappa1 f' + kappa0 f = 0 with
/// f(0) = f(1) = f0 (no potential, no nonlinearity). The two-point boundary
/// system is solved exactly from the characteristic roots; a degenerate
/// system with consistent right-hand side yields the minimal-norm member of
/// the family. Returns an infeasibility report when no periodic solution
/// exists for the given coefficients.
inline ClassicalSolution analytic_2o_solution(double kappa1, double kappa0, double f0, int n_qubits = 3,
                                              bool normalize = true) {
    check_qubit_count(n_qubits);
    ClassicalSolution sol;
    sol.f0 = f0;

    const double disc = kappa1 * kappa1 - 4.0 * kappa0;
    std::function<double(double)> u1, u2, du1, du2;
    if (std::abs(disc) < 1e-12) {
        const double r = -kappa1 / 2.0;
        u1 = [r](double x) { return std::exp(r * x); };
        u2 = [r](double x) { return x * std::exp(r * x); };
        du1 = [r](double x) { return r * std::exp(r * x); };
        du2 = [r](double x) { return (1.0 + r * x) * std::exp(r * x); };
    } else if (disc > 0.0) {
        const double r1 = (-kappa1 + std::sqrt(disc)) / 2.0;
        const double r2 = (-kappa1 - std::sqrt(disc)) / 2.0;
        u1 = [r1](double x) { return std::exp(r1 * x); };
        u2 = [r2](double x) { return std::exp(r2 * x); };
        du1 = [r1](double x) { return r1 * std::exp(r1 * x); };
        du2 = [r2](double x) { return r2 * std::exp(r2 * x); };
    } else {
        const double al = -kappa1 / 2.0;
        const double be = std::sqrt(-disc) / 2.0;
        u1 = [al, be](double x) { return std::exp(al * x) * std::cos(be * x); };
        u2 = [al, be](double x) { return std::exp(al * x) * std::sin(be * x); };
        du1 = [al, be](double x) { return std::exp(al * x) * (al * std::cos(be * x) - be * std::sin(be * x)); };
        du2 = [al, be](double x) { return std::exp(al * x) * (al * std::sin(be * x) + be * std::cos(be * x)); };
    }

    Eigen::Matrix2d m;
    m << u1(0.0), u2(0.0), u1(1.0), u2(1.0);
    Eigen::Vector2d rhs(f0, f0);
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(1e-10);
    Eigen::Vector2d coeff = svd.solve(rhs);
    const double resid = (m * coeff - rhs).norm();
    if (resid > 1e-8 * std::max(1.0, rhs.norm())) {
        sol.feasible = false;
        sol.note = "no periodic solution for these coefficients and f0";
        return sol;
    }

    const Eigen::Index dim = Eigen::Index(1) << n_qubits;
    sol.samples = Eigen::VectorXd(dim);
    for (Eigen::Index g = 0; g < dim; ++g) {
        const double x = static_cast<double>(g) / static_cast<double>(dim);
        sol.samples(g) = coeff(0) * u1(x) + coeff(1) * u2(x);
    }
    sol.fprime0 = coeff(0) * du1(0.0) + coeff(1) * du2(0.0);
    sol.periodicity_residue = std::abs((coeff(0) * u1(1.0) + coeff(1) * u2(1.0)) - f0);
    if (normalize) return sol.normalized_copy();
    return sol;
}

/// Which continuous harmonic potential the integrator uses. MatchOperator
/// scales by 4/11 so the continuum problem matches the discrete operator
/// diagonal; Unscaled is the bare v_max (1-2x)^2 well.
enum class HarmonicScale { MatchOperator, Unscaled };

struct OdeOptions {
    int n_steps = 1 << 12;
    bool normalize = true;
    HarmonicScale scale = HarmonicScale::MatchOperator;
    double divergence_limit = 1e6;
};

/// Fixed-step RK4 on [0, 1] for
///     kappa2 f'' = -kappa1 f' - (kappa0 + V(x) + kappa_n f^2) f
/// given both initial values. Samples are taken at the grid points; the
/// periodicity residue |f(1) - f(0)| is reported for the shooting closure.
inline ClassicalSolution classical_ode_solve(const DEProblem& problem, const PotentialSpec& potential,
                                             double f0, double fp0, const OdeOptions& opts = {}) {
    if (potential.kind != PotentialKind::Harmonic)
        throw std::invalid_argument("the classical integrator supports the harmonic potential family");
    if (problem.kappa2 == 0.0) throw std::invalid_argument("kappa2 must be nonzero for the 2nd-order integrator");
    const Eigen::Index dim = Eigen::Index(1) << problem.n_qubits;
    int steps = opts.n_steps;
    if (steps < (1 << 12)) steps = 1 << 12;
    steps = ((steps + static_cast<int>(dim) - 1) / static_cast<int>(dim)) * static_cast<int>(dim);

    const double vfac = (opts.scale == HarmonicScale::MatchOperator) ? 4.0 / 11.0 : 1.0;
    auto vx = [&](double x) {
        const double r = 1.0 - 2.0 * x;
        return vfac * potential.v_max * r * r;
    };
    auto accel = [&](double x, double f, double fp) {
        return -(problem.kappa1 * fp + (problem.kappa0 + vx(x) + problem.kappa_n * f * f) * f) / problem.kappa2;
    };

    ClassicalSolution sol;
    sol.f0 = f0;
    sol.fprime0 = fp0;
    sol.samples = Eigen::VectorXd::Zero(dim);

    const double h = 1.0 / static_cast<double>(steps);
    const int per_sample = steps / static_cast<int>(dim);
    double f = f0, fp = fp0;
    sol.samples(0) = f0;
    for (int i = 0; i < steps; ++i) {
        const double x = static_cast<double>(i) * h;
        const double k1f = fp, k1p = accel(x, f, fp);
        const double k2f = fp + 0.5 * h * k1p, k2p = accel(x + 0.5 * h, f + 0.5 * h * k1f, fp + 0.5 * h * k1p);
        const double k3f = fp + 0.5 * h * k2p, k3p = accel(x + 0.5 * h, f + 0.5 * h * k2f, fp + 0.5 * h * k2p);
        const double k4f = fp + h * k3p, k4p = accel(x + h, f + h * k3f, fp + h * k3p);
        f += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
        fp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        if (!std::isfinite(f) || std::abs(f) > opts.divergence_limit) {
            sol.feasible = false;
            sol.note = "integration diverged at x = " + std::to_string(x);
            return sol;
        }
        const int next = i + 1;
        if (next % per_sample == 0 && next < steps)
            sol.samples(next / per_sample) = f;
    }
    sol.periodicity_residue = std::abs(f - f0);
    if (opts.normalize) return sol.normalized_copy();
    return sol;
}

struct ShootingOptions {
    double span = 64.0;      // scan f'(0) in [-span*max(1,|f0|), +span*max(1,|f0|)]
    int scan_points = 257;
    int bisect_iters = 100;
    double tol = 1e-10;
    OdeOptions ode;
};

/// Periodic closure by shooting: scans the free initial slope, bisects every
/// sign change of f(1) - f(0), and returns the periodic solutions found
/// (several can exist for oscillatory or nonlinear problems). When no root
/// exists the single best |f(1) - f(0)| minimizer is returned, marked
/// infeasible.
inline std::vector<ClassicalSolution> periodic_solutions(const DEProblem& problem, const PotentialSpec& potential,
                                                         double f0, const ShootingOptions& opts = {}) {
    OdeOptions raw = opts.ode;
    raw.normalize = false;

    const double hi = opts.span * std::max(1.0, std::abs(f0));
    std::vector<std::pair<double, double>> grid;  // (s, f(1) - f0)

    // Signed end residue f(1; s) - f0 from one integration pass.
    auto end_residue = [&](double s) -> std::optional<double> {
        if (problem.kappa2 == 0.0) return std::nullopt;
        const double vfac = (raw.scale == HarmonicScale::MatchOperator) ? 4.0 / 11.0 : 1.0;
        auto vx = [&](double x) {
            const double r = 1.0 - 2.0 * x;
            return vfac * potential.v_max * r * r;
        };
        auto accel = [&](double x, double f, double fp) {
            return -(problem.kappa1 * fp + (problem.kappa0 + vx(x) + problem.kappa_n * f * f) * f) / problem.kappa2;
        };
        int steps = std::max(raw.n_steps, 1 << 12);
        const double h = 1.0 / static_cast<double>(steps);
        double f = f0, fp = s;
        for (int i = 0; i < steps; ++i) {
            const double x = static_cast<double>(i) * h;
            const double k1f = fp, k1p = accel(x, f, fp);
            const double k2f = fp + 0.5 * h * k1p, k2p = accel(x + 0.5 * h, f + 0.5 * h * k1f, fp + 0.5 * h * k1p);
            const double k3f = fp + 0.5 * h * k2p, k3p = accel(x + 0.5 * h, f + 0.5 * h * k2f, fp + 0.5 * h * k2p);
            const double k4f = fp + h * k3p, k4p = accel(x + h, f + h * k3f, fp + h * k3p);
            f += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
            fp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            if (!std::isfinite(f) || std::abs(f) > raw.divergence_limit) return std::nullopt;
        }
        return f - f0;
    };

    for (int i = 0; i < opts.scan_points; ++i) {
        const double s = -hi + 2.0 * hi * static_cast<double>(i) / static_cast<double>(opts.scan_points - 1);
        if (auto r = end_residue(s)) grid.emplace_back(s, *r);
    }

    std::vector<double> roots;
    for (size_t i = 0; i + 1 < grid.size(); ++i) {
        double a = grid[i].first, fa = grid[i].second;
        double b = grid[i + 1].first, fb = grid[i + 1].second;
        if (fa == 0.0) { roots.push_back(a); continue; }
        if (fa * fb > 0.0) continue;
        for (int it = 0; it < opts.bisect_iters && (b - a) > opts.tol; ++it) {
            const double mid = 0.5 * (a + b);
            auto fm = end_residue(mid);
            if (!fm) break;
            if (fa * (*fm) <= 0.0) { b = mid; fb = *fm; } else { a = mid; fa = *fm; }
        }
        roots.push_back(0.5 * (a + b));
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [&](double x, double y) { return std::abs(x - y) < 1e-6 * std::max(1.0, hi); }),
                roots.end());

    std::vector<ClassicalSolution> out;
    OdeOptions final_opts = opts.ode;
    for (double s : roots) {
        ClassicalSolution c = classical_ode_solve(problem, potential, f0, s, final_opts);
        if (c.feasible) out.push_back(std::move(c));
    }
    if (out.empty()) {
        // No periodic root: report the scan minimizer with its residue.
        double best_s = 0.0, best_r = std::numeric_limits<double>::infinity();
        for (auto& [s, r] : grid)
            if (std::abs(r) < best_r) { best_r = std::abs(r); best_s = s; }
        ClassicalSolution c = classical_ode_solve(problem, potential, f0, best_s, final_opts);
        c.feasible = false;
        c.note = "no periodic root found; best residue " + std::to_string(best_r);
        out.push_back(std::move(c));
    }
    return out;
}

// ---------------------------------------------------------------------------
// fidelity

/// |<a|b>|^2 of two states of equal width.
inline double fidelity(const Statevector& a, const Statevector& b) {
    if (a.n_qubits() != b.n_qubits()) throw std::invalid_argument("fidelity requires equal qubit counts");
    if (std::abs(b.norm_sq() - 1.0) > 1e-8) throw std::invalid_argument("fidelity target is not normalized");
    return std::norm(inner_product(a, b));
}

/// Fidelity against a normalized classical sample vector.
inline double fidelity(const Statevector& a, const Eigen::VectorXd& normalized_samples) {
    if (normalized_samples.size() != a.dim()) throw std::invalid_argument("fidelity requires equal lengths");
    if (std::abs(normalized_samples.squaredNorm() - 1.0) > 1e-8)
        throw std::invalid_argument("fidelity target is not normalized");
    return std::norm(a.amplitudes().dot(normalized_samples.cast<Complex>()));
}

inline double fidelity(const Statevector& a, const ClassicalSolution& b) {
    if (!b.normalized) throw std::invalid_argument("fidelity target solution is not normalized");
    return fidelity(a, b.samples);
}

}  // namespace quva
