#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <utility>

#include "quva/statevector.hpp"

namespace quva {

/// Differential-equation instance on the periodic unit interval, discretized
/// over 2^N grid points x_g = g / 2^N:
///
///   kappa2 f'' + kappa1 f' + kappa0 f + V(x) f + kappa_n |f|^2 f = 0
///
/// v_max is the height of the built-in harmonic potential; kappa_n the
/// self-interaction strength.
struct DEProblem {
    double kappa2 = 1.0;
    double kappa1 = 0.0;
    double kappa0 = 0.0;
    double v_max = 0.0;
    double kappa_n = 0.0;
    int n_qubits = 3;
    int depth = 0;

    double delta_l() const { return 1.0 / static_cast<double>(std::uint64_t(1) << n_qubits); }
};

enum class PotentialKind { Harmonic, Custom };

/// Diagonal potential V = sum_g V_g |g><g|. The built-in harmonic well peaks
/// at the interval ends and vanishes at the center; Custom takes raw
/// non-negative diagonal values.
struct PotentialSpec {
    PotentialKind kind = PotentialKind::Harmonic;
    double v_max = 0.0;
    Eigen::VectorXd custom;

    /// Materializes the diagonal V_g for an N-qubit grid.
    Eigen::VectorXd diag(int n_qubits) const;
};

// ---------------------------------------------------------------------------
// shift operators

/// Cyclic basis shift: subtractor() |g> = |(g+1) mod 2^N>. Acting on a grid
/// sampling C_g = f(g dL) this realizes the translation f(x) -> f(x - dL)
/// with periodic wraparound. adder() is its adjoint (the inverse shift).
inline DenseOperator subtractor(int n_qubits) {
    check_qubit_count(n_qubits);
    const Eigen::Index dim = Eigen::Index(1) << n_qubits;
    DenseOperator op = DenseOperator::Zero(dim, dim);
    for (Eigen::Index g = 0; g < dim; ++g) op((g + 1) % dim, g) = Complex(1.0, 0.0);
    return op;
}

inline DenseOperator adder(int n_qubits) { return subtractor(n_qubits).adjoint(); }

/// O(2^N) application of the shift without materializing the matrix.
inline Statevector apply_subtractor(const Statevector& state) {
    const Eigen::Index dim = state.dim();
    Eigen::VectorXcd out(dim);
    for (Eigen::Index g = 0; g < dim; ++g) out((g + 1) % dim) = state.amplitude(static_cast<std::uint64_t>(g));
    return Statevector(state.n_qubits(), std::move(out));
}

inline Statevector apply_adder(const Statevector& state) {
    const Eigen::Index dim = state.dim();
    Eigen::VectorXcd out(dim);
    for (Eigen::Index g = 0; g < dim; ++g) out(g) = state.amplitude(static_cast<std::uint64_t>((g + 1) % dim));
    return Statevector(state.n_qubits(), std::move(out));
}

// ---------------------------------------------------------------------------
// derivative stencils

/// (A + A^dag - 2 I) / dL^2: the periodic 3-point second-difference stencil.
/// Hermitian, negative semidefinite, circulant.
inline DenseOperator second_derivative_op(int n_qubits) {
    const double dl = 1.0 / static_cast<double>(std::uint64_t(1) << n_qubits);
    DenseOperator adag = subtractor(n_qubits);
    const Eigen::Index dim = adag.rows();
    return (adag.adjoint() + adag - 2.0 * DenseOperator::Identity(dim, dim)) / (dl * dl);
}

/// (I - A^dag) / dL: the one-sided (backward) periodic difference. Not
/// Hermitian.
inline DenseOperator first_derivative_op(int n_qubits) {
    const double dl = 1.0 / static_cast<double>(std::uint64_t(1) << n_qubits);
    DenseOperator adag = subtractor(n_qubits);
    const Eigen::Index dim = adag.rows();
    return (DenseOperator::Identity(dim, dim) - adag) / dl;
}

/// Higher derivatives as powers of the first-difference stencil. Note that
/// order 2 is a different stencil from second_derivative_op.
inline DenseOperator derivative_power(int n_qubits, int order) {
    if (order < 1) throw std::invalid_argument("derivative order must be >= 1 (use the identity directly)");
    if (order > 4) throw std::invalid_argument("derivative order capped at 4");
    DenseOperator d1 = first_derivative_op(n_qubits);
    DenseOperator out = d1;
    for (int k = 1; k < order; ++k) out = out * d1;
    return out;
}

// ---------------------------------------------------------------------------
// potential and nonlinear operators

/// Harmonic well on the 3-qubit grid: V_g = (4 v_max / 11) (1 - g/4)^2.
/// rho_chi = V / v_max is the v_max-independent unit-trace shape used by the
/// mixed-state overlap protocol.
struct HarmonicPotential {
    Eigen::VectorXd v_diag;
    DiagonalMixedState rho_chi;
    DenseOperator v_op;
};

inline HarmonicPotential harmonic_potential_diag(int n_qubits, double v_max) {
    if (n_qubits != 3)
        throw std::invalid_argument("built-in harmonic potential is defined on the 3-qubit grid; use Custom");
    if (v_max < 0.0) throw std::invalid_argument("v_max must be >= 0");
    HarmonicPotential pot;
    const Eigen::Index dim = 8;
    pot.rho_chi.n_qubits = 3;
    pot.rho_chi.diag = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index g = 0; g < dim; ++g) {
        const double r = 1.0 - static_cast<double>(g) / 4.0;
        pot.rho_chi.diag(g) = (4.0 / 11.0) * r * r;
    }
    pot.v_diag = v_max * pot.rho_chi.diag;
    pot.v_op = DenseOperator::Zero(dim, dim);
    for (Eigen::Index g = 0; g < dim; ++g) pot.v_op(g, g) = pot.v_diag(g);
    return pot;
}

inline Eigen::VectorXd PotentialSpec::diag(int n_qubits) const {
    if (kind == PotentialKind::Harmonic) {
        if (v_max == 0.0) return Eigen::VectorXd::Zero(Eigen::Index(1) << n_qubits);
        return harmonic_potential_diag(n_qubits, v_max).v_diag;
    }
    if (custom.size() != (Eigen::Index(1) << n_qubits))
        throw std::invalid_argument("custom potential diagonal length does not match 2^N");
    for (Eigen::Index g = 0; g < custom.size(); ++g)
        if (custom(g) < 0.0)
            throw std::invalid_argument("custom potential entries must be >= 0 for the mixed-state protocol");
    return custom;
}

/// State-dependent density operator rho_D = sum_g |C_g|^2 |g><g| built from
/// the current trial state. Never cached across candidates.
inline DiagonalMixedState nonlinear_density_op(const Statevector& system) {
    return decohere_to_diagonal(system);
}

// ---------------------------------------------------------------------------
// assembled operator

/// Dense kappa2 O_d2 + kappa1 O_d1 + kappa0 I + V + kappa_n rho_D, for oracle
/// use. `system` supplies the |C_g|^2 of the state-dependent term and is
/// required whenever kappa_n != 0.
inline DenseOperator total_operator(const DEProblem& problem, const PotentialSpec& potential,
                                    const Statevector* system = nullptr) {
    const Eigen::Index dim = Eigen::Index(1) << problem.n_qubits;
    DenseOperator op = problem.kappa2 * second_derivative_op(problem.n_qubits) +
                       problem.kappa1 * first_derivative_op(problem.n_qubits) +
                       problem.kappa0 * DenseOperator::Identity(dim, dim);
    Eigen::VectorXd v = potential.diag(problem.n_qubits);
    for (Eigen::Index g = 0; g < dim; ++g) op(g, g) += v(g);
    if (problem.kappa_n != 0.0) {
        if (system == nullptr)
            throw std::invalid_argument("nonlinear term (kappa_n != 0) needs the system state");
        DiagonalMixedState rho = nonlinear_density_op(*system);
        for (Eigen::Index g = 0; g < dim; ++g) op(g, g) += problem.kappa_n * rho.diag(g);
    }
    return op;
}

/// Structured O(2^N) application of the assembled operator (shift + diagonal
/// arithmetic, no dense matrix). Agrees with total_operator elementwise.
inline Statevector apply_total_operator(const DEProblem& problem, const PotentialSpec& potential,
                                        const Statevector& state, const Statevector* density_source = nullptr) {
    const double dl = problem.delta_l();
    const Statevector shifted_up = apply_subtractor(state);  // C_g -> C_{g-1}
    const Statevector shifted_dn = apply_adder(state);       // C_g -> C_{g+1}
    Eigen::VectorXcd out = problem.kappa2 / (dl * dl) *
                           (shifted_up.amplitudes() + shifted_dn.amplitudes() - 2.0 * state.amplitudes());
    out += problem.kappa1 / dl * (state.amplitudes() - shifted_up.amplitudes());
    out += problem.kappa0 * state.amplitudes();
    Eigen::VectorXd v = potential.diag(problem.n_qubits);
    if (problem.kappa_n != 0.0) {
        const Statevector& src = density_source ? *density_source : state;
        v += problem.kappa_n * nonlinear_density_op(src).diag;
    }
    out.array() += v.array().cast<Complex>() * state.amplitudes().array();
    return Statevector(problem.n_qubits, std::move(out));
}

// ---------------------------------------------------------------------------
// separable 2D extension

/// Kronecker-sum operators for d2/dx2 + d2/dy2 and d/dx + d/dy on a product
/// grid, each axis with its own 2^-N spacing (the demonstration uses equal
/// widths so dx = dy).
inline std::pair<DenseOperator, DenseOperator> separable_2d_ops(int n_qubits_x, int n_qubits_y) {
    check_qubit_count(n_qubits_x + n_qubits_y);
    const Eigen::Index dx = Eigen::Index(1) << n_qubits_x;
    const Eigen::Index dy = Eigen::Index(1) << n_qubits_y;
    const DenseOperator ix = DenseOperator::Identity(dx, dx);
    const DenseOperator iy = DenseOperator::Identity(dy, dy);

    auto kron = [](const DenseOperator& a, const DenseOperator& b) {
        DenseOperator out(a.rows() * b.rows(), a.cols() * b.cols());
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < a.cols(); ++j)
                out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        return out;
    };

    DenseOperator lap = kron(second_derivative_op(n_qubits_x), iy) + kron(ix, second_derivative_op(n_qubits_y));
    DenseOperator grad = kron(first_derivative_op(n_qubits_x), iy) + kron(ix, first_derivative_op(n_qubits_y));
    return {std::move(lap), std::move(grad)};
}

}  // namespace quva
