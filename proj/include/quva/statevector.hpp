#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include "quva/rng.hpp"

namespace quva {

using Complex = std::complex<double>;

/// Dense matrix container for operators acting on a register. Operators are
/// not required to be unitary (derivative stencils are not); unitarity is
/// validated where a protocol demands it.
using DenseOperator = Eigen::MatrixXcd;

/// Desk-scale cap on register width. Dense simulation above this is outside
/// the intended envelope of this library.
inline constexpr int kMaxQubits = 12;

inline void check_qubit_count(int n_qubits, int cap = kMaxQubits) {
    if (n_qubits < 1 || n_qubits > cap)
        throw std::out_of_range("qubit count " + std::to_string(n_qubits) +
                                " outside [1, " + std::to_string(cap) + "]");
}

/// N-qubit register as a dense amplitude vector over the 2^N computational
/// basis states. Index convention: qubit 1 is the most significant bit of the
/// basis index g, so |j k l> on three qubits is g = 4j + 2k + l. Operations
/// take the state by value/const-ref and return a new state.
class Statevector {
public:
    explicit Statevector(int n_qubits) : n_(n_qubits) {
        check_qubit_count(n_qubits);
        amps_ = Eigen::VectorXcd::Zero(Eigen::Index(1) << n_);
        amps_(0) = Complex(1.0, 0.0);
    }

    Statevector(int n_qubits, Eigen::VectorXcd amplitudes) : n_(n_qubits), amps_(std::move(amplitudes)) {
        check_qubit_count(n_qubits);
        if (amps_.size() != (Eigen::Index(1) << n_))
            throw std::invalid_argument("amplitude vector length " + std::to_string(amps_.size()) +
                                        " does not match 2^" + std::to_string(n_));
    }

    int n_qubits() const { return n_; }
    Eigen::Index dim() const { return amps_.size(); }
    const Eigen::VectorXcd& amplitudes() const { return amps_; }
    Complex amplitude(std::uint64_t g) const { return amps_(static_cast<Eigen::Index>(g)); }

    double norm_sq() const { return amps_.squaredNorm(); }

    /// Bit of qubit q (1-based, 1 = most significant) inside basis index g.
    int bit_of(std::uint64_t g, int qubit) const {
        return static_cast<int>((g >> (n_ - qubit)) & 1ULL);
    }

    /// Largest |Im(amplitude)|; the RY/CX ansatz family keeps this at zero.
    double max_imag() const {
        double m = 0.0;
        for (Eigen::Index g = 0; g < amps_.size(); ++g)
            m = std::max(m, std::abs(amps_(g).imag()));
        return m;
    }

    Statevector normalized() const {
        double n2 = norm_sq();
        if (n2 <= 0.0) throw std::runtime_error("cannot normalize zero vector");
        return Statevector(n_, amps_ / std::sqrt(n2));
    }

private:
    int n_;
    Eigen::VectorXcd amps_;
};

/// Diagonal density matrix: non-negative entries summing to one.
struct DiagonalMixedState {
    int n_qubits = 0;
    Eigen::VectorXd diag;

    void validate(double tol = 1e-12) const {
        if (diag.size() != (Eigen::Index(1) << n_qubits))
            throw std::invalid_argument("diagonal length does not match qubit count");
        double sum = 0.0;
        for (Eigen::Index g = 0; g < diag.size(); ++g) {
            if (diag(g) < -tol)
                throw std::invalid_argument("diagonal mixed state has negative entry");
            sum += diag(g);
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("diagonal mixed state entries sum to " + std::to_string(sum));
        (void)tol;
    }
};

// ---------------------------------------------------------------------------
// construction

inline Statevector zero_state(int n_qubits, int cap = kMaxQubits) {
    check_qubit_count(n_qubits, cap);
    return Statevector(n_qubits);
}

inline Statevector basis_state(int n_qubits, std::uint64_t g) {
    Statevector s(n_qubits);
    if (g >= (std::uint64_t(1) << n_qubits))
        throw std::out_of_range("basis index out of range");
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(s.dim());
    a(static_cast<Eigen::Index>(g)) = Complex(1.0, 0.0);
    return Statevector(n_qubits, std::move(a));
}

/// Equal-amplitude superposition of all basis states.
inline Statevector uniform_state(int n_qubits) {
    Statevector s(n_qubits);
    double a = 1.0 / std::sqrt(static_cast<double>(s.dim()));
    return Statevector(n_qubits, Eigen::VectorXcd::Constant(s.dim(), Complex(a, 0.0)));
}

inline Statevector tensor(const Statevector& a, const Statevector& b) {
    check_qubit_count(a.n_qubits() + b.n_qubits());
    Eigen::VectorXcd out(a.dim() * b.dim());
    for (Eigen::Index i = 0; i < a.dim(); ++i)
        out.segment(i * b.dim(), b.dim()) = a.amplitude(i) * b.amplitudes();
    return Statevector(a.n_qubits() + b.n_qubits(), std::move(out));
}

inline Complex inner_product(const Statevector& a, const Statevector& b) {
    if (a.n_qubits() != b.n_qubits())
        throw std::invalid_argument("inner product of states with different qubit counts");
    return a.amplitudes().dot(b.amplitudes());  // Eigen dot conjugates the left side
}

// ---------------------------------------------------------------------------
// single-qubit gates

/// One of the gates the ansatz and protocols are built from. Rotation kinds
/// carry an angle; H and X ignore it.
struct Gate1Q {
    enum class Kind { RX, RY, RZ, H, X };
    Kind kind = Kind::H;
    double angle = 0.0;

    static Gate1Q rx(double a) { return {Kind::RX, a}; }
    static Gate1Q ry(double a) { return {Kind::RY, a}; }
    static Gate1Q rz(double a) { return {Kind::RZ, a}; }
    static Gate1Q h() { return {Kind::H, 0.0}; }
    static Gate1Q x() { return {Kind::X, 0.0}; }

    /// 2x2 matrix: rotations are exp(-i angle sigma / 2).
    Eigen::Matrix2cd matrix() const {
        Eigen::Matrix2cd m;
        const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
        const Complex i(0.0, 1.0);
        switch (kind) {
            case Kind::RX: m << c, -i * s, -i * s, c; break;
            case Kind::RY: m << c, -s, s, c; break;
            case Kind::RZ: m << std::exp(-i * (angle / 2.0)), 0.0, 0.0, std::exp(i * (angle / 2.0)); break;
            case Kind::H: {
                const double r = 1.0 / std::sqrt(2.0);
                m << r, r, r, -r;
                break;
            }
            case Kind::X: m << 0.0, 1.0, 1.0, 0.0; break;
        }
        return m;
    }
};

namespace detail {

inline void check_qubit_index(int n, int qubit) {
    if (qubit < 1 || qubit > n)
        throw std::out_of_range("qubit index " + std::to_string(qubit) + " outside [1, " + std::to_string(n) + "]");
}

inline void apply_1q_inplace(Eigen::VectorXcd& a, int n, const Eigen::Matrix2cd& m, int qubit) {
    const std::uint64_t mask = std::uint64_t(1) << (n - qubit);
    const std::uint64_t dim = std::uint64_t(1) << n;
    for (std::uint64_t g = 0; g < dim; ++g) {
        if (g & mask) continue;
        const Eigen::Index g0 = static_cast<Eigen::Index>(g);
        const Eigen::Index g1 = static_cast<Eigen::Index>(g | mask);
        const Complex a0 = a(g0), a1 = a(g1);
        a(g0) = m(0, 0) * a0 + m(0, 1) * a1;
        a(g1) = m(1, 0) * a0 + m(1, 1) * a1;
    }
}

inline void apply_cnot_inplace(Eigen::VectorXcd& a, int n, int control, int target) {
    const std::uint64_t cm = std::uint64_t(1) << (n - control);
    const std::uint64_t tm = std::uint64_t(1) << (n - target);
    const std::uint64_t dim = std::uint64_t(1) << n;
    for (std::uint64_t g = 0; g < dim; ++g) {
        if ((g & cm) && !(g & tm))
            std::swap(a(static_cast<Eigen::Index>(g)), a(static_cast<Eigen::Index>(g | tm)));
    }
}

}  // namespace detail

inline Statevector apply_1q_gate(const Statevector& state, const Gate1Q& gate, int target) {
    detail::check_qubit_index(state.n_qubits(), target);
    Eigen::VectorXcd a = state.amplitudes();
    detail::apply_1q_inplace(a, state.n_qubits(), gate.matrix(), target);
    return Statevector(state.n_qubits(), std::move(a));
}

inline Statevector apply_cnot(const Statevector& state, int control, int target) {
    detail::check_qubit_index(state.n_qubits(), control);
    detail::check_qubit_index(state.n_qubits(), target);
    if (control == target) throw std::invalid_argument("CNOT control equals target");
    Eigen::VectorXcd a = state.amplitudes();
    detail::apply_cnot_inplace(a, state.n_qubits(), control, target);
    return Statevector(state.n_qubits(), std::move(a));
}

// ---------------------------------------------------------------------------
// controlled operators

/// Contiguous range of qubits [first, last], 1-based, first <= last.
struct QubitRange {
    int first = 1;
    int last = 1;
    int width() const { return last - first + 1; }
};

inline double unitarity_defect(const DenseOperator& op) {
    return (op.adjoint() * op - DenseOperator::Identity(op.rows(), op.cols())).cwiseAbs().maxCoeff();
}

inline bool is_unitary(const DenseOperator& op, double tol = 1e-10) {
    return op.rows() == op.cols() && unitarity_defect(op) <= tol;
}

namespace detail {

inline void check_system_range(int n, const QubitRange& range, int control) {
    check_qubit_index(n, range.first);
    check_qubit_index(n, range.last);
    if (range.first > range.last) throw std::invalid_argument("empty system qubit range");
    if (control >= range.first && control <= range.last)
        throw std::invalid_argument("control qubit lies inside the system range");
}

}  // namespace detail

/// |0><0| (x) I + |1><1| (x) O on the joint register: the block application a
/// control-qubit protocol needs. `op` must be unitary within `tol`.
inline Statevector apply_controlled_unitary(const Statevector& joint, const DenseOperator& op, int control,
                                            const QubitRange& system, double tol = 1e-10) {
    const int n = joint.n_qubits();
    detail::check_qubit_index(n, control);
    detail::check_system_range(n, system, control);
    const int w = system.width();
    if (op.rows() != (Eigen::Index(1) << w) || op.cols() != op.rows())
        throw std::invalid_argument("operator dimension does not match system range");
    if (!is_unitary(op, tol))
        throw std::invalid_argument("controlled operator is not unitary within tolerance");

    const std::uint64_t cmask = std::uint64_t(1) << (n - control);
    const int shift = n - system.last;
    const std::uint64_t smask = ((std::uint64_t(1) << w) - 1) << shift;

    Eigen::VectorXcd out = joint.amplitudes();
    const std::uint64_t dim = std::uint64_t(1) << n;
    // Walk every configuration of the non-system bits with control = 1 and
    // apply the dense block to the system sub-vector.
    Eigen::VectorXcd sub(Eigen::Index(1) << w);
    for (std::uint64_t rest = 0; rest < dim; ++rest) {
        if ((rest & smask) != 0 || !(rest & cmask)) continue;
        for (std::uint64_t s = 0; s < (std::uint64_t(1) << w); ++s)
            sub(static_cast<Eigen::Index>(s)) = joint.amplitude(rest | (s << shift));
        Eigen::VectorXcd mapped = op * sub;
        for (std::uint64_t s = 0; s < (std::uint64_t(1) << w); ++s)
            out(static_cast<Eigen::Index>(rest | (s << shift))) = mapped(static_cast<Eigen::Index>(s));
    }
    return Statevector(n, std::move(out));
}

/// Fast path for controlled basis permutations (the grid shift and SWAP
/// family): O(2^n) with no dense matrix. `perm` maps a system basis index to
/// its image.
template <class Perm>
Statevector apply_controlled_permutation(const Statevector& joint, int control, const QubitRange& system,
                                         Perm&& perm) {
    const int n = joint.n_qubits();
    detail::check_qubit_index(n, control);
    detail::check_system_range(n, system, control);
    const int w = system.width();
    const std::uint64_t cmask = std::uint64_t(1) << (n - control);
    const int shift = n - system.last;
    const std::uint64_t smask = ((std::uint64_t(1) << w) - 1) << shift;

    Eigen::VectorXcd out(joint.dim());
    const std::uint64_t dim = std::uint64_t(1) << n;
    for (std::uint64_t g = 0; g < dim; ++g) {
        if (g & cmask) {
            const std::uint64_t s = (g & smask) >> shift;
            const std::uint64_t t = perm(s) & ((std::uint64_t(1) << w) - 1);
            out(static_cast<Eigen::Index>((g & ~smask) | (t << shift))) = joint.amplitude(g);
        } else {
            out(static_cast<Eigen::Index>(g)) = joint.amplitude(g);
        }
    }
    return Statevector(n, std::move(out));
}

/// Controlled exchange of two equal-width registers (block-SWAP).
inline Statevector apply_controlled_block_swap(const Statevector& joint, int control, const QubitRange& reg_a,
                                               const QubitRange& reg_b) {
    const int n = joint.n_qubits();
    detail::check_qubit_index(n, control);
    detail::check_system_range(n, reg_a, control);
    detail::check_system_range(n, reg_b, control);
    if (reg_a.width() != reg_b.width())
        throw std::invalid_argument("block-SWAP registers differ in width");
    if (!(reg_a.last < reg_b.first || reg_b.last < reg_a.first))
        throw std::invalid_argument("block-SWAP registers overlap");

    const int w = reg_a.width();
    const std::uint64_t cmask = std::uint64_t(1) << (n - control);
    const int sa = n - reg_a.last;
    const int sb = n - reg_b.last;
    const std::uint64_t field = (std::uint64_t(1) << w) - 1;

    Eigen::VectorXcd out(joint.dim());
    const std::uint64_t dim = std::uint64_t(1) << n;
    for (std::uint64_t g = 0; g < dim; ++g) {
        std::uint64_t h = g;
        if (g & cmask) {
            const std::uint64_t va = (g >> sa) & field;
            const std::uint64_t vb = (g >> sb) & field;
            h = (g & ~((field << sa) | (field << sb))) | (vb << sa) | (va << sb);
        }
        out(static_cast<Eigen::Index>(h)) = joint.amplitude(g);
    }
    return Statevector(n, std::move(out));
}

// ---------------------------------------------------------------------------
// measurement statistics

/// Exact <Z> of one qubit: P(bit = 0) - P(bit = 1).
inline double z_expectation(const Statevector& state, int qubit) {
    detail::check_qubit_index(state.n_qubits(), qubit);
    const std::uint64_t mask = std::uint64_t(1) << (state.n_qubits() - qubit);
    double z = 0.0;
    for (std::uint64_t g = 0; g < static_cast<std::uint64_t>(state.dim()); ++g) {
        const double p = std::norm(state.amplitude(g));
        z += (g & mask) ? -p : p;
    }
    return z;
}

/// Empirical mean of `shots` single-qubit Z measurements, +1 for outcome 0
/// and -1 for outcome 1. Deterministic for a given seed.
inline double sample_z(const Statevector& state, int qubit, long long shots, std::uint64_t rng_seed) {
    if (shots < 1) throw std::invalid_argument("shots must be >= 1");
    const double p_plus = std::min(1.0, std::max(0.0, (1.0 + z_expectation(state, qubit)) / 2.0));
    rng::Stream stream(rng_seed);
    long long plus = 0;
    for (long long i = 0; i < shots; ++i)
        if (stream.uniform() < p_plus) ++plus;
    return static_cast<double>(2 * plus - shots) / static_cast<double>(shots);
}

// ---------------------------------------------------------------------------
// artificial decoherence channel

/// Production path: the diagonal mixed state with entries |C_g|^2.
inline DiagonalMixedState decohere_to_diagonal(const Statevector& state) {
    DiagonalMixedState rho;
    rho.n_qubits = state.n_qubits();
    rho.diag = state.amplitudes().cwiseAbs2();
    return rho;
}

/// Circuit path for the same channel: pairwise CNOTs onto an ancilla register
/// followed by tracing the ancillas out. Requires 2N <= kMaxQubits. Throws if
/// the reduced state fails to come out diagonal (internal consistency).
inline DiagonalMixedState decohere_via_circuit(const Statevector& state) {
    const int n = state.n_qubits();
    check_qubit_count(2 * n);
    Statevector joint = tensor(state, zero_state(n));
    Eigen::VectorXcd a = joint.amplitudes();
    for (int q = 1; q <= n; ++q)
        detail::apply_cnot_inplace(a, 2 * n, q, n + q);

    const std::uint64_t da = std::uint64_t(1) << n;
    DiagonalMixedState rho;
    rho.n_qubits = n;
    rho.diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(da));
    for (std::uint64_t g = 0; g < da; ++g) {
        for (std::uint64_t q = 0; q < da; ++q)
            rho.diag(static_cast<Eigen::Index>(g)) += std::norm(a(static_cast<Eigen::Index>(g * da + q)));
    }
    // Off-diagonal elements of the reduced state must vanish.
    for (std::uint64_t g = 0; g < da; ++g) {
        for (std::uint64_t h = g + 1; h < da; ++h) {
            Complex off(0.0, 0.0);
            for (std::uint64_t q = 0; q < da; ++q)
                off += a(static_cast<Eigen::Index>(g * da + q)) * std::conj(a(static_cast<Eigen::Index>(h * da + q)));
            if (std::abs(off) > 1e-12)
                throw std::runtime_error("decoherence circuit left a non-diagonal reduced state");
        }
    }
    return rho;
}

}  // namespace quva
