#pragma once

#include <stdexcept>
#include <vector>

#include "quva/statevector.hpp"

namespace quva {

/// The two built-in real-amplitude circuit layouts on three qubits. Both use
/// only RY rotations and a CNOT ring, so every amplitude stays real.
enum class AnsatzLayout { ThreeParam, SixParam };

struct AnsatzSpec {
    int n_qubits = 3;
    int depth = 0;
    AnsatzLayout layout = AnsatzLayout::SixParam;
};

/// Variational angles in radians, one entry per parameter of the layout.
using ParameterVector = std::vector<double>;

inline int parameter_count(const AnsatzSpec& spec) {
    switch (spec.layout) {
        case AnsatzLayout::ThreeParam: return 3;
        case AnsatzLayout::SixParam: return 6;
    }
    throw std::invalid_argument("unknown ansatz layout");
}

namespace detail {

inline void ry_layer(Eigen::VectorXcd& a, int n, double l1, double l2, double l3) {
    apply_1q_inplace(a, n, Gate1Q::ry(l1).matrix(), 1);
    apply_1q_inplace(a, n, Gate1Q::ry(l2).matrix(), 2);
    apply_1q_inplace(a, n, Gate1Q::ry(l3).matrix(), 3);
}

// CX_13 CX_32 CX_21 as an operator product: CX_21 acts first.
inline void cnot_ring(Eigen::VectorXcd& a, int n) {
    apply_cnot_inplace(a, n, 2, 1);
    apply_cnot_inplace(a, n, 3, 2);
    apply_cnot_inplace(a, n, 1, 3);
}

inline void unit_block(Eigen::VectorXcd& a, int n, const ParameterVector& p, AnsatzLayout layout) {
    if (layout == AnsatzLayout::ThreeParam) {
        cnot_ring(a, n);
        ry_layer(a, n, p[0], p[1], p[2]);
    } else {
        ry_layer(a, n, p[3], p[4], p[5]);
        cnot_ring(a, n);
        ry_layer(a, n, p[0], p[1], p[2]);
        cnot_ring(a, n);
    }
}

}  // namespace detail

/// Builds the depth-d trial state: an initial RY layer with the first three
/// angles, then d copies of the layout's unit block (angles shared across
/// repetitions). Depth 0 is the initial layer alone.
inline Statevector build_ansatz(const AnsatzSpec& spec, const ParameterVector& params) {
    if (spec.n_qubits != 3)
        throw std::invalid_argument("built-in ansatz layouts are defined on 3 qubits");
    if (spec.depth < 0) throw std::invalid_argument("ansatz depth must be >= 0");
    if (static_cast<int>(params.size()) != parameter_count(spec))
        throw std::invalid_argument("parameter vector length " + std::to_string(params.size()) +
                                    " does not match layout (expected " +
                                    std::to_string(parameter_count(spec)) + ")");
    for (double v : params)
        if (!std::isfinite(v)) throw std::invalid_argument("parameter vector has non-finite entry");

    Statevector s = zero_state(spec.n_qubits);
    Eigen::VectorXcd a = s.amplitudes();
    detail::ry_layer(a, spec.n_qubits, params[0], params[1], params[2]);
    for (int d = 0; d < spec.depth; ++d)
        detail::unit_block(a, spec.n_qubits, params, spec.layout);
    return Statevector(spec.n_qubits, std::move(a));
}

}  // namespace quva
