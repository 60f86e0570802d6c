#pragma once

// Reference constructions for tests: dense gate embeddings built by Kronecker
// products and basis enumeration, independent of the library's in-place gate
// application path.

#include <Eigen/Dense>

#include "quva/statevector.hpp"

namespace testref {

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// I (x) ... gate ... (x) I with the gate at 1-based position `qubit`
/// (qubit 1 = most significant).
inline Eigen::MatrixXcd embed_1q(int n, int qubit, const Eigen::Matrix2cd& gate) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
    for (int q = 1; q <= n; ++q) {
        if (q == qubit) out = kron(out, gate);
        else out = kron(out, Eigen::Matrix2cd::Identity());
    }
    return out;
}

/// Dense CNOT by basis enumeration.
inline Eigen::MatrixXcd dense_cnot(int n, int control, int target) {
    const Eigen::Index dim = Eigen::Index(1) << n;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    const std::uint64_t cm = std::uint64_t(1) << (n - control);
    const std::uint64_t tm = std::uint64_t(1) << (n - target);
    for (std::uint64_t g = 0; g < static_cast<std::uint64_t>(dim); ++g) {
        const std::uint64_t h = (g & cm) ? (g ^ tm) : g;
        out(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(g)) = 1.0;
    }
    return out;
}

inline double max_abs_diff(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testref
