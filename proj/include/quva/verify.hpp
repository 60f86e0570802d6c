#pragma once

#include <Eigen/Eigenvalues>
#include <functional>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "quva/expectation.hpp"
#include "quva/oracles.hpp"
#include "quva/search.hpp"

namespace quva {

namespace detail {

inline Statevector random_state(int n, rng::Stream& stream, bool real_only = false) {
    Eigen::VectorXcd a(Eigen::Index(1) << n);
    for (Eigen::Index g = 0; g < a.size(); ++g)
        a(g) = real_only ? Complex(stream.normal(), 0.0) : Complex(stream.normal(), stream.normal());
    a /= a.norm();
    return Statevector(n, std::move(a));
}

inline DenseOperator random_unitary(Eigen::Index dim, rng::Stream& stream) {
    DenseOperator m(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) m(i, j) = Complex(stream.normal(), stream.normal());
    Eigen::HouseholderQR<DenseOperator> qr(m);
    DenseOperator q = qr.householderQ();
    return q;
}

/// Samples of a random trigonometric polynomial on the 2^N grid, plus its
/// translate by one grid spacing. Periodic by construction.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> random_trig_poly(int n, rng::Stream& stream, int max_degree = 3) {
    const Eigen::Index dim = Eigen::Index(1) << n;
    const double dl = 1.0 / static_cast<double>(dim);
    std::vector<double> a(max_degree + 1), b(max_degree + 1);
    for (int k = 0; k <= max_degree; ++k) {
        a[k] = stream.uniform(-1.0, 1.0);
        b[k] = stream.uniform(-1.0, 1.0);
    }
    auto f = [&](double x) {
        double s = a[0];
        for (int k = 1; k <= max_degree; ++k)
            s += a[k] * std::cos(2.0 * std::numbers::pi * k * x) + b[k] * std::sin(2.0 * std::numbers::pi * k * x);
        return s;
    };
    Eigen::VectorXd v(dim), shifted(dim);
    for (Eigen::Index g = 0; g < dim; ++g) {
        const double x = static_cast<double>(g) * dl;
        v(g) = f(x);
        shifted(g) = f(x - dl);
    }
    return {v, shifted};
}

}  // namespace detail

struct VerifyCheck {
    std::string name;
    bool ok = true;
    std::string detail;
};

struct VerifyOptions {
    /// Test hook: transposes the shift operator so the translation check
    /// must fail (negative control for the convention pinning).
    bool corrupt_shift = false;
};

/// The oracle-equivalence and identity suite behind `quva verify`: every
/// named invariant is evaluated and reported; the return value lists the
/// outcomes in a fixed order.
inline std::vector<VerifyCheck> run_verification(const VerifyOptions& opts = {}) {
    std::vector<VerifyCheck> checks;
    auto add = [&](const std::string& name, bool ok, const std::string& detail) {
        checks.push_back({name, ok, detail});
    };

    // --- translation convention ---------------------------------------
    {
        double worst = 0.0;
        rng::Stream stream(11);
        for (int n : {3, 4, 5}) {
            DenseOperator shift = subtractor(n);
            if (opts.corrupt_shift) shift.transposeInPlace();
            for (int rep = 0; rep < 20; ++rep) {
                auto [v, shifted] = detail::random_trig_poly(n, stream);
                Eigen::VectorXcd lhs = shift * v.cast<Complex>();
                worst = std::max(worst, (lhs - shifted.cast<Complex>()).cwiseAbs().maxCoeff());
            }
        }
        add("translation-convention", worst <= 1e-12, "max deviation " + std::to_string(worst));
    }

    // --- circulant spectrum of the second-difference stencil ------------
    {
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
        add("circulant-spectrum", worst <= 1e-9, "max eigenvalue deviation " + std::to_string(worst));
    }

    // --- control-qubit protocol vs direct expectation -------------------
    {
        double worst = 0.0;
        rng::Stream stream(12);
        for (int n = 1; n <= 4; ++n) {
            for (int rep = 0; rep < 10; ++rep) {
                const Statevector psi = detail::random_state(n, stream);
                const DenseOperator u = detail::random_unitary(Eigen::Index(1) << n, stream);
                const Complex direct = direct_expectation(psi, u);
                const double re = hadamard_test(psi, u, MeasurementConfig::exact(0.0));
                const double im = hadamard_test(psi, u, MeasurementConfig::exact(-std::numbers::pi / 2.0));
                worst = std::max({worst, std::abs(re - direct.real()), std::abs(im - direct.imag())});
            }
        }
        // permutation fast path against the dense path
        rng::Stream s2(13);
        for (int n : {2, 3, 4}) {
            const Statevector psi = detail::random_state(n, s2);
            const double fast = hadamard_test_shift(psi, MeasurementConfig::exact(0.0));
            const double dense = hadamard_test(psi, subtractor(n), MeasurementConfig::exact(0.0));
            worst = std::max(worst, std::abs(fast - dense));
        }
        add("hadamard-protocol", worst <= 1e-12, "max protocol deviation " + std::to_string(worst));
    }

    // --- residual identity and Cauchy-Schwarz ---------------------------
    {
        bool ok = true;
        std::string note = "200 random pairs";
        rng::Stream stream(14);
        for (int rep = 0; rep < 200 && ok; ++rep) {
            const int n = 2 + rep % 3;
            const Statevector psi = detail::random_state(n, stream);
            DenseOperator op(Eigen::Index(1) << n, Eigen::Index(1) << n);
            for (Eigen::Index i = 0; i < op.rows(); ++i)
                for (Eigen::Index j = 0; j < op.cols(); ++j) op(i, j) = Complex(stream.normal(), stream.normal());
            ResidualReport rr;
            try {
                rr = quantum_residual(psi, op);
            } catch (const std::exception& e) {
                ok = false;
                note = e.what();
                break;
            }
            const double lhs2 = rr.total_expectation * rr.total_expectation;
            if (lhs2 > rr.res_q * (1.0 + 1e-12) + 1e-12) {
                ok = false;
                note = "Cauchy-Schwarz bound violated";
            }
        }
        add("residual-identity", ok, note);
    }

    // --- mixed-state protocols and the state-prep cascade ----------------
    {
        Eigen::VectorXd chi(8);
        chi << 4, 3, 2, 1, 0, 1, 2, 3;
        chi /= 2.0 * std::sqrt(11.0);
        const PreparedState prep = prepare_target_state(chi);
        const DiagonalMixedState rho = decohere_via_circuit(prep.state);
        const HarmonicPotential pot = harmonic_potential_diag(3, 1.0);
        const double prep_dev = (rho.diag - pot.rho_chi.diag).cwiseAbs().maxCoeff();

        double swap_dev = 0.0;
        rng::Stream stream(15);
        for (int rep = 0; rep < 20; ++rep) {
            const Statevector pure = detail::random_state(3, stream);
            Eigen::VectorXd d(8);
            double sum = 0.0;
            for (Eigen::Index g = 0; g < 8; ++g) {
                d(g) = stream.uniform();
                sum += d(g);
            }
            DiagonalMixedState mixed{3, d / sum};
            const double via_circuit = swap_mixed(pure, mixed, MeasurementConfig::exact());
            const double direct = (mixed.diag.array() * pure.amplitudes().cwiseAbs2().array()).sum();
            swap_dev = std::max(swap_dev, std::abs(via_circuit - direct));
        }
        double overlap_dev = 0.0;
        for (int rep = 0; rep < 10; ++rep) {
            const Statevector a = detail::random_state(3, stream);
            const Statevector b = detail::random_state(3, stream);
            overlap_dev = std::max(overlap_dev, std::abs(swap_overlap(a, b, MeasurementConfig::exact()) -
                                                         std::norm(inner_product(a, b))));
        }
        add("state-prep-decoherence", prep_dev <= 1e-10, "max diag deviation " + std::to_string(prep_dev));
        add("swap-protocols", swap_dev <= 1e-12 && overlap_dev <= 1e-12,
            "mixed dev " + std::to_string(swap_dev) + ", overlap dev " + std::to_string(overlap_dev));
    }

    // --- harmonic potential shape ---------------------------------------
    {
        const double vmax = 7.5;
        const HarmonicPotential pot = harmonic_potential_diag(3, vmax);
        const bool ok = std::abs(pot.v_diag(0) - 4.0 * vmax / 11.0) <= 1e-12 && std::abs(pot.v_diag(4)) <= 1e-12 &&
                        std::abs(pot.v_diag.sum() - vmax) <= 1e-12 * vmax &&
                        std::abs(pot.rho_chi.diag.sum() - 1.0) <= 1e-12;
        add("potential-shape", ok, "trace and endpoint values");
    }

    // --- engine vs dense oracle across the three problem families --------
    {
        struct Family {
            DEProblem p;
            double v_max;
        };
        std::vector<Family> families;
        families.push_back({{1.0, 0.0, 8.0, 0.0, 0.0, 3, 2}, 0.0});
        families.push_back({{1.0, 3.0, 25.0, 32.0, 0.0, 3, 3}, 32.0});
        families.push_back({{1.0, 1.0, 40.0, 40.0, 500.0, 3, 1}, 40.0});
        double worst = 0.0;
        rng::Stream stream(16);
        for (const auto& fam : families) {
            PotentialSpec pot;
            pot.v_max = fam.v_max;
            AnsatzSpec ansatz{3, fam.p.depth, AnsatzLayout::SixParam};
            for (int rep = 0; rep < 50; ++rep) {
                ParameterVector lam(6);
                for (double& l : lam) l = stream.uniform(0.0, 2.0 * std::numbers::pi);
                const double engine = total_expectation(fam.p, pot, ansatz, lam, MeasurementConfig::exact()).total;
                const Statevector psi = build_ansatz(ansatz, lam);
                const double direct = direct_expectation(psi, total_operator(fam.p, pot, &psi)).real();
                worst = std::max(worst, std::abs(engine - direct));
            }
        }
        add("engine-oracle-equivalence", worst <= 1e-9, "max deviation " + std::to_string(worst));
    }

    // --- gate algebra and norm preservation ------------------------------
    {
        rng::Stream stream(17);
        double worst = 0.0;
        for (int rep = 0; rep < 20; ++rep) {
            const int n = 1 + rep % 3;
            const Statevector psi = detail::random_state(n, stream);
            const int q = 1 + static_cast<int>(stream.next_u64() % n);
            Statevector h2 = apply_1q_gate(apply_1q_gate(psi, Gate1Q::h(), q), Gate1Q::h(), q);
            Statevector x2 = apply_1q_gate(apply_1q_gate(psi, Gate1Q::x(), q), Gate1Q::x(), q);
            worst = std::max(worst, (h2.amplitudes() - psi.amplitudes()).cwiseAbs().maxCoeff());
            worst = std::max(worst, (x2.amplitudes() - psi.amplitudes()).cwiseAbs().maxCoeff());
            const double a = stream.uniform(0.0, 6.28), b = stream.uniform(0.0, 6.28);
            Statevector r1 = apply_1q_gate(apply_1q_gate(psi, Gate1Q::ry(a), q), Gate1Q::ry(b), q);
            Statevector r2 = apply_1q_gate(psi, Gate1Q::ry(a + b), q);
            worst = std::max(worst, (r1.amplitudes() - r2.amplitudes()).cwiseAbs().maxCoeff());
            worst = std::max(worst, std::abs(r1.norm_sq() - 1.0));
            if (n >= 2) {
                const int c = q == 1 ? 2 : 1;
                Statevector cx2 = apply_cnot(apply_cnot(psi, c, q), c, q);
                worst = std::max(worst, (cx2.amplitudes() - psi.amplitudes()).cwiseAbs().maxCoeff());
            }
        }
        add("gate-algebra", worst <= 1e-12, "max deviation " + std::to_string(worst));
    }

    // --- decoherence channel: circuit vs direct --------------------------
    {
        rng::Stream stream(18);
        double worst = 0.0;
        for (int rep = 0; rep < 10; ++rep) {
            const int n = 1 + rep % 3;
            const Statevector psi = detail::random_state(n, stream);
            worst = std::max(worst,
                             (decohere_via_circuit(psi).diag - decohere_to_diagonal(psi).diag).cwiseAbs().maxCoeff());
        }
        add("decoherence-channel", worst <= 1e-12, "max deviation " + std::to_string(worst));
    }

    // --- scale-degenerate first-order coefficient ------------------------
    {
        DEProblem p{1.0, 16.0, 25.0, 0.0, 0.0, 3, 2};
        PotentialSpec pot;
        pot.v_max = 0.0;
        AnsatzSpec ansatz{3, 2, AnsatzLayout::SixParam};
        rng::Stream stream(19);
        double worst = 0.0;
        for (int rep = 0; rep < 25; ++rep) {
            ParameterVector lam(6);
            for (double& l : lam) l = stream.uniform(0.0, 2.0 * std::numbers::pi);
            worst = std::max(worst, std::abs(total_expectation(p, pot, ansatz, lam, MeasurementConfig::exact()).total -
                                             p.kappa0));
        }
        add("shift-independent-regime", worst <= 1e-9, "max |total - kappa0| " + std::to_string(worst));
    }

    return checks;
}

/// Prints one line per invariant; returns the number of failures.
inline int print_verification(std::ostream& out, const VerifyOptions& opts = {}) {
    const std::vector<VerifyCheck> checks = run_verification(opts);
    int failures = 0;
    for (const auto& c : checks) {
        out << (c.ok ? "ok   " : "FAIL ") << std::left << std::setw(28) << c.name << " " << c.detail << "\n";
        if (!c.ok) ++failures;
    }
    out << (failures == 0 ? "verification passed" : "verification FAILED") << " (" << checks.size() - failures << "/"
        << checks.size() << " checks)\n";
    return failures;
}

}  // namespace quva
