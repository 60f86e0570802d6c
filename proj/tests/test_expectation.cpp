#include <catch2/catch_amalgamated.hpp>

#include "quva/expectation.hpp"
#include "quva/oracles.hpp"
#include "quva/verify.hpp"

#include "helpers.hpp"

using namespace quva;
using Catch::Approx;

namespace {

Statevector fourier_mode(int n, int k) {
    const Eigen::Index dim = Eigen::Index(1) << n;
    Eigen::VectorXcd a(dim);
    for (Eigen::Index g = 0; g < dim; ++g) {
        const double phase = 2.0 * std::numbers::pi * k * static_cast<double>(g) / static_cast<double>(dim);
        a(g) = Complex(std::cos(phase), std::sin(phase));
    }
    a /= std::sqrt(static_cast<double>(dim));
    return Statevector(n, std::move(a));
}

}  // namespace

TEST_CASE("hadamard test endpoint values") {
    rng::Stream stream(61);
    const Statevector psi = quva::detail::random_state(3, stream);
    CHECK(hadamard_test(psi, DenseOperator::Identity(8, 8), MeasurementConfig::exact()) == Approx(1.0));

    CHECK(hadamard_test(uniform_state(3), subtractor(3), MeasurementConfig::exact()) == Approx(1.0));

    const Statevector mode = fourier_mode(3, 1);
    CHECK(hadamard_test(mode, subtractor(3), MeasurementConfig::exact(0.0)) ==
          Approx(std::cos(std::numbers::pi / 4.0)).margin(1e-12));
    CHECK(hadamard_test(mode, subtractor(3), MeasurementConfig::exact(-std::numbers::pi / 2.0)) ==
          Approx(-std::sin(std::numbers::pi / 4.0)).margin(1e-12));

    DenseOperator bad = 2.0 * DenseOperator::Identity(8, 8);
    CHECK_THROWS_AS(hadamard_test(psi, bad, MeasurementConfig::exact()), std::invalid_argument);
}

TEST_CASE("hadamard test protocol equals direct expectation") {
    rng::Stream stream(67);
    for (int n = 1; n <= 5; ++n) {
        for (int rep = 0; rep < 6; ++rep) {
            const Statevector psi = quva::detail::random_state(n, stream);
            const DenseOperator u = quva::detail::random_unitary(Eigen::Index(1) << n, stream);
            const Complex direct = direct_expectation(psi, u);
            CHECK(hadamard_test(psi, u, MeasurementConfig::exact(0.0)) == Approx(direct.real()).margin(1e-12));
            CHECK(hadamard_test(psi, u, MeasurementConfig::exact(-std::numbers::pi / 2.0)) ==
                  Approx(direct.imag()).margin(1e-12));
        }
        // permutation fast path
        const Statevector psi = quva::detail::random_state(n, stream);
        CHECK(hadamard_test_shift(psi, MeasurementConfig::exact()) ==
              Approx(hadamard_test(psi, subtractor(n), MeasurementConfig::exact())).margin(1e-13));
    }
}

TEST_CASE("swap overlap") {
    rng::Stream stream(71);
    const Statevector a = quva::detail::random_state(3, stream);
    CHECK(swap_overlap(a, a, MeasurementConfig::exact()) == Approx(1.0).margin(1e-12));
    CHECK(swap_overlap(basis_state(2, 1), basis_state(2, 2), MeasurementConfig::exact()) ==
          Approx(0.0).margin(1e-12));
    const Statevector plus = apply_1q_gate(zero_state(1), Gate1Q::h(), 1);
    CHECK(swap_overlap(zero_state(1), plus, MeasurementConfig::exact()) == Approx(0.5).margin(1e-12));
    CHECK_THROWS_AS(swap_overlap(zero_state(1), zero_state(2), MeasurementConfig::exact()), std::invalid_argument);

    for (int rep = 0; rep < 10; ++rep) {
        const Statevector x = quva::detail::random_state(2, stream);
        const Statevector y = quva::detail::random_state(2, stream);
        CHECK(swap_overlap(x, y, MeasurementConfig::exact()) ==
              Approx(std::norm(inner_product(x, y))).margin(1e-12));
    }
}

TEST_CASE("swap against a diagonal mixed state") {
    DiagonalMixedState maximally{3, Eigen::VectorXd::Constant(8, 1.0 / 8.0)};
    rng::Stream stream(73);
    const Statevector psi = quva::detail::random_state(3, stream);
    CHECK(swap_mixed(psi, maximally, MeasurementConfig::exact()) == Approx(1.0 / 8.0).margin(1e-12));

    Eigen::VectorXd d(8);
    d << 0.3, 0.05, 0.1, 0.15, 0.05, 0.05, 0.2, 0.1;
    DiagonalMixedState mixed{3, d};
    CHECK(swap_mixed(basis_state(3, 6), mixed, MeasurementConfig::exact()) == Approx(0.2).margin(1e-12));

    const HarmonicPotential pot = harmonic_potential_diag(3, 4.0);
    CHECK(swap_mixed(uniform_state(3), pot.rho_chi, MeasurementConfig::exact()) == Approx(1.0 / 8.0).margin(1e-12));

    // protocol value equals the direct trace for random pairs
    for (int rep = 0; rep < 15; ++rep) {
        const Statevector pure = quva::detail::random_state(3, stream);
        Eigen::VectorXd diag(8);
        for (Eigen::Index g = 0; g < 8; ++g) diag(g) = stream.uniform();
        diag /= diag.sum();
        const double direct = (diag.array() * pure.amplitudes().cwiseAbs2().array()).sum();
        CHECK(swap_mixed(pure, {3, diag}, MeasurementConfig::exact()) == Approx(direct).margin(1e-12));
    }

    // self-density overlap is the purity sum |C_g|^4
    const Statevector s = quva::detail::random_state(3, stream);
    const double purity = s.amplitudes().cwiseAbs2().cwiseAbs2().sum();
    CHECK(swap_mixed(s, nonlinear_density_op(s), MeasurementConfig::exact()) == Approx(purity).margin(1e-12));
}

TEST_CASE("target state preparation cascade") {
    // single qubit: one rotation with angle 2 atan2(a1, a0)
    Eigen::VectorXd one_q(2);
    one_q << 0.6, -0.8;
    const PreparedState p1 = prepare_target_state(one_q);
    REQUIRE(p1.gates.size() == 1);
    CHECK(p1.gates[0].kind == PrepGate::Kind::ControlledRY);
    CHECK(p1.gates[0].controls.empty());
    CHECK(p1.gates[0].angle == Approx(2.0 * std::atan2(-0.8, 0.6)));
    CHECK(p1.state.amplitude(0).real() == Approx(0.6).margin(1e-12));
    CHECK(p1.state.amplitude(1).real() == Approx(-0.8).margin(1e-12));

    // the 8-point well state: amplitudes (4,3,2,1,0,1,2,3)/(2 sqrt(11))
    Eigen::VectorXd chi(8);
    chi << 4, 3, 2, 1, 0, 1, 2, 3;
    chi /= 2.0 * std::sqrt(11.0);
    const PreparedState p3 = prepare_target_state(chi);
    CHECK(p3.state.amplitude(0).real() == Approx(0.60302).margin(1e-5));
    CHECK(std::abs(p3.state.amplitude(4)) == Approx(0.0).margin(1e-12));

    // decohering the prepared state reproduces the potential shape
    const DiagonalMixedState rho = decohere_via_circuit(p3.state);
    const HarmonicPotential pot = harmonic_potential_diag(3, 1.0);
    CHECK((rho.diag - pot.rho_chi.diag).cwiseAbs().maxCoeff() < 1e-10);

    // random real targets of every supported width round-trip exactly
    rng::Stream stream(79);
    for (int n = 1; n <= 3; ++n) {
        for (int rep = 0; rep < 10; ++rep) {
            Eigen::VectorXd v(Eigen::Index(1) << n);
            for (Eigen::Index g = 0; g < v.size(); ++g) v(g) = stream.uniform(-1.0, 1.0);
            v /= v.norm();
            const PreparedState p = prepare_target_state(v);
            for (Eigen::Index g = 0; g < v.size(); ++g)
                CHECK(p.state.amplitude(static_cast<std::uint64_t>(g)).real() == Approx(v(g)).margin(1e-10));
        }
    }

    Eigen::VectorXd unnorm(4);
    unnorm << 1, 1, 1, 1;
    CHECK_THROWS_AS(prepare_target_state(unnorm), std::invalid_argument);
    CHECK_THROWS_AS(prepare_target_state(Eigen::VectorXd::Ones(16) / 4.0), std::invalid_argument);
}

TEST_CASE("derivative expectations via the shift protocol") {
    const DerivativeExpectations uni = derivative_expectations(uniform_state(3), MeasurementConfig::exact());
    CHECK(uni.re_a_dagger == Approx(1.0).margin(1e-12));
    CHECK(uni.d1 == Approx(0.0).margin(1e-9));
    CHECK(uni.d2 == Approx(0.0).margin(1e-9));

    // real ansatz states have vanishing imaginary part
    rng::Stream stream(83);
    for (int rep = 0; rep < 10; ++rep) {
        ParameterVector lam(6);
        for (double& l : lam) l = stream.uniform(0.0, 2.0 * std::numbers::pi);
        const Statevector psi = build_ansatz({3, 2, AnsatzLayout::SixParam}, lam);
        CHECK(derivative_expectations(psi, MeasurementConfig::exact()).im_a_dagger == Approx(0.0).margin(1e-12));
    }

    const DerivativeExpectations mode = derivative_expectations(fourier_mode(3, 1), MeasurementConfig::exact());
    CHECK(mode.d2 == Approx(128.0 * (std::cos(std::numbers::pi / 4.0) - 1.0)).margin(1e-9));
}

TEST_CASE("total expectation assembly") {
    // with a perfect shift overlap the total collapses to kappa0
    DEProblem helmholtz{1.0, 0.0, 8.0, 0.0, 0.0, 3, 0};
    CHECK(assemble_total(helmholtz, 0.0, 1.0, 0.0, 0.0, 0.0) == Approx(8.0).margin(1e-12));

    // kappa1 = 16 at N = 3 makes the total independent of the shift overlap
    DEProblem degenerate{1.0, 16.0, 25.0, 0.0, 0.0, 3, 1};
    PotentialSpec none;
    none.v_max = 0.0;
    rng::Stream stream(89);
    const AnsatzSpec spec{3, 1, AnsatzLayout::SixParam};
    for (int rep = 0; rep < 20; ++rep) {
        ParameterVector lam(6);
        for (double& l : lam) l = stream.uniform(0.0, 2.0 * std::numbers::pi);
        CHECK(total_expectation(degenerate, none, spec, lam, MeasurementConfig::exact()).total ==
              Approx(25.0).margin(1e-9));
    }
}

TEST_CASE("total expectation equals the dense oracle") {
    DEProblem nl{1.0, 1.0, 40.0, 40.0, 500.0, 3, 1};
    PotentialSpec pot;
    pot.v_max = 40.0;
    const AnsatzSpec spec{3, 1, AnsatzLayout::SixParam};
    rng::Stream stream(97);
    for (int rep = 0; rep < 25; ++rep) {
        ParameterVector lam(6);
        for (double& l : lam) l = stream.uniform(0.0, 2.0 * std::numbers::pi);
        const ExpectationBreakdown bd = total_expectation(nl, pot, spec, lam, MeasurementConfig::exact());
        const Statevector psi = build_ansatz(spec, lam);
        CHECK(bd.total == Approx(direct_expectation(psi, total_operator(nl, pot, &psi)).real()).margin(1e-9));
        // every protocol outcome lies in [-1, 1]
        for (double term : {bd.re_a_dagger, bd.im_a_dagger, bd.pot_overlap, bd.nl_overlap}) {
            CHECK(term <= 1.0 + 1e-12);
            CHECK(term >= -1.0 - 1e-12);
        }
    }
}

TEST_CASE("potential contribution is linear in its height") {
    DEProblem base{1.0, 3.0, 25.0, 32.0, 0.0, 3, 2};
    PotentialSpec pot32;
    pot32.v_max = 32.0;
    DEProblem doubled = base;
    doubled.v_max = 64.0;
    PotentialSpec pot64;
    pot64.v_max = 64.0;
    const AnsatzSpec spec{3, 2, AnsatzLayout::SixParam};
    rng::Stream stream(101);
    ParameterVector lam(6);
    for (double& l : lam) l = stream.uniform(0.0, 2.0 * std::numbers::pi);
    const ExpectationBreakdown a = total_expectation(base, pot32, spec, lam, MeasurementConfig::exact());
    const ExpectationBreakdown b = total_expectation(doubled, pot64, spec, lam, MeasurementConfig::exact());
    CHECK(b.pot_overlap == Approx(a.pot_overlap).margin(1e-12));  // same shape
    CHECK(b.total - a.total == Approx(32.0 * a.pot_overlap).margin(1e-9));
}

TEST_CASE("shots mode statistics") {
    const AnsatzSpec spec{3, 2, AnsatzLayout::SixParam};
    DEProblem p{1.0, -1.0, 8.0, 0.0, 0.0, 3, 2};
    PotentialSpec none;
    none.v_max = 0.0;
    rng::Stream stream(103);
    ParameterVector lam(6);
    for (double& l : lam) l = stream.uniform(0.0, 2.0 * std::numbers::pi);

    const double exact = total_expectation(p, none, spec, lam, MeasurementConfig::exact()).re_a_dagger;

    // determinism
    const MeasurementConfig shots_cfg = MeasurementConfig::with_shots(2000, 7);
    CHECK(total_expectation(p, none, spec, lam, shots_cfg).re_a_dagger ==
          total_expectation(p, none, spec, lam, shots_cfg).re_a_dagger);

    // convergence: empirical std over seeds below 2/sqrt(shots), mean close
    const long long shots = 10000;
    double sum = 0.0, sum2 = 0.0;
    const int trials = 30;
    for (int t = 0; t < trials; ++t) {
        const double est =
            total_expectation(p, none, spec, lam, MeasurementConfig::with_shots(shots, 1000 + t)).re_a_dagger;
        sum += est;
        sum2 += est * est;
    }
    const double mean = sum / trials;
    const double var = sum2 / trials - mean * mean;
    CHECK(std::abs(mean - exact) < 0.05);
    CHECK(std::sqrt(std::max(var, 0.0)) < 2.0 / std::sqrt(static_cast<double>(shots)));
}
