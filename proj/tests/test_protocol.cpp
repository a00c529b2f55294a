#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "weakmeas/gates.hpp"
#include "weakmeas/nmr.hpp"
#include "weakmeas/protocol.hpp"

using namespace weakmeas;
using namespace weakmeas::protocol;
using qcore::embed;
using qcore::max_abs_diff;
using testing_support::Gen;

namespace {

constexpr double kPi = std::numbers::pi;

WeakMeasurementSpec spec(double theta, double g, double alpha = 0.0,
                         Readout readout = Readout::RealPart) {
  WeakMeasurementSpec s;
  s.theta = theta;
  s.g = g;
  s.alpha = alpha;
  s.readout = readout;
  return s;
}

// Finite-g estimator from the coupled pure state, computed with 2x2 algebra
// only: after U_w the (S, M) state is cos g |psi>|+> - i sin g sigma_n|psi> sigma_z|+>.
// Projecting S on |0> leaves the unnormalized meter state m; the estimator
// is <m|sigma|m> / (g * 2 |m|^2) with sigma = sigma_y (real) or sigma_z (imag).
double meter_oracle(double theta, double g, double alpha, bool imag) {
  const Complex i1{0.0, 1.0};
  const Complex psi0 = std::cos(theta);
  const Complex psi1 = std::sin(theta);
  // <0|sigma_n|psi> for sigma_n = cos a X + sin a Y.
  const Complex n_psi = (std::cos(alpha) - i1 * std::sin(alpha)) * psi1;
  const double r = std::sqrt(0.5);
  // meter components in the z basis; sigma_z|+> = |->.
  const Complex m0 = std::cos(g) * psi0 * r - i1 * std::sin(g) * n_psi * r;
  const Complex m1 = std::cos(g) * psi0 * r + i1 * std::sin(g) * n_psi * r;
  const double norm2 = std::norm(m0) + std::norm(m1);
  double reading;
  if (imag) {
    reading = std::norm(m0) - std::norm(m1);
  } else {
    reading = 2.0 * (std::conj(m0) * (-i1) * m1).real();
  }
  return reading / (2.0 * g * norm2);
}

}  // namespace

TEST(WeakValue, Examples) {
  const auto zero = qcore::basis_ket(2, 0);
  EXPECT_NEAR(std::abs(weak_value(preselection_state(kPi / 4), zero, qcore::pauli_x()) - 1.0), 0.0, 1e-12);
  EXPECT_NEAR(weak_value(preselection_state(1.2), zero, qcore::pauli_x()).real(), std::tan(1.2), 1e-12);
  EXPECT_NEAR(weak_value(spec(1.2, 0.1)).real(), 2.57215, 1e-5);
  EXPECT_NEAR(weak_value(spec(1.4, 0.1)).real(), 5.79788, 1e-5);
  const Complex w = weak_value(spec(kPi / 4, 0.1, kPi / 3));
  EXPECT_NEAR(w.real(), 0.5, 1e-12);
  EXPECT_NEAR(w.imag(), -0.8660254037844386, 1e-12);
}

TEST(WeakValue, ClosedFormOverGrid) {
  Gen gen(41);
  for (int trial = 0; trial < 50; ++trial) {
    const double theta = gen.uniform(0.0, 1.5);
    const double alpha = gen.uniform(0.0, 2 * kPi);
    const Complex w = weak_value(spec(theta, 0.1, alpha));
    const Complex expected = std::tan(theta) * std::exp(Complex(0.0, -alpha));
    EXPECT_LE(std::abs(w - expected), 1e-12 * (1 + std::abs(expected)));
  }
}

TEST(WeakValue, OrthogonalSelectionIsAnError) {
  EXPECT_THROW(weak_value(spec(kPi / 2, 0.1)), UndefinedWeakValue);
  EXPECT_THROW(weak_value(qcore::basis_ket(2, 1), qcore::basis_ket(2, 0), qcore::pauli_x()),
               UndefinedWeakValue);
}

TEST(SpecValidation, Bounds) {
  EXPECT_THROW(spec(0.1, -0.1).validate(), std::invalid_argument);
  EXPECT_THROW(spec(kPi, 0.1).validate(), std::invalid_argument);
  EXPECT_THROW(spec(-0.1, 0.1).validate(), std::invalid_argument);
  EXPECT_THROW(spec(0.1, 0.1, 7.0).validate(), std::invalid_argument);
  EXPECT_NO_THROW(spec(0.1, 0.1, 2 * kPi).validate());
  EXPECT_NO_THROW(spec(0.0, 0.0).validate());
}

TEST(InitialState, Marginals) {
  const auto rho0 = build_initial_state(spec(0.0, 0.1));
  EXPECT_LE(max_abs_diff(qcore::partial_trace(rho0, {2}).matrix(),
                         qcore::DensityState::pure(qcore::basis_ket(2, 0)).matrix()),
            1e-14);
  Gen gen(42);
  for (int trial = 0; trial < 5; ++trial) {
    const auto rho = build_initial_state(spec(gen.uniform(0.0, 3.0), 0.1));
    EXPECT_NEAR(qcore::expectation(qcore::partial_trace(rho, {1}), qcore::pauli_x()), 1.0, 1e-14);
    EXPECT_LE(max_abs_diff(qcore::partial_trace(rho, {0}).matrix(), 0.5 * qcore::identity(2)), 1e-14);
  }
  const auto rho12 = build_initial_state(spec(1.2, 0.1));
  EXPECT_NEAR(qcore::expectation(qcore::partial_trace(rho12, {2}), qcore::pauli_z()), std::cos(2.4), 1e-12);
}

TEST(InitialState, ReferenceStateRotatesIntoPreparedState) {
  const auto s = spec(1.1, 0.2);
  const ComplexMatrix u = preparation_unitary(s);
  const ComplexMatrix prepared = u * reference_state().matrix() * u.adjoint();
  EXPECT_LE(max_abs_diff(prepared, build_initial_state(s).matrix()), 1e-14);
  // The reference state is the pseudopure form with the ancilla mixed.
  nmr::SpinSystem sys;
  sys.nu = {0, 0, 0};
  sys.j = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  EXPECT_LE(max_abs_diff(reference_state().matrix(),
                         nmr::pseudopure_state(sys, {0}, qcore::basis_ket(4, 0)).matrix()),
            0.0);
}

TEST(RunProtocol, Examples) {
  const auto a = run_protocol(spec(kPi / 4, 0.1));
  EXPECT_NEAR(a.estimator, std::sin(0.2) / 0.2, 1e-12);
  EXPECT_NEAR(a.p0, 0.5, 1e-12);
  const auto b = run_protocol(spec(1.2, 0.05));
  EXPECT_NEAR(b.estimator, 2.5324, 1e-4);
  EXPECT_NEAR(b.p0, 0.133145, 5e-7);
  EXPECT_NEAR(b.system_expectation, -0.73371, 5e-6);
  const auto c = run_protocol(spec(kPi / 4, 0.1, kPi / 2, Readout::ImagPart));
  EXPECT_NEAR(c.estimator, -std::sin(0.2) / 0.2, 1e-12);
}

TEST(RunProtocol, Errors) {
  EXPECT_THROW(run_protocol(spec(0.3, 0.0)), ZeroCoupling);
  // At theta = pi/2 only the coupling feeds |0>_S, with probability sin^2 g.
  EXPECT_THROW(run_protocol(spec(kPi / 2, 1e-7)), PostSelectionFailure);
  EXPECT_NEAR(run_protocol(spec(kPi / 2, 1e-3)).p0, std::sin(1e-3) * std::sin(1e-3), 1e-15);
}

TEST(RunProtocol, MatchesClosedFormAndMeterOracle) {
  Gen gen(43);
  for (int trial = 0; trial < 60; ++trial) {
    const double theta = gen.uniform(0.0, 1.5);
    const double g = gen.uniform(0.01, 0.7);
    const double alpha = gen.uniform(0.0, 2 * kPi);
    for (Readout r : {Readout::RealPart, Readout::ImagPart}) {
      const auto s = spec(theta, g, alpha, r);
      const auto res = run_protocol(s);
      const double scale = 1.0 + std::abs(res.estimator);
      EXPECT_NEAR(res.estimator, finite_g_prediction(s), 1e-9 * scale);
      EXPECT_NEAR(res.estimator, meter_oracle(theta, g, alpha, r == Readout::ImagPart), 1e-9 * scale);
      EXPECT_NEAR(res.system_expectation, 2 * res.p0 - 1, 1e-10);
      EXPECT_NEAR(res.p0, postselection_probability(s), 1e-12);
      const Complex w = weak_value(s);
      const double expected_p0 = std::pow(std::cos(theta), 2) *
                                 (std::pow(std::cos(g), 2) + std::pow(std::sin(g), 2) * std::norm(w));
      EXPECT_NEAR(res.p0, expected_p0, 1e-12);
    }
  }
}

TEST(FiniteG, Examples) {
  EXPECT_NEAR(finite_g_prediction(spec(kPi / 4, 0.7)), std::sin(1.4) / 1.4, 1e-12);
  EXPECT_NEAR(finite_g_prediction(spec(kPi / 4, 0.7)), 0.70389, 5e-6);
  EXPECT_NEAR(finite_g_prediction(spec(1.4, 0.05)), 5.352, 5e-4);
  EXPECT_NEAR(finite_g_prediction(spec(1.2, 0.1)), 2.4196, 5e-4);
  // g -> 0 limit is the weak value itself.
  for (double alpha : {0.0, 0.7, 2.0}) {
    const auto s = spec(1.0, 1e-6, alpha);
    EXPECT_NEAR(finite_g_prediction(s), weak_value(s).real(), 1e-8);
    auto si = s;
    si.readout = Readout::ImagPart;
    EXPECT_NEAR(finite_g_prediction(si), weak_value(s).imag(), 1e-8);
  }
  EXPECT_THROW(finite_g_prediction(spec(1.0, 0.0)), ZeroCoupling);
}

TEST(Convergence, ErrorRatioPerHalving) {
  // theta = 1.2 sits in the quadratic regime for all listed g.
  const double w = std::tan(1.2);
  double previous = 0.0;
  for (double g : {0.1, 0.05, 0.025, 0.0125}) {
    const double err = std::abs(run_protocol(spec(1.2, g)).estimator - w);
    if (previous > 0.0) {
      EXPECT_GE(previous / err, 3.5);
      EXPECT_LE(previous / err, 4.5);
    }
    previous = err;
  }
}

TEST(ReadoutShift, Examples) {
  EXPECT_NEAR(readout_shift(gates::PauliAxis::x(), spec(1.0, 0.1, 0.4)), 0.0, 1e-14);
  EXPECT_NEAR(readout_shift(gates::PauliAxis::y(), spec(1.2, 0.1)), 2 * 0.1 * std::tan(1.2), 1e-12);
  // w = -i at alpha = pi/2 with theta = pi/4; w = i at alpha = 3 pi/2.
  EXPECT_NEAR(readout_shift(gates::PauliAxis::z(), spec(kPi / 4, 0.1, 1.5 * kPi)), 2 * 0.1, 1e-12);
}

TEST(ReadoutShift, MatchesSmallGSimulation) {
  // First-order meter shift: <sigma_m> of the post-selected meter ~ shift / (p0 / |<phi|psi>|^2).
  const double g = 1e-5;
  for (double alpha : {0.0, 0.9, 2.5}) {
    const auto s = spec(0.6, g, alpha);
    const double re = 2 * g * weak_value(s).real();
    const double im = 2 * g * weak_value(s).imag();
    EXPECT_NEAR(readout_shift(gates::PauliAxis::y(), s), re, 1e-15);
    EXPECT_NEAR(readout_shift(gates::PauliAxis::z(), s), im, 1e-15);
    EXPECT_NEAR(meter_oracle(0.6, g, alpha, false) * 2 * g, re, 1e-9);
    EXPECT_NEAR(meter_oracle(0.6, g, alpha, true) * 2 * g, im, 1e-9);
  }
}

TEST(FailedBranch, MeterPerturbationOnFailureDoesNotChangeEstimator) {
  Gen gen(44);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = spec(gen.uniform(0.1, 1.4), gen.uniform(0.05, 0.7), gen.uniform(0.0, 6.0));
    // A unitary on M controlled by S=|1>, inserted after the coupling.
    const auto base = run_protocol(s);
    const ComplexMatrix kick = gen.unitary(2);
    const ComplexMatrix p1 = qcore::DensityState::pure(qcore::basis_ket(2, 1)).matrix();
    const ComplexMatrix p0m = qcore::DensityState::pure(qcore::basis_ket(2, 0)).matrix();
    const ComplexMatrix cu = embed(p0m, {kSystem}, 3) + embed(qcore::tensor(kick, p1), {kMeter, kSystem}, 3);
    CircuitNoise noise;
    noise.after_coupling = qcore::QuantumChannel::unitary(cu);
    const auto kicked = run_protocol(s, noise);
    EXPECT_NEAR(kicked.estimator, base.estimator, 1e-12 * (1 + std::abs(base.estimator)));
  }
}

TEST(Noise, DephasingNeverIncreasesEstimatorMagnitude) {
  nmr::SpinSystem sys;
  sys.nu = {0, 0, 0};
  sys.j = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  sys.t2 = {0.3, 0.5, 0.7};
  const auto half = nmr::dephasing_channel(sys, 0.01);
  CircuitNoise noise{half, half};
  for (double theta : {kPi / 4, 1.2, 1.4}) {
    for (int i = 1; i <= 14; ++i) {
      const auto s = spec(theta, 0.05 * i);
      EXPECT_LE(std::abs(run_protocol(s, noise).estimator), std::abs(run_protocol(s).estimator) + 1e-12);
    }
  }
  EXPECT_LT(std::abs(run_protocol(spec(1.4, 0.05), noise).estimator),
            std::abs(run_protocol(spec(1.4, 0.05)).estimator));
}

TEST(ComplexFamily, MagnitudeConstantOverAlpha) {
  const double g = 0.1;
  const double mag = std::sin(2 * g) / (2 * g);
  for (int k = 0; k < 12; ++k) {
    const double alpha = 2 * kPi * k / 12;
    const double re = run_protocol(spec(kPi / 4, g, alpha)).estimator;
    const double im = run_protocol(spec(kPi / 4, g, alpha, Readout::ImagPart)).estimator;
    EXPECT_NEAR(re * re + im * im, mag * mag, 1e-9);
  }
}
