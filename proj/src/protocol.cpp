#include "weakmeas/protocol.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace weakmeas::protocol {

using qcore::DensityState;
using qcore::embed;

void WeakMeasurementSpec::validate() const {
  if (!std::isfinite(g) || g < 0.0) throw std::invalid_argument("spec: g must be >= 0");
  if (!std::isfinite(theta) || theta < 0.0 || theta >= std::numbers::pi) {
    throw std::invalid_argument("spec: theta must lie in [0, pi)");
  }
  if (!std::isfinite(alpha) || alpha < 0.0 || alpha > 2.0 * std::numbers::pi) {
    throw std::invalid_argument("spec: alpha must lie in [0, 2 pi]");
  }
  if (postselect.size() != 2 || std::abs(postselect.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("spec: post-selection must be a normalized qubit state");
  }
}

Complex weak_value(const ComplexVector& psi, const ComplexVector& phi, const ComplexMatrix& obs) {
  if (psi.size() != phi.size() || obs.rows() != psi.size() || obs.cols() != psi.size()) {
    throw std::invalid_argument("weak_value: dimension mismatch");
  }
  const Complex overlap = phi.dot(psi);  // conjugates phi
  if (std::abs(overlap) <= kOverlapFloor) {
    throw UndefinedWeakValue("weak value undefined: pre- and post-selection are orthogonal");
  }
  return phi.dot(obs * psi) / overlap;
}

Complex weak_value(const WeakMeasurementSpec& spec) {
  return weak_value(preselection_state(spec.theta), spec.postselect,
                    gates::pauli(observable_axis(spec.alpha)));
}

ComplexVector preselection_state(double theta) {
  ComplexVector psi(2);
  psi << std::cos(theta), std::sin(theta);
  return psi;
}

gates::PauliAxis observable_axis(double alpha) { return gates::PauliAxis::in_xy_plane(alpha); }

DensityState build_initial_state(const WeakMeasurementSpec& spec) {
  spec.validate();
  ComplexVector plus(2);
  plus << std::sqrt(0.5), std::sqrt(0.5);
  const ComplexMatrix meter = plus * plus.adjoint();
  const ComplexVector psi = preselection_state(spec.theta);
  const ComplexMatrix system = psi * psi.adjoint();
  ComplexMatrix rho = qcore::tensor(qcore::tensor(0.5 * qcore::identity(2), meter), system);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityState(std::move(rho));
}

DensityState reference_state() {
  ComplexMatrix rho = ComplexMatrix::Zero(8, 8);
  rho(0, 0) = 0.5;  // |000>
  rho(4, 4) = 0.5;  // |100>
  return DensityState(std::move(rho));
}

ComplexMatrix preparation_unitary(const WeakMeasurementSpec& spec) {
  return embed(gates::hadamard(), {kMeter}, kRegisterQubits) *
         embed(gates::ry(spec.theta), {kSystem}, kRegisterQubits);
}

ComplexMatrix coupling_unitary(const WeakMeasurementSpec& spec) {
  return gates::weak_coupling_unitary(spec.g, observable_axis(spec.alpha), kSystem, kMeter,
                                      kRegisterQubits);
}

ComplexMatrix postselection_unitary(const WeakMeasurementSpec& spec) {
  const gates::PhaseAxis axis =
      spec.readout == Readout::RealPart ? gates::PhaseAxis::Z : gates::PhaseAxis::X;
  const ComplexMatrix rotate =
      embed(gates::basis_rotation(spec.postselect).adjoint(), {kSystem}, kRegisterQubits);
  return gates::ccphase_unitary(axis, kAncilla, kSystem, kMeter, kRegisterQubits) * rotate;
}

ComplexMatrix network_unitary(const WeakMeasurementSpec& spec) {
  spec.validate();
  return postselection_unitary(spec) * coupling_unitary(spec) * preparation_unitary(spec);
}

DensityState ideal_final_state(const WeakMeasurementSpec& spec, const CircuitNoise& noise) {
  DensityState rho = build_initial_state(spec);
  if (noise.before_coupling) rho = qcore::apply_channel(*noise.before_coupling, rho);
  rho = qcore::apply_channel(qcore::QuantumChannel::unitary(coupling_unitary(spec)), rho);
  if (noise.after_coupling) rho = qcore::apply_channel(*noise.after_coupling, rho);
  return qcore::apply_channel(qcore::QuantumChannel::unitary(postselection_unitary(spec)), rho);
}

WeakValueResult read_out(const WeakMeasurementSpec& spec, const DensityState& final_state) {
  if (final_state.n_qubits() != kRegisterQubits) {
    throw std::invalid_argument("read_out: expected a three-qubit state");
  }
  if (spec.g == 0.0) {
    throw ZeroCoupling("estimator undefined at g = 0 (division by g)");
  }
  const ComplexMatrix meter_obs = spec.readout == Readout::RealPart ? qcore::pauli_y()
                                                                    : qcore::pauli_z();
  WeakValueResult result;
  result.meter_expectation =
      qcore::expectation(final_state, embed(meter_obs, {kMeter}, kRegisterQubits));
  result.system_expectation =
      qcore::expectation(final_state, embed(qcore::pauli_z(), {kSystem}, kRegisterQubits));
  result.p0 = (result.system_expectation + 1.0) / 2.0;
  if (result.p0 <= kPostSelectionFloor) {
    throw PostSelectionFailure("post-selection probability " + std::to_string(result.p0) +
                               " too small to extract a weak value");
  }
  result.estimator = result.meter_expectation / (spec.g * (result.system_expectation + 1.0));
  return result;
}

WeakValueResult run_protocol(const WeakMeasurementSpec& spec) {
  return run_protocol(spec, CircuitNoise{});
}

WeakValueResult run_protocol(const WeakMeasurementSpec& spec, const CircuitNoise& noise) {
  spec.validate();
  if (spec.g == 0.0) throw ZeroCoupling("estimator undefined at g = 0 (division by g)");
  return read_out(spec, ideal_final_state(spec, noise));
}

double postselection_probability(const WeakMeasurementSpec& spec) {
  const Complex w = weak_value(spec);
  const double overlap2 = std::norm(spec.postselect.dot(preselection_state(spec.theta)));
  const double c = std::cos(spec.g);
  const double s = std::sin(spec.g);
  return overlap2 * (c * c + s * s * std::norm(w));
}

double finite_g_prediction(const WeakMeasurementSpec& spec) {
  spec.validate();
  if (spec.g == 0.0) throw ZeroCoupling("finite-g prediction undefined at g = 0");
  const Complex w = weak_value(spec);
  const double part = spec.readout == Readout::RealPart ? w.real() : w.imag();
  const double c = std::cos(spec.g);
  const double s = std::sin(spec.g);
  return std::sin(2.0 * spec.g) * part / (2.0 * spec.g * (c * c + s * s * std::norm(w)));
}

double readout_shift(const gates::PauliAxis& meter_axis, const WeakMeasurementSpec& spec) {
  ComplexVector plus(2);
  plus << std::sqrt(0.5), std::sqrt(0.5);
  return readout_shift(meter_axis, spec, plus);
}

double readout_shift(const gates::PauliAxis& meter_axis, const WeakMeasurementSpec& spec,
                     const ComplexVector& meter_initial) {
  spec.validate();
  const Complex w = weak_value(spec);
  const ComplexMatrix sz = qcore::pauli_z();
  const ComplexMatrix sm = gates::pauli(meter_axis);
  const Complex commutator = meter_initial.dot((sz * sm - sm * sz) * meter_initial);
  const Complex anticommutator = meter_initial.dot((sz * sm + sm * sz) * meter_initial);
  const Complex shift = Complex(0.0, 1.0) * spec.g * w.real() * commutator +
                        spec.g * w.imag() * anticommutator;
  return shift.real();
}

}  // namespace weakmeas::protocol
