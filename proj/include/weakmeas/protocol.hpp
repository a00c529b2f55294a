#pragma once

// Post-selected weak measurement on a three-qubit register
// |ancilla, meter, system>, with the post-selection realized by a
// controlled-controlled phase and a maximally mixed ancilla.

#include <optional>
#include <stdexcept>

#include "weakmeas/gates.hpp"
#include "weakmeas/qcore.hpp"

namespace weakmeas::protocol {

inline constexpr int kAncilla = 0;
inline constexpr int kMeter = 1;
inline constexpr int kSystem = 2;
inline constexpr int kRegisterQubits = 3;

inline constexpr double kOverlapFloor = 1e-12;
inline constexpr double kPostSelectionFloor = 1e-12;

class UndefinedWeakValue : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ZeroCoupling : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class PostSelectionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Readout { RealPart, ImagPart };

struct WeakMeasurementSpec {
  double theta = 0.0;  // pre-selection cos(theta)|0> + sin(theta)|1>
  double alpha = 0.0;  // observable cos(alpha) sigma_x + sin(alpha) sigma_y
  double g = 0.0;      // coupling strength
  Readout readout = Readout::RealPart;
  ComplexVector postselect = qcore::basis_ket(2, 0);

  // Throws std::invalid_argument unless g >= 0, theta in [0, pi),
  // alpha in [0, 2 pi] and postselect is a normalized qubit state.
  void validate() const;
};

struct WeakValueResult {
  double estimator = 0.0;
  double p0 = 0.0;
  double meter_expectation = 0.0;   // <sigma_y^M> (real part) or <sigma_z^M> (imaginary part)
  double system_expectation = 0.0;  // <sigma_z^S>
};

// Optional channels on the full register, applied right before and right
// after the weak coupling.
struct CircuitNoise {
  std::optional<qcore::QuantumChannel> before_coupling;
  std::optional<qcore::QuantumChannel> after_coupling;
};

// <phi|obs|psi> / <phi|psi>. Throws UndefinedWeakValue for orthogonal
// pre- and post-selection.
Complex weak_value(const ComplexVector& psi, const ComplexVector& phi, const ComplexMatrix& obs);
Complex weak_value(const WeakMeasurementSpec& spec);

ComplexVector preselection_state(double theta);
gates::PauliAxis observable_axis(double alpha);

// I/2 x |+><+| x |psi_theta><psi_theta|
qcore::DensityState build_initial_state(const WeakMeasurementSpec& spec);
// I/2 x |00><00|, the state the pulse pathway starts from.
qcore::DensityState reference_state();

// Hadamard on the meter and Ry(theta) on the system.
ComplexMatrix preparation_unitary(const WeakMeasurementSpec& spec);
ComplexMatrix coupling_unitary(const WeakMeasurementSpec& spec);
// U_phi^dagger on the system followed by the CC-sigma_z (real part) or
// CC-sigma_x (imaginary part) reset.
ComplexMatrix postselection_unitary(const WeakMeasurementSpec& spec);
// Whole network from reference_state(): post-selection * coupling * preparation.
ComplexMatrix network_unitary(const WeakMeasurementSpec& spec);

qcore::DensityState ideal_final_state(const WeakMeasurementSpec& spec,
                                      const CircuitNoise& noise = {});

// Meter/system readout and the estimator
//   meter_expectation / (g (<sigma_z^S> + 1)).
// Throws ZeroCoupling for g == 0 and PostSelectionFailure when p0 <= 1e-12.
WeakValueResult read_out(const WeakMeasurementSpec& spec, const qcore::DensityState& final_state);

WeakValueResult run_protocol(const WeakMeasurementSpec& spec);
WeakValueResult run_protocol(const WeakMeasurementSpec& spec, const CircuitNoise& noise);

// Closed-form noiseless estimator without the weak-measurement
// approximation: sin(2g) Re(w) / (2g (cos^2 g + sin^2 g |w|^2)), or Im(w)
// for the imaginary readout.
double finite_g_prediction(const WeakMeasurementSpec& spec);
// |<phi|psi>|^2 (cos^2 g + sin^2 g |w|^2)
double postselection_probability(const WeakMeasurementSpec& spec);

// First-order shift of <sigma_m> on the post-selected meter:
//   i g Re(w) <[sigma_z, sigma_m]> + g Im(w) <{sigma_z, sigma_m}>
// evaluated on meter_initial (|+> by default).
double readout_shift(const gates::PauliAxis& meter_axis, const WeakMeasurementSpec& spec);
double readout_shift(const gates::PauliAxis& meter_axis, const WeakMeasurementSpec& spec,
                     const ComplexVector& meter_initial);

}  // namespace weakmeas::protocol
