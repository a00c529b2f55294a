#pragma once

// Gradient ascent pulse engineering for unitary targets.
//
// Fidelity is the phase-insensitive, ensemble-averaged gate fidelity
//   Phi = sum_s w_s |Tr(U_target^dagger U(scale_s))|^2 / d^2,
// where scale_s multiplies the control amplitudes (RF inhomogeneity) and
// leaves the drift untouched.
//
// The production kernels parallelize over pulse segments with OpenMP. The
// `reference` namespace keeps serial implementations, with the gradient
// taken through a different route (block-triangular matrix exponential),
// for cross-checking and benchmarking.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "weakmeas/nmr.hpp"
#include "weakmeas/qcore.hpp"

namespace weakmeas::grape {

class ControlPulse {
 public:
  ControlPulse() = default;
  ControlPulse(int segments, int channels, double dt);
  ControlPulse(int segments, int channels, double dt, std::vector<double> amplitudes);

  int segments() const { return segments_; }
  int channels() const { return channels_; }
  double dt() const { return dt_; }
  double duration() const { return dt_ * segments_; }

  double& at(int segment, int channel) {
    return amplitudes_[static_cast<std::size_t>(segment * channels_ + channel)];
  }
  double at(int segment, int channel) const {
    return amplitudes_[static_cast<std::size_t>(segment * channels_ + channel)];
  }
  // Row-major N x K amplitudes in rad/s.
  const std::vector<double>& amplitudes() const { return amplitudes_; }
  std::vector<double>& amplitudes() { return amplitudes_; }

  std::vector<std::string> labels;

 private:
  int segments_ = 0;
  int channels_ = 0;
  double dt_ = 0.0;
  std::vector<double> amplitudes_;
};

struct EnsembleMember {
  double scale = 1.0;
  double weight = 1.0;
};

enum class SearchDirection { SteepestAscent, ConjugateGradient };

struct GrapeOptions {
  int max_iterations = 500;
  // Polak-Ribiere(+) conjugate directions, restarted to the gradient whenever
  // the direction stops being an ascent direction.
  SearchDirection direction = SearchDirection::ConjugateGradient;
  double fidelity_goal = 0.9999;
  double gradient_tolerance = 1e-12;
  // Initial line-search step; 0 picks one from the first gradient.
  double initial_step = 0.0;
  std::optional<double> amplitude_bound;  // |u| <= bound, rad/s
};

struct GrapeProblem {
  nmr::PulsedHamiltonian hamiltonian;
  ComplexMatrix target;
  int segments = 1;
  double dt = 1.0;
  std::vector<EnsembleMember> ensemble{{1.0, 1.0}};
  GrapeOptions options;

  int channels() const { return static_cast<int>(hamiltonian.controls.size()); }
  void validate() const;
  void validate(const ControlPulse& pulse) const;
};

enum class OptimizeStatus { GoalReached, GradientTolerance, MaxIterations, LineSearchFailed };

const char* to_string(OptimizeStatus status);

struct OptimizeResult {
  ControlPulse pulse;
  std::vector<double> trace;  // fidelity after each accepted step, starting with the initial pulse
  OptimizeStatus status = OptimizeStatus::MaxIterations;
  int iterations = 0;

  bool converged() const { return status == OptimizeStatus::GoalReached; }
  double fidelity() const { return trace.empty() ? 0.0 : trace.back(); }
};

// Time-ordered product of segment propagators, latest segment on the left.
ComplexMatrix propagate(const GrapeProblem& problem, const ControlPulse& pulse, double scale = 1.0);
// Segment propagators exp(-i dt (H0 + scale sum_k u_k H_k)), in time order.
std::vector<ComplexMatrix> segment_propagators(const GrapeProblem& problem,
                                               const ControlPulse& pulse, double scale);

double fidelity(const GrapeProblem& problem, const ControlPulse& pulse);
// |Tr(target^dagger U)|^2 / d^2 for a single propagator.
double gate_fidelity(const ComplexMatrix& target, const ComplexMatrix& u);

// dPhi/du_k(j), row-major like the pulse amplitudes. Exact: the derivative
// of each segment exponential comes from the generator's eigendecomposition.
std::vector<double> gradient(const GrapeProblem& problem, const ControlPulse& pulse);

// Seeded uniform amplitudes in [-1, 1] times 1% of the amplitude bound (or of
// 2 pi / duration when no bound is configured).
ControlPulse initial_pulse(const GrapeProblem& problem, std::uint64_t seed);

// Gradient ascent with a backtracking (Armijo) line search. Accepted steps
// strictly increase the fidelity; the step grows after each success.
OptimizeResult optimize(const GrapeProblem& problem, const ControlPulse& initial);
OptimizeResult optimize(const GrapeProblem& problem, std::uint64_t seed);

// Density matrix evolved through the pulse. With a dephasing system, each
// segment is followed by its T2 decay (first-order splitting).
ComplexMatrix evolve(const nmr::PulsedHamiltonian& hamiltonian, const ControlPulse& pulse,
                     const ComplexMatrix& rho, const nmr::SpinSystem* dephasing = nullptr,
                     double scale = 1.0);

namespace reference {

ComplexMatrix propagate(const GrapeProblem& problem, const ControlPulse& pulse, double scale = 1.0);
double fidelity(const GrapeProblem& problem, const ControlPulse& pulse);
std::vector<double> gradient(const GrapeProblem& problem, const ControlPulse& pulse);

}  // namespace reference

// Pulse CSV: header `segment,channel_0,...,channel_{K-1}` then one row per
// segment. The sidecar JSON carries dt, segment/channel counts and labels.
void write_pulse(const ControlPulse& pulse, const std::string& csv_path,
                 const std::string& sidecar_path, const std::string& extra_metadata_json = "{}");
ControlPulse read_pulse(const std::string& csv_path, const std::string& sidecar_path);

}  // namespace weakmeas::grape
