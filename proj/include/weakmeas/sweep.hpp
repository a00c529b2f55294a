#pragma once

// Parameter sweeps over the weak-measurement protocol, through either the
// ideal circuit or a GRAPE pulse simulated under the NMR Hamiltonian.
//
// Grid points run in parallel (OpenMP, `workers` threads). Pulse-pathway
// points are grouped into chains that warm-start each GRAPE run from the
// previous grid point's pulse; chains run in parallel, points within a chain
// in order. Output ordering never depends on scheduling.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "weakmeas/config.hpp"
#include "weakmeas/grape.hpp"
#include "weakmeas/protocol.hpp"

namespace weakmeas::cli {

struct SweepRow {
  double g = 0.0;
  double theta = 0.0;
  double alpha = 0.0;
  std::optional<double> estimator_real;
  std::optional<double> estimator_imag;
  std::optional<double> p0;
  std::optional<double> weak_value_real;  // g -> 0 limit
  std::optional<double> weak_value_imag;
  std::optional<double> finite_g_prediction;  // for the real-part readout, or the imaginary part when only that was measured
  // "ideal" or "pulse", "+t2" when dephasing is on, ":guard_band" on rows
  // skipped for being too close to theta = pi/2.
  std::string pathway;

  bool flagged() const { return pathway.find(':') != std::string::npos; }
  bool operator==(const SweepRow&) const = default;
};

class PulseSynthesisFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dephasing for the ideal pathway: half the configured protocol duration
// before the coupling and half after.
protocol::CircuitNoise circuit_noise(const ExperimentConfig& cfg);
// Spin system carrying the effective T2 (noise block overrides the system's).
std::optional<nmr::SpinSystem> noise_system(const ExperimentConfig& cfg);

// GRAPE problem targeting the full network unitary of `spec`.
grape::GrapeProblem pulse_problem(const ExperimentConfig& cfg,
                                  const protocol::WeakMeasurementSpec& spec);
// Synthesizes a pulse, rejecting it (PulseSynthesisFailure) when its
// fidelity falls below pulse.min_fidelity.
grape::OptimizeResult synthesize_pulse(const ExperimentConfig& cfg,
                                       const protocol::WeakMeasurementSpec& spec,
                                       const grape::ControlPulse* warm_start);
// Evolves the pseudopure reference state through `pulse` (with dephasing when
// configured) and reads out the estimator.
protocol::WeakValueResult evaluate_pulse(const ExperimentConfig& cfg,
                                         const protocol::WeakMeasurementSpec& spec,
                                         const grape::ControlPulse& pulse);
protocol::WeakValueResult evaluate_ideal(const ExperimentConfig& cfg,
                                         const protocol::WeakMeasurementSpec& spec);

std::string pathway_tag(const ExperimentConfig& cfg);

// Each requires the matching mode; invalid configs throw std::invalid_argument
// listing every problem.
std::vector<SweepRow> run_sweep_g(const ExperimentConfig& cfg);
std::vector<SweepRow> run_sweep_theta(const ExperimentConfig& cfg);
std::vector<SweepRow> run_sweep_alpha(const ExperimentConfig& cfg);
std::vector<SweepRow> run_single(const ExperimentConfig& cfg);

struct GrapeRun {
  protocol::WeakMeasurementSpec spec;
  grape::OptimizeResult result;
};
// Pulse for the fixed (theta, g, alpha, readout) spec, from cfg.seed.
GrapeRun run_grape(const ExperimentConfig& cfg);

// Dispatches on cfg.mode for the row-producing modes.
std::vector<SweepRow> run(const ExperimentConfig& cfg);

}  // namespace weakmeas::cli
