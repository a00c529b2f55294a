#pragma once

// Experiment configuration: one JSON document (schema_version 1), validated
// up front with every problem reported at once.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "weakmeas/grape.hpp"
#include "weakmeas/nmr.hpp"
#include "weakmeas/protocol.hpp"

namespace weakmeas::cli {

inline constexpr int kSchemaVersion = 1;

enum class Mode { SweepG, SweepTheta, SweepAlpha, Grape, Single };
enum class Pathway { IdealCircuit, NmrPulse };

const char* to_string(Mode mode);
const char* to_string(Pathway pathway);
std::optional<Mode> parse_mode(const std::string& text);
std::optional<Pathway> parse_pathway(const std::string& text);

struct NoiseSettings {
  // Per-spin T2 (s); empty falls back to the spin system's t2.
  std::vector<double> t2;
  double duration = 0.02;  // simulated protocol length, s
};

struct PulseSettings {
  int segments = 200;
  double duration = 0.02;  // s
  double fidelity_goal = 1.0 - 1e-9;
  double min_fidelity = 0.999;
  int max_iterations = 5000;
  std::optional<double> amplitude_bound;
  std::vector<grape::EnsembleMember> ensemble{{1.0, 1.0}};
  // Pre-made pulse for `single` (sidecar: same path with .json extension).
  std::optional<std::string> file;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  Mode mode = Mode::Single;
  Pathway pathway = Pathway::IdealCircuit;
  std::uint64_t seed = 1;
  int workers = 1;

  std::vector<double> theta;  // sweep-g series / sweep-theta grid
  std::vector<double> g;      // sweep-g grid
  std::vector<double> alpha;  // sweep-alpha grid
  double theta_guard_band = 0.05;

  // Fixed values for the axes a mode does not sweep.
  double fixed_theta = 0.7853981633974483;
  double fixed_g = 0.1;
  double fixed_alpha = 0.0;
  protocol::Readout fixed_readout = protocol::Readout::RealPart;

  std::optional<nmr::SpinSystem> spin_system;
  std::optional<NoiseSettings> noise;
  PulseSettings pulse;

  std::string output_dir = ".";
  std::string csv_name;  // default: <mode>.csv
  std::string svg_name;  // default: <mode>.svg
};

struct ConfigParse {
  ExperimentConfig config;
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

// Default grids: g = 0.05, 0.10, ..., 0.70; theta = {pi/4, 1.2, 1.4} for
// sweep-g and 25 points over [0, pi/2) for sweep-theta; alpha = 13 points
// over [0, 2 pi].
std::vector<double> default_g_grid();
std::vector<double> default_theta_series();
std::vector<double> default_theta_grid();
std::vector<double> default_alpha_grid();

// Grid specs are either a number list, {"start","stop","step"} (stop
// inclusive) or {"start","stop","count","endpoint"}.
std::vector<double> expand_grid(const nlohmann::json& spec, std::vector<std::string>& errors,
                                const std::string& where);

// Parses `doc` for `mode`, filling defaults. Parse and validation problems
// are accumulated in the result rather than thrown.
ConfigParse parse_config(const nlohmann::json& doc, Mode mode);
ConfigParse load_config(const std::string& path, Mode mode);

// Every violated constraint, in a stable order.
std::vector<std::string> validate(const ExperimentConfig& cfg);

nmr::SpinSystem parse_spin_system(const nlohmann::json& doc, std::vector<std::string>& errors);
nlohmann::ordered_json to_json(const nmr::SpinSystem& sys);

}  // namespace weakmeas::cli
