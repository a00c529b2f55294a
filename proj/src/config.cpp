#include "weakmeas/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace weakmeas::cli {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

struct ModeName {
  Mode mode;
  const char* name;
};
constexpr ModeName kModeNames[] = {{Mode::SweepG, "sweep-g"},
                                   {Mode::SweepTheta, "sweep-theta"},
                                   {Mode::SweepAlpha, "sweep-alpha"},
                                   {Mode::Grape, "grape"},
                                   {Mode::Single, "single"}};

std::vector<double> linspace(double start, double stop, int count, bool endpoint) {
  std::vector<double> out;
  if (count <= 0) return out;
  if (count == 1) return {start};
  const double step = (stop - start) / (endpoint ? count - 1 : count);
  for (int i = 0; i < count; ++i) out.push_back(start + step * i);
  return out;
}

// Typed field readers: on a type mismatch they record an error and leave
// `out` untouched.
template <typename T>
bool read(const json& obj, const char* key, T& out, std::vector<std::string>& errors,
          const std::string& where) {
  if (!obj.contains(key)) return false;
  try {
    out = obj.at(key).get<T>();
    return true;
  } catch (const json::exception&) {
    errors.push_back(where + "." + key + ": wrong type");
    return false;
  }
}

bool read_number(const json& obj, const char* key, double& out, std::vector<std::string>& errors,
                 const std::string& where) {
  if (!obj.contains(key)) return false;
  if (!obj.at(key).is_number()) {
    errors.push_back(where + "." + key + ": expected a number");
    return false;
  }
  out = obj.at(key).get<double>();
  return true;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    std::vector<std::string>& errors, const std::string& where) {
  std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) errors.push_back(where + ": unknown key '" + item.key() + "'");
  }
}

bool finite_all(const std::vector<double>& xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(12);
  os << x;
  return os.str();
}

void check_grid(const std::vector<double>& grid, const char* name, double lo, double hi,
                bool hi_inclusive, std::vector<std::string>& errors) {
  if (grid.empty()) {
    errors.push_back(std::string("grid.") + name + ": must not be empty");
    return;
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = grid[i];
    const bool ok = std::isfinite(v) && v >= lo && (hi_inclusive ? v <= hi : v < hi);
    if (!ok) {
      errors.push_back(std::string("grid.") + name + "[" + std::to_string(i) + "] = " + fmt(v) +
                       " outside [" + fmt(lo) + ", " + fmt(hi) + (hi_inclusive ? "]" : ")"));
    }
  }
}

NoiseSettings parse_noise(const json& doc, std::vector<std::string>& errors) {
  NoiseSettings noise;
  if (!doc.is_object()) {
    errors.push_back("noise: expected an object");
    return noise;
  }
  reject_unknown(doc, {"t2_s", "duration_s"}, errors, "noise");
  read(doc, "t2_s", noise.t2, errors, "noise");
  read_number(doc, "duration_s", noise.duration, errors, "noise");
  return noise;
}

PulseSettings parse_pulse(const json& doc, std::vector<std::string>& errors) {
  PulseSettings pulse;
  if (!doc.is_object()) {
    errors.push_back("pulse: expected an object");
    return pulse;
  }
  reject_unknown(doc,
                 {"segments", "duration_s", "fidelity_goal", "min_fidelity", "max_iterations",
                  "amplitude_bound", "ensemble", "file"},
                 errors, "pulse");
  read(doc, "segments", pulse.segments, errors, "pulse");
  read_number(doc, "duration_s", pulse.duration, errors, "pulse");
  read_number(doc, "fidelity_goal", pulse.fidelity_goal, errors, "pulse");
  read_number(doc, "min_fidelity", pulse.min_fidelity, errors, "pulse");
  read(doc, "max_iterations", pulse.max_iterations, errors, "pulse");
  double bound = 0.0;
  if (read_number(doc, "amplitude_bound", bound, errors, "pulse")) pulse.amplitude_bound = bound;
  std::string file;
  if (read(doc, "file", file, errors, "pulse")) pulse.file = file;
  if (doc.contains("ensemble")) {
    const json& ens = doc.at("ensemble");
    if (!ens.is_array()) {
      errors.push_back("pulse.ensemble: expected an array");
    } else {
      pulse.ensemble.clear();
      for (std::size_t i = 0; i < ens.size(); ++i) {
        const std::string where = "pulse.ensemble[" + std::to_string(i) + "]";
        grape::EnsembleMember m;
        if (!ens[i].is_object()) {
          errors.push_back(where + ": expected an object");
          continue;
        }
        reject_unknown(ens[i], {"scale", "weight"}, errors, where);
        read_number(ens[i], "scale", m.scale, errors, where);
        read_number(ens[i], "weight", m.weight, errors, where);
        pulse.ensemble.push_back(m);
      }
    }
  }
  return pulse;
}

}  // namespace

const char* to_string(Mode mode) {
  for (const auto& m : kModeNames) {
    if (m.mode == mode) return m.name;
  }
  return "unknown";
}

const char* to_string(Pathway pathway) {
  return pathway == Pathway::IdealCircuit ? "ideal" : "pulse";
}

std::optional<Mode> parse_mode(const std::string& text) {
  for (const auto& m : kModeNames) {
    if (text == m.name) return m.mode;
  }
  return std::nullopt;
}

std::optional<Pathway> parse_pathway(const std::string& text) {
  if (text == "ideal") return Pathway::IdealCircuit;
  if (text == "pulse") return Pathway::NmrPulse;
  return std::nullopt;
}

std::vector<double> default_g_grid() {
  std::vector<double> out;
  for (int i = 1; i <= 14; ++i) out.push_back(0.05 * i);
  return out;
}

std::vector<double> default_theta_series() { return {kPi / 4.0, 1.2, 1.4}; }

std::vector<double> default_theta_grid() { return linspace(0.0, kPi / 2.0, 25, false); }

std::vector<double> default_alpha_grid() { return linspace(0.0, 2.0 * kPi, 13, true); }

std::vector<double> expand_grid(const json& spec, std::vector<std::string>& errors,
                                const std::string& where) {
  if (spec.is_array()) {
    std::vector<double> out;
    for (std::size_t i = 0; i < spec.size(); ++i) {
      if (!spec[i].is_number()) {
        errors.push_back(where + "[" + std::to_string(i) + "]: expected a number");
        continue;
      }
      out.push_back(spec[i].get<double>());
    }
    return out;
  }
  if (!spec.is_object()) {
    errors.push_back(where + ": expected a number list or a range object");
    return {};
  }
  reject_unknown(spec, {"start", "stop", "step", "count", "endpoint"}, errors, where);
  double start = 0.0;
  double stop = 0.0;
  const bool has_start = read_number(spec, "start", start, errors, where);
  const bool has_stop = read_number(spec, "stop", stop, errors, where);
  if (!has_start || !has_stop) {
    errors.push_back(where + ": range needs 'start' and 'stop'");
    return {};
  }
  const bool has_step = spec.contains("step");
  const bool has_count = spec.contains("count");
  if (has_step == has_count) {
    errors.push_back(where + ": range needs exactly one of 'step' or 'count'");
    return {};
  }
  if (has_step) {
    double step = 0.0;
    if (!read_number(spec, "step", step, errors, where)) return {};
    if (!(step > 0.0) || !std::isfinite(step) || !(stop >= start)) {
      errors.push_back(where + ": step range needs step > 0 and stop >= start");
      return {};
    }
    // Index-based so that e.g. 0.05..0.7 step 0.05 yields exactly 14 points.
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (n > 1000000) {
      errors.push_back(where + ": range has too many points");
      return {};
    }
    std::vector<double> out;
    for (long i = 0; i < n; ++i) out.push_back(start + step * static_cast<double>(i));
    return out;
  }
  int count = 0;
  bool endpoint = true;
  if (!read(spec, "count", count, errors, where)) return {};
  read(spec, "endpoint", endpoint, errors, where);
  if (count < 1) {
    errors.push_back(where + ": count must be >= 1");
    return {};
  }
  return linspace(start, stop, count, endpoint);
}

nmr::SpinSystem parse_spin_system(const json& doc, std::vector<std::string>& errors) {
  nmr::SpinSystem sys;
  if (!doc.is_object()) {
    errors.push_back("spin_system: expected an object");
    return sys;
  }
  reject_unknown(doc, {"nu_hz", "j_hz", "strong_pairs", "t2_s", "channels"}, errors,
                 "spin_system");
  if (!doc.contains("nu_hz")) errors.push_back("spin_system.nu_hz: required");
  if (!doc.contains("j_hz")) errors.push_back("spin_system.j_hz: required");
  if (!doc.contains("channels")) errors.push_back("spin_system.channels: required");
  read(doc, "nu_hz", sys.nu, errors, "spin_system");
  read(doc, "j_hz", sys.j, errors, "spin_system");
  read(doc, "t2_s", sys.t2, errors, "spin_system");
  read(doc, "channels", sys.channels, errors, "spin_system");
  std::vector<std::vector<int>> pairs;
  if (read(doc, "strong_pairs", pairs, errors, "spin_system")) {
    for (const auto& p : pairs) {
      if (p.size() != 2) {
        errors.push_back("spin_system.strong_pairs: each entry must be [a, b]");
        continue;
      }
      sys.strong_pairs.emplace_back(p[0], p[1]);
    }
  }
  return sys;
}

nlohmann::ordered_json to_json(const nmr::SpinSystem& sys) {
  nlohmann::ordered_json out;
  out["nu_hz"] = sys.nu;
  out["j_hz"] = sys.j;
  auto pairs = nlohmann::ordered_json::array();
  for (const auto& [a, b] : sys.strong_pairs) pairs.push_back({a, b});
  out["strong_pairs"] = pairs;
  if (sys.has_t2()) out["t2_s"] = sys.t2;
  out["channels"] = sys.channels;
  return out;
}

ConfigParse parse_config(const json& doc, Mode mode) {
  ConfigParse result;
  ExperimentConfig& cfg = result.config;
  auto& errors = result.errors;
  cfg.mode = mode;

  if (!doc.is_object()) {
    errors.push_back("config: expected a JSON object");
    return result;
  }
  reject_unknown(doc,
                 {"schema_version", "description", "mode", "pathway", "seed", "workers", "grid", "fixed",
                  "spin_system", "noise", "pulse", "output"},
                 errors, "config");

  if (!doc.contains("schema_version")) {
    errors.push_back("schema_version: required");
  } else {
    read(doc, "schema_version", cfg.schema_version, errors, "config");
  }
  std::string text;
  read(doc, "description", text, errors, "config");
  if (read(doc, "mode", text, errors, "config")) {
    const auto parsed = parse_mode(text);
    if (!parsed) {
      errors.push_back("mode: unknown mode '" + text + "'");
    } else if (*parsed != mode) {
      errors.push_back(std::string("mode: config says '") + text + "' but command is '" +
                       to_string(mode) + "'");
    }
  }
  if (read(doc, "pathway", text, errors, "config")) {
    const auto parsed = parse_pathway(text);
    if (parsed) {
      cfg.pathway = *parsed;
    } else {
      errors.push_back("pathway: expected 'ideal' or 'pulse', got '" + text + "'");
    }
  }
  read(doc, "seed", cfg.seed, errors, "config");
  read(doc, "workers", cfg.workers, errors, "config");

  cfg.g = default_g_grid();
  cfg.theta = mode == Mode::SweepTheta ? default_theta_grid() : default_theta_series();
  cfg.alpha = default_alpha_grid();
  if (doc.contains("grid")) {
    const json& grid = doc.at("grid");
    if (!grid.is_object()) {
      errors.push_back("grid: expected an object");
    } else {
      reject_unknown(grid, {"g", "theta", "alpha", "theta_guard_band"}, errors, "grid");
      if (grid.contains("g")) cfg.g = expand_grid(grid.at("g"), errors, "grid.g");
      if (grid.contains("theta")) cfg.theta = expand_grid(grid.at("theta"), errors, "grid.theta");
      if (grid.contains("alpha")) cfg.alpha = expand_grid(grid.at("alpha"), errors, "grid.alpha");
      read_number(grid, "theta_guard_band", cfg.theta_guard_band, errors, "grid");
    }
  }

  if (doc.contains("fixed")) {
    const json& fixed = doc.at("fixed");
    if (!fixed.is_object()) {
      errors.push_back("fixed: expected an object");
    } else {
      reject_unknown(fixed, {"theta", "g", "alpha", "readout"}, errors, "fixed");
      read_number(fixed, "theta", cfg.fixed_theta, errors, "fixed");
      read_number(fixed, "g", cfg.fixed_g, errors, "fixed");
      read_number(fixed, "alpha", cfg.fixed_alpha, errors, "fixed");
      if (read(fixed, "readout", text, errors, "fixed")) {
        if (text == "real") {
          cfg.fixed_readout = protocol::Readout::RealPart;
        } else if (text == "imag") {
          cfg.fixed_readout = protocol::Readout::ImagPart;
        } else {
          errors.push_back("fixed.readout: expected 'real' or 'imag', got '" + text + "'");
        }
      }
    }
  }

  if (doc.contains("spin_system")) cfg.spin_system = parse_spin_system(doc.at("spin_system"), errors);
  if (doc.contains("noise")) cfg.noise = parse_noise(doc.at("noise"), errors);
  if (doc.contains("pulse")) cfg.pulse = parse_pulse(doc.at("pulse"), errors);

  if (doc.contains("output")) {
    const json& out = doc.at("output");
    if (!out.is_object()) {
      errors.push_back("output: expected an object");
    } else {
      reject_unknown(out, {"dir", "csv", "svg"}, errors, "output");
      read(out, "dir", cfg.output_dir, errors, "output");
      read(out, "csv", cfg.csv_name, errors, "output");
      read(out, "svg", cfg.svg_name, errors, "output");
    }
  }
  if (cfg.csv_name.empty()) cfg.csv_name = std::string(to_string(mode)) + ".csv";
  if (cfg.svg_name.empty()) cfg.svg_name = std::string(to_string(mode)) + ".svg";

  // Fields that failed to parse keep their defaults, so the semantic checks
  // below only report problems with values that were actually read.
  auto semantic = validate(cfg);
  errors.insert(errors.end(), semantic.begin(), semantic.end());
  return result;
}

ConfigParse load_config(const std::string& path, Mode mode) {
  std::ifstream in(path);
  if (!in) {
    ConfigParse result;
    result.config.mode = mode;
    result.errors.push_back("config: cannot open '" + path + "'");
    return result;
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    ConfigParse result;
    result.config.mode = mode;
    result.errors.push_back(std::string("config: invalid JSON: ") + e.what());
    return result;
  }
  return parse_config(doc, mode);
}

std::vector<std::string> validate(const ExperimentConfig& cfg) {
  std::vector<std::string> errors;
  if (cfg.schema_version != kSchemaVersion) {
    errors.push_back("schema_version: expected " + std::to_string(kSchemaVersion) + ", got " +
                     std::to_string(cfg.schema_version));
  }
  if (cfg.workers < 1) errors.push_back("workers: must be >= 1");

  // g = 0 leaves the estimator undefined, so grids start above zero.
  const double g_max = 1e6;
  switch (cfg.mode) {
    case Mode::SweepG:
      check_grid(cfg.theta, "theta", 0.0, kPi, false, errors);
      check_grid(cfg.g, "g", 1e-12, g_max, true, errors);
      break;
    case Mode::SweepTheta:
      check_grid(cfg.theta, "theta", 0.0, kPi, false, errors);
      break;
    case Mode::SweepAlpha:
      check_grid(cfg.alpha, "alpha", 0.0, 2.0 * kPi, true, errors);
      break;
    case Mode::Grape:
    case Mode::Single:
      break;
  }
  if (!std::isfinite(cfg.theta_guard_band) || cfg.theta_guard_band < 0.0) {
    errors.push_back("grid.theta_guard_band: must be finite and >= 0");
  }
  if (!(std::isfinite(cfg.fixed_theta) && cfg.fixed_theta >= 0.0 && cfg.fixed_theta < kPi)) {
    errors.push_back("fixed.theta: must lie in [0, pi)");
  }
  if (!(std::isfinite(cfg.fixed_g) && cfg.fixed_g > 0.0)) errors.push_back("fixed.g: must be > 0");
  if (!(std::isfinite(cfg.fixed_alpha) && cfg.fixed_alpha >= 0.0 && cfg.fixed_alpha <= 2.0 * kPi)) {
    errors.push_back("fixed.alpha: must lie in [0, 2 pi]");
  }

  const bool needs_spins = cfg.pathway == Pathway::NmrPulse || cfg.mode == Mode::Grape;
  if (cfg.spin_system) {
    try {
      cfg.spin_system->validate();
      if (cfg.spin_system->n_spins() != protocol::kRegisterQubits) {
        errors.push_back("spin_system: expected " + std::to_string(protocol::kRegisterQubits) +
                         " spins, got " + std::to_string(cfg.spin_system->n_spins()));
      }
    } catch (const std::exception& e) {
      errors.push_back(std::string("spin_system: ") + e.what());
    }
  } else if (needs_spins) {
    errors.push_back(cfg.mode == Mode::Grape
                         ? "spin_system: required for grape"
                         : "spin_system: required for the pulse pathway");
  }

  if (needs_spins) {
    const PulseSettings& p = cfg.pulse;
    if (p.file) {
      if (cfg.mode != Mode::Single) {
        errors.push_back("pulse.file: a pulse file realizes one spec and is only accepted by single");
      }
      if (p.file->empty()) errors.push_back("pulse.file: must not be empty");
    }
    if (p.segments < 1) errors.push_back("pulse.segments: must be >= 1");
    if (!(std::isfinite(p.duration) && p.duration > 0.0)) {
      errors.push_back("pulse.duration_s: must be > 0");
    }
    if (!(p.fidelity_goal > 0.0 && p.fidelity_goal <= 1.0)) {
      errors.push_back("pulse.fidelity_goal: must lie in (0, 1]");
    }
    if (!(p.min_fidelity > 0.0 && p.min_fidelity <= 1.0)) {
      errors.push_back("pulse.min_fidelity: must lie in (0, 1]");
    }
    if (p.max_iterations < 1) errors.push_back("pulse.max_iterations: must be >= 1");
    if (p.amplitude_bound && !(std::isfinite(*p.amplitude_bound) && *p.amplitude_bound > 0.0)) {
      errors.push_back("pulse.amplitude_bound: must be > 0");
    }
    if (p.ensemble.empty()) errors.push_back("pulse.ensemble: must not be empty");
    double total = 0.0;
    for (std::size_t i = 0; i < p.ensemble.size(); ++i) {
      const auto& m = p.ensemble[i];
      if (!(std::isfinite(m.scale) && m.scale > 0.0)) {
        errors.push_back("pulse.ensemble[" + std::to_string(i) + "].scale: must be > 0");
      }
      if (!(std::isfinite(m.weight) && m.weight >= 0.0)) {
        errors.push_back("pulse.ensemble[" + std::to_string(i) + "].weight: must be >= 0");
      }
      total += m.weight;
    }
    if (!p.ensemble.empty() && std::abs(total - 1.0) > 1e-9) {
      errors.push_back("pulse.ensemble: weights must sum to 1, got " + fmt(total));
    }
  }

  if (cfg.noise) {
    const NoiseSettings& n = cfg.noise.value();
    if (!(std::isfinite(n.duration) && n.duration > 0.0)) {
      errors.push_back("noise.duration_s: must be > 0");
    }
    const std::vector<double>* t2 = &n.t2;
    if (t2->empty() && cfg.spin_system && cfg.spin_system->has_t2()) t2 = &cfg.spin_system->t2;
    if (t2->empty()) {
      errors.push_back("noise.t2_s: required unless spin_system.t2_s is set");
    } else {
      if (t2->size() != static_cast<std::size_t>(protocol::kRegisterQubits)) {
        errors.push_back("noise.t2_s: expected " + std::to_string(protocol::kRegisterQubits) +
                         " values");
      }
      if (!finite_all(*t2)) errors.push_back("noise.t2_s: values must be finite");
      for (double t : *t2) {
        if (!(t > 0.0)) {
          errors.push_back("noise.t2_s: values must be > 0");
          break;
        }
      }
    }
  }

  if (cfg.output_dir.empty()) errors.push_back("output.dir: must not be empty");
  if (cfg.csv_name.empty()) errors.push_back("output.csv: must not be empty");
  if (cfg.svg_name.empty()) errors.push_back("output.svg: must not be empty");
  return errors;
}

}  // namespace weakmeas::cli
