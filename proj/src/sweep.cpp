#include "weakmeas/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>

#include <spdlog/spdlog.h>

#include "weakmeas/nmr.hpp"

namespace weakmeas::cli {

using protocol::Readout;
using protocol::WeakMeasurementSpec;
using protocol::WeakValueResult;

namespace {

void require_valid(const ExperimentConfig& cfg, Mode mode) {
  std::vector<std::string> errors;
  if (cfg.mode != mode) {
    errors.push_back(std::string("mode: expected ") + to_string(mode) + ", got " +
                     to_string(cfg.mode));
  }
  auto more = validate(cfg);
  errors.insert(errors.end(), more.begin(), more.end());
  if (errors.empty()) return;
  std::string msg = "invalid experiment config:";
  for (const auto& e : errors) msg += "\n  " + e;
  throw std::invalid_argument(msg);
}

WeakMeasurementSpec make_spec(double theta, double g, double alpha, Readout readout) {
  WeakMeasurementSpec spec;
  spec.theta = theta;
  spec.g = g;
  spec.alpha = alpha;
  spec.readout = readout;
  return spec;
}

bool in_guard_band(const ExperimentConfig& cfg, double theta) {
  return std::abs(theta - std::numbers::pi / 2.0) < cfg.theta_guard_band;
}

SweepRow make_row(const ExperimentConfig& cfg, const WeakMeasurementSpec& spec) {
  SweepRow row;
  row.g = spec.g;
  row.theta = spec.theta;
  row.alpha = spec.alpha;
  row.pathway = pathway_tag(cfg);
  if (in_guard_band(cfg, spec.theta)) {
    row.pathway += ":guard_band";
    return row;
  }
  const Complex w = protocol::weak_value(spec);
  row.weak_value_real = w.real();
  row.weak_value_imag = w.imag();
  row.finite_g_prediction = protocol::finite_g_prediction(spec);
  return row;
}

void record(SweepRow& row, Readout readout, const WeakValueResult& r) {
  if (readout == Readout::RealPart) {
    row.estimator_real = r.estimator;
  } else {
    row.estimator_imag = r.estimator;
  }
  if (!row.p0) row.p0 = r.p0;
}

struct Task {
  std::size_t row;
  WeakMeasurementSpec spec;
};

// Runs every chain and records the results into `rows`. Ideal-pathway chains
// are split into single points since nothing carries over between them.
void execute(const ExperimentConfig& cfg, std::vector<std::vector<Task>> chains,
             std::vector<SweepRow>& rows) {
  if (cfg.pathway == Pathway::IdealCircuit) {
    std::vector<std::vector<Task>> singles;
    for (auto& chain : chains) {
      for (auto& t : chain) singles.push_back({t});
    }
    chains = std::move(singles);
  }
  const auto n_chains = static_cast<long>(chains.size());
  std::vector<std::vector<WeakValueResult>> results(chains.size());
  std::vector<std::exception_ptr> failures(chains.size());

#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.workers)
  for (long c = 0; c < n_chains; ++c) {
    const auto& chain = chains[static_cast<std::size_t>(c)];
    auto& out = results[static_cast<std::size_t>(c)];
    try {
      std::optional<grape::ControlPulse> previous;
      for (const auto& task : chain) {
        if (cfg.pathway == Pathway::IdealCircuit) {
          out.push_back(evaluate_ideal(cfg, task.spec));
          continue;
        }
        ExperimentConfig chain_cfg = cfg;
        chain_cfg.seed = cfg.seed + static_cast<std::uint64_t>(c);
        auto synth = synthesize_pulse(chain_cfg, task.spec, previous ? &*previous : nullptr);
        out.push_back(evaluate_pulse(cfg, task.spec, synth.pulse));
        previous = std::move(synth.pulse);
      }
    } catch (...) {
      failures[static_cast<std::size_t>(c)] = std::current_exception();
    }
  }

  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (std::size_t i = 0; i < chains[c].size(); ++i) {
      const Task& t = chains[c][i];
      record(rows[t.row], t.spec.readout, results[c][i]);
    }
  }
}

std::vector<double> sorted(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return xs;
}

grape::ControlPulse load_pulse_file(const std::string& csv_path) {
  std::string sidecar = csv_path;
  const auto dot = sidecar.find_last_of('.');
  const auto slash = sidecar.find_last_of('/');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
    sidecar.resize(dot);
  }
  sidecar += ".json";
  return grape::read_pulse(csv_path, sidecar);
}

}  // namespace

std::string pathway_tag(const ExperimentConfig& cfg) {
  std::string tag = to_string(cfg.pathway);
  if (cfg.noise) tag += "+t2";
  return tag;
}

std::optional<nmr::SpinSystem> noise_system(const ExperimentConfig& cfg) {
  if (!cfg.noise) return std::nullopt;
  nmr::SpinSystem sys;
  if (cfg.spin_system) {
    sys = *cfg.spin_system;
  } else {
    const auto n = static_cast<std::size_t>(protocol::kRegisterQubits);
    sys.nu.assign(n, 0.0);
    sys.j.assign(n, std::vector<double>(n, 0.0));
  }
  if (!cfg.noise->t2.empty()) sys.t2 = cfg.noise->t2;
  return sys;
}

protocol::CircuitNoise circuit_noise(const ExperimentConfig& cfg) {
  protocol::CircuitNoise noise;
  const auto sys = noise_system(cfg);
  if (!sys) return noise;
  const auto half = nmr::dephasing_channel(*sys, cfg.noise->duration / 2.0);
  noise.before_coupling = half;
  noise.after_coupling = half;
  return noise;
}

grape::GrapeProblem pulse_problem(const ExperimentConfig& cfg, const WeakMeasurementSpec& spec) {
  if (!cfg.spin_system) throw std::invalid_argument("pulse problem needs a spin system");
  grape::GrapeProblem problem;
  problem.hamiltonian = nmr::pulsed_hamiltonian(*cfg.spin_system);
  problem.target = protocol::network_unitary(spec);
  problem.segments = cfg.pulse.segments;
  problem.dt = cfg.pulse.duration / cfg.pulse.segments;
  problem.ensemble = cfg.pulse.ensemble;
  problem.options.max_iterations = cfg.pulse.max_iterations;
  problem.options.fidelity_goal = cfg.pulse.fidelity_goal;
  problem.options.amplitude_bound = cfg.pulse.amplitude_bound;
  return problem;
}

grape::OptimizeResult synthesize_pulse(const ExperimentConfig& cfg,
                                       const WeakMeasurementSpec& spec,
                                       const grape::ControlPulse* warm_start) {
  const grape::GrapeProblem problem = pulse_problem(cfg, spec);
  auto result = warm_start ? grape::optimize(problem, *warm_start)
                           : grape::optimize(problem, cfg.seed);
  spdlog::info("grape theta={} g={} alpha={}: fidelity {:.12f} after {} iterations ({})",
               spec.theta, spec.g, spec.alpha, result.fidelity(), result.iterations,
               grape::to_string(result.status));
  if (result.fidelity() < cfg.pulse.min_fidelity) {
    throw PulseSynthesisFailure("pulse for theta=" + std::to_string(spec.theta) +
                                " g=" + std::to_string(spec.g) + " reached fidelity " +
                                std::to_string(result.fidelity()) + " < min_fidelity " +
                                std::to_string(cfg.pulse.min_fidelity));
  }
  return result;
}

WeakValueResult evaluate_pulse(const ExperimentConfig& cfg, const WeakMeasurementSpec& spec,
                               const grape::ControlPulse& pulse) {
  if (!cfg.spin_system) throw std::invalid_argument("pulse pathway needs a spin system");
  const auto ham = nmr::pulsed_hamiltonian(*cfg.spin_system);
  const auto dephasing = noise_system(cfg);
  const ComplexMatrix rho = grape::evolve(ham, pulse, protocol::reference_state().matrix(),
                                          dephasing ? &*dephasing : nullptr);
  return protocol::read_out(spec, qcore::DensityState(rho));
}

WeakValueResult evaluate_ideal(const ExperimentConfig& cfg, const WeakMeasurementSpec& spec) {
  return protocol::run_protocol(spec, circuit_noise(cfg));
}

std::vector<SweepRow> run_sweep_g(const ExperimentConfig& cfg) {
  require_valid(cfg, Mode::SweepG);
  std::vector<SweepRow> rows;
  std::vector<std::vector<Task>> chains;
  for (double theta : sorted(cfg.theta)) {
    std::vector<Task> chain;
    for (double g : sorted(cfg.g)) {
      const auto spec = make_spec(theta, g, 0.0, Readout::RealPart);
      rows.push_back(make_row(cfg, spec));
      if (!rows.back().flagged()) chain.push_back({rows.size() - 1, spec});
    }
    // Strong coupling first: the small-g end is the most sensitive to pulse
    // error, so it gets the warm starts.
    std::reverse(chain.begin(), chain.end());
    chains.push_back(std::move(chain));
  }
  execute(cfg, std::move(chains), rows);
  return rows;
}

std::vector<SweepRow> run_sweep_theta(const ExperimentConfig& cfg) {
  require_valid(cfg, Mode::SweepTheta);
  std::vector<SweepRow> rows;
  std::vector<Task> chain;
  for (double theta : sorted(cfg.theta)) {
    const auto spec = make_spec(theta, cfg.fixed_g, 0.0, Readout::RealPart);
    rows.push_back(make_row(cfg, spec));
    if (rows.back().flagged()) {
      spdlog::warn("theta={} lies inside the guard band around pi/2; row not computed", theta);
    } else {
      chain.push_back({rows.size() - 1, spec});
    }
  }
  execute(cfg, {std::move(chain)}, rows);
  return rows;
}

std::vector<SweepRow> run_sweep_alpha(const ExperimentConfig& cfg) {
  require_valid(cfg, Mode::SweepAlpha);
  std::vector<SweepRow> rows;
  std::vector<Task> real_chain;
  std::vector<Task> imag_chain;
  for (double alpha : sorted(cfg.alpha)) {
    const auto spec = make_spec(cfg.fixed_theta, cfg.fixed_g, alpha, Readout::RealPart);
    rows.push_back(make_row(cfg, spec));
    if (rows.back().flagged()) continue;
    real_chain.push_back({rows.size() - 1, spec});
    auto imag = spec;
    imag.readout = Readout::ImagPart;
    imag_chain.push_back({rows.size() - 1, imag});
  }
  execute(cfg, {std::move(real_chain), std::move(imag_chain)}, rows);
  return rows;
}

std::vector<SweepRow> run_single(const ExperimentConfig& cfg) {
  require_valid(cfg, Mode::Single);
  const auto spec = make_spec(cfg.fixed_theta, cfg.fixed_g, cfg.fixed_alpha, cfg.fixed_readout);
  std::vector<SweepRow> rows{make_row(cfg, spec)};
  SweepRow& row = rows.front();
  if (row.flagged()) return rows;
  if (spec.readout == Readout::ImagPart) row.finite_g_prediction = protocol::finite_g_prediction(spec);

  if (cfg.pathway == Pathway::NmrPulse && cfg.pulse.file) {
    const grape::ControlPulse pulse = load_pulse_file(*cfg.pulse.file);
    const grape::GrapeProblem problem = pulse_problem(cfg, spec);
    problem.validate(pulse);
    const double f = grape::fidelity(problem, pulse);
    if (f < cfg.pulse.min_fidelity) {
      throw PulseSynthesisFailure("pulse file '" + *cfg.pulse.file + "' realizes the target with fidelity " +
                                  std::to_string(f) + " < min_fidelity " +
                                  std::to_string(cfg.pulse.min_fidelity));
    }
    record(row, spec.readout, evaluate_pulse(cfg, spec, pulse));
    return rows;
  }
  execute(cfg, {{Task{0, spec}}}, rows);
  return rows;
}

GrapeRun run_grape(const ExperimentConfig& cfg) {
  require_valid(cfg, Mode::Grape);
  GrapeRun run;
  run.spec = make_spec(cfg.fixed_theta, cfg.fixed_g, cfg.fixed_alpha, cfg.fixed_readout);
  const grape::GrapeProblem problem = pulse_problem(cfg, run.spec);
  run.result = grape::optimize(problem, cfg.seed);
  spdlog::info("grape: fidelity {:.12f} after {} iterations ({})", run.result.fidelity(),
               run.result.iterations, grape::to_string(run.result.status));
  return run;
}

std::vector<SweepRow> run(const ExperimentConfig& cfg) {
  switch (cfg.mode) {
    case Mode::SweepG:
      return run_sweep_g(cfg);
    case Mode::SweepTheta:
      return run_sweep_theta(cfg);
    case Mode::SweepAlpha:
      return run_sweep_alpha(cfg);
    case Mode::Single:
      return run_single(cfg);
    case Mode::Grape:
      break;
  }
  throw std::invalid_argument("run: grape mode produces a pulse, not sweep rows");
}

}  // namespace weakmeas::cli
