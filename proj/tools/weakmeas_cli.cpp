// weakmeas: batch runner for weak-measurement sweeps and pulse synthesis.
//
//   weakmeas <sweep-g|sweep-theta|sweep-alpha|grape|single>
//            [--config FILE] [--out DIR] [--workers N] [--pathway ideal|pulse] [--seed U64]
//
// Prints one JSON object on stdout: a summary on success (exit 0), the full
// list of configuration errors (exit 2), or a runtime error (exit 1).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "weakmeas/config.hpp"
#include "weakmeas/grape.hpp"
#include "weakmeas/report.hpp"
#include "weakmeas/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace weakmeas;

namespace {

constexpr int kExitRuntimeError = 1;
constexpr int kExitInvalidConfig = 2;

struct Overrides {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<int> workers;
  std::optional<std::string> pathway;
  std::optional<std::uint64_t> seed;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("weakmeas");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("WEAKMEAS_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honour names it round-trips.
    if (level != spdlog::level::off || std::string(env) == "off") {
      spdlog::set_level(level);
    } else {
      spdlog::warn("WEAKMEAS_LOG='{}' is not a log level; keeping 'warn'", env);
    }
  }
}

int fail(int code, const json& body) {
  std::cout << body.dump(2) << std::endl;
  return code;
}

int invalid(const std::vector<std::string>& errors) {
  return fail(kExitInvalidConfig, json{{"status", "invalid_config"}, {"errors", errors}});
}

std::string pulse_metadata(const cli::GrapeRun& run, const cli::ExperimentConfig& cfg) {
  json meta;
  meta["theta"] = run.spec.theta;
  meta["g"] = run.spec.g;
  meta["alpha"] = run.spec.alpha;
  meta["readout"] = run.spec.readout == protocol::Readout::RealPart ? "real" : "imag";
  meta["target"] = "network_unitary";
  meta["fidelity"] = run.result.fidelity();
  meta["status"] = grape::to_string(run.result.status);
  meta["iterations"] = run.result.iterations;
  meta["seed"] = cfg.seed;
  meta["spin_system"] = cli::to_json(*cfg.spin_system);
  return meta.dump();
}

int execute(cli::Mode mode, const Overrides& o) {
  json doc = json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) return invalid({"config: cannot open '" + o.config_path + "'"});
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      return invalid({std::string("config: invalid JSON: ") + e.what()});
    }
    if (!doc.is_object()) return invalid({"config: expected a JSON object"});
  } else {
    doc["schema_version"] = cli::kSchemaVersion;
  }
  if (o.out) doc["output"]["dir"] = *o.out;
  if (o.workers) doc["workers"] = *o.workers;
  if (o.pathway) doc["pathway"] = *o.pathway;
  if (o.seed) doc["seed"] = *o.seed;

  const cli::ConfigParse parsed = cli::parse_config(doc, mode);
  if (!parsed.ok()) return invalid(parsed.errors);
  const cli::ExperimentConfig& cfg = parsed.config;

  try {
    fs::create_directories(cfg.output_dir);
    const fs::path dir(cfg.output_dir);
    json summary{{"status", "ok"}, {"mode", cli::to_string(mode)}};

    if (mode == cli::Mode::Grape) {
      const cli::GrapeRun run = cli::run_grape(cfg);
      const fs::path csv = dir / "pulse.csv";
      const fs::path sidecar = dir / "pulse.json";
      grape::write_pulse(run.result.pulse, csv.string(), sidecar.string(), pulse_metadata(run, cfg));
      std::string trace = "iteration,fidelity\n";
      for (std::size_t i = 0; i < run.result.trace.size(); ++i) {
        trace += std::to_string(i) + "," + cli::format_number(run.result.trace[i]) + "\n";
      }
      std::ofstream(dir / "grape_trace.csv", std::ios::binary) << trace;
      if (!run.result.converged()) summary["status"] = "not_converged";
      summary["pulse_csv"] = csv.string();
      summary["pulse_sidecar"] = sidecar.string();
      summary["fidelity"] = run.result.fidelity();
      summary["optimizer_status"] = grape::to_string(run.result.status);
      summary["iterations"] = run.result.iterations;
      std::cout << summary.dump(2) << std::endl;
      return run.result.converged() ? 0 : kExitRuntimeError;
    }

    const auto rows = cli::run(cfg);
    const fs::path csv = dir / cfg.csv_name;
    const fs::path svg = dir / cfg.svg_name;
    cli::emit_csv(rows, csv.string());
    cli::emit_svg(rows, svg.string(), mode);
    std::size_t flagged = 0;
    for (const auto& r : rows) flagged += r.flagged() ? 1 : 0;
    summary["csv"] = csv.string();
    summary["svg"] = svg.string();
    summary["rows"] = rows.size();
    summary["flagged_rows"] = flagged;
    summary["pathway"] = cli::pathway_tag(cfg);
    std::cout << summary.dump(2) << std::endl;
    return 0;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return fail(kExitRuntimeError, json{{"status", "error"}, {"message", e.what()}});
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Weak-measurement sweeps through an ideal circuit or simulated NMR pulses"};
  app.require_subcommand(1);

  Overrides o;
  std::string out;
  int workers = 0;
  std::string pathway;
  std::uint64_t seed = 0;

  struct Sub {
    const char* name;
    cli::Mode mode;
    const char* help;
  };
  const Sub subs[] = {
      {"sweep-g", cli::Mode::SweepG, "estimator over a (theta, g) grid"},
      {"sweep-theta", cli::Mode::SweepTheta, "estimator over pre-selection angles at fixed g"},
      {"sweep-alpha", cli::Mode::SweepAlpha, "real and imaginary parts over observable angles"},
      {"grape", cli::Mode::Grape, "synthesize the network pulse for the fixed spec"},
      {"single", cli::Mode::Single, "one protocol run at the fixed spec"},
  };
  std::vector<std::pair<CLI::App*, cli::Mode>> commands;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", o.config_path, "experiment config JSON")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory");
    sub->add_option("--workers", workers, "parallel workers")->check(CLI::PositiveNumber);
    sub->add_option("--pathway", pathway, "ideal or pulse")
        ->check(CLI::IsMember({"ideal", "pulse"}));
    sub->add_option("--seed", seed, "random seed for pulse initialization");
    commands.emplace_back(sub, s.mode);
  }

  CLI11_PARSE(app, argc, argv);

  for (const auto& [sub, mode] : commands) {
    if (!sub->parsed()) continue;
    if (sub->count("--out")) o.out = out;
    if (sub->count("--workers")) o.workers = workers;
    if (sub->count("--pathway")) o.pathway = pathway;
    if (sub->count("--seed")) o.seed = seed;
    return execute(mode, o);
  }
  return kExitRuntimeError;
}
