#include <gtest/gtest.h>

#include <clocale>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "support.hpp"
#include "weakmeas/config.hpp"
#include "weakmeas/report.hpp"
#include "weakmeas/sweep.hpp"

using namespace weakmeas;
using namespace weakmeas::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

ExperimentConfig parse_ok(json doc, Mode mode) {
  if (!doc.contains("schema_version")) doc["schema_version"] = kSchemaVersion;
  auto parsed = parse_config(doc, mode);
  EXPECT_TRUE(parsed.ok()) << (parsed.errors.empty() ? "" : parsed.errors.front());
  return parsed.config;
}

const SweepRow& row_at(const std::vector<SweepRow>& rows, double theta, double g) {
  for (const auto& r : rows)
    if (std::abs(r.theta - theta) < 1e-12 && std::abs(r.g - g) < 1e-12) return r;
  throw std::runtime_error("row not found");
}

// Meter response for a real weak value w = tan(theta), written out from the
// post-selected meter state cos g |+> - i w sin g sigma_z |+>.
double sweep_oracle(double theta, double g) {
  const double w = std::tan(theta);
  return std::sin(2 * g) * w / (2 * g * (std::cos(g) * std::cos(g) + std::sin(g) * std::sin(g) * w * w));
}

struct ProcessResult {
  int exit_code = -1;
  std::string output;
};

ProcessResult run_cli(const std::string& args) {
  const std::string cmd = std::string(WEAKMEAS_CLI_PATH) + " " + args + " 2>/dev/null";
  ProcessResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return result;
  char buffer[4096];
  std::size_t n;
  while ((n = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) result.output.append(buffer, n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("weakmeas_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Config, DefaultsPerMode) {
  const auto g = parse_ok(json::object(), Mode::SweepG);
  EXPECT_EQ(g.g.size(), 14u);
  EXPECT_NEAR(g.g.front(), 0.05, 1e-15);
  EXPECT_NEAR(g.g.back(), 0.7, 1e-12);
  ASSERT_EQ(g.theta.size(), 3u);
  EXPECT_NEAR(g.theta[0], kPi / 4, 1e-15);
  EXPECT_EQ(g.csv_name, "sweep-g.csv");
  EXPECT_EQ(g.svg_name, "sweep-g.svg");
  EXPECT_EQ(g.pathway, Pathway::IdealCircuit);

  const auto t = parse_ok(json::object(), Mode::SweepTheta);
  ASSERT_EQ(t.theta.size(), 25u);
  EXPECT_EQ(t.theta.front(), 0.0);
  EXPECT_LT(t.theta.back(), kPi / 2);

  const auto a = parse_ok(json::object(), Mode::SweepAlpha);
  ASSERT_EQ(a.alpha.size(), 13u);
  EXPECT_NEAR(a.alpha.back(), 2 * kPi, 1e-12);
}

TEST(Config, GridForms) {
  std::vector<std::string> errors;
  const auto list = expand_grid(json::array({0.3, 0.1, 0.2}), errors, "g");
  EXPECT_EQ(list, (std::vector<double>{0.3, 0.1, 0.2}));
  const auto step = expand_grid(json{{"start", 0.05}, {"stop", 0.7}, {"step", 0.05}}, errors, "g");
  ASSERT_EQ(step.size(), 14u);
  EXPECT_NEAR(step[13], 0.7, 1e-12);
  const auto open = expand_grid(json{{"start", 0.0}, {"stop", 1.0}, {"count", 4}, {"endpoint", false}}, errors, "g");
  EXPECT_EQ(open, (std::vector<double>{0.0, 0.25, 0.5, 0.75}));
  const auto closed = expand_grid(json{{"start", 0.0}, {"stop", 1.0}, {"count", 3}}, errors, "g");
  EXPECT_EQ(closed, (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_TRUE(errors.empty());

  expand_grid(json{{"start", 0.0}, {"stop", 1.0}}, errors, "g");
  expand_grid(json{{"start", 0.0}, {"stop", 1.0}, {"step", -0.1}}, errors, "g");
  expand_grid(json("x"), errors, "g");
  EXPECT_EQ(errors.size(), 3u);
}

TEST(Config, ReportsEveryProblem) {
  const json doc = {
      {"schema_version", 2},
      {"workers", 0},
      {"grid", {{"g", {-0.1, 0.2}}, {"theta", {0.5, 3.5}}}},
      {"bogus", 1},
  };
  const auto parsed = parse_config(doc, Mode::SweepG);
  EXPECT_FALSE(parsed.ok());
  auto has = [&](const std::string& needle) {
    for (const auto& e : parsed.errors)
      if (e.find(needle) != std::string::npos) return true;
    return false;
  };
  EXPECT_TRUE(has("schema_version"));
  EXPECT_TRUE(has("workers"));
  EXPECT_TRUE(has("bogus"));
  EXPECT_TRUE(has("grid.g"));
  EXPECT_TRUE(has("grid.theta"));
  EXPECT_GE(parsed.errors.size(), 5u);
}

TEST(Config, PulsePathwayNeedsSpinSystem) {
  const auto parsed = parse_config(json{{"schema_version", 1}, {"pathway", "pulse"}}, Mode::SweepG);
  EXPECT_FALSE(parsed.ok());
  const auto mismatch = parse_config(json{{"schema_version", 1}, {"mode", "sweep-theta"}}, Mode::SweepG);
  EXPECT_FALSE(mismatch.ok());
  const auto weights = parse_config(
      json{{"schema_version", 1},
           {"pathway", "pulse"},
           {"pulse", {{"ensemble", json::array({json{{"scale", 1.0}, {"weight", 0.6}}})}}}},
      Mode::SweepG);
  bool weight_error = false;
  for (const auto& e : weights.errors) weight_error = weight_error || e.find("weights must sum to 1") != std::string::npos;
  EXPECT_TRUE(weight_error);
}

TEST(Config, SpinSystemRoundTrip) {
  std::vector<std::string> errors;
  const json doc = {{"nu_hz", {450, -450, 0}},
                    {"j_hz", {{0, 103, 9}, {103, 0, 200}, {9, 200, 0}}},
                    {"strong_pairs", {{0, 1}}},
                    {"t2_s", {0.4, 0.4, 0.6}},
                    {"channels", {{0, 1}, {2}}}};
  const auto sys = parse_spin_system(doc, errors);
  ASSERT_TRUE(errors.empty());
  const auto again = parse_spin_system(json::parse(to_json(sys).dump()), errors);
  EXPECT_TRUE(errors.empty());
  EXPECT_EQ(again.nu, sys.nu);
  EXPECT_EQ(again.j, sys.j);
  EXPECT_EQ(again.t2, sys.t2);
  EXPECT_EQ(again.channels, sys.channels);
}

TEST(Config, SampleConfigsValidate) {
  for (const char* name : {"tce_sample.json", "tce_t2_sample.json"}) {
    const auto parsed = load_config(std::string(WEAKMEAS_SOURCE_DIR) + "/config/" + name, Mode::SweepG);
    EXPECT_TRUE(parsed.ok()) << name;
  }
}

TEST(Csv, FormatNumber) {
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(-0.125), "-0.125");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(1e-20), "1e-20");
}

TEST(Csv, RoundTripIsStable) {
  testing_support::Gen gen(91);
  std::vector<SweepRow> rows;
  for (int i = 0; i < 50; ++i) {
    SweepRow r;
    r.g = gen.uniform(0.0, 1.0);
    r.theta = gen.uniform(0.0, 1.5);
    r.alpha = gen.uniform(0.0, 6.0);
    if (i % 3 != 0) r.estimator_real = gen.normal() * 1e3;
    if (i % 2 == 0) r.estimator_imag = gen.normal() * 1e-4;
    if (i % 5 != 0) {
      r.p0 = gen.uniform(0.0, 1.0);
      r.weak_value_real = gen.normal();
      r.weak_value_imag = gen.normal();
      r.finite_g_prediction = gen.normal();
    }
    r.pathway = i % 7 == 0 ? "ideal:guard_band" : "pulse+t2";
    rows.push_back(r);
  }
  const std::string text = format_csv(rows);
  EXPECT_EQ(text.substr(0, csv_header().size()), csv_header());
  const auto parsed = parse_csv(text);
  ASSERT_EQ(parsed.size(), rows.size());
  EXPECT_EQ(format_csv(parsed), text);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(parsed[i].pathway, rows[i].pathway);
    EXPECT_EQ(parsed[i].estimator_real.has_value(), rows[i].estimator_real.has_value());
    if (rows[i].estimator_real) {
      EXPECT_NEAR(*parsed[i].estimator_real, *rows[i].estimator_real, 1e-9 * std::abs(*rows[i].estimator_real));
    }
  }
}

TEST(Csv, RejectsMalformedAndNonFinite) {
  EXPECT_THROW(parse_csv("nope\n"), std::invalid_argument);
  EXPECT_THROW(parse_csv(csv_header() + "\n1,2\n"), std::invalid_argument);
  EXPECT_THROW(parse_csv(csv_header() + "\n1,2,3,x,,,,,,ideal\n"), std::invalid_argument);
  SweepRow r;
  r.estimator_real = std::nan("");
  r.pathway = "ideal";
  EXPECT_THROW(format_csv({r}), std::invalid_argument);
}

TEST(Csv, LocaleIndependent) {
  SweepRow r;
  r.g = 0.05;
  r.estimator_real = 2.5;
  r.pathway = "ideal";
  const std::string before = format_csv({r});
  const char* set = std::setlocale(LC_NUMERIC, "de_DE.UTF-8");
  if (!set) set = std::setlocale(LC_NUMERIC, "fr_FR.UTF-8");
  const std::string after = format_csv({r});
  std::setlocale(LC_NUMERIC, "C");
  EXPECT_EQ(before, after);
  EXPECT_NE(after.find("0.05"), std::string::npos);
}

TEST(Emit, WritesFilesAndRejectsBadInput) {
  const auto dir = scratch_dir("emit");
  auto cfg = parse_ok(json::object(), Mode::SweepG);
  const auto rows = run(cfg);
  emit_csv(rows, (dir / "a.csv").string());
  emit_svg(rows, (dir / "a.svg").string(), Mode::SweepG);
  EXPECT_EQ(read_csv((dir / "a.csv").string()), parse_csv(format_csv(rows)));
  const std::string svg = slurp(dir / "a.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_THROW(emit_csv({}, (dir / "b.csv").string()), std::invalid_argument);
  EXPECT_THROW(emit_csv(rows, (dir / "missing" / "deeper" / "c.csv").string()), std::runtime_error);
}

TEST(SweepG, GridShapeAndValues) {
  const auto rows = run(parse_ok(json::object(), Mode::SweepG));
  ASSERT_EQ(rows.size(), 42u);
  for (const auto& r : rows) {
    ASSERT_TRUE(r.estimator_real && r.finite_g_prediction && r.p0 && r.weak_value_real);
    EXPECT_NEAR(*r.estimator_real, *r.finite_g_prediction, 1e-9);
    EXPECT_NEAR(*r.estimator_real, sweep_oracle(r.theta, r.g), 1e-9);
    EXPECT_EQ(r.pathway, "ideal");
    EXPECT_FALSE(r.flagged());
  }
  EXPECT_NEAR(*row_at(rows, 1.2, 0.05).estimator_real, 2.5324, 1e-4);
  EXPECT_NEAR(*row_at(rows, 1.2, 0.05).weak_value_real, 2.5722, 5e-5);
  EXPECT_NEAR(*row_at(rows, 1.4, 0.05).weak_value_real, 5.798, 5e-4);
  for (const auto& r : rows) {
    if (std::abs(r.theta - kPi / 4) < 1e-12) {
      EXPECT_NEAR(*r.estimator_real, std::sin(2 * r.g) / (2 * r.g), 1e-9);
    }
  }
}

TEST(SweepTheta, ValuesAndGuardBand) {
  const auto rows = run(parse_ok(json{{"grid", {{"theta", {0.0, kPi / 4, 1.2, 1.56}}}}}, Mode::SweepTheta));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_NEAR(*rows[0].estimator_real, 0.0, 1e-12);
  EXPECT_NEAR(*rows[1].estimator_real, 0.99335, 5e-6);
  EXPECT_NEAR(*rows[2].estimator_real, 2.4196, 5e-5);
  EXPECT_TRUE(rows[3].flagged());
  EXPECT_EQ(rows[3].pathway, "ideal:guard_band");
  EXPECT_FALSE(rows[3].estimator_real.has_value());
  EXPECT_NE(format_csv(rows).find("ideal:guard_band"), std::string::npos);
}

TEST(SweepAlpha, RealAndImaginaryParts) {
  const auto rows = run(parse_ok(json{{"grid", {{"alpha", {0.0, kPi / 2}}}}}, Mode::SweepAlpha));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(*rows[0].estimator_real, 0.99335, 5e-6);
  EXPECT_NEAR(*rows[0].estimator_imag, 0.0, 1e-12);
  EXPECT_NEAR(*rows[1].estimator_real, 0.0, 1e-12);
  EXPECT_NEAR(*rows[1].estimator_imag, -0.99335, 5e-6);
  EXPECT_NEAR(*rows[1].weak_value_imag, -1.0, 1e-12);
}

TEST(SweepG, NoiseShrinksEstimators) {
  const auto clean = run(parse_ok(json::object(), Mode::SweepG));
  const auto noisy = run(parse_ok(json{{"noise", {{"t2_s", {0.4, 0.4, 0.6}}}}}, Mode::SweepG));
  ASSERT_EQ(clean.size(), noisy.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    EXPECT_EQ(noisy[i].pathway, "ideal+t2");
    EXPECT_LT(std::abs(*noisy[i].estimator_real), std::abs(*clean[i].estimator_real));
  }
}

TEST(SweepG, WorkerCountDoesNotChangeOutput) {
  auto one = parse_ok(json::object(), Mode::SweepG);
  auto four = parse_ok(json{{"workers", 4}}, Mode::SweepG);
  EXPECT_EQ(format_csv(run(one)), format_csv(run(four)));
}

TEST(SweepG, PulsePathwaySmall) {
  const json doc = {
      {"pathway", "pulse"},
      {"workers", 2},
      {"grid", {{"g", {0.2, 0.4}}, {"theta", {kPi / 4}}}},
      {"spin_system",
       {{"nu_hz", {450.0, -450.0, 0.0}},
        {"j_hz", {{0, 103, 9}, {103, 0, 200}, {9, 200, 0}}},
        {"strong_pairs", {{0, 1}}},
        {"channels", {{0, 1}, {2}}}}},
      {"pulse", {{"segments", 100}, {"duration_s", 0.02}, {"fidelity_goal", 0.999999}, {"max_iterations", 3000}}},
  };
  const auto cfg = parse_ok(doc, Mode::SweepG);
  const auto rows = run(cfg);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.pathway, "pulse");
    EXPECT_NEAR(*r.estimator_real, *r.finite_g_prediction, 0.02);
  }
  EXPECT_EQ(format_csv(rows), format_csv(run(cfg)));
}

TEST(Cli, SuccessWritesOutputsAndReportsJson) {
  const auto dir = scratch_dir("cli_ok");
  const auto res = run_cli("sweep-g --out " + dir.string());
  ASSERT_EQ(res.exit_code, 0) << res.output;
  const auto report = json::parse(res.output);
  EXPECT_EQ(report["status"], "ok");
  EXPECT_EQ(report["rows"], 42);
  EXPECT_EQ(report["flagged_rows"], 0);
  EXPECT_TRUE(fs::exists(dir / "sweep-g.csv"));
  EXPECT_TRUE(fs::exists(dir / "sweep-g.svg"));
  EXPECT_EQ(read_csv((dir / "sweep-g.csv").string()).size(), 42u);
}

TEST(Cli, ByteIdenticalReruns) {
  const auto a = scratch_dir("cli_a");
  const auto b = scratch_dir("cli_b");
  ASSERT_EQ(run_cli("sweep-theta --out " + a.string()).exit_code, 0);
  ASSERT_EQ(run_cli("sweep-theta --out " + b.string() + " --workers 3").exit_code, 0);
  EXPECT_EQ(slurp(a / "sweep-theta.csv"), slurp(b / "sweep-theta.csv"));
  EXPECT_EQ(slurp(a / "sweep-theta.svg"), slurp(b / "sweep-theta.svg"));
}

TEST(Cli, InvalidConfigExitsWithErrors) {
  const auto dir = scratch_dir("cli_bad");
  {
    std::ofstream out(dir / "bad.json");
    out << R"({"schema_version": 1, "workers": 0, "grid": {"g": [-1]}})";
  }
  const auto res = run_cli("sweep-g --config " + (dir / "bad.json").string() + " --out " + dir.string());
  EXPECT_EQ(res.exit_code, 2);
  const auto report = json::parse(res.output);
  EXPECT_EQ(report["status"], "invalid_config");
  EXPECT_GE(report["errors"].size(), 2u);
  EXPECT_FALSE(fs::exists(dir / "sweep-g.csv"));

  {
    std::ofstream out(dir / "broken.json");
    out << "{ not json";
  }
  EXPECT_EQ(run_cli("sweep-g --config " + (dir / "broken.json").string()).exit_code, 2);
  EXPECT_NE(run_cli("sweep-g --workers 0").exit_code, 0);
  EXPECT_NE(run_cli("no-such-mode").exit_code, 0);
}
