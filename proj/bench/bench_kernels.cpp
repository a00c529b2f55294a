// Parallel GRAPE kernels against the serial reference, and sweep scaling
// with the worker count.

#include <benchmark/benchmark.h>

#include <random>

#include <json.hpp>

#include "weakmeas/config.hpp"
#include "weakmeas/gates.hpp"
#include "weakmeas/grape.hpp"
#include "weakmeas/sweep.hpp"

using namespace weakmeas;

namespace {

grape::GrapeProblem tce_problem(int segments) {
  nmr::SpinSystem sys;
  sys.nu = {450.0, -450.0, 0.0};
  sys.j = {{0, 103, 9}, {103, 0, 200}, {9, 200, 0}};
  sys.strong_pairs = {{0, 1}};
  sys.channels = {{0, 1}, {2}};
  grape::GrapeProblem p;
  p.hamiltonian = nmr::pulsed_hamiltonian(sys);
  p.target = gates::weak_coupling_unitary(0.1, gates::PauliAxis::x(), 2, 1, 3);
  p.segments = segments;
  p.dt = 0.02 / segments;
  return p;
}

grape::ControlPulse random_pulse(const grape::GrapeProblem& p) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> amp(-2000.0, 2000.0);
  grape::ControlPulse pulse(p.segments, p.channels(), p.dt);
  for (double& u : pulse.amplitudes()) u = amp(rng);
  return pulse;
}

void BM_Propagate(benchmark::State& state) {
  const auto p = tce_problem(static_cast<int>(state.range(0)));
  const auto pulse = random_pulse(p);
  for (auto _ : state) benchmark::DoNotOptimize(grape::propagate(p, pulse));
}

void BM_PropagateReference(benchmark::State& state) {
  const auto p = tce_problem(static_cast<int>(state.range(0)));
  const auto pulse = random_pulse(p);
  for (auto _ : state) benchmark::DoNotOptimize(grape::reference::propagate(p, pulse));
}

void BM_Gradient(benchmark::State& state) {
  const auto p = tce_problem(static_cast<int>(state.range(0)));
  const auto pulse = random_pulse(p);
  for (auto _ : state) benchmark::DoNotOptimize(grape::gradient(p, pulse));
}

void BM_GradientReference(benchmark::State& state) {
  const auto p = tce_problem(static_cast<int>(state.range(0)));
  const auto pulse = random_pulse(p);
  for (auto _ : state) benchmark::DoNotOptimize(grape::reference::gradient(p, pulse));
}

void BM_SweepG(benchmark::State& state) {
  nlohmann::json doc = {{"schema_version", 1}, {"workers", state.range(0)}, {"noise", {{"t2_s", {0.4, 0.4, 0.6}}}}};
  const auto cfg = cli::parse_config(doc, cli::Mode::SweepG).config;
  for (auto _ : state) benchmark::DoNotOptimize(cli::run(cfg));
}

}  // namespace

BENCHMARK(BM_Propagate)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_PropagateReference)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Gradient)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GradientReference)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepG)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
