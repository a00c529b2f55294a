#include "weakmeas/grape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace weakmeas::grape {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;

struct Segment {
  Eigen::VectorXd values;
  ComplexMatrix vectors;
  ComplexMatrix propagator;
};

ComplexMatrix segment_generator(const nmr::PulsedHamiltonian& ham, const ControlPulse& pulse,
                                int j, double scale) {
  ComplexMatrix h = ham.h0;
  for (int k = 0; k < pulse.channels(); ++k) {
    const double u = pulse.at(j, k);
    if (u != 0.0) h += (scale * u) * ham.controls[static_cast<std::size_t>(k)];
  }
  return h;
}

// Eigendecomposition and propagator of every segment. Parallel over
// segments; each iteration writes only its own slot.
std::vector<Segment> decompose(const nmr::PulsedHamiltonian& ham, const ControlPulse& pulse,
                               double scale) {
  const int n = pulse.segments();
  const double dt = pulse.dt();
  std::vector<Segment> segments(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (int j = 0; j < n; ++j) {
    const ComplexMatrix h = segment_generator(ham, pulse, j, scale);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
    Segment& seg = segments[static_cast<std::size_t>(j)];
    seg.values = solver.eigenvalues();
    seg.vectors = solver.eigenvectors();
    ComplexVector phases(seg.values.size());
    for (Eigen::Index a = 0; a < seg.values.size(); ++a) {
      phases(a) = std::polar(1.0, -dt * seg.values(a));
    }
    seg.propagator = seg.vectors * phases.asDiagonal() * seg.vectors.adjoint();
  }
  return segments;
}

ComplexMatrix product(const std::vector<Segment>& segments, Eigen::Index dim) {
  ComplexMatrix u = ComplexMatrix::Identity(dim, dim);
  for (const auto& seg : segments) u = (seg.propagator * u).eval();
  return u;
}

double reference_amplitude(const GrapeProblem& problem) {
  if (problem.options.amplitude_bound) return *problem.options.amplitude_bound;
  return 2.0 * std::numbers::pi / (problem.dt * problem.segments);
}

void project(const GrapeProblem& problem, ControlPulse& pulse) {
  if (!problem.options.amplitude_bound) return;
  const double bound = *problem.options.amplitude_bound;
  for (double& u : pulse.amplitudes()) u = std::clamp(u, -bound, bound);
}

}  // namespace

ControlPulse::ControlPulse(int segments, int channels, double dt)
    : ControlPulse(segments, channels, dt,
                   std::vector<double>(static_cast<std::size_t>(std::max(segments, 0) *
                                                                std::max(channels, 0)),
                                       0.0)) {}

ControlPulse::ControlPulse(int segments, int channels, double dt, std::vector<double> amplitudes)
    : segments_(segments), channels_(channels), dt_(dt), amplitudes_(std::move(amplitudes)) {
  if (segments_ < 1) throw std::invalid_argument("ControlPulse: need at least one segment");
  if (channels_ < 0) throw std::invalid_argument("ControlPulse: negative channel count");
  if (!std::isfinite(dt_) || dt_ <= 0.0) throw std::invalid_argument("ControlPulse: dt must be > 0");
  if (amplitudes_.size() != static_cast<std::size_t>(segments_ * channels_)) {
    throw std::invalid_argument("ControlPulse: amplitude count does not match N x K");
  }
  for (double u : amplitudes_) {
    if (!std::isfinite(u)) throw std::invalid_argument("ControlPulse: non-finite amplitude");
  }
}

void GrapeProblem::validate() const {
  hamiltonian.validate();
  const auto dim = hamiltonian.h0.rows();
  if (target.rows() != dim || target.cols() != dim) {
    throw std::invalid_argument("GrapeProblem: target dimension mismatch");
  }
  if (qcore::unitarity_defect(target) > 1e-10) {
    throw std::invalid_argument("GrapeProblem: target is not unitary");
  }
  if (segments < 1) throw std::invalid_argument("GrapeProblem: need at least one segment");
  if (!std::isfinite(dt) || dt <= 0.0) throw std::invalid_argument("GrapeProblem: dt must be > 0");
  if (ensemble.empty()) throw std::invalid_argument("GrapeProblem: empty ensemble");
  double total = 0.0;
  for (const auto& m : ensemble) {
    if (!(m.scale > 0.0) || !std::isfinite(m.scale)) {
      throw std::invalid_argument("GrapeProblem: ensemble scale factors must be > 0");
    }
    if (!(m.weight >= 0.0) || !std::isfinite(m.weight)) {
      throw std::invalid_argument("GrapeProblem: ensemble weights must be >= 0");
    }
    total += m.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("GrapeProblem: ensemble weights must sum to 1");
  }
  if (options.amplitude_bound && !(*options.amplitude_bound > 0.0)) {
    throw std::invalid_argument("GrapeProblem: amplitude bound must be > 0");
  }
  if (options.max_iterations < 0) throw std::invalid_argument("GrapeProblem: negative max_iterations");
}

void GrapeProblem::validate(const ControlPulse& pulse) const {
  validate();
  if (pulse.segments() != segments || pulse.channels() != channels() ||
      std::abs(pulse.dt() - dt) > 1e-15 * std::max(1.0, dt)) {
    throw std::invalid_argument("GrapeProblem: pulse shape does not match the problem");
  }
  if (options.amplitude_bound) {
    for (double u : pulse.amplitudes()) {
      if (std::abs(u) > *options.amplitude_bound * (1.0 + 1e-12)) {
        throw std::invalid_argument("GrapeProblem: pulse exceeds the amplitude bound");
      }
    }
  }
}

const char* to_string(OptimizeStatus status) {
  switch (status) {
    case OptimizeStatus::GoalReached: return "goal_reached";
    case OptimizeStatus::GradientTolerance: return "gradient_tolerance";
    case OptimizeStatus::MaxIterations: return "max_iterations";
    case OptimizeStatus::LineSearchFailed: return "line_search_failed";
  }
  return "unknown";
}

std::vector<ComplexMatrix> segment_propagators(const GrapeProblem& problem,
                                               const ControlPulse& pulse, double scale) {
  problem.validate(pulse);
  std::vector<ComplexMatrix> out;
  for (auto& seg : decompose(problem.hamiltonian, pulse, scale)) out.push_back(std::move(seg.propagator));
  return out;
}

ComplexMatrix propagate(const GrapeProblem& problem, const ControlPulse& pulse, double scale) {
  problem.validate(pulse);
  return product(decompose(problem.hamiltonian, pulse, scale), problem.hamiltonian.h0.rows());
}

double gate_fidelity(const ComplexMatrix& target, const ComplexMatrix& u) {
  const double d = static_cast<double>(u.rows());
  return std::norm((target.adjoint() * u).trace()) / (d * d);
}

double fidelity(const GrapeProblem& problem, const ControlPulse& pulse) {
  problem.validate(pulse);
  double total = 0.0;
  for (const auto& member : problem.ensemble) {
    const ComplexMatrix u =
        product(decompose(problem.hamiltonian, pulse, member.scale), problem.hamiltonian.h0.rows());
    total += member.weight * gate_fidelity(problem.target, u);
  }
  return total;
}

std::vector<double> gradient(const GrapeProblem& problem, const ControlPulse& pulse) {
  problem.validate(pulse);
  const int n = pulse.segments();
  const int channels = pulse.channels();
  const double dt = pulse.dt();
  const Eigen::Index dim = problem.hamiltonian.h0.rows();
  const double d2 = static_cast<double>(dim * dim);

  std::vector<double> total(static_cast<std::size_t>(n * channels), 0.0);
  std::vector<double> member_grad(total.size());

  for (const auto& member : problem.ensemble) {
    if (member.weight == 0.0) continue;
    const std::vector<Segment> segs = decompose(problem.hamiltonian, pulse, member.scale);

    // forward[j] = U_{j-1} ... U_0; backward[j] = target^dagger U_{N-1} ... U_{j+1}
    std::vector<ComplexMatrix> forward(static_cast<std::size_t>(n));
    std::vector<ComplexMatrix> backward(static_cast<std::size_t>(n));
    forward[0] = ComplexMatrix::Identity(dim, dim);
    for (int j = 1; j < n; ++j) {
      forward[static_cast<std::size_t>(j)] =
          segs[static_cast<std::size_t>(j - 1)].propagator * forward[static_cast<std::size_t>(j - 1)];
    }
    backward[static_cast<std::size_t>(n - 1)] = problem.target.adjoint();
    for (int j = n - 2; j >= 0; --j) {
      backward[static_cast<std::size_t>(j)] =
          backward[static_cast<std::size_t>(j + 1)] * segs[static_cast<std::size_t>(j + 1)].propagator;
    }
    const Complex overlap = (backward[0] * segs[0].propagator).trace();

#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j) {
      const Segment& seg = segs[static_cast<std::size_t>(j)];
      // d overlap = Tr(B dU_j) with B = forward_j backward_j.
      const ComplexMatrix b = seg.vectors.adjoint() *
                              (forward[static_cast<std::size_t>(j)] * backward[static_cast<std::size_t>(j)]) *
                              seg.vectors;
      // Divided differences of exp(-i dt lambda) in the eigenbasis.
      ComplexMatrix divided(dim, dim);
      for (Eigen::Index a = 0; a < dim; ++a) {
        for (Eigen::Index c = 0; c < dim; ++c) {
          const double mean = 0.5 * (seg.values(a) + seg.values(c));
          const double half = 0.5 * dt * (seg.values(a) - seg.values(c));
          const double sinc = half == 0.0 ? 1.0 : std::sin(half) / half;
          divided(a, c) = Complex(0.0, -dt) * std::polar(1.0, -dt * mean) * sinc;
        }
      }
      for (int k = 0; k < channels; ++k) {
        const ComplexMatrix e = member.scale * (seg.vectors.adjoint() *
                                                problem.hamiltonian.controls[static_cast<std::size_t>(k)] *
                                                seg.vectors);
        Complex d_overlap = 0.0;
        for (Eigen::Index a = 0; a < dim; ++a) {
          for (Eigen::Index c = 0; c < dim; ++c) d_overlap += b(c, a) * divided(a, c) * e(a, c);
        }
        member_grad[static_cast<std::size_t>(j * channels + k)] =
            2.0 * (std::conj(overlap) * d_overlap).real() / d2;
      }
    }
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += member.weight * member_grad[i];
  }
  return total;
}

ControlPulse initial_pulse(const GrapeProblem& problem, std::uint64_t seed) {
  problem.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const double amplitude = 0.01 * reference_amplitude(problem);
  ControlPulse pulse(problem.segments, problem.channels(), problem.dt);
  for (double& u : pulse.amplitudes()) u = amplitude * dist(rng);
  pulse.labels = problem.hamiltonian.labels;
  return pulse;
}

OptimizeResult optimize(const GrapeProblem& problem, std::uint64_t seed) {
  return optimize(problem, initial_pulse(problem, seed));
}

OptimizeResult optimize(const GrapeProblem& problem, const ControlPulse& initial) {
  OptimizeResult result;
  result.pulse = initial;
  project(problem, result.pulse);
  problem.validate(result.pulse);
  if (result.pulse.labels.empty()) result.pulse.labels = problem.hamiltonian.labels;

  const GrapeOptions& opt = problem.options;
  double current = fidelity(problem, result.pulse);
  result.trace.push_back(current);
  std::vector<double> grad = gradient(problem, result.pulse);

  double step = opt.initial_step;
  if (!(step > 0.0)) {
    double gmax = 0.0;
    for (double g : grad) gmax = std::max(gmax, std::abs(g));
    step = gmax > 0.0 ? 0.1 * reference_amplitude(problem) / gmax : 1.0;
  }

  result.status = OptimizeStatus::MaxIterations;
  std::vector<double> direction = grad;
  std::vector<double> previous_grad;
  for (;;) {
    if (current >= opt.fidelity_goal) {
      result.status = OptimizeStatus::GoalReached;
      break;
    }
    if (result.iterations >= opt.max_iterations) {
      result.status = OptimizeStatus::MaxIterations;
      break;
    }
    double gnorm2 = 0.0;
    for (double g : grad) gnorm2 += g * g;
    if (std::sqrt(gnorm2) <= opt.gradient_tolerance) {
      result.status = OptimizeStatus::GradientTolerance;
      break;
    }

    if (opt.direction == SearchDirection::ConjugateGradient && !previous_grad.empty()) {
      double num = 0.0;
      double den = 0.0;
      for (std::size_t i = 0; i < grad.size(); ++i) {
        num += grad[i] * (grad[i] - previous_grad[i]);
        den += previous_grad[i] * previous_grad[i];
      }
      const double beta = den > 0.0 ? std::max(0.0, num / den) : 0.0;
      double slope = 0.0;
      for (std::size_t i = 0; i < grad.size(); ++i) {
        direction[i] = grad[i] + beta * direction[i];
        slope += grad[i] * direction[i];
      }
      if (!(slope > 0.0)) direction = grad;
    } else {
      direction = grad;
    }

    bool accepted = false;
    ControlPulse candidate = result.pulse;
    double candidate_fidelity = current;
    for (int attempt = 0; attempt < kMaxBacktracks; ++attempt) {
      candidate = result.pulse;
      auto& amps = candidate.amplitudes();
      for (std::size_t i = 0; i < amps.size(); ++i) amps[i] += step * direction[i];
      project(problem, candidate);
      double predicted = 0.0;
      for (std::size_t i = 0; i < amps.size(); ++i) {
        predicted += grad[i] * (amps[i] - result.pulse.amplitudes()[i]);
      }
      candidate_fidelity = fidelity(problem, candidate);
      if (candidate_fidelity > current && candidate_fidelity - current >= kArmijo * predicted) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      result.status = OptimizeStatus::LineSearchFailed;
      break;
    }
    result.pulse = std::move(candidate);
    current = candidate_fidelity;
    result.trace.push_back(current);
    ++result.iterations;
    previous_grad = std::move(grad);
    grad = gradient(problem, result.pulse);
    step *= 2.0;
  }
  return result;
}

ComplexMatrix evolve(const nmr::PulsedHamiltonian& hamiltonian, const ControlPulse& pulse,
                     const ComplexMatrix& rho, const nmr::SpinSystem* dephasing, double scale) {
  hamiltonian.validate();
  if (pulse.channels() != static_cast<int>(hamiltonian.controls.size())) {
    throw std::invalid_argument("evolve: pulse channel count does not match the Hamiltonian");
  }
  if (rho.rows() != hamiltonian.h0.rows() || rho.cols() != hamiltonian.h0.cols()) {
    throw std::invalid_argument("evolve: state dimension mismatch");
  }
  if (dephasing && !dephasing->has_t2()) {
    throw std::invalid_argument("evolve: dephasing requested without T2 times");
  }
  const std::vector<Segment> segs = decompose(hamiltonian, pulse, scale);
  ComplexMatrix state = rho;
  for (const auto& seg : segs) {
    state = (seg.propagator * state * seg.propagator.adjoint()).eval();
    if (dephasing) nmr::dephase_in_place(*dephasing, state, pulse.dt());
  }
  return 0.5 * (state + state.adjoint());
}

}  // namespace weakmeas::grape
