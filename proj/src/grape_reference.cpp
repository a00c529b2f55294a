// Serial reference kernels. Propagators use Pade scaling-and-squaring and
// each gradient entry comes from the Frechet derivative read off the
// block-triangular exponential exp([[A, E], [0, A]]) = [[e^A, L], [0, e^A]].

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "weakmeas/grape.hpp"

namespace weakmeas::grape::reference {

namespace {

using DenseComplex = Eigen::MatrixXcd;

DenseComplex generator(const GrapeProblem& problem, const ControlPulse& pulse, int j, double scale) {
  DenseComplex h = problem.hamiltonian.h0;
  for (int k = 0; k < pulse.channels(); ++k) {
    h += (scale * pulse.at(j, k)) * DenseComplex(problem.hamiltonian.controls[static_cast<std::size_t>(k)]);
  }
  return h;
}

DenseComplex segment_exp(const GrapeProblem& problem, const ControlPulse& pulse, int j, double scale) {
  const DenseComplex a = Complex(0.0, -pulse.dt()) * generator(problem, pulse, j, scale);
  return a.exp();
}

}  // namespace

ComplexMatrix propagate(const GrapeProblem& problem, const ControlPulse& pulse, double scale) {
  problem.validate(pulse);
  const Eigen::Index dim = problem.hamiltonian.h0.rows();
  DenseComplex u = DenseComplex::Identity(dim, dim);
  for (int j = 0; j < pulse.segments(); ++j) u = segment_exp(problem, pulse, j, scale) * u;
  return u;
}

double fidelity(const GrapeProblem& problem, const ControlPulse& pulse) {
  double total = 0.0;
  for (const auto& member : problem.ensemble) {
    total += member.weight * gate_fidelity(problem.target, reference::propagate(problem, pulse, member.scale));
  }
  return total;
}

std::vector<double> gradient(const GrapeProblem& problem, const ControlPulse& pulse) {
  problem.validate(pulse);
  const int n = pulse.segments();
  const int channels = pulse.channels();
  const Eigen::Index dim = problem.hamiltonian.h0.rows();
  const double d2 = static_cast<double>(dim * dim);
  std::vector<double> grad(static_cast<std::size_t>(n * channels), 0.0);

  for (const auto& member : problem.ensemble) {
    std::vector<DenseComplex> props;
    for (int j = 0; j < n; ++j) props.push_back(segment_exp(problem, pulse, j, member.scale));
    DenseComplex full = DenseComplex::Identity(dim, dim);
    for (const auto& p : props) full = p * full;
    const DenseComplex target_adj = DenseComplex(problem.target).adjoint();
    const Complex overlap = (target_adj * full).trace();

    DenseComplex before = DenseComplex::Identity(dim, dim);
    for (int j = 0; j < n; ++j) {
      DenseComplex after = DenseComplex::Identity(dim, dim);
      for (int i = n - 1; i > j; --i) after = after * props[static_cast<std::size_t>(i)];
      const DenseComplex a = Complex(0.0, -pulse.dt()) * generator(problem, pulse, j, member.scale);
      for (int k = 0; k < channels; ++k) {
        const DenseComplex e = Complex(0.0, -pulse.dt()) * member.scale *
                               DenseComplex(problem.hamiltonian.controls[static_cast<std::size_t>(k)]);
        DenseComplex block = DenseComplex::Zero(2 * dim, 2 * dim);
        block.topLeftCorner(dim, dim) = a;
        block.topRightCorner(dim, dim) = e;
        block.bottomRightCorner(dim, dim) = a;
        const DenseComplex frechet = block.exp().topRightCorner(dim, dim);
        const Complex d_overlap = (target_adj * after * frechet * before).trace();
        grad[static_cast<std::size_t>(j * channels + k)] +=
            member.weight * 2.0 * (std::conj(overlap) * d_overlap).real() / d2;
      }
      before = props[static_cast<std::size_t>(j)] * before;
    }
  }
  return grad;
}

}  // namespace weakmeas::grape::reference
