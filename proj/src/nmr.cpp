#include "weakmeas/nmr.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace weakmeas::nmr {

using qcore::embed;

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument("SpinSystem: " + message);
}

}  // namespace

bool SpinSystem::is_strong(int a, int b) const {
  return std::any_of(strong_pairs.begin(), strong_pairs.end(), [&](const auto& p) {
    return (p.first == a && p.second == b) || (p.first == b && p.second == a);
  });
}

void SpinSystem::validate() const {
  const int n = n_spins();
  require(n >= 1 && n <= 10, "spin count must be between 1 and 10");
  for (double v : nu) require(std::isfinite(v), "chemical shifts must be finite");
  require(static_cast<int>(j.size()) == n, "coupling matrix must be n x n");
  for (int a = 0; a < n; ++a) {
    require(static_cast<int>(j[static_cast<std::size_t>(a)].size()) == n,
            "coupling matrix must be n x n");
    require(j[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] == 0.0,
            "coupling matrix must have a zero diagonal");
    for (int b = 0; b < n; ++b) {
      const double jab = j[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      require(std::isfinite(jab), "couplings must be finite");
      require(jab == j[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)],
              "coupling matrix must be symmetric");
    }
  }
  for (const auto& [a, b] : strong_pairs) {
    require(a >= 0 && a < n && b >= 0 && b < n && a != b, "strong pair index out of range");
    require(j[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] != 0.0,
            "strong pair must have a nonzero coupling");
  }
  if (!t2.empty()) {
    require(static_cast<int>(t2.size()) == n, "t2 must list one time per spin");
    for (double t : t2) require(std::isfinite(t) && t > 0.0, "t2 entries must be > 0");
  }
  std::vector<int> owner(static_cast<std::size_t>(n), -1);
  for (std::size_t c = 0; c < channels.size(); ++c) {
    require(!channels[c].empty(), "RF channels must drive at least one spin");
    for (int s : channels[c]) {
      require(s >= 0 && s < n, "RF channel spin index out of range");
      require(owner[static_cast<std::size_t>(s)] < 0, "a spin belongs to more than one RF channel");
      owner[static_cast<std::size_t>(s)] = static_cast<int>(c);
    }
  }
}

void PulsedHamiltonian::validate() const {
  if (h0.rows() != h0.cols() || !qcore::is_power_of_two(static_cast<std::size_t>(h0.rows()))) {
    throw std::invalid_argument("PulsedHamiltonian: drift must be square with power-of-two size");
  }
  auto check = [&](const ComplexMatrix& m) {
    if (m.rows() != h0.rows() || m.cols() != h0.cols()) {
      throw std::invalid_argument("PulsedHamiltonian: control dimension mismatch");
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (qcore::hermiticity_defect(m) > 1e-12 * scale) {
      throw std::invalid_argument("PulsedHamiltonian: matrix is not Hermitian");
    }
  };
  check(h0);
  for (const auto& c : controls) check(c);
  if (!labels.empty() && labels.size() != controls.size()) {
    throw std::invalid_argument("PulsedHamiltonian: one label per control expected");
  }
}

ComplexMatrix internal_hamiltonian(const SpinSystem& sys) {
  sys.validate();
  const int n = sys.n_spins();
  const std::size_t dim = std::size_t{1} << n;
  const double pi = std::numbers::pi;
  ComplexMatrix h = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (int s = 0; s < n; ++s) {
    h += pi * sys.nu[static_cast<std::size_t>(s)] * embed(qcore::pauli_z(), {s}, n);
  }
  const ComplexMatrix zz = qcore::tensor(qcore::pauli_z(), qcore::pauli_z());
  const ComplexMatrix exchange = qcore::tensor(qcore::pauli_x(), qcore::pauli_x()) +
                                 qcore::tensor(qcore::pauli_y(), qcore::pauli_y()) + zz;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const double jab = sys.j[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      if (jab == 0.0) continue;
      h += 0.5 * pi * jab * embed(sys.is_strong(a, b) ? exchange : zz, {a, b}, n);
    }
  }
  return h;
}

PulsedHamiltonian pulsed_hamiltonian(const SpinSystem& sys) {
  PulsedHamiltonian ph;
  ph.h0 = internal_hamiltonian(sys);
  const int n = sys.n_spins();
  const std::size_t dim = std::size_t{1} << n;
  for (std::size_t c = 0; c < sys.channels.size(); ++c) {
    ComplexMatrix hx = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    ComplexMatrix hy = hx;
    for (int s : sys.channels[c]) {
      hx += 0.5 * embed(qcore::pauli_x(), {s}, n);
      hy += 0.5 * embed(qcore::pauli_y(), {s}, n);
    }
    ph.controls.push_back(std::move(hx));
    ph.controls.push_back(std::move(hy));
    ph.labels.push_back("ch" + std::to_string(c) + "_x");
    ph.labels.push_back("ch" + std::to_string(c) + "_y");
  }
  return ph;
}

ComplexMatrix free_propagator(const SpinSystem& sys, double t) {
  if (!std::isfinite(t) || t < 0.0) throw std::invalid_argument("free_propagator: t must be >= 0");
  return qcore::herm_expm(internal_hamiltonian(sys), t);
}

qcore::DensityState pseudopure_state(const SpinSystem& sys, const std::vector<int>& ancilla_mixed,
                                     const ComplexVector& pure_part) {
  sys.validate();
  const int n = sys.n_spins();
  std::vector<bool> mixed(static_cast<std::size_t>(n), false);
  for (int s : ancilla_mixed) {
    if (s < 0 || s >= n) throw std::invalid_argument("pseudopure_state: spin index out of range");
    if (mixed[static_cast<std::size_t>(s)]) {
      throw std::invalid_argument("pseudopure_state: overlapping spin sets");
    }
    mixed[static_cast<std::size_t>(s)] = true;
  }
  const int k = static_cast<int>(ancilla_mixed.size());
  const int pure_spins = n - k;
  if (pure_part.size() != (Eigen::Index{1} << pure_spins)) {
    throw std::invalid_argument("pseudopure_state: pure part must cover the remaining spins");
  }
  if (std::abs(pure_part.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("pseudopure_state: pure part is not normalized");
  }

  // Register order: mixed spins first, then pure spins, permuted into place.
  std::vector<int> order;
  for (int s = 0; s < n; ++s) if (mixed[static_cast<std::size_t>(s)]) order.push_back(s);
  for (int s = 0; s < n; ++s) if (!mixed[static_cast<std::size_t>(s)]) order.push_back(s);

  const ComplexMatrix local =
      qcore::tensor(qcore::identity(std::size_t{1} << k) / static_cast<double>(std::size_t{1} << k),
                    pure_part * pure_part.adjoint());
  ComplexMatrix rho = embed(local, order, n);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return qcore::DensityState(std::move(rho));
}

qcore::QuantumChannel dephasing_channel(const SpinSystem& sys, double dt) {
  sys.validate();
  if (!sys.has_t2()) throw std::invalid_argument("dephasing: T2 times are not configured");
  if (!std::isfinite(dt) || dt < 0.0) throw std::invalid_argument("dephasing: dt must be >= 0");
  const int n = sys.n_spins();
  qcore::QuantumChannel total = qcore::QuantumChannel::identity(n);
  for (int s = 0; s < n; ++s) {
    const double p = 0.5 * (1.0 - std::exp(-dt / sys.t2[static_cast<std::size_t>(s)]));
    std::vector<ComplexMatrix> ops{std::sqrt(1.0 - p) * qcore::identity(std::size_t{1} << n)};
    if (p > 0.0) ops.push_back(std::sqrt(p) * embed(qcore::pauli_z(), {s}, n));
    total = qcore::compose(qcore::QuantumChannel(n, std::move(ops)), total);
  }
  return total;
}

qcore::DensityState dephase_step(const SpinSystem& sys, const qcore::DensityState& rho, double dt) {
  if (rho.n_qubits() != sys.n_spins()) {
    throw std::invalid_argument("dephase_step: state does not match the spin system");
  }
  return qcore::apply_channel(dephasing_channel(sys, dt), rho);
}

void dephase_in_place(const SpinSystem& sys, ComplexMatrix& rho, double dt) {
  if (!sys.has_t2()) throw std::invalid_argument("dephasing: T2 times are not configured");
  const int n = sys.n_spins();
  const std::size_t dim = std::size_t{1} << n;
  if (rho.rows() != static_cast<Eigen::Index>(dim)) {
    throw std::invalid_argument("dephase_in_place: state does not match the spin system");
  }
  // A coherence between basis states differing on spin s decays by exp(-dt/T2_s).
  std::vector<double> decay(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) decay[static_cast<std::size_t>(s)] = std::exp(-dt / sys.t2[static_cast<std::size_t>(s)]);
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      const std::size_t diff = r ^ c;
      if (diff == 0) continue;
      double factor = 1.0;
      for (int s = 0; s < n; ++s) {
        if ((diff >> (n - 1 - s)) & 1U) factor *= decay[static_cast<std::size_t>(s)];
      }
      rho(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) *= factor;
    }
  }
}

}  // namespace weakmeas::nmr
