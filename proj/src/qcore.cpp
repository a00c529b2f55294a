#include "weakmeas/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace weakmeas::qcore {

namespace {

constexpr double kNegligibleKraus = 1e-14;

inline int bit_of(std::size_t index, int qubit, int n) {
  return static_cast<int>((index >> (n - 1 - qubit)) & 1U);
}

std::string describe(double value) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << value;
  return os.str();
}

void check_square_power_of_two(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || !is_power_of_two(static_cast<std::size_t>(m.rows()))) {
    throw std::invalid_argument(std::string(what) +
                                ": expected a square matrix of power-of-two dimension");
  }
}

void check_targets(std::span<const int> targets, int n) {
  std::vector<bool> seen(static_cast<std::size_t>(std::max(n, 0)), false);
  for (int q : targets) {
    if (q < 0 || q >= n) {
      throw std::invalid_argument("qubit index " + std::to_string(q) +
                                  " out of range for " + std::to_string(n) + " qubits");
    }
    if (seen[static_cast<std::size_t>(q)]) {
      throw std::invalid_argument("duplicate qubit index " + std::to_string(q));
    }
    seen[static_cast<std::size_t>(q)] = true;
  }
}

}  // namespace

ComplexMatrix identity(std::size_t dim) {
  return ComplexMatrix::Identity(static_cast<Eigen::Index>(dim),
                                 static_cast<Eigen::Index>(dim));
}

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

ComplexVector basis_ket(std::size_t dim, std::size_t index) {
  if (index >= dim) throw std::invalid_argument("basis index out of range");
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return v;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  }
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

double hermiticity_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("hermiticity_defect: non-square");
  return max_abs_diff(m, m.adjoint());
}

double unitarity_defect(const ComplexMatrix& u) {
  if (u.rows() != u.cols()) throw std::invalid_argument("unitarity_defect: non-square");
  return max_abs_diff(u.adjoint() * u, identity(static_cast<std::size_t>(u.rows())));
}

bool is_power_of_two(std::size_t dim) { return dim != 0 && (dim & (dim - 1)) == 0; }

int qubit_count(std::size_t dim) {
  if (!is_power_of_two(dim)) {
    throw std::invalid_argument("dimension " + std::to_string(dim) +
                                " is not a power of two");
  }
  int n = 0;
  while ((std::size_t{1} << n) < dim) ++n;
  return n;
}

// ---------------------------------------------------------------------------
// DensityState

DensityState::DensityState(ComplexMatrix matrix) : n_qubits_(0), matrix_(std::move(matrix)) {
  check_square_power_of_two(matrix_, "DensityState");
  n_qubits_ = qubit_count(static_cast<std::size_t>(matrix_.rows()));
  if (!matrix_.allFinite()) throw std::invalid_argument("DensityState: non-finite entry");
  const double herm = hermiticity_defect(matrix_);
  if (herm > kHermitianTol) {
    throw std::invalid_argument("DensityState: not Hermitian (defect " + describe(herm) + ")");
  }
  const double trace_err = std::abs(matrix_.trace() - Complex(1.0, 0.0));
  if (trace_err > kTraceTol) {
    throw std::invalid_argument("DensityState: trace differs from 1 by " + describe(trace_err));
  }
  const double min_ev = min_eigenvalue();
  if (min_ev < kPsdFloor) {
    throw std::invalid_argument("DensityState: negative eigenvalue " + describe(min_ev));
  }
}

DensityState DensityState::pure(const ComplexVector& ket) {
  const double norm = ket.norm();
  if (std::abs(norm - 1.0) > 1e-12) {
    throw std::invalid_argument("DensityState::pure: ket is not normalized");
  }
  ComplexMatrix m = ket * ket.adjoint();
  // Exact Hermiticity; the outer product can differ from its adjoint by roundoff.
  m = 0.5 * (m + m.adjoint()).eval();
  return DensityState(std::move(m));
}

DensityState DensityState::maximally_mixed(int n_qubits) {
  const std::size_t dim = std::size_t{1} << n_qubits;
  return DensityState(identity(dim) / static_cast<double>(dim));
}

double DensityState::purity() const { return (matrix_ * matrix_).trace().real(); }

double DensityState::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(matrix_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// QuantumChannel

QuantumChannel::QuantumChannel(int n_qubits, std::vector<ComplexMatrix> kraus_ops)
    : n_qubits_(n_qubits), kraus_(std::move(kraus_ops)) {
  if (n_qubits_ < 0) throw std::invalid_argument("QuantumChannel: negative qubit count");
  if (kraus_.empty()) throw std::invalid_argument("QuantumChannel: empty Kraus list");
  const auto d = static_cast<Eigen::Index>(dim());
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  for (const auto& k : kraus_) {
    if (k.rows() != d || k.cols() != d) {
      throw std::invalid_argument("QuantumChannel: Kraus operator has wrong dimension");
    }
    if (!k.allFinite()) throw std::invalid_argument("QuantumChannel: non-finite Kraus entry");
    sum.noalias() += k.adjoint() * k;
  }
  const double defect = max_abs_diff(sum, qcore::identity(dim()));
  if (defect > kTracePreservingTol) {
    throw std::invalid_argument("QuantumChannel: not trace preserving (defect " +
                                describe(defect) + ")");
  }
}

QuantumChannel QuantumChannel::unitary(const ComplexMatrix& u) {
  check_square_power_of_two(u, "QuantumChannel::unitary");
  return QuantumChannel(qubit_count(static_cast<std::size_t>(u.rows())), {u});
}

QuantumChannel QuantumChannel::identity(int n_qubits) {
  return QuantumChannel(n_qubits, {qcore::identity(std::size_t{1} << n_qubits)});
}

ComplexMatrix QuantumChannel::apply(const ComplexMatrix& op) const {
  const auto d = static_cast<Eigen::Index>(dim());
  if (op.rows() != d || op.cols() != d) {
    throw std::invalid_argument("QuantumChannel::apply: dimension mismatch");
  }
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (const auto& k : kraus_) out.noalias() += k * op * k.adjoint();
  return out;
}

QuantumChannel compose(const QuantumChannel& second, const QuantumChannel& first) {
  if (second.n_qubits() != first.n_qubits()) {
    throw std::invalid_argument("compose: channels act on different registers");
  }
  std::vector<ComplexMatrix> ops;
  ops.reserve(second.kraus().size() * first.kraus().size());
  for (const auto& a : second.kraus()) {
    for (const auto& b : first.kraus()) {
      ComplexMatrix k = a * b;
      if (k.norm() > kNegligibleKraus) ops.push_back(std::move(k));
    }
  }
  return QuantumChannel(first.n_qubits(), std::move(ops));
}

ChoiMatrix::ChoiMatrix(int n_qubits, ComplexMatrix matrix)
    : n_qubits_(n_qubits), matrix_(std::move(matrix)) {
  const auto d = static_cast<Eigen::Index>(std::size_t{1} << (2 * n_qubits_));
  if (matrix_.rows() != d || matrix_.cols() != d) {
    throw std::invalid_argument("ChoiMatrix: expected a 4^n x 4^n matrix");
  }
}

// ---------------------------------------------------------------------------
// Operations

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix tensor(std::span<const ComplexMatrix> factors) {
  if (factors.empty()) return identity(1);
  ComplexMatrix out = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) out = tensor(out, factors[i]);
  return out;
}

ComplexMatrix embed(const ComplexMatrix& op, std::span<const int> targets, int n) {
  if (n < 1 || n > 16) throw std::invalid_argument("embed: unsupported register size");
  check_targets(targets, n);
  const auto k = static_cast<int>(targets.size());
  const auto op_dim = static_cast<Eigen::Index>(std::size_t{1} << k);
  if (op.rows() != op_dim || op.cols() != op_dim) {
    throw std::invalid_argument("embed: operator dimension does not match target count");
  }

  std::size_t target_mask = 0;
  for (int q : targets) target_mask |= std::size_t{1} << (n - 1 - q);

  const std::size_t dim = std::size_t{1} << n;
  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim),
                                          static_cast<Eigen::Index>(dim));
  auto local_index = [&](std::size_t full) {
    std::size_t idx = 0;
    for (int t = 0; t < k; ++t) {
      idx = (idx << 1) | static_cast<std::size_t>(bit_of(full, targets[static_cast<std::size_t>(t)], n));
    }
    return idx;
  };
  for (std::size_t r = 0; r < dim; ++r) {
    const std::size_t r_local = local_index(r);
    for (std::size_t c = 0; c < dim; ++c) {
      if ((r & ~target_mask) != (c & ~target_mask)) continue;
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          op(static_cast<Eigen::Index>(r_local), static_cast<Eigen::Index>(local_index(c)));
    }
  }
  return out;
}

ComplexMatrix embed(const ComplexMatrix& op, std::initializer_list<int> targets, int n) {
  return embed(op, std::span<const int>(targets.begin(), targets.size()), n);
}

ComplexMatrix partial_trace(const ComplexMatrix& op, int n, std::span<const int> keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep must be non-empty");
  check_targets(keep, n);
  const auto expected = static_cast<Eigen::Index>(std::size_t{1} << n);
  if (op.rows() != expected || op.cols() != expected) {
    throw std::invalid_argument("partial_trace: operator dimension mismatch");
  }

  std::vector<int> traced;
  for (int q = 0; q < n; ++q) {
    if (std::find(keep.begin(), keep.end(), q) == keep.end()) traced.push_back(q);
  }
  const auto k = static_cast<int>(keep.size());
  const auto t = static_cast<int>(traced.size());

  // Full index assembled from kept bits (in keep order) and traced bits.
  auto compose_index = [&](std::size_t kept, std::size_t rest) {
    std::size_t full = 0;
    for (int i = 0; i < k; ++i) {
      const std::size_t bit = (kept >> (k - 1 - i)) & 1U;
      full |= bit << (n - 1 - keep[static_cast<std::size_t>(i)]);
    }
    for (int i = 0; i < t; ++i) {
      const std::size_t bit = (rest >> (t - 1 - i)) & 1U;
      full |= bit << (n - 1 - traced[static_cast<std::size_t>(i)]);
    }
    return static_cast<Eigen::Index>(full);
  };

  const std::size_t out_dim = std::size_t{1} << k;
  const std::size_t rest_dim = std::size_t{1} << t;
  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(out_dim),
                                          static_cast<Eigen::Index>(out_dim));
  for (std::size_t i = 0; i < out_dim; ++i) {
    for (std::size_t j = 0; j < out_dim; ++j) {
      Complex acc = 0.0;
      for (std::size_t r = 0; r < rest_dim; ++r) acc += op(compose_index(i, r), compose_index(j, r));
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
    }
  }
  return out;
}

DensityState partial_trace(const DensityState& rho, std::span<const int> keep) {
  return DensityState(partial_trace(rho.matrix(), rho.n_qubits(), keep));
}

DensityState partial_trace(const DensityState& rho, std::initializer_list<int> keep) {
  return partial_trace(rho, std::span<const int>(keep.begin(), keep.size()));
}

double expectation(const DensityState& rho, const ComplexMatrix& obs) {
  if (obs.rows() != rho.matrix().rows() || obs.cols() != rho.matrix().cols()) {
    throw std::invalid_argument("expectation: dimension mismatch");
  }
  if (hermiticity_defect(obs) > kHermitianTol * std::max(1.0, obs.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("expectation: observable is not Hermitian");
  }
  const Complex value = (rho.matrix() * obs).trace();
  if (std::abs(value.imag()) > kImagResidueTol) {
    throw std::logic_error("expectation: imaginary residue " + describe(value.imag()));
  }
  return value.real();
}

HermitianEigen eigh(const ComplexMatrix& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("eigh: non-square matrix");
  const double scale = std::max(1.0, h.size() ? h.cwiseAbs().maxCoeff() : 0.0);
  if (hermiticity_defect(h) > 1e-10 * scale) {
    throw std::invalid_argument("eigh: matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigh: eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix herm_expm(const ComplexMatrix& h, double t) {
  const HermitianEigen eig = eigh(h);
  ComplexVector phases(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    phases(i) = std::polar(1.0, -t * eig.values(i));
  }
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

DensityState apply_channel(const QuantumChannel& ch, const DensityState& rho) {
  if (ch.n_qubits() != rho.n_qubits()) {
    throw std::invalid_argument("apply_channel: dimension mismatch");
  }
  ComplexMatrix out = ch.apply(rho.matrix());
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityState(std::move(out));
}

ChoiMatrix choi_of(const QuantumChannel& ch) {
  const std::size_t d = ch.dim();
  const auto di = static_cast<Eigen::Index>(d);
  ComplexMatrix choi = ComplexMatrix::Zero(di * di, di * di);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      ComplexMatrix unit = ComplexMatrix::Zero(di, di);
      unit(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
      choi.block(static_cast<Eigen::Index>(i) * di, static_cast<Eigen::Index>(j) * di, di, di) =
          ch.apply(unit);
    }
  }
  return ChoiMatrix(ch.n_qubits(), std::move(choi));
}

double choi_distance(const ChoiMatrix& a, const ChoiMatrix& b) {
  if (a.n_qubits() != b.n_qubits()) {
    throw std::invalid_argument("choi_distance: channels act on different registers");
  }
  return max_abs_diff(a.matrix(), b.matrix());
}

}  // namespace weakmeas::qcore
