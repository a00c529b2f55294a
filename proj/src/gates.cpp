#include "weakmeas/gates.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace weakmeas::gates {

using qcore::embed;
using qcore::identity;

namespace {

constexpr double kAxisTol = 1e-12;
constexpr double kPurityTol = 1e-10;
constexpr double kNegligibleKraus = 1e-14;

void check_distinct(std::initializer_list<int> qubits, int n, const char* what) {
  for (auto it = qubits.begin(); it != qubits.end(); ++it) {
    if (*it < 0 || *it >= n) {
      throw std::invalid_argument(std::string(what) + ": qubit index " + std::to_string(*it) +
                                  " out of range for " + std::to_string(n) + " qubits");
    }
    for (auto jt = std::next(it); jt != qubits.end(); ++jt) {
      if (*it == *jt) {
        throw std::invalid_argument(std::string(what) + ": qubit index collision at " +
                                    std::to_string(*it));
      }
    }
  }
}

ComplexVector normalized_qubit(const ComplexVector& phi, const char* what) {
  if (phi.size() != 2) throw std::invalid_argument(std::string(what) + ": expected a qubit state");
  if (std::abs(phi.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument(std::string(what) + ": state is not normalized");
  }
  return phi;
}

ComplexMatrix projector(const ComplexVector& v) { return v * v.adjoint(); }

ComplexMatrix ket0() {
  ComplexMatrix p = ComplexMatrix::Zero(2, 2);
  p(0, 0) = 1.0;
  return p;
}

ComplexMatrix ket1() {
  ComplexMatrix p = ComplexMatrix::Zero(2, 2);
  p(1, 1) = 1.0;
  return p;
}

}  // namespace

PauliAxis::PauliAxis(double x, double y, double z) : x_(x), y_(y), z_(z) {
  const double norm2 = x * x + y * y + z * z;
  if (!std::isfinite(norm2) || std::abs(norm2 - 1.0) > kAxisTol) {
    throw std::invalid_argument("PauliAxis: axis is not a unit vector");
  }
}

PauliAxis PauliAxis::in_xy_plane(double alpha) {
  return {std::cos(alpha), std::sin(alpha), 0.0};
}

ComplexMatrix pauli(const PauliAxis& axis) {
  return axis.nx() * qcore::pauli_x() + axis.ny() * qcore::pauli_y() +
         axis.nz() * qcore::pauli_z();
}

ComplexMatrix hadamard() {
  ComplexMatrix h(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  h << s, s, s, -s;
  return h;
}

ComplexMatrix pauli_rotation(const PauliAxis& axis, double angle) {
  // sigma_n is involutory, so the exponential has a closed form.
  return std::cos(angle) * identity(2) - Complex(0.0, std::sin(angle)) * pauli(axis);
}

ComplexMatrix ry(double theta) { return pauli_rotation(PauliAxis::y(), theta); }
ComplexMatrix rz(double phi) { return pauli_rotation(PauliAxis::z(), phi); }

int arity(GateKind kind) {
  switch (kind) {
    case GateKind::Hadamard:
    case GateKind::Ry:
    case GateKind::Rz:
    case GateKind::PauliRotation:
      return 1;
    case GateKind::WeakCoupling:
      return 2;
    case GateKind::CCZ:
    case GateKind::CCX:
    case GateKind::CSWAP:
      return 3;
  }
  throw std::invalid_argument("arity: unknown gate kind");
}

ComplexMatrix realize(const GateSpec& gate, int n) {
  if (static_cast<int>(gate.targets.size()) != arity(gate.kind)) {
    throw std::invalid_argument("realize: target count does not match gate arity");
  }
  const auto& t = gate.targets;
  switch (gate.kind) {
    case GateKind::Hadamard:
      return embed(hadamard(), t, n);
    case GateKind::Ry:
      return embed(ry(gate.angle), t, n);
    case GateKind::Rz:
      return embed(rz(gate.angle), t, n);
    case GateKind::PauliRotation:
      return embed(pauli_rotation(gate.axis, gate.angle), t, n);
    case GateKind::CCZ:
      return controlled_controlled(qcore::pauli_z(), t[0], t[1], t[2], n);
    case GateKind::CCX:
      return controlled_controlled(qcore::pauli_x(), t[0], t[1], t[2], n);
    case GateKind::CSWAP:
      return cswap(t[0], t[1], t[2], n);
    case GateKind::WeakCoupling:
      return weak_coupling_unitary(gate.angle, gate.axis, t[0], t[1], n);
  }
  throw std::invalid_argument("realize: unknown gate kind");
}

ComplexMatrix weak_coupling_unitary(double g, const PauliAxis& axis, int sys, int meter, int n) {
  check_distinct({sys, meter}, n, "weak_coupling_unitary");
  if (!std::isfinite(g)) throw std::invalid_argument("weak_coupling_unitary: non-finite g");
  const ComplexMatrix generator =
      embed(qcore::tensor(pauli(axis), qcore::pauli_z()), {sys, meter}, n);
  return std::cos(g) * identity(std::size_t{1} << n) - Complex(0.0, std::sin(g)) * generator;
}

ComplexMatrix controlled_controlled(const ComplexMatrix& op, int control_a, int control_b,
                                    int target, int n) {
  check_distinct({control_a, control_b, target}, n, "controlled_controlled");
  if (op.rows() != 2 || op.cols() != 2) {
    throw std::invalid_argument("controlled_controlled: expected a single-qubit operator");
  }
  const ComplexMatrix p11 = qcore::tensor(ket1(), ket1());
  const ComplexMatrix local = identity(8) - qcore::tensor(p11, identity(2)) + qcore::tensor(p11, op);
  return embed(local, {control_a, control_b, target}, n);
}

ComplexMatrix cswap(int control, int a, int b, int n) {
  check_distinct({control, a, b}, n, "cswap");
  ComplexMatrix swap = ComplexMatrix::Zero(4, 4);
  swap(0, 0) = swap(3, 3) = 1.0;
  swap(1, 2) = swap(2, 1) = 1.0;
  const ComplexMatrix local =
      qcore::tensor(ket0(), identity(4)) + qcore::tensor(ket1(), swap);
  return embed(local, {control, a, b}, n);
}

ComplexMatrix basis_rotation(const ComplexVector& phi) {
  const ComplexVector v = normalized_qubit(phi, "basis_rotation");
  ComplexMatrix u(2, 2);
  u << v(0), -std::conj(v(1)), v(1), std::conj(v(0));
  return u;
}

ComplexVector orthogonal_state(const ComplexVector& phi) {
  const ComplexVector v = normalized_qubit(phi, "orthogonal_state");
  ComplexVector perp(2);
  perp << -std::conj(v(1)), std::conj(v(0));
  return perp;
}

QuantumChannel controlled_depolarize(const ComplexVector& control_state, int sys, int meter,
                                     int n) {
  check_distinct({sys, meter}, n, "controlled_depolarize");
  const ComplexVector phi = normalized_qubit(control_state, "controlled_depolarize");
  const ComplexMatrix p_ok = projector(phi);
  const ComplexMatrix p_fail = projector(orthogonal_state(phi));

  std::vector<ComplexMatrix> kraus;
  kraus.push_back(embed(qcore::tensor(p_ok, identity(2)) + 0.5 * qcore::tensor(p_fail, identity(2)),
                        {sys, meter}, n));
  for (const ComplexMatrix& sigma : {qcore::pauli_x(), qcore::pauli_y(), qcore::pauli_z()}) {
    kraus.push_back(embed(qcore::tensor(p_fail, 0.5 * sigma), {sys, meter}, n));
  }
  return QuantumChannel(n, std::move(kraus));
}

QuantumChannel controlled_depolarize(const qcore::DensityState& control_state, int sys, int meter,
                                     int n) {
  if (control_state.n_qubits() != 1) {
    throw std::invalid_argument("controlled_depolarize: control state must be a single qubit");
  }
  if (std::abs(control_state.purity() - 1.0) > kPurityTol) {
    throw std::invalid_argument("controlled_depolarize: control state is mixed");
  }
  const qcore::HermitianEigen eig = qcore::eigh(control_state.matrix());
  Eigen::Index top = 0;
  eig.values.maxCoeff(&top);
  ComplexVector phi = eig.vectors.col(top);
  phi.normalize();
  return controlled_depolarize(phi, sys, meter, n);
}

QuantumChannel controlled_dephase(const ComplexVector& control_state, const PauliAxis& axis,
                                  int sys, int meter, int n) {
  check_distinct({sys, meter}, n, "controlled_dephase");
  const ComplexVector phi = normalized_qubit(control_state, "controlled_dephase");
  const ComplexMatrix p_ok = projector(phi);
  const ComplexMatrix p_fail = projector(orthogonal_state(phi));
  const double s = std::sqrt(0.5);
  const ComplexMatrix controlled =
      embed(qcore::tensor(p_ok, identity(2)) + qcore::tensor(p_fail, pauli(axis)), {sys, meter}, n);
  return QuantumChannel(n, {s * identity(std::size_t{1} << n), s * controlled});
}

int reduced_index(int qubit, int ancilla) { return qubit < ancilla ? qubit : qubit - 1; }

QuantumChannel trace_out_mixed_ancilla(const ComplexMatrix& u, int ancilla, int n) {
  if (n < 2) throw std::invalid_argument("trace_out_mixed_ancilla: need at least two qubits");
  if (ancilla < 0 || ancilla >= n) {
    throw std::invalid_argument("trace_out_mixed_ancilla: ancilla index out of range");
  }
  const auto full_dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  if (u.rows() != full_dim || u.cols() != full_dim) {
    throw std::invalid_argument("trace_out_mixed_ancilla: unitary dimension mismatch");
  }

  const int m = n - 1;
  const std::size_t dim = std::size_t{1} << m;
  const int shift = n - 1 - ancilla;
  // Insert the ancilla bit into a reduced-register index.
  auto full_index = [&](std::size_t reduced, std::size_t ancilla_bit) {
    const std::size_t low = reduced & ((std::size_t{1} << shift) - 1);
    const std::size_t high = reduced >> shift;
    return static_cast<Eigen::Index>((high << (shift + 1)) | (ancilla_bit << shift) | low);
  };

  // K_ab = <b|_A U |a>_A / sqrt(2) for the ancilla prepared as I/2.
  const double s = std::sqrt(0.5);
  std::vector<ComplexMatrix> kraus;
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      ComplexMatrix k(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
      for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
          k(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
              s * u(full_index(r, b), full_index(c, a));
        }
      }
      if (k.norm() > kNegligibleKraus) kraus.push_back(std::move(k));
    }
  }
  return QuantumChannel(m, std::move(kraus));
}

QuantumChannel cswap_reset_construction(int n, int ancilla, int sys, int meter) {
  return cswap_reset_construction(qcore::basis_ket(2, 0), n, ancilla, sys, meter);
}

QuantumChannel cswap_reset_construction(const ComplexVector& postselect, int n, int ancilla,
                                        int sys, int meter) {
  check_distinct({ancilla, sys, meter}, n, "cswap_reset_construction");
  const ComplexMatrix rotate = embed(basis_rotation(postselect).adjoint(), {sys}, n);
  const ComplexMatrix u = cswap(sys, ancilla, meter, n) * rotate;
  return trace_out_mixed_ancilla(u, ancilla, n);
}

ComplexMatrix ccphase_unitary(PhaseAxis phase_axis, int ancilla, int sys, int meter, int n) {
  const ComplexMatrix op = phase_axis == PhaseAxis::Z ? qcore::pauli_z() : qcore::pauli_x();
  return controlled_controlled(op, ancilla, sys, meter, n);
}

QuantumChannel ccphase_reset_construction(PhaseAxis phase_axis, int n, int ancilla, int sys,
                                          int meter) {
  check_distinct({ancilla, sys, meter}, n, "ccphase_reset_construction");
  return trace_out_mixed_ancilla(ccphase_unitary(phase_axis, ancilla, sys, meter, n), ancilla, n);
}

QuantumChannel gradient_crusher(int target, int n) {
  check_distinct({target}, n, "gradient_crusher");
  const double s = std::sqrt(0.5);
  return QuantumChannel(
      n, {s * identity(std::size_t{1} << n), s * embed(qcore::pauli_z(), {target}, n)});
}

}  // namespace weakmeas::gates
