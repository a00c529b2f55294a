#pragma once

// Named gates and the reset-channel constructions that implement
// post-selection with unitary operations plus a maximally mixed ancilla.

#include <vector>

#include "weakmeas/qcore.hpp"

namespace weakmeas::gates {

using qcore::QuantumChannel;

// Unit vector selecting the Pauli observable n.sigma.
class PauliAxis {
 public:
  PauliAxis(double x, double y, double z);

  static PauliAxis x() { return {1.0, 0.0, 0.0}; }
  static PauliAxis y() { return {0.0, 1.0, 0.0}; }
  static PauliAxis z() { return {0.0, 0.0, 1.0}; }
  // (cos alpha, sin alpha, 0)
  static PauliAxis in_xy_plane(double alpha);

  double nx() const { return x_; }
  double ny() const { return y_; }
  double nz() const { return z_; }

 private:
  double x_, y_, z_;
};

ComplexMatrix pauli(const PauliAxis& axis);

ComplexMatrix hadamard();
// Rotations use the exp(-i angle sigma) convention (no factor 1/2), so
// ry(theta)|0> = cos(theta)|0> + sin(theta)|1>.
ComplexMatrix ry(double theta);
ComplexMatrix rz(double phi);
ComplexMatrix pauli_rotation(const PauliAxis& axis, double angle);

enum class GateKind { Hadamard, Ry, Rz, PauliRotation, CCZ, CCX, CSWAP, WeakCoupling };

struct GateSpec {
  GateKind kind;
  // Ry/Rz/PauliRotation angle, or the coupling strength g for WeakCoupling.
  double angle = 0.0;
  PauliAxis axis = PauliAxis::z();
  // Hadamard/Ry/Rz/PauliRotation: {q}. CCZ/CCX: {control, control, target}.
  // CSWAP: {control, a, b}. WeakCoupling: {system, meter}.
  std::vector<int> targets;
};

int arity(GateKind kind);
ComplexMatrix realize(const GateSpec& gate, int n);

// exp(-i g sigma_axis^sys sigma_z^meter) on an n-qubit register.
ComplexMatrix weak_coupling_unitary(double g, const PauliAxis& axis, int sys, int meter, int n);

// Doubly controlled single-qubit gate: applies `op` to target when both
// controls are |1>.
ComplexMatrix controlled_controlled(const ComplexMatrix& op, int control_a, int control_b,
                                    int target, int n);
ComplexMatrix cswap(int control, int a, int b, int n);

// U_phi with U_phi|0> = |phi> (an SU(2) matrix).
ComplexMatrix basis_rotation(const ComplexVector& phi);
// Orthogonal complement of a single-qubit pure state.
ComplexVector orthogonal_state(const ComplexVector& phi);

// Identity on the meter when sys is |phi>, full depolarizing of the meter
// when sys is |phi_perp>. Kraus ops: P_phi x I + P_perp x I/2 and
// P_perp x sigma_k/2 for k = x, y, z.
QuantumChannel controlled_depolarize(const ComplexVector& control_state, int sys, int meter, int n);
// Same, taking the control as a rank-1 density matrix. Throws for mixed input.
QuantumChannel controlled_depolarize(const qcore::DensityState& control_state, int sys, int meter,
                                     int n);

// Mixture of identity and the controlled-sigma_axis gate (control on
// |phi_perp>): dephases the meter about `axis` when post-selection fails.
QuantumChannel controlled_dephase(const ComplexVector& control_state, const PauliAxis& axis,
                                  int sys, int meter, int n);

// Channel obtained from a unitary on n qubits with `ancilla` prepared in I/2
// and traced out afterwards. The result acts on the remaining n-1 qubits,
// renumbered in ascending order.
QuantumChannel trace_out_mixed_ancilla(const ComplexMatrix& u, int ancilla, int n);

// Remaining-register index of `qubit` once `ancilla` is removed.
int reduced_index(int qubit, int ancilla);

// U_phi^dagger on sys, then CSWAP(ancilla <-> meter) controlled on sys, with
// the ancilla maximally mixed and traced out.
QuantumChannel cswap_reset_construction(int n, int ancilla, int sys, int meter);
QuantumChannel cswap_reset_construction(const ComplexVector& postselect, int n, int ancilla,
                                        int sys, int meter);

enum class PhaseAxis { Z, X };

// Controlled-controlled sigma_phase (controls ancilla and sys, target meter)
// with the ancilla maximally mixed and traced out. Post-selection target |0>.
QuantumChannel ccphase_reset_construction(PhaseAxis phase_axis, int n, int ancilla, int sys,
                                          int meter);
ComplexMatrix ccphase_unitary(PhaseAxis phase_axis, int ancilla, int sys, int meter, int n);

// z-dephasing {sqrt(1/2) I, sqrt(1/2) sigma_z} on target.
QuantumChannel gradient_crusher(int target, int n);

}  // namespace weakmeas::gates
