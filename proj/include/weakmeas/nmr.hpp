#pragma once

// Liquid-state NMR spin systems: the rotating-frame internal Hamiltonian,
// RF control Hamiltonians, pseudopure states and T2 dephasing.
//
// Frequencies are in Hz, Hamiltonians in rad/s, times in seconds. Spin j is
// qubit j of the register.

#include <string>
#include <utility>
#include <vector>

#include "weakmeas/qcore.hpp"

namespace weakmeas::nmr {

struct SpinSystem {
  std::vector<double> nu;                      // chemical shift offsets, Hz
  std::vector<std::vector<double>> j;          // symmetric couplings, Hz, zero diagonal
  std::vector<std::pair<int, int>> strong_pairs;  // full XX+YY+ZZ exchange
  std::vector<double> t2;                      // per-spin T2 in s; empty when unset
  std::vector<std::vector<int>> channels;      // spins driven by each RF channel

  int n_spins() const { return static_cast<int>(nu.size()); }
  bool has_t2() const { return !t2.empty(); }
  bool is_strong(int a, int b) const;

  // Throws std::invalid_argument listing the first violated invariant.
  void validate() const;
};

struct PulsedHamiltonian {
  ComplexMatrix h0;
  // x and y spin operators (sigma/2) summed over each channel's spins,
  // ordered {ch0_x, ch0_y, ch1_x, ch1_y, ...}; amplitudes in rad/s.
  std::vector<ComplexMatrix> controls;
  std::vector<std::string> labels;

  int n_qubits() const { return qcore::qubit_count(static_cast<std::size_t>(h0.rows())); }
  void validate() const;
};

ComplexMatrix internal_hamiltonian(const SpinSystem& sys);
PulsedHamiltonian pulsed_hamiltonian(const SpinSystem& sys);

// exp(-i H0 t), t >= 0.
ComplexMatrix free_propagator(const SpinSystem& sys, double t);

// (I / 2^k on ancilla_mixed) x |pure><pure| on the remaining spins (in
// ascending order).
qcore::DensityState pseudopure_state(const SpinSystem& sys, const std::vector<int>& ancilla_mixed,
                                     const ComplexVector& pure_part);

// Per-spin z-dephasing with p = (1 - exp(-dt / T2)) / 2 on every spin.
qcore::QuantumChannel dephasing_channel(const SpinSystem& sys, double dt);
qcore::DensityState dephase_step(const SpinSystem& sys, const qcore::DensityState& rho, double dt);
// In-place variant on a raw density matrix; used inside propagation loops.
void dephase_in_place(const SpinSystem& sys, ComplexMatrix& rho, double dt);

}  // namespace weakmeas::nmr
