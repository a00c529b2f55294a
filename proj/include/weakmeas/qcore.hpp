#pragma once

// Dense complex linear algebra and density-matrix primitives.
//
// Qubit ordering is big-endian everywhere: in an n-qubit register, qubit 0
// is the most significant bit of a basis index. The three-qubit protocol
// register therefore reads |ancilla, meter, system>.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace weakmeas {

using Complex = std::complex<double>;
using ComplexMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

namespace qcore {

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPsdFloor = -1e-10;
inline constexpr double kTracePreservingTol = 1e-12;
inline constexpr double kImagResidueTol = 1e-10;

ComplexMatrix identity(std::size_t dim);
ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();

// Computational basis ket |index> in a register of dimension dim.
ComplexVector basis_ket(std::size_t dim, std::size_t index);

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
double hermiticity_defect(const ComplexMatrix& m);
// max |U^dagger U - I| entry.
double unitarity_defect(const ComplexMatrix& u);
bool is_power_of_two(std::size_t dim);
// log2(dim); throws std::invalid_argument when dim is not a power of two.
int qubit_count(std::size_t dim);

class DensityState {
 public:
  // Validates Hermiticity, unit trace and the PSD floor.
  explicit DensityState(ComplexMatrix matrix);

  static DensityState pure(const ComplexVector& ket);
  static DensityState maximally_mixed(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  const ComplexMatrix& matrix() const { return matrix_; }

  double purity() const;
  double min_eigenvalue() const;

 private:
  int n_qubits_;
  ComplexMatrix matrix_;
};

class QuantumChannel {
 public:
  // Validates shapes and trace preservation (sum K^dagger K = I).
  QuantumChannel(int n_qubits, std::vector<ComplexMatrix> kraus_ops);

  static QuantumChannel unitary(const ComplexMatrix& u);
  static QuantumChannel identity(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return std::size_t{1} << n_qubits_; }
  const std::vector<ComplexMatrix>& kraus() const { return kraus_; }

  // Channel applied to an arbitrary (not necessarily normalized) operator.
  ComplexMatrix apply(const ComplexMatrix& op) const;

 private:
  int n_qubits_;
  std::vector<ComplexMatrix> kraus_;
};

// second after first. Kraus ops with negligible norm are dropped.
QuantumChannel compose(const QuantumChannel& second, const QuantumChannel& first);

class ChoiMatrix {
 public:
  ChoiMatrix(int n_qubits, ComplexMatrix matrix);

  int n_qubits() const { return n_qubits_; }
  const ComplexMatrix& matrix() const { return matrix_; }

 private:
  int n_qubits_;
  ComplexMatrix matrix_;
};

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix tensor(std::span<const ComplexMatrix> factors);

// Operator acting as `op` on `targets` (targets[0] is the most significant
// qubit of op) and as the identity on the rest of an n-qubit register.
ComplexMatrix embed(const ComplexMatrix& op, std::span<const int> targets, int n);
ComplexMatrix embed(const ComplexMatrix& op, std::initializer_list<int> targets, int n);

// Reduced operator on `keep`, in the order given by `keep`.
ComplexMatrix partial_trace(const ComplexMatrix& op, int n, std::span<const int> keep);
DensityState partial_trace(const DensityState& rho, std::span<const int> keep);
DensityState partial_trace(const DensityState& rho, std::initializer_list<int> keep);

double expectation(const DensityState& rho, const ComplexMatrix& obs);

struct HermitianEigen {
  Eigen::VectorXd values;
  ComplexMatrix vectors;  // columns are eigenvectors
};

HermitianEigen eigh(const ComplexMatrix& h);

// exp(-i t h) for Hermitian h.
ComplexMatrix herm_expm(const ComplexMatrix& h, double t);

DensityState apply_channel(const QuantumChannel& ch, const DensityState& rho);

ChoiMatrix choi_of(const QuantumChannel& ch);
double choi_distance(const ChoiMatrix& a, const ChoiMatrix& b);

}  // namespace qcore
}  // namespace weakmeas
