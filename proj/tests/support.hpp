#pragma once

// Shared test helpers: seeded random generators and brute-force oracles that
// avoid the library's own index arithmetic.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "weakmeas/qcore.hpp"

namespace testing_support {

using weakmeas::Complex;
using weakmeas::ComplexMatrix;
using weakmeas::ComplexVector;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  Complex cnormal() { return {normal(), normal()}; }

  ComplexMatrix ginibre(std::size_t rows, std::size_t cols) {
    ComplexMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = cnormal();
    }
    return m;
  }

  ComplexVector ket(std::size_t dim) {
    ComplexVector v(dim);
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cnormal();
    return v / v.norm();
  }

  ComplexMatrix hermitian(std::size_t dim) {
    const ComplexMatrix a = ginibre(dim, dim);
    return 0.5 * (a + a.adjoint());
  }

  // Haar-ish unitary from the QR of a Ginibre matrix.
  ComplexMatrix unitary(std::size_t dim) {
    Eigen::MatrixXcd a = ginibre(dim, dim);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
    Eigen::MatrixXcd q = qr.householderQ();
    return q;
  }

  // Full-rank density matrix W W^dagger / Tr.
  ComplexMatrix density(std::size_t dim) {
    const ComplexMatrix w = ginibre(dim, dim);
    ComplexMatrix rho = w * w.adjoint();
    return rho / rho.trace();
  }

  // Random channel with `count` Kraus ops: blocks of a random isometry.
  std::vector<ComplexMatrix> kraus(std::size_t dim, int count) {
    const ComplexMatrix u = unitary(dim * static_cast<std::size_t>(count));
    std::vector<ComplexMatrix> ops;
    for (int k = 0; k < count; ++k) {
      ops.push_back(u.block(static_cast<Eigen::Index>(k * dim), 0, static_cast<Eigen::Index>(dim),
                            static_cast<Eigen::Index>(dim)));
    }
    return ops;
  }

 private:
  std::mt19937_64 rng_;
};

// Bit of qubit q (big-endian) in basis index idx of an n-qubit register.
inline int bit(std::size_t idx, int q, int n) { return static_cast<int>((idx >> (n - 1 - q)) & 1u); }

// Kronecker product from the entry formula (a x b)[i*rb + k, j*cb + l] = a_ij b_kl.
inline ComplexMatrix kron_oracle(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index k = 0; k < b.rows(); ++k)
        for (Eigen::Index l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

// Embedding via matrix elements: <x|E|y> = <x_T|op|y_T> when x and y agree
// off the targets, else 0.
inline ComplexMatrix embed_oracle(const ComplexMatrix& op, const std::vector<int>& targets, int n) {
  const std::size_t dim = std::size_t{1} << n;
  const int k = static_cast<int>(targets.size());
  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t x = 0; x < dim; ++x) {
    for (std::size_t y = 0; y < dim; ++y) {
      bool same = true;
      for (int q = 0; q < n; ++q) {
        bool is_target = false;
        for (int t : targets) is_target |= (t == q);
        if (!is_target && bit(x, q, n) != bit(y, q, n)) same = false;
      }
      if (!same) continue;
      std::size_t xs = 0, ys = 0;
      for (int t = 0; t < k; ++t) {
        xs = (xs << 1) | static_cast<std::size_t>(bit(x, targets[static_cast<std::size_t>(t)], n));
        ys = (ys << 1) | static_cast<std::size_t>(bit(y, targets[static_cast<std::size_t>(t)], n));
      }
      out(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) =
          op(static_cast<Eigen::Index>(xs), static_cast<Eigen::Index>(ys));
    }
  }
  return out;
}

// Partial trace by summing over the traced bits of each matrix element.
inline ComplexMatrix partial_trace_oracle(const ComplexMatrix& rho, int n, const std::vector<int>& keep) {
  const int k = static_cast<int>(keep.size());
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t kd = std::size_t{1} << k;
  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(kd), static_cast<Eigen::Index>(kd));
  for (std::size_t x = 0; x < dim; ++x) {
    for (std::size_t y = 0; y < dim; ++y) {
      bool diag = true;
      for (int q = 0; q < n; ++q) {
        bool kept = false;
        for (int t : keep) kept |= (t == q);
        if (!kept && bit(x, q, n) != bit(y, q, n)) diag = false;
      }
      if (!diag) continue;
      std::size_t xs = 0, ys = 0;
      for (int t : keep) {
        xs = (xs << 1) | static_cast<std::size_t>(bit(x, t, n));
        ys = (ys << 1) | static_cast<std::size_t>(bit(y, t, n));
      }
      out(static_cast<Eigen::Index>(xs), static_cast<Eigen::Index>(ys)) +=
          rho(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
    }
  }
  return out;
}

// Permutation matrix of a classical reversible map on basis indices.
template <typename F>
ComplexMatrix permutation_oracle(int n, F map) {
  const std::size_t dim = std::size_t{1} << n;
  ComplexMatrix p = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t x = 0; x < dim; ++x) {
    p(static_cast<Eigen::Index>(map(x)), static_cast<Eigen::Index>(x)) = 1.0;
  }
  return p;
}

// exp(-i t h) by a truncated Taylor series with scaling and squaring,
// independent of the eigensolver.
inline ComplexMatrix taylor_expm(const ComplexMatrix& h, double t) {
  const ComplexMatrix a = Complex(0.0, -t) * h;
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::pow(2.0, squarings) > 0.25) ++squarings;
  const ComplexMatrix s = a / std::pow(2.0, squarings);
  ComplexMatrix term = ComplexMatrix::Identity(h.rows(), h.cols());
  ComplexMatrix sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = (term * s / static_cast<double>(k)).eval();
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = (sum * sum).eval();
  return sum;
}

inline ComplexMatrix apply_kraus(const std::vector<ComplexMatrix>& ops, const ComplexMatrix& rho) {
  ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& k : ops) out += k * rho * k.adjoint();
  return out;
}

}  // namespace testing_support
