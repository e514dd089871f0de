#pragma once

// Reference computations written independently of the library code paths:
// explicit index sums instead of partial_trace / partial_transpose, and the
// Cayley hyperdeterminant instead of the spin-flip formula.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>

namespace oracle {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Reduced state of one qubit of a three-qubit pure state, qubit 0 = most significant bit.
inline Eigen::Matrix2cd single_qubit_reduced(const CVector& psi, int qubit) {
  Eigen::Matrix2cd r = Eigen::Matrix2cd::Zero();
  const int shift = 2 - qubit;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      if ((i & ~(1 << shift)) != (j & ~(1 << shift))) continue;
      r((i >> shift) & 1, (j >> shift) & 1) += psi(i) * std::conj(psi(j));
    }
  }
  return r;
}

inline double purity(const Eigen::Matrix2cd& r) { return (r * r).trace().real(); }

/// Von Neumann entropy (nats) of one qubit of a three-qubit pure state, via the 2x2 closed form.
inline double entropy(const CVector& psi, int qubit) {
  const auto r = single_qubit_reduced(psi, qubit);
  const double tr = r.trace().real();
  const double det = (r(0, 0) * r(1, 1) - r(0, 1) * r(1, 0)).real();
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  double s = 0.0;
  for (double l : {tr / 2.0 + disc, tr / 2.0 - disc})
    if (l > 1e-300) s -= l * std::log(l);
  return s;
}

/// 4 |Det|, Det the Cayley hyperdeterminant of the 2x2x2 amplitude tensor.
inline double hyperdeterminant_tangle(const CVector& a) {
  auto c = [&](int i, int j, int k) { return a(4 * i + 2 * j + k); };
  const cplx d1 = c(0, 0, 0) * c(0, 0, 0) * c(1, 1, 1) * c(1, 1, 1) + c(0, 0, 1) * c(0, 0, 1) * c(1, 1, 0) * c(1, 1, 0) +
                  c(0, 1, 0) * c(0, 1, 0) * c(1, 0, 1) * c(1, 0, 1) + c(1, 0, 0) * c(1, 0, 0) * c(0, 1, 1) * c(0, 1, 1);
  const cplx d2 = c(0, 0, 0) * c(1, 1, 1) * c(0, 1, 1) * c(1, 0, 0) + c(0, 0, 0) * c(1, 1, 1) * c(1, 0, 1) * c(0, 1, 0) +
                  c(0, 0, 0) * c(1, 1, 1) * c(1, 1, 0) * c(0, 0, 1) + c(0, 1, 1) * c(1, 0, 0) * c(1, 0, 1) * c(0, 1, 0) +
                  c(0, 1, 1) * c(1, 0, 0) * c(1, 1, 0) * c(0, 0, 1) + c(1, 0, 1) * c(0, 1, 0) * c(1, 1, 0) * c(0, 0, 1);
  const cplx d3 = c(0, 0, 0) * c(1, 1, 0) * c(1, 0, 1) * c(0, 1, 1) + c(1, 1, 1) * c(0, 0, 1) * c(0, 1, 0) * c(1, 0, 0);
  return 4.0 * std::abs(d1 - 2.0 * d2 + 4.0 * d3);
}

/// Pure-state GME concurrence 2 min_m sqrt(1 - Tr rho_m^2) from single-qubit purities.
inline double gme_concurrence_eq6(const CVector& psi) {
  double best_purity = 0.0;
  for (int q = 0; q < 3; ++q) best_purity = std::max(best_purity, purity(single_qubit_reduced(psi, q)));
  return 2.0 * std::sqrt(std::max(0.0, 1.0 - best_purity));
}

/// Same quantity normalized to 1 on GHZ: min_m sqrt(2 (1 - Tr rho_m^2)).
inline double gme_concurrence_unit(const CVector& psi) { return gme_concurrence_eq6(psi) / std::sqrt(2.0); }

/// Partial transpose on the second qubit of a 4x4 matrix, by explicit index swap.
inline CMatrix partial_transpose_b(const CMatrix& m) {
  CMatrix out(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int ap = 0; ap < 2; ++ap)
        for (int bp = 0; bp < 2; ++bp) out(2 * a + b, 2 * ap + bp) = m(2 * a + bp, 2 * ap + b);
  return out;
}

inline double min_eigenvalue(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Concurrence of a two-qubit pure state: 2 |a d - b c|.
inline double pure_concurrence_2q(const CVector& v) { return 2.0 * std::abs(v(0) * v(3) - v(1) * v(2)); }

}  // namespace oracle
