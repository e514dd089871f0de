#pragma once

#include <Eigen/Dense>

#include <stdexcept>

#include "entwit/qstate.hpp"

namespace entwit::datagen {

/// Real coordinates of a trace-one Hermitian matrix, d = 4^N - 1 values:
///   rho_00 .. rho_{D-2,D-2}            (last diagonal entry fixed by the trace)
///   Re rho_ab for a < b, row-major
///   Im rho_ab for a < b, row-major
using FeatureVector = Eigen::VectorXd;

inline int feature_dimension(int n_qubits) { return (1 << (2 * n_qubits)) - 1; }

inline FeatureVector features(const CMatrix& m) {
  const int dim = static_cast<int>(m.rows());
  const int pairs = dim * (dim - 1) / 2;
  FeatureVector f(dim * dim - 1);
  for (int a = 0; a < dim - 1; ++a) f(a) = m(a, a).real();
  int k = 0;
  for (int a = 0; a < dim; ++a) {
    for (int b = a + 1; b < dim; ++b, ++k) {
      f(dim - 1 + k) = m(a, b).real();
      f(dim - 1 + pairs + k) = m(a, b).imag();
    }
  }
  return f;
}

inline FeatureVector features(const qstate::DensityMatrix& rho) { return features(rho.matrix()); }

/// Inverse of features() for trace-one Hermitian matrices.
inline CMatrix matrix_from_features(const FeatureVector& f, int n_qubits) {
  if (f.size() != feature_dimension(n_qubits)) throw std::domain_error("matrix_from_features: wrong feature count");
  const int dim = qstate::dim_of(n_qubits);
  const int pairs = dim * (dim - 1) / 2;
  CMatrix m = CMatrix::Zero(dim, dim);
  double diag = 0.0;
  for (int a = 0; a < dim - 1; ++a) {
    m(a, a) = f(a);
    diag += f(a);
  }
  m(dim - 1, dim - 1) = 1.0 - diag;
  int k = 0;
  for (int a = 0; a < dim; ++a) {
    for (int b = a + 1; b < dim; ++b, ++k) {
      const cplx v(f(dim - 1 + k), f(dim - 1 + pairs + k));
      m(a, b) = v;
      m(b, a) = std::conj(v);
    }
  }
  return m;
}

}  // namespace entwit::datagen
