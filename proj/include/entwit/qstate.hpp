#pragma once

// Dense complex linear algebra for few-qubit states.
//
// Qubit 0 ("A") is the most significant tensor factor: basis index b2 b1 b0
// of a three-qubit register reads A, B, C from left to right.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "entwit/rng.hpp"

namespace entwit {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

namespace qstate {

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kNormTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kEigHermitianTol = 1e-10;

inline int dim_of(int n_qubits) { return 1 << n_qubits; }

inline int qubits_of(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim) throw std::domain_error("dimension is not a power of two");
  return n;
}

inline double hermiticity_error(const CMatrix& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

/// Hermitian part (m + m^dagger) / 2.
inline CMatrix hermitize(const CMatrix& m) { return (m + m.adjoint()) * 0.5; }

struct Eigensystem {
  Eigen::VectorXd values;  // ascending
  CMatrix vectors;         // columns
};

inline Eigensystem eig_hermitian(const CMatrix& h) {
  if (h.rows() != h.cols()) throw std::domain_error("eig_hermitian: matrix is not square");
  if (hermiticity_error(h) > kEigHermitianTol) throw std::domain_error("eig_hermitian: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitize(h));
  if (solver.info() != Eigen::Success) throw std::runtime_error("eig_hermitian: eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CMatrix kron(std::span<const CMatrix> factors) {
  if (factors.empty()) throw std::domain_error("kron: empty factor list");
  CMatrix out = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) out = kron(out, factors[k]);
  return out;
}

inline CMatrix kron(std::initializer_list<CMatrix> factors) {
  return kron(std::span<const CMatrix>(factors.begin(), factors.size()));
}

inline CVector kron(const CVector& a, const CVector& b) {
  CVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

/// n-fold tensor power; n == 0 gives the 1x1 identity.
inline CMatrix kron_power(const CMatrix& m, int n) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (int k = 0; k < n; ++k) out = kron(out, m);
  return out;
}

namespace detail {

inline int bit_of(int n_qubits, int qubit) { return n_qubits - 1 - qubit; }

inline void check_qubit(int n_qubits, int qubit) {
  if (qubit < 0 || qubit >= n_qubits) throw std::domain_error("qubit index out of range");
}

// Scatter the bits of `compact` (ordered like `qubits`) into a full basis index.
inline int scatter(int n_qubits, std::span<const int> qubits, int compact) {
  int index = 0;
  const int k = static_cast<int>(qubits.size());
  for (int pos = 0; pos < k; ++pos) {
    const int bit = (compact >> (k - 1 - pos)) & 1;
    index |= bit << bit_of(n_qubits, qubits[pos]);
  }
  return index;
}

}  // namespace detail

/// Partial trace over the complement of `keep` for any 2^n x 2^n operator.
inline CMatrix partial_trace(const CMatrix& m, int n_qubits, std::span<const int> keep) {
  std::vector<int> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  if (kept.empty() || static_cast<int>(kept.size()) >= n_qubits)
    throw std::domain_error("partial_trace: keep set must be a nonempty strict subset");
  if (std::adjacent_find(kept.begin(), kept.end()) != kept.end())
    throw std::domain_error("partial_trace: duplicate qubit in keep set");
  for (int q : kept) detail::check_qubit(n_qubits, q);

  std::vector<int> traced;
  for (int q = 0; q < n_qubits; ++q)
    if (!std::binary_search(kept.begin(), kept.end(), q)) traced.push_back(q);

  const int dk = 1 << kept.size();
  const int dt = 1 << traced.size();
  CMatrix out = CMatrix::Zero(dk, dk);
  for (int i = 0; i < dk; ++i) {
    const int ii = detail::scatter(n_qubits, kept, i);
    for (int j = 0; j < dk; ++j) {
      const int jj = detail::scatter(n_qubits, kept, j);
      cplx acc = 0.0;
      for (int t = 0; t < dt; ++t) {
        const int tt = detail::scatter(n_qubits, traced, t);
        acc += m(ii | tt, jj | tt);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

inline CMatrix partial_transpose(const CMatrix& m, int n_qubits, int subsystem) {
  detail::check_qubit(n_qubits, subsystem);
  const int mask = 1 << detail::bit_of(n_qubits, subsystem);
  CMatrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const int bi = static_cast<int>(i) & mask;
      const int bj = static_cast<int>(j) & mask;
      const Eigen::Index ti = (i & ~mask) | bj;
      const Eigen::Index tj = (j & ~mask) | bi;
      out(ti, tj) = m(i, j);
    }
  }
  return out;
}

/// Reorder tensor factors: output qubit k is input qubit perm[k].
inline CVector permute_qubits(const CVector& v, std::span<const int> perm) {
  const int n = qubits_of(v.size());
  if (static_cast<int>(perm.size()) != n) throw std::domain_error("permute_qubits: bad permutation size");
  int seen = 0;
  for (int p : perm) {
    if (p < 0 || p >= n || (seen >> p) & 1) throw std::domain_error("permute_qubits: not a permutation");
    seen |= 1 << p;
  }
  CVector out(v.size());
  for (int out_index = 0; out_index < v.size(); ++out_index) {
    int in_index = 0;
    for (int k = 0; k < n; ++k) {
      const int bit = (out_index >> detail::bit_of(n, k)) & 1;
      in_index |= bit << detail::bit_of(n, perm[k]);
    }
    out(out_index) = v(in_index);
  }
  return out;
}

// ---------------------------------------------------------------------------

class PureState {
 public:
  PureState(int n_qubits, CVector amplitudes) : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
    if (n_qubits_ < 1) throw std::domain_error("PureState: n_qubits must be positive");
    if (amplitudes_.size() != dim_of(n_qubits_)) throw std::domain_error("PureState: amplitude count != 2^n");
    if (std::abs(amplitudes_.norm() - 1.0) > kNormTol) throw std::domain_error("PureState: amplitudes not normalized");
  }

  static PureState normalized(int n_qubits, const CVector& v) {
    const double norm = v.norm();
    if (norm == 0.0) throw std::domain_error("PureState: zero vector");
    return PureState(n_qubits, v / norm);
  }

  int n_qubits() const { return n_qubits_; }
  int dim() const { return static_cast<int>(amplitudes_.size()); }
  const CVector& amplitudes() const { return amplitudes_; }
  CMatrix projector() const { return amplitudes_ * amplitudes_.adjoint(); }

 private:
  int n_qubits_;
  CVector amplitudes_;
};

class UnitaryMatrix {
 public:
  explicit UnitaryMatrix(CMatrix data) : data_(std::move(data)) {
    if (data_.rows() != data_.cols() || data_.rows() < 1) throw std::domain_error("UnitaryMatrix: not square");
    const auto id = CMatrix::Identity(data_.rows(), data_.cols());
    if ((data_.adjoint() * data_ - id).cwiseAbs().maxCoeff() > kUnitaryTol)
      throw std::domain_error("UnitaryMatrix: not unitary");
  }

  int dim() const { return static_cast<int>(data_.rows()); }
  const CMatrix& matrix() const { return data_; }

 private:
  CMatrix data_;
};

class DensityMatrix {
 public:
  DensityMatrix(int n_qubits, CMatrix data) : n_qubits_(n_qubits), data_(std::move(data)) {
    if (n_qubits_ < 1) throw std::domain_error("DensityMatrix: n_qubits must be positive");
    if (data_.rows() != dim_of(n_qubits_) || data_.cols() != data_.rows())
      throw std::domain_error("DensityMatrix: shape != 2^n x 2^n");
    if (hermiticity_error(data_) > kHermitianTol) throw std::domain_error("DensityMatrix: not Hermitian");
    if (std::abs(data_.trace() - cplx(1.0)) > kTraceTol) throw std::domain_error("DensityMatrix: trace != 1");
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(data_, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -kPsdTol) throw std::domain_error("DensityMatrix: not positive semidefinite");
  }

  /// Hermitize and renormalize the trace before validating. For results of
  /// floating-point pipelines that are states up to round-off.
  static DensityMatrix repaired(int n_qubits, const CMatrix& m) {
    CMatrix h = hermitize(m);
    h /= h.trace().real();
    return DensityMatrix(n_qubits, std::move(h));
  }

  static DensityMatrix from_pure(const PureState& psi) { return DensityMatrix(psi.n_qubits(), psi.projector()); }

  static DensityMatrix maximally_mixed(int n_qubits) {
    const int d = dim_of(n_qubits);
    return DensityMatrix(n_qubits, CMatrix::Identity(d, d) / static_cast<double>(d));
  }

  int n_qubits() const { return n_qubits_; }
  int dim() const { return static_cast<int>(data_.rows()); }
  const CMatrix& matrix() const { return data_; }

  double purity() const { return (data_ * data_).trace().real(); }

  /// Eigenvalues ascending, with values in [-kPsdTol, 0) clamped to 0.
  Eigen::VectorXd spectrum() const {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(data_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseMax(0.0);
  }

 private:
  int n_qubits_;
  CMatrix data_;
};

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  return DensityMatrix::repaired(static_cast<int>(keep.size()), partial_trace(rho.matrix(), rho.n_qubits(), keep));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<int> keep) {
  return partial_trace(rho, std::span<const int>(keep.begin(), keep.size()));
}

inline CMatrix partial_transpose(const DensityMatrix& rho, int subsystem) {
  return partial_transpose(rho.matrix(), rho.n_qubits(), subsystem);
}

inline DensityMatrix kron(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix::repaired(a.n_qubits() + b.n_qubits(), kron(a.matrix(), b.matrix()));
}

/// Hilbert-Schmidt distributed state A A^dagger / Tr[A A^dagger], A square Ginibre.
inline DensityMatrix sample_ginibre_state(int n_qubits, Rng& rng) {
  if (n_qubits < 1 || n_qubits > 3) throw std::domain_error("sample_ginibre_state: n_qubits must be 1, 2 or 3");
  const int d = dim_of(n_qubits);
  CMatrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = rng.complex_normal();
  const CMatrix aa = a * a.adjoint();
  return DensityMatrix::repaired(n_qubits, aa / aa.trace().real());
}

/// Haar unitary from the QR decomposition of a Ginibre matrix, with the
/// diagonal of R rotated to the positive reals.
inline UnitaryMatrix haar_unitary(int dim, Rng& rng) {
  if (dim < 2) throw std::domain_error("haar_unitary: dim must be >= 2");
  CMatrix z(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) z(i, j) = rng.complex_normal();
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ() * CMatrix::Identity(dim, dim);
  const CMatrix& r = qr.matrixQR();
  for (int k = 0; k < dim; ++k) {
    const cplx rkk = r(k, k);
    const double mag = std::abs(rkk);
    q.col(k) *= (mag > 0.0 ? rkk / mag : cplx(1.0));
  }
  return UnitaryMatrix(std::move(q));
}

inline PureState haar_pure_state(int n_qubits, Rng& rng) {
  CVector v(dim_of(n_qubits));
  for (auto& c : v) c = rng.complex_normal();
  return PureState::normalized(n_qubits, v);
}

inline DensityMatrix conjugate(const DensityMatrix& rho, const CMatrix& u) {
  return DensityMatrix::repaired(rho.n_qubits(), u * rho.matrix() * u.adjoint());
}

/// rho -> (U_0 (x) U_1 (x) ...) rho (...)^dagger with one 2x2 unitary per qubit.
inline DensityMatrix apply_local_unitaries(const DensityMatrix& rho, std::span<const UnitaryMatrix> locals) {
  if (static_cast<int>(locals.size()) != rho.n_qubits())
    throw std::domain_error("apply_local_unitaries: need one unitary per qubit");
  std::vector<CMatrix> mats;
  for (const auto& u : locals) {
    if (u.dim() != 2) throw std::domain_error("apply_local_unitaries: local unitaries must be 2x2");
    mats.push_back(u.matrix());
  }
  return conjugate(rho, kron(mats));
}

inline std::vector<UnitaryMatrix> random_local_unitaries(int n_qubits, Rng& rng) {
  std::vector<UnitaryMatrix> out;
  out.reserve(n_qubits);
  for (int q = 0; q < n_qubits; ++q) out.push_back(haar_unitary(2, rng));
  return out;
}

// Named states ---------------------------------------------------------------

inline PureState basis_state(int n_qubits, int index) {
  CVector v = CVector::Zero(dim_of(n_qubits));
  v(index) = 1.0;
  return PureState(n_qubits, v);
}

inline PureState bell_phi_plus() {
  CVector v = CVector::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return PureState(2, v);
}

/// (|000> + sign |111>) / sqrt(2)
inline PureState ghz_state(double sign = 1.0) {
  CVector v = CVector::Zero(8);
  v(0) = 1.0 / std::sqrt(2.0);
  v(7) = sign / std::sqrt(2.0);
  return PureState(3, v);
}

/// (|100> + |010> + |001>) / sqrt(3)
inline PureState w_state() {
  CVector v = CVector::Zero(8);
  v(1) = v(2) = v(4) = 1.0 / std::sqrt(3.0);
  return PureState(3, v);
}

/// Spin-flipped W: (|011> + |101> + |110>) / sqrt(3)
inline PureState w_bar_state() {
  CVector v = CVector::Zero(8);
  v(3) = v(5) = v(6) = 1.0 / std::sqrt(3.0);
  return PureState(3, v);
}

inline CMatrix pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline CMatrix pauli_y() {
  CMatrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}

inline CMatrix pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace qstate
}  // namespace entwit
