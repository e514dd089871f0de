#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "entwit/qstate.hpp"
#include "support/oracles.hpp"

using namespace entwit;
using namespace entwit::qstate;

namespace {

CMatrix random_hermitian(int dim, Rng& rng) {
  CMatrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = rng.complex_normal();
  return hermitize(a);
}

}  // namespace

TEST(DensityMatrix, RejectsInvalidMatrices) {
  CMatrix m = CMatrix::Identity(4, 4) / 4.0;
  EXPECT_NO_THROW(DensityMatrix(2, m));
  EXPECT_THROW(DensityMatrix(3, m), std::domain_error);

  CMatrix not_hermitian = m;
  not_hermitian(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix(2, not_hermitian), std::domain_error);

  EXPECT_THROW(DensityMatrix(2, m * 2.0), std::domain_error);

  CMatrix negative = CMatrix::Zero(2, 2);
  negative(0, 0) = 1.5;
  negative(1, 1) = -0.5;
  EXPECT_THROW(DensityMatrix(1, negative), std::domain_error);
}

TEST(DensityMatrix, PurityAndSpectrum) {
  const auto mixed = DensityMatrix::maximally_mixed(2);
  EXPECT_NEAR(mixed.purity(), 0.25, 1e-15);
  const auto bell = DensityMatrix::from_pure(bell_phi_plus());
  EXPECT_NEAR(bell.purity(), 1.0, 1e-14);
  const auto spec = bell.spectrum();
  EXPECT_NEAR(spec(3), 1.0, 1e-12);
  EXPECT_NEAR(spec.head(3).sum(), 0.0, 1e-12);
}

TEST(PureState, NormalizationEnforced) {
  CVector v = CVector::Zero(4);
  v(0) = 1.0;
  v(1) = 1.0;
  EXPECT_THROW(PureState(2, v), std::domain_error);
  EXPECT_NO_THROW(PureState::normalized(2, v));
  EXPECT_THROW(PureState::normalized(2, CVector::Zero(4)), std::domain_error);
}

TEST(Kron, DimensionsAndMixedProduct) {
  Rng rng(1);
  const CMatrix a = random_hermitian(2, rng), b = random_hermitian(4, rng);
  const CMatrix c = random_hermitian(2, rng), d = random_hermitian(4, rng);
  const CMatrix ab = kron(a, b);
  EXPECT_EQ(ab.rows(), 8);
  EXPECT_LT((kron(a, b) * kron(c, d) - kron(CMatrix(a * c), CMatrix(b * d))).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(kron(a, b).trace().real(), a.trace().real() * b.trace().real(), 1e-12);
  EXPECT_EQ(kron_power(a, 3).rows(), 8);
  EXPECT_EQ(kron_power(a, 0).rows(), 1);
}

TEST(PartialTrace, ProductStateFactorizes) {
  Rng rng(2);
  const auto ra = sample_ginibre_state(1, rng);
  const auto rbc = sample_ginibre_state(2, rng);
  const auto joint = kron(ra, rbc);
  EXPECT_LT((partial_trace(joint, {0}).matrix() - ra.matrix()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((partial_trace(joint, {1, 2}).matrix() - rbc.matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PartialTrace, MatchesIndexSumOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto psi = haar_pure_state(3, rng);
    const auto rho = DensityMatrix::from_pure(psi);
    for (int q = 0; q < 3; ++q) {
      const std::array<int, 1> keep{q};
      const CMatrix r = partial_trace(rho.matrix(), 3, keep);
      EXPECT_LT((r - CMatrix(oracle::single_qubit_reduced(psi.amplitudes(), q))).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(PartialTrace, RejectsBadKeepSets) {
  const auto rho = DensityMatrix::maximally_mixed(3);
  EXPECT_THROW(partial_trace(rho, std::initializer_list<int>{}), std::domain_error);
  EXPECT_THROW(partial_trace(rho, {0, 1, 2}), std::domain_error);
  EXPECT_THROW(partial_trace(rho, {1, 1}), std::domain_error);
  EXPECT_THROW(partial_trace(rho, {3}), std::domain_error);
}

TEST(PartialTranspose, MatchesIndexSwapOracle) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rho = sample_ginibre_state(2, rng);
    EXPECT_LT((partial_transpose(rho, 1) - oracle::partial_transpose_b(rho.matrix())).cwiseAbs().maxCoeff(), 1e-15);
    // Transposing A is the full transpose of transposing B.
    EXPECT_LT((partial_transpose(rho, 0) - partial_transpose(rho, 1).transpose()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(PartialTranspose, BellStateHasNegativeEigenvalue) {
  const auto bell = DensityMatrix::from_pure(bell_phi_plus());
  EXPECT_NEAR(eig_hermitian(partial_transpose(bell, 1)).values(0), -0.5, 1e-12);
}

TEST(PermuteQubits, MovesFactors) {
  // |0> (x) |1> (x) |+>  with output qubit k taken from input qubit perm[k]
  CVector zero = CVector::Zero(2), one = CVector::Zero(2), plus = CVector::Constant(2, 1.0 / std::sqrt(2.0));
  zero(0) = 1.0;
  one(1) = 1.0;
  const CVector in = kron(kron(zero, one), plus);
  const std::array<int, 3> perm{2, 0, 1};
  const CVector out = permute_qubits(in, perm);
  const CVector expected = kron(kron(plus, zero), one);
  EXPECT_LT((out - expected).cwiseAbs().maxCoeff(), 1e-15);
  const std::array<int, 3> bad{0, 0, 1};
  EXPECT_THROW(permute_qubits(in, bad), std::domain_error);
}

TEST(Ginibre, ValidStatesAndHsMeanPurity) {
  Rng rng(5);
  double purity = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) purity += sample_ginibre_state(2, rng).purity();
  // Hilbert-Schmidt mean purity for d = 4: 2d / (d^2 + 1) = 8/17.
  EXPECT_NEAR(purity / n, 8.0 / 17.0, 0.01);
}

TEST(Haar, UnitaryAndUnbiased) {
  Rng rng(6);
  CMatrix mean = CMatrix::Zero(2, 2);
  const int n = 20000;
  double first_entry_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto u = haar_unitary(2, rng);
    mean += u.matrix();
    first_entry_sq += std::norm(u.matrix()(0, 0));
  }
  EXPECT_LT((mean / n).cwiseAbs().maxCoeff(), 0.02);
  EXPECT_NEAR(first_entry_sq / n, 0.5, 0.01);
  EXPECT_NO_THROW(haar_unitary(8, rng));
  EXPECT_THROW(haar_unitary(1, rng), std::domain_error);
}

TEST(LocalUnitaries, PreserveSpectrumAndReducedSpectra) {
  Rng rng(7);
  const auto rho = sample_ginibre_state(3, rng);
  const auto locals = random_local_unitaries(3, rng);
  const auto rotated = apply_local_unitaries(rho, locals);
  EXPECT_LT((rho.spectrum() - rotated.spectrum()).cwiseAbs().maxCoeff(), 1e-12);
  for (int q = 0; q < 3; ++q) {
    const auto a = partial_trace(rho, {q}).spectrum();
    const auto b = partial_trace(rotated, {q}).spectrum();
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(NamedStates, Definitions) {
  EXPECT_NEAR(std::abs(ghz_state().amplitudes()(7)), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(std::abs(ghz_state().amplitudes().dot(ghz_state(-1.0).amplitudes())), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(w_state().amplitudes().dot(w_bar_state().amplitudes())), 0.0, 1e-15);
  EXPECT_LT((pauli_x() * pauli_y() - cplx(0, 1) * pauli_z()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(EigHermitian, RejectsNonHermitian) {
  CMatrix m = CMatrix::Identity(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(eig_hermitian(m), std::domain_error);
}
