#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "entwit/datagen.hpp"
#include "entwit/svm.hpp"
#include "entwit/svm_io.hpp"
#include "entwit/witness.hpp"

using namespace entwit;
using namespace entwit::witness;

namespace {

svm::SvmModel random_model(int n_qubits, int degree, int n_sv, Rng& rng) {
  svm::SvmModel m;
  m.n_qubits = n_qubits;
  m.degree = degree;
  m.support.resize(n_sv, datagen::feature_dimension(n_qubits));
  m.signed_alphas.resize(n_sv);
  for (int i = 0; i < n_sv; ++i) {
    m.support.row(i) = datagen::features(qstate::sample_ginibre_state(n_qubits, rng)).transpose();
    m.signed_alphas(i) = rng.normal();
  }
  m.signed_alphas.array() -= m.signed_alphas.mean();  // sum s_i = 0 like a trained model
  m.bias = rng.normal();
  return m;
}

}  // namespace

TEST(DualBasis, ReproducesFeatures) {
  Rng rng(61);
  for (int n = 1; n <= 3; ++n) {
    const auto basis = feature_dual_basis(n);
    ASSERT_EQ(static_cast<int>(basis.operators.size()), datagen::feature_dimension(n));
    for (const auto& e : basis.operators) EXPECT_EQ(qstate::hermiticity_error(e), 0.0);
    const auto rho = qstate::sample_ginibre_state(n, rng);
    const auto f = datagen::features(rho);
    for (std::size_t k = 0; k < basis.operators.size(); ++k)
      EXPECT_NEAR((basis.operators[k] * rho.matrix()).trace().real(), f(static_cast<Eigen::Index>(k)), 1e-15);
  }
  EXPECT_THROW(feature_dual_basis(4), std::domain_error);
}

TEST(DualBasis, OmegaExamples) {
  const auto basis = feature_dual_basis(1);
  Eigen::VectorXd x(3);
  x << 0.25, 0.5, -1.0;  // diag0, Re01, Im01
  const CMatrix omega = build_omega(x, basis);
  EXPECT_EQ(omega(0, 0), cplx(0.25, 0));
  EXPECT_EQ(omega(1, 1), cplx(0, 0));
  EXPECT_EQ(omega(0, 1), cplx(0.25, -0.5));
  EXPECT_EQ(omega(1, 0), cplx(0.25, 0.5));

  // <x, features(rho)> = Tr[omega rho] for any Hermitian trace-one rho.
  Rng rng(62);
  const auto b2 = feature_dual_basis(2);
  for (int i = 0; i < 10; ++i) {
    const auto a = qstate::sample_ginibre_state(2, rng);
    const auto r = qstate::sample_ginibre_state(2, rng);
    const auto xa = datagen::features(a);
    EXPECT_NEAR((build_omega(xa, b2) * r.matrix()).trace().real(), xa.dot(datagen::features(r)), 1e-14);
  }
  EXPECT_THROW(build_omega(Eigen::VectorXd::Zero(4), basis), std::domain_error);
}

TEST(Witness, SingleSupportVectorDegreeTwo) {
  // One support vector, s = 1: W = 2 omega (x) I + omega (x) omega.
  Rng rng(63);
  svm::SvmModel m = random_model(1, 2, 1, rng);
  m.signed_alphas(0) = 1.0;
  const auto basis = feature_dual_basis(1);
  const auto w = build_witness(m, basis);
  const CMatrix omega = build_omega(m.support.row(0).transpose(), basis);
  const CMatrix expected = 2.0 * qstate::kron(omega, CMatrix::Identity(2, 2)) + qstate::kron(omega, omega);
  EXPECT_LT((w.matrix - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(w.copies, 2);
  EXPECT_EQ(w.dimension(), 4);
}

TEST(Witness, MatchesKernelDecision) {
  Rng rng(64);
  for (int nq = 1; nq <= 2; ++nq) {
    const int max_degree = nq == 1 ? 6 : 4;
    const auto basis = feature_dual_basis(nq);
    for (int degree = 1; degree <= max_degree; ++degree) {
      const auto m = random_model(nq, degree, 12, rng);
      const auto w = build_witness(m, basis);
      EXPECT_LT(qstate::hermiticity_error(w.matrix), 1e-12);
      for (int i = 0; i < 10; ++i) {
        const auto rho = qstate::sample_ginibre_state(nq, rng);
        const double kernel = svm::decide(m, datagen::features(rho));
        EXPECT_NEAR(evaluate_witness(w, rho), kernel, 1e-9 * std::max(1.0, std::abs(kernel)));
      }
    }
  }
  // Three qubits, two copies: 64 x 64.
  const auto m3 = random_model(3, 2, 6, rng);
  const auto w3 = build_witness(m3, feature_dual_basis(3));
  const auto rho = qstate::sample_ginibre_state(3, rng);
  const double kernel = svm::decide(m3, datagen::features(rho));
  EXPECT_NEAR(evaluate_witness(w3, rho), kernel, 1e-9 * std::max(1.0, std::abs(kernel)));
}

TEST(Witness, TrainedModelAgreesOnTestStates) {
  const auto ds = datagen::sample_two_qubit_balanced(150, 3, {{0.8, 0.1, 0.1}});
  svm::TrainOptions o;
  o.degree = 3;
  const auto r = svm::train(ds.samples(datagen::Split::Train), ds.labels(datagen::Split::Train), o);
  const auto w = build_witness(r.model, feature_dual_basis(2));
  Rng rng(65);
  for (int i = 0; i < 20; ++i) {
    const auto rho = qstate::sample_ginibre_state(2, rng);
    const double kernel = svm::decide(r.model, datagen::features(rho));
    const double op = evaluate_witness(w, rho);
    EXPECT_NEAR(op, kernel, 1e-9 * std::max(1.0, std::abs(kernel)));
  }
}

TEST(Witness, SupportOrderDoesNotChangeBits) {
  Rng rng(66);
  const auto m = random_model(2, 3, 15, rng);
  auto shuffled = m;
  std::vector<int> perm(15);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (int i = 0; i < 15; ++i) {
    shuffled.support.row(i) = m.support.row(perm[i]);
    shuffled.signed_alphas(i) = m.signed_alphas(perm[i]);
  }
  const auto basis = feature_dual_basis(2);
  const auto a = build_witness(m, basis);
  const auto b = build_witness(shuffled, basis);
  EXPECT_EQ(serialize_witness(a), serialize_witness(b));
}

TEST(Witness, DimensionCap) {
  Rng rng(67);
  const auto m = random_model(3, 5, 2, rng);  // 2^15 > 4096
  EXPECT_THROW(build_witness(m, feature_dual_basis(3)), DimensionCapExceeded);
  try {
    build_witness(m, feature_dual_basis(3));
  } catch (const DimensionCapExceeded& e) {
    EXPECT_NE(std::string(e.what()).find("kernel form"), std::string::npos);
  }
  EXPECT_NO_THROW(build_witness(random_model(2, 6, 2, rng), feature_dual_basis(2)));  // exactly 4096
  EXPECT_THROW(build_witness(m, feature_dual_basis(2)), std::domain_error);
  EXPECT_EQ(witness_dimension(2, 4), 256);
  EXPECT_EQ(binomial(6, 3), 20u);
}

TEST(WitnessIo, RoundTripAndMetadata) {
  Rng rng(68);
  const auto m = random_model(2, 2, 5, rng);
  const auto w = build_witness(m, feature_dual_basis(2));
  const auto path = (std::filesystem::temp_directory_path() / "entwit_test_witness.bin").string();
  const auto mh = hex_digest(svm::model_hash(m));
  save_witness(w, path, mh);
  const auto back = load_witness(path);
  EXPECT_EQ(back.n_qubits, 2);
  EXPECT_EQ(back.copies, 2);
  EXPECT_EQ(back.bias, w.bias);
  EXPECT_TRUE((back.matrix.array() == w.matrix.array()).all());
  EXPECT_EQ(std::filesystem::file_size(path), 28u + 16u * 16u * 16u);

  std::ifstream meta_in(path + ".json");
  const auto meta = nlohmann::json::parse(meta_in);
  EXPECT_EQ(meta.at("source_model_hash").get<std::string>(), mh);
  EXPECT_EQ(meta.at("payload_hash").get<std::string>(), hex_digest(fnv1a(serialize_witness(w))));
  EXPECT_LT(meta.at("hermiticity_error").get<double>(), 1e-12);

  auto bytes = serialize_witness(w);
  EXPECT_THROW(deserialize_witness(bytes.substr(0, bytes.size() - 1)), std::runtime_error);
  bytes[0] = 7;
  EXPECT_THROW(deserialize_witness(bytes), std::runtime_error);
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".json");
}
