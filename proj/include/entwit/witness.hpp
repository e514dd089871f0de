#pragma once

// Explicit witness operator for a polynomial-kernel model. With E_k the dual
// basis of the feature map (Tr[E_k rho] = features(rho)[k]) and
// omega_i = sum_k x_ik E_k, expanding (<x_i, x> + 1)^n binomially and using
// Tr[rho] = 1 for the identity padding gives
//
//     f(rho) = Tr[W rho^{(x)n}] + b,
//     W = sum_i y_i a_i sum_{l=1..n} C(n, l) omega_i^{(x)l} (x) I^{(x)(n-l)}.
//
// The l = 0 terms add up to sum_i y_i a_i = 0 and are dropped.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "entwit/features.hpp"
#include "entwit/hash.hpp"
#include "entwit/qstate.hpp"
#include "entwit/svm.hpp"

namespace entwit::witness {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

inline constexpr std::int64_t kDefaultDimensionCap = 4096;
inline constexpr double kWitnessHermitianTol = 1e-10;

class DimensionCapExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

struct FeatureDualBasis {
  int n_qubits = 0;
  std::vector<CMatrix> operators;  // ordered like datagen::features
};

inline FeatureDualBasis feature_dual_basis(int n_qubits) {
  if (n_qubits < 1 || n_qubits > 3) throw std::domain_error("feature_dual_basis: n_qubits must be in 1..3");
  const int dim = qstate::dim_of(n_qubits);
  const int pairs = dim * (dim - 1) / 2;
  FeatureDualBasis basis;
  basis.n_qubits = n_qubits;
  basis.operators.assign(static_cast<std::size_t>(dim * dim - 1), CMatrix::Zero(dim, dim));
  auto& ops = basis.operators;
  for (int a = 0; a < dim - 1; ++a) ops[a](a, a) = 1.0;
  int k = 0;
  for (int a = 0; a < dim; ++a) {
    for (int b = a + 1; b < dim; ++b, ++k) {
      auto& re = ops[dim - 1 + k];
      re(a, b) = 0.5;
      re(b, a) = 0.5;
      auto& im = ops[dim - 1 + pairs + k];
      im(a, b) = cplx(0.0, 0.5);
      im(b, a) = cplx(0.0, -0.5);
    }
  }
  return basis;
}

inline CMatrix build_omega(const Eigen::VectorXd& x, const FeatureDualBasis& basis) {
  if (x.size() != static_cast<Eigen::Index>(basis.operators.size()))
    throw std::domain_error("build_omega: feature dimension does not match the basis");
  const int dim = qstate::dim_of(basis.n_qubits);
  CMatrix omega = CMatrix::Zero(dim, dim);
  for (Eigen::Index k = 0; k < x.size(); ++k)
    if (x(k) != 0.0) omega += x(k) * basis.operators[static_cast<std::size_t>(k)];
  return omega;
}

struct WitnessOperator {
  int n_qubits = 0;
  int copies = 1;
  CMatrix matrix;
  double bias = 0.0;

  Eigen::Index dimension() const { return matrix.rows(); }
};

inline std::int64_t witness_dimension(int n_qubits, int copies) {
  const int bits = n_qubits * copies;
  if (bits >= 62) return std::numeric_limits<std::int64_t>::max();
  return std::int64_t{1} << bits;
}

inline std::uint64_t binomial(int n, int k) {
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

inline WitnessOperator build_witness(const svm::SvmModel& model, const FeatureDualBasis& basis,
                                     std::int64_t cap = kDefaultDimensionCap) {
  if (model.feature_dimension() != static_cast<Eigen::Index>(basis.operators.size()))
    throw std::domain_error("build_witness: model was trained on a different number of qubits");
  const int n = model.degree;
  const std::int64_t dim = witness_dimension(basis.n_qubits, n);
  if (dim > cap)
    throw DimensionCapExceeded("build_witness: witness dimension " + std::to_string(dim) + " exceeds the cap of " +
                               std::to_string(cap) + "; evaluate this model through the kernel form instead");

  // Canonical summation order, so reordered support vectors give bitwise-equal matrices.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(model.support_count()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (model.signed_alphas(a) != model.signed_alphas(b)) return model.signed_alphas(a) < model.signed_alphas(b);
    const auto ra = model.support.row(a);
    const auto rb = model.support.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });

  // sums[l] = sum_i s_i omega_i^{(x)l}, l = 1..n
  std::vector<CMatrix> sums(static_cast<std::size_t>(n + 1));
  for (int l = 1; l <= n; ++l) {
    const auto dl = static_cast<Eigen::Index>(witness_dimension(basis.n_qubits, l));
    sums[l] = CMatrix::Zero(dl, dl);
  }
  for (Eigen::Index i : order) {
    const CMatrix omega = build_omega(model.support.row(i).transpose(), basis);
    CMatrix power = omega;
    for (int l = 1; l <= n; ++l) {
      if (l > 1) power = qstate::kron(power, omega);
      sums[l] += model.signed_alphas(i) * power;
    }
  }

  WitnessOperator w;
  w.n_qubits = basis.n_qubits;
  w.copies = n;
  w.bias = model.bias;
  w.matrix = CMatrix::Zero(dim, dim);
  for (int l = 1; l <= n; ++l) {
    const CMatrix pad = CMatrix::Identity(static_cast<Eigen::Index>(witness_dimension(basis.n_qubits, n - l)),
                                          static_cast<Eigen::Index>(witness_dimension(basis.n_qubits, n - l)));
    w.matrix += static_cast<double>(binomial(n, l)) * (l == n ? sums[l] : qstate::kron(sums[l], pad));
  }
  return w;
}

/// Tr[W rho^{(x)n}] + b. Positive values flag the state as entangled.
inline double evaluate_witness(const WitnessOperator& w, const qstate::DensityMatrix& rho) {
  if (rho.n_qubits() != w.n_qubits) throw std::domain_error("evaluate_witness: qubit count mismatch");
  const CMatrix copies = qstate::kron_power(rho.matrix(), w.copies);
  if (copies.rows() != w.matrix.rows()) throw std::domain_error("evaluate_witness: dimension mismatch");
  // Tr[W R] = sum_ab W_ab R_ba
  return (w.matrix.cwiseProduct(copies.transpose())).sum().real() + w.bias;
}

// Export ------------------------------------------------------------------------
//
// Binary: uint32 version, uint32 N, uint32 n, uint64 dim, float64 bias,
// then dim * dim complex entries row-major as float64 (re, im), little-endian.

inline constexpr std::uint32_t kWitnessFormatVersion = 1;

inline std::string serialize_witness(const WitnessOperator& w) {
  std::string out;
  auto put = [&](const auto& v) { out.append(reinterpret_cast<const char*>(&v), sizeof v); };
  put(kWitnessFormatVersion);
  put(static_cast<std::uint32_t>(w.n_qubits));
  put(static_cast<std::uint32_t>(w.copies));
  put(static_cast<std::uint64_t>(w.dimension()));
  put(w.bias);
  for (Eigen::Index a = 0; a < w.dimension(); ++a) {
    for (Eigen::Index b = 0; b < w.dimension(); ++b) {
      put(w.matrix(a, b).real());
      put(w.matrix(a, b).imag());
    }
  }
  return out;
}

inline WitnessOperator deserialize_witness(const std::string& bytes) {
  std::size_t pos = 0;
  auto get = [&](auto& v) {
    if (pos + sizeof v > bytes.size()) throw std::runtime_error("witness file is truncated");
    std::memcpy(&v, bytes.data() + pos, sizeof v);
    pos += sizeof v;
  };
  std::uint32_t version = 0, n_qubits = 0, copies = 0;
  std::uint64_t dim = 0;
  WitnessOperator w;
  get(version);
  if (version != kWitnessFormatVersion) throw std::runtime_error("unsupported witness format version");
  get(n_qubits);
  get(copies);
  get(dim);
  get(w.bias);
  if (n_qubits < 1 || copies < 1 || static_cast<std::int64_t>(dim) != witness_dimension(int(n_qubits), int(copies)))
    throw std::runtime_error("witness header is inconsistent");
  if (bytes.size() != pos + dim * dim * 16) throw std::runtime_error("witness payload has the wrong size");
  w.n_qubits = static_cast<int>(n_qubits);
  w.copies = static_cast<int>(copies);
  w.matrix.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (Eigen::Index a = 0; a < w.matrix.rows(); ++a) {
    for (Eigen::Index b = 0; b < w.matrix.cols(); ++b) {
      double re, im;
      get(re);
      get(im);
      w.matrix(a, b) = cplx(re, im);
    }
  }
  return w;
}

inline nlohmann::json witness_metadata(const WitnessOperator& w, const std::string& source_model_hash,
                                       const std::string& payload) {
  return {{"version", kWitnessFormatVersion},
          {"n_qubits", w.n_qubits},
          {"copies", w.copies},
          {"dim", w.dimension()},
          {"bias", w.bias},
          {"hermiticity_error", qstate::hermiticity_error(w.matrix)},
          {"source_model_hash", source_model_hash},
          {"payload_hash", hex_digest(fnv1a(payload))}};
}

inline void save_witness(const WitnessOperator& w, const std::string& path, const std::string& source_model_hash) {
  const std::string payload = serialize_witness(w);
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
  }
  std::ofstream meta(path + ".json");
  if (!meta) throw std::runtime_error("cannot open '" + path + ".json' for writing");
  meta << witness_metadata(w, source_model_hash, payload).dump(2) << '\n';
}

inline WitnessOperator load_witness(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return deserialize_witness(bytes);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace entwit::witness
