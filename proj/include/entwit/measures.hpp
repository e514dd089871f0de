#pragma once

// Entanglement quantifiers and exact labelers for the state families used in
// the three-qubit datasets. Entropies are in nats.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "entwit/ghz_w_tangle.hpp"
#include "entwit/qstate.hpp"

namespace entwit::measures {

using qstate::DensityMatrix;
using qstate::PureState;

inline constexpr double kPurityTol = 1e-8;
inline constexpr double kEntropyZeroTol = 1e-8;
// Numerically evaluated roofs are treated as zero below this.
inline constexpr double kRoofZeroTol = 1e-9;

enum class EntanglementClass { Sep, BisepA_BC, BisepB_AC, BisepC_AB, Gme };

enum class Partition { A_BC, B_AC, C_AB };

inline std::string_view to_string(EntanglementClass c) {
  switch (c) {
    case EntanglementClass::Sep: return "SEP";
    case EntanglementClass::BisepA_BC: return "BISEP_A_BC";
    case EntanglementClass::BisepB_AC: return "BISEP_B_AC";
    case EntanglementClass::BisepC_AB: return "BISEP_C_AB";
    case EntanglementClass::Gme: return "GME";
  }
  return "?";
}

inline std::string_view to_string(Partition p) {
  switch (p) {
    case Partition::A_BC: return "A-BC";
    case Partition::B_AC: return "B-AC";
    case Partition::C_AB: return "C-AB";
  }
  return "?";
}

/// The single qubit split off by a biseparable partition.
inline int lone_qubit(Partition p) { return static_cast<int>(p); }

inline EntanglementClass biseparable_class(Partition p) {
  switch (p) {
    case Partition::A_BC: return EntanglementClass::BisepA_BC;
    case Partition::B_AC: return EntanglementClass::BisepB_AC;
    case Partition::C_AB: return EntanglementClass::BisepC_AB;
  }
  throw std::domain_error("invalid partition");
}

/// Entanglement class with its SEP-vs-all and GME-vs-all projections.
class EntanglementLabel {
 public:
  explicit EntanglementLabel(EntanglementClass c) : class_(c) {}

  EntanglementClass entanglement_class() const { return class_; }
  int sep_vs_all() const { return class_ == EntanglementClass::Sep ? -1 : +1; }
  int gme_vs_all() const { return class_ == EntanglementClass::Gme ? +1 : -1; }

  bool operator==(const EntanglementLabel&) const = default;

 private:
  EntanglementClass class_;
};

class UnlabelableState : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {

inline void require_qubits(const DensityMatrix& rho, int n, const char* what) {
  if (rho.n_qubits() != n) throw std::domain_error(std::string(what) + ": wrong number of qubits");
}

inline void require_pure(const DensityMatrix& rho, const char* what) {
  if (rho.purity() < 1.0 - kPurityTol) throw std::domain_error(std::string(what) + ": input state is mixed");
}

inline double von_neumann(const DensityMatrix& rho) {
  double s = 0.0;
  for (double lambda : rho.spectrum())
    if (lambda > 0.0) s -= lambda * std::log(lambda);
  return std::max(0.0, s);
}

inline CMatrix sqrt_psd(const CMatrix& m) {
  const auto es = qstate::eig_hermitian(m);
  const Eigen::VectorXd root = es.values.cwiseMax(0.0).cwiseSqrt();
  return es.vectors * root.asDiagonal() * es.vectors.adjoint();
}

// Square roots of the two largest eigenvalues of rho~ rho, descending.
inline std::array<double, 2> spin_flip_roots(const CMatrix& rho2) {
  const CMatrix yy = qstate::kron(qstate::pauli_y(), qstate::pauli_y());
  const CMatrix tilde = yy * rho2.conjugate() * yy;
  const CMatrix root = sqrt_psd(rho2);
  const auto es = qstate::eig_hermitian(qstate::hermitize(root * tilde * root));
  const auto& v = es.values;  // ascending
  const Eigen::Index n = v.size();
  return {std::sqrt(std::max(0.0, v(n - 1))), std::sqrt(std::max(0.0, v(n - 2)))};
}

}  // namespace detail

// Two qubits ------------------------------------------------------------------

/// PPT test across the A|B cut; exact separability verdict for two qubits.
inline bool ppt_entangled(const DensityMatrix& rho, double tol = 1e-10) {
  detail::require_qubits(rho, 2, "ppt_entangled");
  const auto es = qstate::eig_hermitian(qstate::partial_transpose(rho, 1));
  return es.values(0) < -tol;
}

// Pure three-qubit measures ----------------------------------------------------

inline double entanglement_entropy(const DensityMatrix& rho, int qubit) {
  detail::require_pure(rho, "entanglement_entropy");
  const int keep[] = {qubit};
  return detail::von_neumann(qstate::partial_trace(rho, keep));
}

inline double entanglement_entropy(const PureState& psi, int qubit) {
  return entanglement_entropy(DensityMatrix::from_pure(psi), qubit);
}

/// 2 min over {AB, BC, AC} of sqrt(1 - Tr[rho_i^2]).
inline double gme_concurrence_pure(const DensityMatrix& rho) {
  detail::require_qubits(rho, 3, "gme_concurrence_pure");
  detail::require_pure(rho, "gme_concurrence_pure");
  constexpr std::array<std::array<int, 2>, 3> pairs{{{0, 1}, {1, 2}, {0, 2}}};
  double smallest = std::numeric_limits<double>::infinity();
  for (const auto& pair : pairs) {
    const auto reduced = qstate::partial_trace(rho, pair);
    smallest = std::min(smallest, std::sqrt(std::max(0.0, 1.0 - reduced.purity())));
  }
  return 2.0 * smallest;
}

inline double gme_concurrence_pure(const PureState& psi) { return gme_concurrence_pure(DensityMatrix::from_pure(psi)); }

/// tau = 2 (l1 l2 |_AB + l1 l2 |_AC), l the square roots of the two largest
/// eigenvalues of rho~ rho on each reduced pair. Meaningful for pure inputs.
inline double three_tangle(const DensityMatrix& rho) {
  detail::require_qubits(rho, 3, "three_tangle");
  const int ab[] = {0, 1};
  const int ac[] = {0, 2};
  const auto lab = detail::spin_flip_roots(qstate::partial_trace(rho.matrix(), 3, ab));
  const auto lac = detail::spin_flip_roots(qstate::partial_trace(rho.matrix(), 3, ac));
  return std::max(0.0, 2.0 * (lab[0] * lab[1] + lac[0] * lac[1]));
}

inline double three_tangle(const PureState& psi) { return three_tangle(DensityMatrix::from_pure(psi)); }

// X states -------------------------------------------------------------------

/// rho = diag(a1..a4, b4..b1) + antidiag(z1..z4, z4*..z1*), pairing basis
/// index k with 7 - k.
struct XStateParams {
  std::array<double, 4> a{};
  std::array<double, 4> b{};
  std::array<cplx, 4> z{};
};

inline void validate(const XStateParams& x) {
  constexpr double tol = 1e-12;
  double total = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (x.a[i] < -tol || x.b[i] < -tol) throw std::domain_error("XStateParams: negative diagonal weight");
    if (std::abs(x.z[i]) > std::sqrt(std::max(0.0, x.a[i] * x.b[i])) + tol)
      throw std::domain_error("XStateParams: |z_i| exceeds sqrt(a_i b_i)");
    total += x.a[i] + x.b[i];
  }
  if (std::abs(total - 1.0) > 1e-10) throw std::domain_error("XStateParams: diagonal does not sum to one");
}

inline DensityMatrix x_state(const XStateParams& x) {
  validate(x);
  CMatrix m = CMatrix::Zero(8, 8);
  for (int i = 0; i < 4; ++i) {
    m(i, i) = x.a[i];
    m(7 - i, 7 - i) = x.b[i];
    m(i, 7 - i) = x.z[i];
    m(7 - i, i) = std::conj(x.z[i]);
  }
  return DensityMatrix::repaired(3, m);
}

/// 2 max(0, max_i |z_i| - w_i), w_i = sum_{j != i} sqrt(a_j b_j). Normalized
/// to 1 on GHZ.
inline double x_state_gme_concurrence(const XStateParams& x) {
  validate(x);
  std::array<double, 4> roots{};
  double total_root = 0.0;
  for (int i = 0; i < 4; ++i) {
    roots[i] = std::sqrt(std::max(0.0, x.a[i] * x.b[i]));
    total_root += roots[i];
  }
  double best = 0.0;
  for (int i = 0; i < 4; ++i) best = std::max(best, std::abs(x.z[i]) - (total_root - roots[i]));
  return 2.0 * best;
}

// GHZ-symmetric states ---------------------------------------------------------

/// p |GHZ+><GHZ+| + q |GHZ-><GHZ-| + (1 - p - q) I/8
struct GhzSymmetricParams {
  double p = 0.0;
  double q = 0.0;
};

enum class GhzSymmetricClass { FullySeparable, Biseparable, Gme };

inline void validate(const GhzSymmetricParams& g) {
  constexpr double eps = 1e-12;
  if (!(g.p >= -eps && g.q >= -eps && g.p + g.q <= 1.0 + eps))
    throw std::domain_error("GhzSymmetricParams: weights must satisfy p, q >= 0 and p + q <= 1");
}

inline DensityMatrix ghz_symmetric_state(const GhzSymmetricParams& g) {
  validate(g);
  const CMatrix plus = qstate::ghz_state(+1.0).projector();
  const CMatrix minus = qstate::ghz_state(-1.0).projector();
  const CMatrix id = CMatrix::Identity(8, 8) / 8.0;
  return DensityMatrix::repaired(3, g.p * plus + g.q * minus + (1.0 - g.p - g.q) * id);
}

/// The same state written as an X state: coherence (p - q)/2 on the outer
/// antidiagonal, white-noise weight (1 - p - q)/8 on every diagonal entry.
inline XStateParams as_x_state(const GhzSymmetricParams& g) {
  validate(g);
  const double noise = (1.0 - g.p - g.q) / 8.0;
  XStateParams x;
  for (int i = 0; i < 4; ++i) x.a[i] = x.b[i] = noise;
  x.a[0] += (g.p + g.q) / 2.0;
  x.b[0] += (g.p + g.q) / 2.0;
  x.z[0] = (g.p - g.q) / 2.0;
  return x;
}

/// With r = 1 - p - q and d = |p - q|: fully separable iff d <= r/4, GME iff
/// d > 3r/4, biseparable in between. The GME border is the X-state concurrence
/// border (equivalently max GHZ fidelity > 1/2); the separable border is the
/// hull of twirled product states, which is tangent to the PPT border here.
inline GhzSymmetricClass ghz_symmetric_class(const GhzSymmetricParams& g) {
  validate(g);
  const double r = std::max(0.0, 1.0 - g.p - g.q);
  const double d = std::abs(g.p - g.q);
  if (d > 0.75 * r) return GhzSymmetricClass::Gme;
  if (d <= 0.25 * r) return GhzSymmetricClass::FullySeparable;
  return GhzSymmetricClass::Biseparable;
}

inline double ghz_symmetric_gme_concurrence(const GhzSymmetricParams& g) {
  return x_state_gme_concurrence(as_x_state(g));
}

// GHZ + W mixtures -------------------------------------------------------------

inline DensityMatrix ghz_w_state(const GhzWParams& g) {
  validate(g);
  const CMatrix ghz = qstate::ghz_state().projector();
  const CMatrix w = qstate::w_state().projector();
  const CMatrix wbar = qstate::w_bar_state().projector();
  return DensityMatrix::repaired(3, g.p * ghz + g.q * w + (1.0 - g.p - g.q) * wbar);
}

// Table I labeling -------------------------------------------------------------

/// How a state was produced; the labeler only trusts what construction proves.
namespace provenance {
struct Pure {};
struct SeparableMixture {};
struct BiseparableMixture {
  Partition partition;
};
struct XState {
  XStateParams params;
};
struct GhzSymmetric {
  GhzSymmetricParams params;
};
struct GhzW {
  GhzWParams params;
};
}  // namespace provenance

using Provenance = std::variant<provenance::Pure, provenance::SeparableMixture, provenance::BiseparableMixture,
                                provenance::XState, provenance::GhzSymmetric, provenance::GhzW>;

namespace detail {

inline EntanglementLabel label_pure(const DensityMatrix& rho) {
  require_pure(rho, "label_state");
  std::array<bool, 3> zero{};
  int zeros = 0;
  for (int m = 0; m < 3; ++m) {
    zero[m] = entanglement_entropy(rho, m) <= kEntropyZeroTol;
    zeros += zero[m] ? 1 : 0;
  }
  if (zeros == 3) return EntanglementLabel(EntanglementClass::Sep);
  if (zeros == 1) {
    for (int m = 0; m < 3; ++m)
      if (zero[m]) return EntanglementLabel(biseparable_class(static_cast<Partition>(m)));
  }
  if (zeros == 0 && three_tangle(rho) > kEntropyZeroTol) return EntanglementLabel(EntanglementClass::Gme);
  throw UnlabelableState("label_state: pure state outside the GHZ, biseparable and separable rows");
}

}  // namespace detail

inline EntanglementLabel label_state(const DensityMatrix& rho, const Provenance& origin) {
  detail::require_qubits(rho, 3, "label_state");
  return std::visit(
      [&](const auto& o) -> EntanglementLabel {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, provenance::Pure>) {
          return detail::label_pure(rho);
        } else if constexpr (std::is_same_v<T, provenance::SeparableMixture>) {
          return EntanglementLabel(EntanglementClass::Sep);
        } else if constexpr (std::is_same_v<T, provenance::BiseparableMixture>) {
          return EntanglementLabel(biseparable_class(o.partition));
        } else if constexpr (std::is_same_v<T, provenance::XState>) {
          if (x_state_gme_concurrence(o.params) > 0.0) return EntanglementLabel(EntanglementClass::Gme);
          throw UnlabelableState("label_state: X state with vanishing GME-concurrence");
        } else if constexpr (std::is_same_v<T, provenance::GhzSymmetric>) {
          switch (ghz_symmetric_class(o.params)) {
            case GhzSymmetricClass::Gme: return EntanglementLabel(EntanglementClass::Gme);
            case GhzSymmetricClass::FullySeparable: return EntanglementLabel(EntanglementClass::Sep);
            case GhzSymmetricClass::Biseparable: break;
          }
          throw UnlabelableState("label_state: GHZ-symmetric state is biseparable without a fixed partition");
        } else {
          if (ghz_w_three_tangle(o.params) > kRoofZeroTol) return EntanglementLabel(EntanglementClass::Gme);
          throw UnlabelableState("label_state: GHZ+W mixture with vanishing three-tangle");
        }
      },
      origin);
}

}  // namespace entwit::measures
