#pragma once

// Labeled dataset construction for the two- and three-qubit classifiers.
//
// Every row draws from its own counter-based stream Rng(seed, row), so the
// output does not depend on how generation is spread over threads.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "entwit/features.hpp"
#include "entwit/measures.hpp"
#include "entwit/parallel.hpp"
#include "entwit/qstate.hpp"
#include "entwit/rng.hpp"

namespace entwit::datagen {

using measures::Partition;
using qstate::DensityMatrix;
using qstate::PureState;

using Samples = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class DatasetKind { TwoQubit, SepVsAll, GmeVsAll };
enum class Split { Train, Validation, Test };
enum class GmeFamily { GhzPure, GhzSym, XState, GhzW };

inline constexpr std::array<GmeFamily, 4> kGmeFamilies{GmeFamily::GhzPure, GmeFamily::GhzSym, GmeFamily::XState,
                                                       GmeFamily::GhzW};

inline std::string_view to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::TwoQubit: return "two-qubit";
    case DatasetKind::SepVsAll: return "sep-vs-all";
    case DatasetKind::GmeVsAll: return "gme-vs-all";
  }
  return "?";
}

inline DatasetKind parse_kind(std::string_view s) {
  if (s == "two-qubit") return DatasetKind::TwoQubit;
  if (s == "sep-vs-all") return DatasetKind::SepVsAll;
  if (s == "gme-vs-all") return DatasetKind::GmeVsAll;
  throw std::invalid_argument("unknown dataset kind '" + std::string(s) + "'");
}

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "?";
}

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "validation") return Split::Validation;
  if (s == "test") return Split::Test;
  throw std::invalid_argument("unknown split '" + std::string(s) + "'");
}

inline std::string_view to_string(GmeFamily f) {
  switch (f) {
    case GmeFamily::GhzPure: return "ghz_pure";
    case GmeFamily::GhzSym: return "ghz_sym";
    case GmeFamily::XState: return "x_state";
    case GmeFamily::GhzW: return "ghz_w";
  }
  return "?";
}

namespace family {
inline constexpr std::string_view kHilbertSchmidt = "hs";
inline constexpr std::string_view kSeparableMixed = "sep_mixed";
inline std::string bisep(Partition p, bool mixed) {
  std::string s = mixed ? "bisep_mixed_" : "bisep_";
  switch (p) {
    case Partition::A_BC: return s + "a_bc";
    case Partition::B_AC: return s + "b_ac";
    case Partition::C_AB: return s + "c_ab";
  }
  return s;
}
}  // namespace family

struct SplitFractions {
  double train = 0.98;
  double validation = 0.01;
  double test = 0.01;
};

inline constexpr SplitFractions kTwoQubitSplits{0.98, 0.01, 0.01};
inline constexpr SplitFractions kThreeQubitSplits{0.90, 0.05, 0.05};

struct DatasetRow {
  int label = 0;
  std::string family;
  Split split = Split::Train;
  FeatureVector x;
  std::optional<CMatrix> state;  // kept only when requested
};

struct LabeledDataset {
  int n_qubits = 0;
  DatasetKind kind = DatasetKind::TwoQubit;
  std::uint64_t seed = 0;
  std::string config_hash;  // of the run that produced it, empty if unknown
  std::vector<DatasetRow> rows;

  std::vector<std::size_t> indices(Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i].split == s) out.push_back(i);
    return out;
  }

  Samples samples(Split s) const { return gather(indices(s)); }

  std::vector<int> labels(Split s) const {
    std::vector<int> y;
    for (const auto& r : rows)
      if (r.split == s) y.push_back(r.label);
    return y;
  }

  std::vector<std::string> families(Split s) const {
    std::vector<std::string> f;
    for (const auto& r : rows)
      if (r.split == s) f.push_back(r.family);
    return f;
  }

  std::size_t count(Split s) const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [&](const auto& r) { return r.split == s; }));
  }

  Samples gather(const std::vector<std::size_t>& idx) const {
    const int d = feature_dimension(n_qubits);
    Samples x(static_cast<Eigen::Index>(idx.size()), d);
    for (std::size_t i = 0; i < idx.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = rows[idx[i]].x.transpose();
    return x;
  }
};

// Samplers -------------------------------------------------------------------

inline int random_mixture_terms(Rng& rng) { return rng.uniform_int(2, 8); }

inline PureState product_pure_state(Rng& rng) {
  CVector v = qstate::haar_pure_state(1, rng).amplitudes();
  for (int q = 1; q < 3; ++q) v = qstate::kron(v, qstate::haar_pure_state(1, rng).amplitudes());
  return PureState::normalized(3, v);
}

/// sum_k p_k rho_A (x) rho_B (x) rho_C over random pure products, flat Dirichlet weights.
inline DensityMatrix sample_sep_mixed(int n_terms, Rng& rng) {
  if (n_terms < 1) throw std::domain_error("sample_sep_mixed: n_terms must be >= 1");
  const auto w = rng.dirichlet(static_cast<std::size_t>(n_terms));
  CMatrix m = CMatrix::Zero(8, 8);
  for (int k = 0; k < n_terms; ++k) m += w[k] * product_pure_state(rng).projector();
  return DensityMatrix::repaired(3, m);
}

/// Haar single qubit (x) Haar two-qubit pure state, the pair verified NPT.
inline PureState sample_bisep_pure(Partition partition, Rng& rng) {
  const int lone = measures::lone_qubit(partition);
  if (lone < 0 || lone > 2) throw std::domain_error("sample_bisep_pure: invalid partition");
  PureState pair = qstate::haar_pure_state(2, rng);
  while (!measures::ppt_entangled(DensityMatrix::from_pure(pair), 1e-6)) pair = qstate::haar_pure_state(2, rng);
  const PureState single = qstate::haar_pure_state(1, rng);

  // Build as (lone, pair) and move the lone factor into place.
  const CVector joint = qstate::kron(single.amplitudes(), pair.amplitudes());
  std::array<int, 3> perm{};  // output qubit k <- joint qubit perm[k]
  int next_pair_slot = 1;
  for (int k = 0; k < 3; ++k) perm[k] = (k == lone) ? 0 : next_pair_slot++;
  return PureState::normalized(3, qstate::permute_qubits(joint, perm));
}

inline DensityMatrix sample_bisep_mixed(Partition partition, int n_terms, Rng& rng) {
  if (n_terms < 1) throw std::domain_error("sample_bisep_mixed: n_terms must be >= 1");
  const auto w = rng.dirichlet(static_cast<std::size_t>(n_terms));
  CMatrix m = CMatrix::Zero(8, 8);
  for (int k = 0; k < n_terms; ++k) m += w[k] * sample_bisep_pure(partition, rng).projector();
  return DensityMatrix::repaired(3, m);
}

inline constexpr double kDefaultGmeMargin = 0.02;

struct GmeSample {
  DensityMatrix state;      // after the random local unitaries
  DensityMatrix canonical;  // before them
  GmeFamily family;
  measures::Provenance origin;
  double measure;  // tau, C_GME or roof tau that certified the sample
};

namespace detail {

// Uniform point (p, q) of the simplex p, q >= 0, p + q <= 1.
inline std::pair<double, double> uniform_triangle(Rng& rng) {
  const auto w = rng.dirichlet(3);
  return {w[0], w[1]};
}

inline measures::XStateParams random_x_state(Rng& rng) {
  const auto diag = rng.dirichlet(8);
  measures::XStateParams x;
  for (int i = 0; i < 4; ++i) {
    x.a[i] = diag[i];
    x.b[i] = diag[7 - i];
    const double bound = std::sqrt(x.a[i] * x.b[i]);
    x.z[i] = std::polar(bound * rng.uniform(), 2.0 * std::numbers::pi * rng.uniform());
  }
  return x;
}

}  // namespace detail

/// Rejection-samples one GME state of the given family with its certifying
/// measure above `margin`, then applies Haar local unitaries on each qubit.
inline GmeSample sample_gme(GmeFamily fam, Rng& rng, double margin = kDefaultGmeMargin) {
  for (;;) {
    std::optional<DensityMatrix> canonical;
    measures::Provenance origin = measures::provenance::Pure{};
    double value = 0.0;
    switch (fam) {
      case GmeFamily::GhzPure: {
        const auto amp = qstate::haar_pure_state(1, rng).amplitudes();
        CVector v = CVector::Zero(8);
        v(0) = amp(0);
        v(7) = amp(1);
        value = 4.0 * std::norm(amp(0)) * std::norm(amp(1));
        if (value > margin) canonical = DensityMatrix::from_pure(PureState::normalized(3, v));
        break;
      }
      case GmeFamily::GhzSym: {
        const auto [p, q] = detail::uniform_triangle(rng);
        const measures::GhzSymmetricParams g{p, q};
        value = measures::ghz_symmetric_gme_concurrence(g);
        if (value > margin) {
          canonical = measures::ghz_symmetric_state(g);
          origin = measures::provenance::GhzSymmetric{g};
        }
        break;
      }
      case GmeFamily::XState: {
        const auto x = detail::random_x_state(rng);
        value = measures::x_state_gme_concurrence(x);
        if (value > margin) {
          canonical = measures::x_state(x);
          origin = measures::provenance::XState{x};
        }
        break;
      }
      case GmeFamily::GhzW: {
        const auto [p, q] = detail::uniform_triangle(rng);
        const measures::GhzWParams g{p, q};
        value = measures::ghz_w_three_tangle(g);
        if (value > margin) {
          canonical = measures::ghz_w_state(g);
          origin = measures::provenance::GhzW{g};
        }
        break;
      }
    }
    if (!canonical) continue;
    const auto locals = qstate::random_local_unitaries(3, rng);
    DensityMatrix rotated = qstate::apply_local_unitaries(*canonical, locals);
    return GmeSample{std::move(rotated), std::move(*canonical), fam, origin, value};
  }
}

// Splits -----------------------------------------------------------------------

/// Stratified by (label, family): each stratum is shuffled with its own
/// stream and cut into train / validation / test by the given fractions.
inline void assign_splits(LabeledDataset& ds, const SplitFractions& fr) {
  if (fr.train < 0 || fr.validation < 0 || fr.test < 0 ||
      std::abs(fr.train + fr.validation + fr.test - 1.0) > 1e-9)
    throw std::domain_error("assign_splits: fractions must be non-negative and sum to one");
  std::map<std::pair<int, std::string>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < ds.rows.size(); ++i) strata[{ds.rows[i].label, ds.rows[i].family}].push_back(i);

  std::uint64_t stratum_id = 0;
  for (auto& [key, members] : strata) {
    Rng rng(ds.seed, 0xC0FFEE0000000000ULL + stratum_id++);
    std::shuffle(members.begin(), members.end(), rng);
    const auto m = static_cast<double>(members.size());
    const auto n_train = static_cast<std::size_t>(std::llround(fr.train * m));
    const auto n_val = std::min(members.size() - n_train, static_cast<std::size_t>(std::llround(fr.validation * m)));
    for (std::size_t k = 0; k < members.size(); ++k) {
      Split s = Split::Test;
      if (k < n_train) s = Split::Train;
      else if (k < n_train + n_val) s = Split::Validation;
      ds.rows[members[k]].split = s;
    }
  }
}

// Two qubits --------------------------------------------------------------------

struct TwoQubitOptions {
  SplitFractions splits = kTwoQubitSplits;
  bool keep_states = false;
  int threads = 1;
};

struct TwoQubitStats {
  std::size_t draws = 0;
  std::size_t separable_draws = 0;
};

/// Equal numbers of PPT-entangled (+1) and PPT-separable (-1) Hilbert-Schmidt
/// states, filled in candidate order from Ginibre draws.
inline LabeledDataset sample_two_qubit_balanced(std::size_t count_per_class, std::uint64_t seed,
                                                const TwoQubitOptions& opt = {}, TwoQubitStats* stats = nullptr) {
  if (count_per_class < 1) throw std::domain_error("sample_two_qubit_balanced: count must be >= 1");
  LabeledDataset ds;
  ds.n_qubits = 2;
  ds.kind = DatasetKind::TwoQubit;
  ds.seed = seed;

  struct Candidate {
    std::optional<DensityMatrix> rho;
    bool entangled = false;
  };
  std::size_t n_ent = 0, n_sep = 0, next = 0;
  TwoQubitStats st;
  const std::size_t batch = 4096;
  std::vector<DatasetRow> ent_rows, sep_rows;
  while (n_ent < count_per_class || n_sep < count_per_class) {
    std::vector<Candidate> cand(batch);
    parallel_for(batch, opt.threads, [&](std::size_t k) {
      Rng rng(seed, next + k);
      cand[k].rho = qstate::sample_ginibre_state(2, rng);
      cand[k].entangled = measures::ppt_entangled(*cand[k].rho);
    });
    for (std::size_t k = 0; k < batch && (n_ent < count_per_class || n_sep < count_per_class); ++k) {
      ++st.draws;
      auto& c = cand[k];
      if (!c.entangled) ++st.separable_draws;
      auto& bucket = c.entangled ? ent_rows : sep_rows;
      auto& filled = c.entangled ? n_ent : n_sep;
      if (filled >= count_per_class) continue;
      DatasetRow row;
      row.label = c.entangled ? +1 : -1;
      row.family = std::string(family::kHilbertSchmidt);
      row.x = features(*c.rho);
      if (opt.keep_states) row.state = c.rho->matrix();
      bucket.push_back(std::move(row));
      ++filled;
    }
    next += batch;
  }
  ds.rows.reserve(2 * count_per_class);
  for (std::size_t i = 0; i < count_per_class; ++i) {
    ds.rows.push_back(std::move(ent_rows[i]));
    ds.rows.push_back(std::move(sep_rows[i]));
  }
  assign_splits(ds, opt.splits);
  if (stats) *stats = st;
  return ds;
}

// Three qubits ------------------------------------------------------------------

struct ThreeQubitOptions {
  SplitFractions splits = kThreeQubitSplits;
  double gme_margin = kDefaultGmeMargin;
  bool keep_states = false;
  int threads = 1;
};

struct CompositionPlan {
  std::size_t separable = 0;
  std::size_t biseparable = 0;
  std::size_t gme = 0;
};

/// SEP-vs-all: 50% SEP, 25% pure biseparable, 25% GME.
/// GME-vs-all: 25% SEP, 25% same-partition biseparable mixtures, 50% GME.
inline CompositionPlan composition(DatasetKind kind, std::size_t total) {
  CompositionPlan plan;
  if (kind == DatasetKind::SepVsAll) {
    plan.separable = total / 2;
    plan.biseparable = total / 4;
  } else if (kind == DatasetKind::GmeVsAll) {
    plan.separable = total / 4;
    plan.biseparable = total / 4;
  } else {
    throw std::domain_error("composition: not a three-qubit dataset kind");
  }
  plan.gme = total - plan.separable - plan.biseparable;
  return plan;
}

inline int project_label(DatasetKind kind, const measures::EntanglementLabel& l) {
  return kind == DatasetKind::SepVsAll ? l.sep_vs_all() : l.gme_vs_all();
}

struct LabeledState {
  DensityMatrix state;
  std::string family;
  measures::Provenance origin;
};

/// Draws the state for row `index` of a three-qubit dataset of the given plan.
inline LabeledState three_qubit_row(DatasetKind kind, const CompositionPlan& plan, std::size_t index, Rng& rng,
                                    double margin) {
  if (index < plan.separable) {
    return {sample_sep_mixed(random_mixture_terms(rng), rng), std::string(family::kSeparableMixed),
            measures::provenance::SeparableMixture{}};
  }
  index -= plan.separable;
  if (index < plan.biseparable) {
    const auto part = static_cast<Partition>(index % 3);
    if (kind == DatasetKind::SepVsAll)
      return {DensityMatrix::from_pure(sample_bisep_pure(part, rng)), family::bisep(part, false),
              measures::provenance::Pure{}};
    return {sample_bisep_mixed(part, random_mixture_terms(rng), rng), family::bisep(part, true),
            measures::provenance::BiseparableMixture{part}};
  }
  index -= plan.biseparable;
  const GmeFamily fam = kGmeFamilies[index % kGmeFamilies.size()];
  auto s = sample_gme(fam, rng, margin);
  return {std::move(s.state), std::string(to_string(fam)), s.origin};
}

inline LabeledDataset build_three_qubit_dataset(DatasetKind kind, std::size_t total, std::uint64_t seed,
                                                const ThreeQubitOptions& opt = {}) {
  if (total < 100) throw std::domain_error("build_three_qubit_dataset: total must be >= 100");
  const auto plan = composition(kind, total);
  LabeledDataset ds;
  ds.n_qubits = 3;
  ds.kind = kind;
  ds.seed = seed;
  ds.rows.resize(total);
  parallel_for(total, opt.threads, [&](std::size_t i) {
    Rng rng(seed, i);
    auto s = three_qubit_row(kind, plan, i, rng, opt.gme_margin);
    auto& row = ds.rows[i];
    row.label = project_label(kind, measures::label_state(s.state, s.origin));
    row.family = std::move(s.family);
    row.x = features(s.state);
    if (opt.keep_states) row.state = s.state.matrix();
  });
  assign_splits(ds, opt.splits);
  return ds;
}

}  // namespace entwit::datagen
