#pragma once

// Density-matrix simulation of the mean-value circuit: an ancilla in |+>,
// controlled exp(-i W t) on n copies of rho, R_x(pi/2) = exp(-i sigma_x pi/4)
// on the ancilla, then an ancilla measurement in the computational basis.
//
// Tracing out the system leaves the ancilla with coherence c = Tr[U rho^{(x)n}],
// and after the rotation p1 = (1 + Tr[sin(W t) rho^{(x)n}]) / 2. The slope of
// p1 at t = 0 is therefore <W> / 2, so (p1 - p0) / (2 t) tends to <W> / 2.
// The estimator is kept in the (p1 - p0) / (2 t) form; exact_mean() reports
// the trace it is compared against.

#include <algorithm>
#include <cmath>
#include <complex>
#include <json.hpp>
#include <optional>
#include <random>
#include <stdexcept>

#include "entwit/qstate.hpp"
#include "entwit/rng.hpp"
#include "entwit/witness.hpp"

namespace entwit::qsim {

using qstate::DensityMatrix;
using qstate::UnitaryMatrix;
using witness::WitnessOperator;

/// exp(-i H t) for Hermitian H through its eigendecomposition.
inline CMatrix hermitian_exp(const CMatrix& h, double t) {
  const auto es = qstate::eig_hermitian(h);
  Eigen::VectorXcd phases(es.values.size());
  for (Eigen::Index k = 0; k < es.values.size(); ++k) phases(k) = std::polar(1.0, -es.values(k) * t);
  return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

/// |0><0| (x) I + |1><1| (x) exp(-i W t), ancilla as the leading qubit.
inline UnitaryMatrix controlled_exp(const WitnessOperator& w, double t,
                                    std::int64_t cap = witness::kDefaultDimensionCap) {
  if (w.dimension() > cap) throw witness::DimensionCapExceeded("controlled_exp: witness dimension exceeds the cap");
  if (t == 0.0) throw std::domain_error("controlled_exp: t must be nonzero");
  const Eigen::Index d = w.dimension();
  CMatrix u = CMatrix::Zero(2 * d, 2 * d);
  u.topLeftCorner(d, d).setIdentity();
  u.bottomRightCorner(d, d) = hermitian_exp(w.matrix, t);
  return UnitaryMatrix(std::move(u));
}

inline CMatrix rx_half_pi() {
  const double s = 1.0 / std::sqrt(2.0);
  CMatrix r(2, 2);
  r << cplx(s, 0), cplx(0, -s), cplx(0, -s), cplx(s, 0);
  return r;
}

struct CircuitResult {
  double t = 0.0;
  double p0 = 0.5;
  double p1 = 0.5;
  double estimate = 0.0;
  std::optional<long> shots;
  std::optional<long> ones;  // sampled count of outcome 1
};

struct MeanEstimate {
  double value = 0.0;
  std::optional<double> stderr_value;
};

/// (p1 - p0) / (2 t); with shots, empirical frequencies and the binomial
/// standard error sqrt(p0 p1 / shots) / t.
inline MeanEstimate estimate_mean(const CircuitResult& r) {
  if (r.t == 0.0) throw std::domain_error("estimate_mean: t must be nonzero");
  if (!r.shots) return {(r.p1 - r.p0) / (2.0 * r.t), std::nullopt};
  if (*r.shots <= 0 || !r.ones) throw std::domain_error("estimate_mean: invalid shot record");
  const double q1 = double(*r.ones) / double(*r.shots);
  const double q0 = 1.0 - q1;
  return {(q1 - q0) / (2.0 * r.t), std::sqrt(q0 * q1 / double(*r.shots)) / std::abs(r.t)};
}

/// Exact ancilla marginals; with shots > 0 also a binomial sample of outcome counts.
inline CircuitResult run_circuit(const WitnessOperator& w, const DensityMatrix& rho, double t, long shots = 0,
                                 Rng* rng = nullptr) {
  if (rho.n_qubits() != w.n_qubits) throw std::domain_error("run_circuit: state does not match the witness");
  const CMatrix sigma = qstate::kron_power(rho.matrix(), w.copies);
  if (sigma.rows() != w.dimension()) throw std::domain_error("run_circuit: dimension mismatch");
  const Eigen::Index d = sigma.rows();

  CMatrix plus(2, 2);
  plus.setConstant(0.5);
  CMatrix reg = qstate::kron(plus, sigma);
  const CMatrix cu = controlled_exp(w, t).matrix();
  reg = cu * reg * cu.adjoint();
  const CMatrix rot = qstate::kron(rx_half_pi(), CMatrix::Identity(d, d));
  reg = rot * reg * rot.adjoint();

  CircuitResult r;
  r.t = t;
  r.p0 = std::clamp(reg.topLeftCorner(d, d).trace().real(), 0.0, 1.0);
  r.p1 = std::clamp(reg.bottomRightCorner(d, d).trace().real(), 0.0, 1.0);
  r.estimate = (r.p1 - r.p0) / (2.0 * t);
  if (shots > 0) {
    if (!rng) throw std::domain_error("run_circuit: sampling requires an Rng");
    std::binomial_distribution<long> draw(shots, r.p1);
    r.shots = shots;
    r.ones = draw(*rng);
  }
  return r;
}

/// Tr[W rho^{(x)n}], the quantity the circuit is meant to estimate.
inline double exact_mean(const WitnessOperator& w, const DensityMatrix& rho) {
  return witness::evaluate_witness(w, rho) - w.bias;
}

inline nlohmann::json to_json(const CircuitResult& r, double exact) {
  nlohmann::json j{{"t", r.t}, {"p0", r.p0}, {"p1", r.p1}, {"estimate", r.estimate}, {"exact", exact}};
  if (r.shots) {
    const auto e = estimate_mean(r);
    j["shots"] = *r.shots;
    j["ones"] = *r.ones;
    j["estimate"] = e.value;
    j["stderr"] = *e.stderr_value;
  }
  return j;
}

}  // namespace entwit::qsim
