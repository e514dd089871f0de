#pragma once

// Numeric upper bound on a convex roof  inf sum_i p_i mu(psi_i)  over pure-state
// decompositions of rho. Decompositions with k terms of a rank-r state are
// psi~_i = sum_j U_ij sqrt(lambda_j) e_j with U (k x r) having orthonormal
// columns; U = M (M^H M)^{-1/2} for an unconstrained complex M. Levenberg-
// Marquardt minimizes the smooth surrogate sum_i p_i mu_i^2 from random
// starts, and the bound reported is sum_i p_i mu_i of the best decomposition
// found. Every returned value is attained by an explicit decomposition.

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace oracle {

struct RoofSearch {
  int restarts = 8;
  int extra_terms = 4;  // k = rank + extra_terms
  unsigned seed = 12345;
  int max_evaluations = 20000;
};

class ConvexRoofUpperBound {
 public:
  using Measure = std::function<double(const Eigen::VectorXcd&)>;

  ConvexRoofUpperBound(const Eigen::MatrixXcd& rho, Measure mu) : mu_(std::move(mu)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
      if (es.eigenvalues()(j) > 1e-12) {
        weights_.push_back(std::sqrt(es.eigenvalues()(j)));
        vectors_.push_back(es.eigenvectors().col(j));
      }
    }
  }

  int rank() const { return static_cast<int>(weights_.size()); }

  double search(const RoofSearch& s) const {
    const int r = rank();
    const int k = r + s.extra_terms;
    std::mt19937_64 gen(s.seed);
    std::normal_distribution<double> normal;
    double best = std::numeric_limits<double>::infinity();

    // The spectral decomposition itself is always a candidate.
    {
      Eigen::VectorXd id = Eigen::VectorXd::Zero(2 * k * r);
      for (int j = 0; j < r; ++j) id(2 * (j * r + j)) = 1.0;
      best = std::min(best, value(id, k));
    }

    for (int attempt = 0; attempt < s.restarts; ++attempt) {
      Eigen::VectorXd x(2 * k * r);
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(gen);
      Functor f(this, k);
      Eigen::NumericalDiff<Functor> nd(f);
      Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Functor>> lm(nd);
      lm.parameters.maxfev = s.max_evaluations;
      lm.parameters.xtol = 1e-12;
      lm.parameters.ftol = 1e-14;
      lm.minimize(x);
      best = std::min(best, value(x, k));
    }
    return best;
  }

 private:
  struct Functor {
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

    const ConvexRoofUpperBound* self;
    int k;

    Functor(const ConvexRoofUpperBound* s, int terms) : self(s), k(terms) {}
    int inputs() const { return 2 * k * self->rank(); }
    int values() const { return std::max(k, inputs()); }

    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& fvec) const {
      fvec.setZero(values());
      self->decompose(x, k, [&](int i, double p, double mu) { fvec(i) = std::sqrt(p) * mu; });
      return 0;
    }
  };

  template <class Sink>
  void decompose(const Eigen::VectorXd& x, int k, Sink&& sink) const {
    const int r = rank();
    Eigen::MatrixXcd m(k, r);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < r; ++j) m(i, j) = {x(2 * (i * r + j)), x(2 * (i * r + j) + 1)};
    // U = M (M^H M)^{-1/2}
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.adjoint() * m);
    Eigen::VectorXd inv_sqrt = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXcd u = m * es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint();
    const Eigen::Index dim = vectors_.front().size();
    for (int i = 0; i < k; ++i) {
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
      for (int j = 0; j < r; ++j) v += u(i, j) * weights_[j] * vectors_[j];
      const double p = v.squaredNorm();
      sink(i, p, p > 1e-300 ? mu_(v / std::sqrt(p)) : 0.0);
    }
  }

  double value(const Eigen::VectorXd& x, int k) const {
    double total = 0.0;
    decompose(x, k, [&](int, double p, double mu) { total += p * mu; });
    return total;
  }

  Measure mu_;
  std::vector<double> weights_;
  std::vector<Eigen::VectorXcd> vectors_;
};

}  // namespace oracle
