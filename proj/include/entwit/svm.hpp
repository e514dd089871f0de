#pragma once

// Soft-margin SVM with the polynomial kernel K(x, x') = (<x, x'> + 1)^n and
// per-class box bounds. The dual
//
//     max  sum_i a_i - 1/2 sum_ij a_i y_i K_ij y_j a_j
//     s.t. 0 <= a_i <= lambda_{y_i},  sum_i y_i a_i = 0
//
// is solved by SMO with second-order working-set selection, an LRU kernel-row
// cache and optional shrinking of bound variables.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <list>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "entwit/parallel.hpp"

namespace entwit::svm {

using Samples = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Eigen::VectorXd;

inline double int_pow(double base, int n) {
  double r = 1.0;
  for (; n > 0; n >>= 1, base *= base)
    if (n & 1) r *= base;
  return r;
}

inline double poly_kernel(const VectorXd& x, const VectorXd& xp, int n) {
  if (x.size() != xp.size()) throw std::domain_error("poly_kernel: dimension mismatch");
  if (n < 1) throw std::domain_error("poly_kernel: degree must be >= 1");
  return int_pow(x.dot(xp) + 1.0, n);
}

/// binomial(n + d - 1, n), the dimension quoted for the degree-n embedding.
inline std::uint64_t embedding_dimension(int n, int d) {
  if (n < 1 || d < 1) throw std::domain_error("embedding_dimension: n and d must be >= 1");
  // C(n + d - 1, k) built up with k = min(n, d - 1); each partial product is an exact binomial.
  const std::uint64_t top = static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(d) - 1;
  const std::uint64_t k = std::min<std::uint64_t>(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(d) - 1);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t factor = top - k + i;
    if (r > std::numeric_limits<std::uint64_t>::max() / factor)
      throw std::overflow_error("embedding_dimension: result exceeds 64 bits");
    r = r * factor / i;
  }
  return r;
}

struct TrainingInfo {
  std::uint64_t seed = 0;
  std::string dataset_hash;
  std::string config_hash;
  double kkt_residual = 0.0;
  long iterations = 0;
  bool converged = false;
  double dual_objective = 0.0;
};

struct SvmModel {
  int n_qubits = 0;
  int degree = 1;
  Samples support;          // one support vector per row
  VectorXd signed_alphas;   // y_i a_i
  double bias = 0.0;
  double lambda_plus = 1.0;
  double lambda_minus = 1.0;
  TrainingInfo training;

  Eigen::Index feature_dimension() const { return support.cols(); }
  Eigen::Index support_count() const { return support.rows(); }
};

/// Number of qubits whose feature dimension is d, or 0 if none.
inline int qubits_for_feature_dimension(Eigen::Index d) {
  for (int n = 1; n <= 6; ++n)
    if ((Eigen::Index{1} << (2 * n)) - 1 == d) return n;
  return 0;
}

struct TrainOptions {
  int degree = 1;
  double lambda_plus = 1.0;
  double lambda_minus = 1.0;
  double tol = 1e-3;
  long max_iterations = 0;  // 0: max(10^7, 100 l)
  double cache_mb = 1024.0;
  bool shrinking = true;
  // Called after every pair update with the iteration count and current dual
  // objective. Setting it disables shrinking, which would leave the gradient stale.
  std::function<void(long, double)> observer;
};

struct TrainResult {
  SvmModel model;
  VectorXd alpha;  // full dual vector, usable as a warm start
};

class KernelRowCache {
 public:
  KernelRowCache(std::size_t row_length, double megabytes)
      : length_(row_length),
        capacity_(std::max<std::size_t>(
            2, static_cast<std::size_t>(megabytes * 1048576.0 / (sizeof(double) * std::max<std::size_t>(1, row_length))))) {}

  template <class Compute>
  const double* get(int index, Compute&& compute) {
    if (auto it = map_.find(index); it != map_.end()) {
      rows_.splice(rows_.begin(), rows_, it->second);
      ++hits_;
      return rows_.front().second.data();
    }
    ++misses_;
    std::vector<double> data;
    if (rows_.size() >= capacity_) {
      map_.erase(rows_.back().first);
      data = std::move(rows_.back().second);
      rows_.pop_back();
    }
    data.resize(length_);
    compute(index, data.data());
    rows_.emplace_front(index, std::move(data));
    map_[index] = rows_.begin();
    return rows_.front().second.data();
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  std::size_t length_;
  std::size_t capacity_;
  std::list<std::pair<int, std::vector<double>>> rows_;
  std::unordered_map<int, std::list<std::pair<int, std::vector<double>>>::iterator> map_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

namespace detail {

class SmoSolver {
 public:
  SmoSolver(const Samples& x, const std::vector<int>& y, const TrainOptions& opt)
      : x_(x), y_(y), opt_(opt), l_(static_cast<int>(x.rows())), cache_(static_cast<std::size_t>(x.rows()), opt.cache_mb) {
    c_.resize(l_);
    qd_.resize(l_);
    for (int i = 0; i < l_; ++i) {
      c_[i] = y_[i] > 0 ? opt.lambda_plus : opt.lambda_minus;
      qd_[i] = int_pow(x_.row(i).squaredNorm() + 1.0, opt.degree);
    }
  }

  TrainResult solve(const VectorXd* warm) {
    alpha_.assign(l_, 0.0);
    if (warm && warm_start_feasible(*warm))
      for (int i = 0; i < l_; ++i) alpha_[i] = std::clamp((*warm)(i), 0.0, c_[i]);
    status_.resize(l_);
    for (int i = 0; i < l_; ++i) update_status(i);

    g_.assign(l_, -1.0);
    g_bar_.assign(l_, 0.0);
    for (int i = 0; i < l_; ++i) {
      if (status_[i] == Status::Lower) continue;
      const double* ki = row(i);
      for (int k = 0; k < l_; ++k) {
        const double q = y_[i] * y_[k] * ki[k];
        g_[k] += alpha_[i] * q;
        if (status_[i] == Status::Upper) g_bar_[k] += c_[i] * q;
      }
    }

    active_.resize(l_);
    for (int i = 0; i < l_; ++i) active_[i] = i;
    in_active_.assign(l_, true);

    const bool shrinking = opt_.shrinking && !opt_.observer;
    const long max_iter = opt_.max_iterations > 0 ? opt_.max_iterations : std::max<long>(10000000L, 100L * l_);
    long iter = 0;
    int counter = std::min(l_, 1000) + 1;
    bool unshrunk = false;
    bool converged = false;

    while (iter < max_iter) {
      if (shrinking && --counter == 0) {
        counter = std::min(l_, 1000);
        do_shrinking(unshrunk);
      }
      int i = -1, j = -1;
      bool found = select_working_set(i, j);
      if (!found && static_cast<int>(active_.size()) < l_) {
        reconstruct_gradient();
        activate_all();
        counter = 1;
        found = select_working_set(i, j);
      }
      if (!found) {
        converged = true;
        break;
      }
      ++iter;
      take_step(i, j);
      if (opt_.observer) opt_.observer(iter, dual_objective());
    }

    if (static_cast<int>(active_.size()) < l_) {
      reconstruct_gradient();
      activate_all();
    }
    return finish(iter, converged);
  }

 private:
  enum class Status { Lower, Upper, Free };
  static constexpr double kTau = 1e-12;

  bool warm_start_feasible(const VectorXd& w) const {
    if (w.size() != l_) return false;
    double balance = 0.0;
    for (int i = 0; i < l_; ++i) {
      if (w(i) < -1e-12 || w(i) > c_[i] * (1.0 + 1e-12)) return false;
      balance += y_[i] * w(i);
    }
    return std::abs(balance) <= 1e-8 * std::max(1.0, opt_.lambda_plus);
  }

  const double* row(int i) {
    return cache_.get(i, [this](int idx, double* out) {
      Eigen::Map<VectorXd> r(out, l_);
      r.noalias() = x_ * x_.row(idx).transpose();
      for (int k = 0; k < l_; ++k) out[k] = int_pow(out[k] + 1.0, opt_.degree);
    });
  }

  void update_status(int i) {
    if (alpha_[i] >= c_[i]) status_[i] = Status::Upper;
    else if (alpha_[i] <= 0.0) status_[i] = Status::Lower;
    else status_[i] = Status::Free;
  }
  bool is_upper(int i) const { return status_[i] == Status::Upper; }
  bool is_lower(int i) const { return status_[i] == Status::Lower; }

  // Second-order working-set selection. Returns false at tol-optimality.
  bool select_working_set(int& out_i, int& out_j) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmax2 = -std::numeric_limits<double>::infinity();
    int i = -1;
    for (int t : active_) {
      if (y_[t] > 0) {
        if (!is_upper(t) && -g_[t] >= gmax) { gmax = -g_[t]; i = t; }
      } else {
        if (!is_lower(t) && g_[t] >= gmax) { gmax = g_[t]; i = t; }
      }
    }
    int j = -1;
    double best = std::numeric_limits<double>::infinity();
    const double* ki = i >= 0 ? row(i) : nullptr;
    for (int t : active_) {
      double grad_diff;
      if (y_[t] > 0) {
        if (is_lower(t)) continue;
        grad_diff = gmax + g_[t];
        gmax2 = std::max(gmax2, g_[t]);
      } else {
        if (is_upper(t)) continue;
        grad_diff = gmax - g_[t];
        gmax2 = std::max(gmax2, -g_[t]);
      }
      if (ki && grad_diff > 0.0) {
        const double quad = qd_[i] + qd_[t] - 2.0 * ki[t];
        const double obj = -grad_diff * grad_diff / (quad > 0.0 ? quad : kTau);
        if (obj <= best) { best = obj; j = t; }
      }
    }
    last_gap_ = gmax + gmax2;
    if (last_gap_ < opt_.tol || j < 0) return false;
    out_i = i;
    out_j = j;
    return true;
  }

  void take_step(int i, int j) {
    const double* ki = row(i);
    const double* kj = row(j);
    const double ci = c_[i], cj = c_[j];
    const double old_ai = alpha_[i], old_aj = alpha_[j];
    double& ai = alpha_[i];
    double& aj = alpha_[j];
    double quad = qd_[i] + qd_[j] - 2.0 * ki[j];
    if (quad <= 0.0) quad = kTau;

    if (y_[i] != y_[j]) {
      const double delta = (-g_[i] - g_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) { aj = 0; ai = diff; }
      } else {
        if (ai < 0) { ai = 0; aj = -diff; }
      }
      if (diff > ci - cj) {
        if (ai > ci) { ai = ci; aj = ci - diff; }
      } else {
        if (aj > cj) { aj = cj; ai = cj + diff; }
      }
    } else {
      const double delta = (g_[i] - g_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > ci) {
        if (ai > ci) { ai = ci; aj = sum - ci; }
      } else {
        if (aj < 0) { aj = 0; ai = sum; }
      }
      if (sum > cj) {
        if (aj > cj) { aj = cj; ai = sum - cj; }
      } else {
        if (ai < 0) { ai = 0; aj = sum; }
      }
    }

    const double dai = (ai - old_ai) * y_[i];
    const double daj = (aj - old_aj) * y_[j];
    for (int k : active_) g_[k] += y_[k] * (ki[k] * dai + kj[k] * daj);

    const bool ui = is_upper(i), uj = is_upper(j);
    update_status(i);
    update_status(j);
    if (ui != is_upper(i)) {
      const double s = (ui ? -ci : ci) * y_[i];
      for (int k = 0; k < l_; ++k) g_bar_[k] += s * y_[k] * ki[k];
    }
    if (uj != is_upper(j)) {
      const double s = (uj ? -cj : cj) * y_[j];
      for (int k = 0; k < l_; ++k) g_bar_[k] += s * y_[k] * kj[k];
    }
  }

  bool be_shrunk(int i, double gmax1, double gmax2) const {
    if (is_upper(i)) return y_[i] > 0 ? -g_[i] > gmax1 : -g_[i] > gmax2;
    if (is_lower(i)) return y_[i] > 0 ? g_[i] > gmax2 : g_[i] > gmax1;
    return false;
  }

  void do_shrinking(bool& unshrunk) {
    double gmax1 = -std::numeric_limits<double>::infinity();
    double gmax2 = -std::numeric_limits<double>::infinity();
    for (int t : active_) {
      if (y_[t] > 0) {
        if (!is_upper(t)) gmax1 = std::max(gmax1, -g_[t]);
        if (!is_lower(t)) gmax2 = std::max(gmax2, g_[t]);
      } else {
        if (!is_upper(t)) gmax2 = std::max(gmax2, -g_[t]);
        if (!is_lower(t)) gmax1 = std::max(gmax1, g_[t]);
      }
    }
    if (!unshrunk && gmax1 + gmax2 <= 10.0 * opt_.tol) {
      unshrunk = true;
      reconstruct_gradient();
      activate_all();
    }
    std::vector<int> kept;
    kept.reserve(active_.size());
    for (int t : active_) {
      if (be_shrunk(t, gmax1, gmax2)) in_active_[t] = false;
      else kept.push_back(t);
    }
    active_.swap(kept);
  }

  void activate_all() {
    active_.resize(l_);
    for (int i = 0; i < l_; ++i) active_[i] = i;
    in_active_.assign(l_, true);
  }

  // Recomputes the gradient of every inactive variable from g_bar and the free variables.
  void reconstruct_gradient() {
    if (static_cast<int>(active_.size()) == l_) return;
    std::vector<int> inactive, free;
    for (int k = 0; k < l_; ++k) {
      if (!in_active_[k]) inactive.push_back(k);
      if (status_[k] == Status::Free) free.push_back(k);
    }
    for (int k : inactive) g_[k] = g_bar_[k] - 1.0;
    if (free.size() <= inactive.size()) {
      for (int i : free) {
        const double* ki = row(i);
        for (int k : inactive) g_[k] += alpha_[i] * y_[i] * y_[k] * ki[k];
      }
    } else {
      for (int k : inactive) {
        const double* kk = row(k);
        double s = 0.0;
        for (int i : free) s += alpha_[i] * y_[i] * kk[i];
        g_[k] += y_[k] * s;
      }
    }
  }

  double dual_objective() const {
    double f = 0.0;
    for (int i = 0; i < l_; ++i) f += alpha_[i] * (g_[i] - 1.0);
    return -0.5 * f;
  }

  double compute_rho() const {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    int nr_free = 0;
    for (int i = 0; i < l_; ++i) {
      const double yg = y_[i] * g_[i];
      if (is_upper(i)) {
        if (y_[i] < 0) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else if (is_lower(i)) {
        if (y_[i] > 0) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else {
        ++nr_free;
        sum_free += yg;
      }
    }
    if (nr_free > 0) return sum_free / nr_free;
    return (ub + lb) / 2.0;
  }

  TrainResult finish(long iter, bool converged) {
    int i, j;
    select_working_set(i, j);  // refresh the optimality gap over the full set
    TrainResult out;
    out.alpha = Eigen::Map<const VectorXd>(alpha_.data(), l_);
    auto& m = out.model;
    m.degree = opt_.degree;
    m.lambda_plus = opt_.lambda_plus;
    m.lambda_minus = opt_.lambda_minus;
    m.bias = -compute_rho();
    m.n_qubits = qubits_for_feature_dimension(x_.cols());
    m.training.kkt_residual = std::max(0.0, last_gap_);
    m.training.iterations = iter;
    m.training.converged = converged;
    m.training.dual_objective = dual_objective();

    const double threshold = 1e-8 * opt_.lambda_plus;
    std::vector<int> sv;
    for (int k = 0; k < l_; ++k)
      if (alpha_[k] > threshold) sv.push_back(k);
    m.support.resize(static_cast<Eigen::Index>(sv.size()), x_.cols());
    m.signed_alphas.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t s = 0; s < sv.size(); ++s) {
      m.support.row(static_cast<Eigen::Index>(s)) = x_.row(sv[s]);
      m.signed_alphas(static_cast<Eigen::Index>(s)) = y_[sv[s]] * alpha_[sv[s]];
    }
    return out;
  }

  const Samples& x_;
  const std::vector<int>& y_;
  const TrainOptions& opt_;
  int l_;
  KernelRowCache cache_;
  std::vector<double> c_, qd_, alpha_, g_, g_bar_;
  std::vector<Status> status_;
  std::vector<int> active_;
  std::vector<bool> in_active_;
  double last_gap_ = 0.0;
};

}  // namespace detail

/// Trains on rows of `x` with labels in {+1, -1}. `warm_start` is used when it
/// is feasible for the new box bounds (e.g. from a smaller lambda_minus).
inline TrainResult train(const Samples& x, const std::vector<int>& y, const TrainOptions& opt,
                         const VectorXd* warm_start = nullptr) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw std::domain_error("train: label count mismatch");
  if (!(opt.lambda_plus > 0.0) || !(opt.lambda_minus > 0.0)) throw std::domain_error("train: lambdas must be > 0");
  if (!(opt.tol > 0.0)) throw std::domain_error("train: tol must be > 0");
  if (opt.degree < 1) throw std::domain_error("train: degree must be >= 1");
  bool has_pos = false, has_neg = false;
  for (int v : y) {
    if (v == 1) has_pos = true;
    else if (v == -1) has_neg = true;
    else throw std::domain_error("train: labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) throw std::domain_error("train: dataset must contain both labels");
  detail::SmoSolver solver(x, y, opt);
  return solver.solve(warm_start);
}

inline double decide(const SvmModel& m, const VectorXd& x) {
  if (x.size() != m.feature_dimension()) throw std::domain_error("decide: dimension mismatch");
  double f = m.bias;
  for (Eigen::Index i = 0; i < m.support_count(); ++i)
    f += m.signed_alphas(i) * int_pow(m.support.row(i).dot(x) + 1.0, m.degree);
  return f;
}

/// Zero decision values do not witness entanglement.
inline int predict_label(double f) { return f > 0.0 ? +1 : -1; }

inline VectorXd decide_batch(const SvmModel& m, const Samples& x, int threads = 1) {
  if (x.cols() != m.feature_dimension()) throw std::domain_error("decide_batch: dimension mismatch");
  VectorXd out(x.rows());
  constexpr Eigen::Index kChunk = 512;
  const auto chunks = static_cast<std::size_t>((x.rows() + kChunk - 1) / kChunk);
  parallel_for(chunks, threads, [&](std::size_t c) {
    const Eigen::Index start = static_cast<Eigen::Index>(c) * kChunk;
    const Eigen::Index rows = std::min(kChunk, x.rows() - start);
    Eigen::MatrixXd k = x.middleRows(start, rows) * m.support.transpose();
    k.array() += 1.0;
    for (Eigen::Index i = 0; i < k.size(); ++i) k.data()[i] = int_pow(k.data()[i], m.degree);
    out.segment(start, rows) = (k * m.signed_alphas).array() + m.bias;
  });
  return out;
}

struct Metrics {
  long true_pos = 0, true_neg = 0, false_pos = 0, false_neg = 0;

  long total() const { return true_pos + true_neg + false_pos + false_neg; }
  double accuracy() const { return total() ? double(true_pos + true_neg) / double(total()) : 0.0; }
  double precision() const { return true_pos + false_pos ? double(true_pos) / double(true_pos + false_pos) : 1.0; }
  double recall() const { return true_pos + false_neg ? double(true_pos) / double(true_pos + false_neg) : 1.0; }
  /// Fraction of -1 rows predicted -1.
  double negative_accuracy() const { return true_neg + false_pos ? double(true_neg) / double(true_neg + false_pos) : 1.0; }
};

inline Metrics metrics_from(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.size() != predicted.size()) throw std::domain_error("metrics_from: size mismatch");
  Metrics m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] > 0) (truth[i] > 0 ? m.true_pos : m.false_pos)++;
    else (truth[i] > 0 ? m.false_neg : m.true_neg)++;
  }
  return m;
}

inline std::vector<int> predict(const SvmModel& m, const Samples& x, int threads = 1) {
  const VectorXd f = decide_batch(m, x, threads);
  std::vector<int> out(static_cast<std::size_t>(f.size()));
  for (Eigen::Index i = 0; i < f.size(); ++i) out[static_cast<std::size_t>(i)] = predict_label(f(i));
  return out;
}

inline Metrics evaluate(const SvmModel& m, const Samples& x, const std::vector<int>& y, int threads = 1) {
  if (x.rows() == 0) throw std::domain_error("evaluate: empty split");
  return metrics_from(y, predict(m, x, threads));
}

/// n log-spaced points in [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, int n) {
  if (n < 1 || !(lo > 0.0) || !(hi >= lo)) throw std::domain_error("log_grid: invalid range");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    g[static_cast<std::size_t>(k)] = n == 1 ? lo : lo * std::pow(hi / lo, double(k) / double(n - 1));
  return g;
}

inline std::vector<double> default_lambda_grid() { return log_grid(1e-2, 1e2, 25); }

struct SweepRow {
  double lambda_minus = 0.0;
  Metrics validation;
  double kkt_residual = 0.0;
  long iterations = 0;
  bool converged = false;
  Eigen::Index support_count = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::size_t selected = 0;
  bool reached_p_min = false;
  SvmModel model;  // trained at the selected lambda_minus
};

struct SweepOptions {
  TrainOptions train;  // lambda_minus is overwritten per grid point
  double p_min = 1.0;
  bool warm_start = true;
  int threads = 1;
  std::function<void(const SweepRow&)> progress;
};

/// Trains one model per lambda_minus (ascending grid), scores each on the
/// validation split and selects the largest recall with precision >= p_min.
/// If no point reaches p_min the highest-precision point is returned and
/// reached_p_min is false.
inline SweepResult sweep_lambda(const Samples& x_train, const std::vector<int>& y_train, const Samples& x_val,
                                const std::vector<int>& y_val, const std::vector<double>& grid,
                                const SweepOptions& opt) {
  if (grid.empty()) throw std::domain_error("sweep_lambda: empty grid");
  if (!std::is_sorted(grid.begin(), grid.end())) throw std::domain_error("sweep_lambda: grid must be ascending");
  SweepResult out;
  std::optional<VectorXd> warm;
  std::optional<std::size_t> best;
  std::size_t fallback = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    TrainOptions t = opt.train;
    t.lambda_minus = grid[g];
    auto result = train(x_train, y_train, t, opt.warm_start && warm ? &*warm : nullptr);
    SweepRow row;
    row.lambda_minus = grid[g];
    row.validation = evaluate(result.model, x_val, y_val, opt.threads);
    row.kkt_residual = result.model.training.kkt_residual;
    row.iterations = result.model.training.iterations;
    row.converged = result.model.training.converged;
    row.support_count = result.model.support_count();
    if (opt.progress) opt.progress(row);
    out.rows.push_back(row);

    const auto& v = row.validation;
    if (v.precision() >= opt.p_min && (!best || v.recall() > out.rows[*best].validation.recall())) {
      best = g;
      out.model = result.model;
    }
    const auto& f = out.rows[fallback].validation;
    if (g == 0 || v.precision() > f.precision() || (v.precision() == f.precision() && v.recall() > f.recall())) {
      fallback = g;
      if (!best) out.model = result.model;
    }
    warm = std::move(result.alpha);
  }
  out.reached_p_min = best.has_value();
  out.selected = best.value_or(fallback);
  return out;
}

}  // namespace entwit::svm
