#pragma once

// Convex-roof three-tangle of the rank-three family
//
//     rho(p, q) = p |GHZ><GHZ| + q |W><W| + (1 - p - q) |Wbar><Wbar|.
//
// The family is the image of its own range under the Z3 twirl generated by
// diag(1, w) on every qubit, w = exp(2 pi i / 3): GHZ is fixed while W and Wbar
// pick up the phases w and w^2. The twirl maps the projector onto any
// a|GHZ> + b|W> + c|Wbar> to rho(|a|^2, |b|^2), so the convex roof equals the
// convex hull, over the parameter triangle, of
//
//     eps(p, q) = min over phases of tau(sqrt(p)|GHZ> + e^{i phi1} sqrt(q)|W> + e^{i phi2} sqrt(r)|Wbar>).
//
// For these superpositions the Cayley hyperdeterminant gives
//
//     tau = | p^2 - 4 p sqrt(qr) e^{i th} - (4/3) q r e^{2 i th}
//             + (16 / (3 sqrt 6)) sqrt(p) (q^{3/2} e^{3 i phi1} + r^{3/2} e^{3 i phi2}) |,
//
// with th = phi1 + phi2. eps is tabulated on a triangular grid, plus refined
// points along grid lines, and the hull is evaluated by a three-row linear
// program over the table and the query point. Every entry is attained by an
// explicit decomposition, so the value is an upper bound on the exact roof that
// converges to it as the grid is refined.

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace entwit::measures {

struct GhzWParams {
  double p = 0.0;  // GHZ weight
  double q = 0.0;  // W weight; Wbar gets 1 - p - q
};

inline void validate(const GhzWParams& g) {
  constexpr double eps = 1e-12;
  if (!(g.p >= -eps && g.q >= -eps && g.p + g.q <= 1.0 + eps))
    throw std::domain_error("GhzWParams: weights must satisfy p, q >= 0 and p + q <= 1");
}

namespace ghzw_detail {

inline constexpr double kPi = 3.14159265358979323846;
inline const double kCubic = 16.0 / (3.0 * std::sqrt(6.0));

struct Coefficients {
  double p2, mix1, mix2, cw, cwbar;
};

inline Coefficients coefficients(double p, double q) {
  const double r = std::max(0.0, 1.0 - p - q);
  p = std::max(0.0, p);
  q = std::max(0.0, q);
  return {p * p, 4.0 * p * std::sqrt(q * r), (4.0 / 3.0) * q * r, kCubic * std::sqrt(p) * q * std::sqrt(q),
          kCubic * std::sqrt(p) * r * std::sqrt(r)};
}

// th = phi1 + phi2, u = 3 phi1 (so 3 phi2 = 3 th - u).
inline double tangle_at(const Coefficients& c, double th, double u) {
  const std::complex<double> e1 = std::polar(1.0, th);
  const std::complex<double> v = c.p2 - c.mix1 * e1 - c.mix2 * e1 * e1 + c.cw * std::polar(1.0, u) +
                                 c.cwbar * std::polar(1.0, 3.0 * th - u);
  return std::abs(v);
}

}  // namespace ghzw_detail

/// tau of sqrt(p)|GHZ> + e^{i phi1} sqrt(q)|W> + e^{i phi2} sqrt(1-p-q)|Wbar>.
inline double ghz_w_superposition_tangle(double p, double q, double phi1, double phi2) {
  const auto c = ghzw_detail::coefficients(p, q);
  return ghzw_detail::tangle_at(c, phi1 + phi2, 3.0 * phi1);
}

namespace ghzw_detail {

// Signed distance from (x, y) to the ellipse (e0 cos s, e1 sin s), e0 >= e1 >= 0;
// negative inside. Closest point by bisection on the Lagrange multiplier.
inline double signed_ellipse_distance(double x, double y, double e0, double e1) {
  x = std::abs(x);
  y = std::abs(y);
  if (e1 <= 1e-300) {
    // degenerate ellipse: the segment [-e0, e0]
    return std::hypot(std::max(0.0, x - e0), y);
  }
  const bool inside = (x / e0) * (x / e0) + (y / e1) * (y / e1) < 1.0;
  double cx, cy;
  if (y > 0.0) {
    if (x > 0.0) {
      // closest point (e0^2 x / (t + e0^2), e1^2 y / (t + e1^2)) with F(t) = 0, t in (-e1^2, inf)
      auto f = [&](double t) {
        const double u = e0 * x / (t + e0 * e0);
        const double v = e1 * y / (t + e1 * e1);
        return u * u + v * v - 1.0;
      };
      double lo = -e1 * e1 + e1 * y * 1e-16;
      double hi = std::hypot(e0 * x, e1 * y);
      if (lo >= hi) lo = -e1 * e1;
      for (int k = 0; k < 60 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++k) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
      }
      const double t = 0.5 * (lo + hi);
      cx = e0 * e0 * x / (t + e0 * e0);
      cy = e1 * e1 * y / (t + e1 * e1);
    } else {
      cx = 0.0;
      cy = e1;
    }
  } else {
    const double num = e0 * x;
    const double den = e0 * e0 - e1 * e1;
    if (num < den) {
      const double r = num / den;
      cx = e0 * r;
      cy = e1 * std::sqrt(std::max(0.0, 1.0 - r * r));
    } else {
      cx = e0;
      cy = 0.0;
    }
  }
  const double d = std::hypot(x - cx, y - cy);
  return inside ? -d : d;
}

// With e^{iu} = e^{3i th / 2} e^{i s}, the two W-type terms become
// e^{3i th / 2} ((cw + cwbar) cos s + i (cw - cwbar) sin s), so the minimum over
// u at fixed th is the distance from -A(th) e^{-3i th / 2} to an ellipse.
struct PhaseProfile {
  const Coefficients& c;
  double e0, e1;

  explicit PhaseProfile(const Coefficients& cf) : c(cf), e0(cf.cw + cf.cwbar), e1(std::abs(cf.cw - cf.cwbar)) {}

  std::complex<double> point(double th) const {
    const std::complex<double> e = std::polar(1.0, th);
    return -(c.p2 - c.mix1 * e - c.mix2 * e * e) * std::polar(1.0, -1.5 * th);
  }
  bool flat() const { return e1 <= 1e-12 * e0; }
  double distance(double th) const {
    const auto z = point(th);
    return std::abs(signed_ellipse_distance(z.real(), z.imag(), e0, e1));
  }
  // cheap proxy with the sign of the signed distance
  double level(double th) const {
    if (flat()) return distance(th);
    const auto z = point(th);
    const double x = z.real() / e0;
    const double y = z.imag() / e1;
    return x * x + y * y - 1.0;
  }
};

}  // namespace ghzw_detail

/// Minimum of the superposition tangle over both relative phases. A sign
/// change of the ellipse distance over th certifies an exact zero.
inline double ghz_w_min_phase_tangle(double p, double q) {
  using namespace ghzw_detail;
  const auto c = coefficients(p, q);
  if (c.mix1 == 0.0 && c.mix2 == 0.0 && c.cw == 0.0 && c.cwbar == 0.0) return c.p2;

  const PhaseProfile prof(c);
  constexpr int kScan = 120;
  const double step = 2.0 * kPi / kScan;
  std::array<double, kScan + 1> g;
  for (int k = 0; k <= kScan; ++k) g[k] = prof.level(k * step);
  if (!prof.flat())
    for (int k = 0; k < kScan; ++k)
      if (g[k] == 0.0 || (g[k] < 0.0) != (g[k + 1] < 0.0)) return 0.0;

  // No crossing: the level proxy does not locate distance minima, so scan the
  // distance itself on a coarser grid and refine its local minima.
  constexpr int kCoarse = 60;
  const double coarse = 2.0 * kPi / kCoarse;
  std::array<double, kCoarse> d;
  for (int k = 0; k < kCoarse; ++k) d[k] = prof.distance(k * coarse);
  double result = *std::min_element(d.begin(), d.end());
  auto f = [&](double th) { return prof.distance(th); };
  for (int k = 0; k < kCoarse; ++k) {
    if (d[k] <= d[(k + kCoarse - 1) % kCoarse] && d[k] <= d[(k + 1) % kCoarse]) {
      const auto r = boost::math::tools::brent_find_minima(f, (k - 1) * coarse, (k + 1) * coarse, 30);
      result = std::min(result, r.second);
    }
  }
  return result;
}

/// Tabulated eps(p, q) on the grid (i/M, j/M), i + j <= M, with a convex-hull
/// evaluator. Construction costs O(M^2) phase minimizations.
class GhzWTangleTable {
 public:
  explicit GhzWTangleTable(int resolution) : m_(resolution) {
    if (m_ < 2) throw std::domain_error("GhzWTangleTable: resolution must be >= 2");
    const double h = 1.0 / m_;
    for (int i = 0; i <= m_; ++i) {
      for (int j = 0; i + j <= m_; ++j) {
        const double p = i * h;
        const double q = j * h;
        points_.push_back({p, q, ghz_w_min_phase_tangle(p, q)});
      }
    }
    refine();
  }

  int resolution() const { return m_; }

  double tabulated(int i, int j) const { return points_[index_of(i, j)].eps; }

  /// Lower convex envelope of the tabulated eps at (p, q).
  double envelope(double p, double q) const {
    validate(GhzWParams{p, q});
    const std::array<double, 3> target{p, q, 1.0};

    // Revised simplex on   min sum c_k l_k   s.t.  sum l_k (p_k, q_k, 1) = (p, q, 1), l >= 0,
    // started from the grid cell holding the target (feasible and near optimal).
    // The target's own superposition tangle is attainable too and enters as
    // the extra column n - 1.
    const Point own{p, q, ghz_w_min_phase_tangle(p, q)};
    const std::size_t n = points_.size() + 1;
    auto pt = [&](std::size_t k) -> const Point& { return k < points_.size() ? points_[k] : own; };
    std::array<std::size_t, 3> basis = cell_of(p, q);
    auto column = [&](std::size_t k) { return std::array<double, 3>{pt(k).p, pt(k).q, 1.0}; };
    // Dantzig pricing; Bland's rule after a run of degenerate pivots.
    bool bland = false;
    int degenerate_run = 0;

    for (int iter = 0; iter < 20000; ++iter) {
      Mat3 b;
      for (int col = 0; col < 3; ++col) {
        const auto c = column(basis[col]);
        for (int row = 0; row < 3; ++row) b[row][col] = c[row];
      }
      const Mat3 binv = inverse(b);
      const auto xb = mul(binv, target);

      // duals y = c_B^T B^{-1}
      std::array<double, 3> y{};
      for (int col = 0; col < 3; ++col)
        for (int row = 0; row < 3; ++row) y[col] += pt(basis[row]).eps * binv[row][col];

      std::size_t entering = n;
      double most_negative = -1e-10;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == basis[0] || k == basis[1] || k == basis[2]) continue;
        const Point& c = pt(k);
        const double reduced = c.eps - (y[0] * c.p + y[1] * c.q + y[2]);
        if (reduced < most_negative) {
          most_negative = reduced;
          entering = k;
          if (bland) break;
        }
      }
      if (entering == n) {
        double value = 0.0;
        for (int row = 0; row < 3; ++row) value += pt(basis[row]).eps * std::max(0.0, xb[row]);
        return std::max(0.0, value);
      }

      const auto w = mul(binv, column(entering));
      int leaving = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int row = 0; row < 3; ++row) {
        if (w[row] > 1e-9) {
          const double ratio = std::max(0.0, xb[row]) / w[row];
          // ties go to the larger pivot to keep the basis well conditioned
          const bool tie = leaving >= 0 && ratio <= best_ratio + 1e-15;
          const bool prefer = bland ? basis[row] < basis[leaving] : w[row] > w[leaving];
          if (ratio < best_ratio - 1e-15 || (tie && prefer)) {
            best_ratio = ratio;
            leaving = row;
          }
        }
      }
      if (leaving < 0) throw std::runtime_error("GhzWTangleTable: unbounded hull program");
      degenerate_run = best_ratio <= 1e-15 ? degenerate_run + 1 : 0;
      if (degenerate_run > 20) bland = true;
      basis[leaving] = entering;
    }
    throw std::runtime_error("GhzWTangleTable: hull program did not converge");
  }

 private:
  using Mat3 = std::array<std::array<double, 3>, 3>;

  struct Point {
    double p, q, eps;
  };

  // eps has isolated zeros and kinks between grid nodes (on the r = 0 edge the
  // zero sits at an irrational p). Along every grid line, in all three
  // directions, add the refined local minima and the ends of the zero set.
  void refine() {
    const double h = 1.0 / m_;
    std::vector<Point> extra;
    auto eval = [](double p, double q) { return Point{p, q, ghz_w_min_phase_tangle(p, q)}; };
    for (int dir = 0; dir < 3; ++dir) {
      for (int fixed = 0; fixed <= m_; ++fixed) {
        const int len = m_ - fixed;
        if (len < 1) continue;
        // (p, q) at position s in [0, len] along the line
        auto at = [&](double s) -> std::pair<double, double> {
          if (dir == 0) return {fixed * h, s * h};
          if (dir == 1) return {s * h, fixed * h};
          return {s * h, (len - s) * h};
        };
        auto grid = [&](int s) {
          const auto [i, j] = dir == 0 ? std::pair{fixed, s} : dir == 1 ? std::pair{s, fixed} : std::pair{s, len - s};
          return points_[index_of(i, j)].eps;
        };
        auto f = [&](double s) {
          const auto [p, q] = at(s);
          return ghz_w_min_phase_tangle(p, q);
        };
        for (int s = 0; s <= len; ++s) {
          const double here = grid(s);
          const double left = s > 0 ? grid(s - 1) : std::numeric_limits<double>::infinity();
          const double right = s < len ? grid(s + 1) : std::numeric_limits<double>::infinity();
          if (here > kZero && here <= left && here <= right) {
            const auto r = boost::math::tools::brent_find_minima(f, std::max(0.0, s - 1.0), std::min<double>(len, s + 1.0), 26);
            const auto [p, q] = at(r.first);
            extra.push_back({p, q, r.second});
          }
          if (s < len && ((here <= kZero) != (right <= kZero))) {
            double zero_side = here <= kZero ? s : s + 1.0;
            double other = here <= kZero ? s + 1.0 : s;
            for (int k = 0; k < 24; ++k) {
              const double mid = 0.5 * (zero_side + other);
              (f(mid) <= kZero ? zero_side : other) = mid;
            }
            const auto [p, q] = at(zero_side);
            extra.push_back(eval(p, q));
          }
        }
      }
    }
    points_.insert(points_.end(), extra.begin(), extra.end());
  }

  // minimizer noise floor inside the zero region of eps
  static constexpr double kZero = 1e-7;

  std::array<std::size_t, 3> cell_of(double p, double q) const {
    int i = std::clamp(static_cast<int>(std::floor(p * m_)), 0, m_ - 1);
    int j = std::clamp(static_cast<int>(std::floor(q * m_)), 0, m_ - 1);
    while (i + j > m_ - 1) (i > j ? i : j) -= 1;
    const double a = p * m_ - i;
    const double b = q * m_ - j;
    if (i + j == m_ - 1 || a + b <= 1.0) return {index_of(i, j), index_of(i + 1, j), index_of(i, j + 1)};
    return {index_of(i + 1, j), index_of(i, j + 1), index_of(i + 1, j + 1)};
  }

  std::size_t index_of(int i, int j) const {
    // rows i = 0..M, row i holds M - i + 1 entries
    const std::size_t before = static_cast<std::size_t>(i) * (m_ + 1) - static_cast<std::size_t>(i) * (i - 1) / 2;
    return before + j;
  }

  static std::array<double, 3> mul(const Mat3& a, const std::array<double, 3>& v) {
    std::array<double, 3> out{};
    for (int r = 0; r < 3; ++r) out[r] = a[r][0] * v[0] + a[r][1] * v[1] + a[r][2] * v[2];
    return out;
  }

  static Mat3 inverse(const Mat3& a) {
    const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                       a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                       a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    if (std::abs(det) < 1e-300) throw std::runtime_error("GhzWTangleTable: singular basis");
    Mat3 inv;
    inv[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / det;
    inv[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / det;
    inv[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det;
    inv[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / det;
    inv[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / det;
    inv[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / det;
    inv[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / det;
    inv[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / det;
    inv[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / det;
    return inv;
  }

  int m_;
  std::vector<Point> points_;
};

inline constexpr int kDefaultGhzWResolution = 160;

/// Process-wide table, built on first use.
inline const GhzWTangleTable& default_ghz_w_table() {
  static const GhzWTangleTable table(kDefaultGhzWResolution);
  return table;
}

/// Convex-roof three-tangle of p GHZ + q W + (1 - p - q) Wbar.
inline double ghz_w_three_tangle(const GhzWParams& g) {
  validate(g);
  return default_ghz_w_table().envelope(std::clamp(g.p, 0.0, 1.0), std::clamp(g.q, 0.0, 1.0 - std::clamp(g.p, 0.0, 1.0)));
}

}  // namespace entwit::measures
