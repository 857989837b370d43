#pragma once

// ROC curves from observer models and from graded (six-category) response
// frequencies, plus AUC, spline resampling and curve distance.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "neurosdt/criteria.hpp"
#include "neurosdt/error.hpp"
#include "neurosdt/observer.hpp"
#include "neurosdt/trials.hpp"

namespace neurosdt {

struct RocPoint {
  double fa = 0.0;
  double hit = 0.0;

  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

enum class RocSource { ModelSweep, Spline };

struct ROCCurve {
  std::vector<RocPoint> points;  // fa ascending, (0,0) first, (1,1) last
  RocSource source = RocSource::ModelSweep;
  std::vector<std::string> warnings;
};

// Rows: true condition {Hazard, Safe}. Columns: Hazard-High, Hazard-Med,
// Hazard-Low, Safe-Low, Safe-Med, Safe-High.
template <class T>
using RatingTable = std::array<std::array<T, 6>, 2>;

struct RatingCounts {
  RatingTable<std::int64_t> counts{};

  std::int64_t row_sum(std::size_t row) const {
    std::int64_t s = 0;
    for (auto c : counts[row]) s += c;
    return s;
  }
  void validate() const {
    for (const auto& row : counts) {
      for (auto c : row) detail::require(c >= 0, "rating counts must be non-negative");
    }
    detail::require(row_sum(0) >= 1, "rating counts: hazard row sums to zero");
    detail::require(row_sum(1) >= 1, "rating counts: safe row sums to zero");
  }
  RatingTable<double> as_double() const {
    RatingTable<double> out{};
    for (std::size_t r = 0; r < 2; ++r) {
      for (std::size_t c = 0; c < 6; ++c) out[r][c] = static_cast<double>(counts[r][c]);
    }
    return out;
  }

  friend bool operator==(const RatingCounts&, const RatingCounts&) = default;
};

struct ROCPoints {
  std::vector<RocPoint> points;  // (0,0), five cumulative points, (1,1)
  RatingTable<double> counts{};

  std::vector<RocPoint> interior() const { return {points.begin() + 1, points.end() - 1}; }
};

// Tallies (response, rating) categories per true condition.
inline RatingCounts rating_counts(const TrialSet& trials) {
  RatingCounts rc;
  for (const auto& t : trials.trials) {
    if (!t.rating) {
      throw InputError("rating_counts: trial " + t.trial_id + " of participant " + t.participant_id +
                       " has no rating");
    }
    const auto col = category_column({t.response, *t.rating});
    rc.counts[t.condition == Condition::Hazard ? 0 : 1][col] += 1;
  }
  return rc;
}

// --- model sweep and AUC ------------------------------------------------------

// Sweeps the criterion k over midpoint +- 6 sigma; each k gives the rates of
// the rule "Hazard iff x > k".
inline ROCCurve model_roc(const ObserverModel& model, std::size_t n_criteria) {
  model.validate();
  detail::require(n_criteria >= 3, "model_roc: n_criteria must be >= 3");
  ROCCurve curve;
  curve.source = RocSource::ModelSweep;
  curve.points.reserve(n_criteria + 2);
  curve.points.push_back({0.0, 0.0});
  const double lo = model.midpoint() - 6.0 * model.sigma;
  const double hi = model.midpoint() + 6.0 * model.sigma;
  for (std::size_t i = 0; i < n_criteria; ++i) {
    const double k = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_criteria - 1);
    const auto [hit, fa] = rates_at_criterion(model, k);
    curve.points.push_back({fa, hit});
  }
  curve.points.push_back({1.0, 1.0});
  std::sort(curve.points.begin(), curve.points.end(), [](const RocPoint& a, const RocPoint& b) {
    return a.fa < b.fa || (a.fa == b.fa && a.hit < b.hit);
  });
  return curve;
}

// Trapezoidal area, accumulated as 0.5 + area between the curve and the
// diagonal. The two forms are algebraically identical for curves that run
// from (0,0) to (1,1); this one is exactly 0.5 on a diagonal curve.
inline double auc(const ROCCurve& curve) {
  const auto& p = curve.points;
  detail::require(p.size() >= 2, "auc: curve needs at least two points");
  double excess = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    const double width = p[i].fa - p[i - 1].fa;
    excess += 0.5 * width * ((p[i].hit - p[i].fa) + (p[i - 1].hit - p[i - 1].fa));
  }
  return std::clamp(0.5 + excess, 0.0, 1.0);
}

// --- rating ROC -----------------------------------------------------------------

// Cumulates from the most confident Hazard column towards Safe-High.
inline ROCPoints rating_roc(const RatingTable<double>& table) {
  double total[2] = {0.0, 0.0};
  for (std::size_t r = 0; r < 2; ++r) {
    for (double c : table[r]) {
      detail::require(c >= 0.0, "rating_roc: negative count");
      total[r] += c;
    }
  }
  detail::require(total[0] > 0.0, "rating_roc: hazard row sums to zero");
  detail::require(total[1] > 0.0, "rating_roc: safe row sums to zero");
  ROCPoints out;
  out.counts = table;
  out.points.push_back({0.0, 0.0});
  double cum_h = 0.0, cum_s = 0.0;
  for (std::size_t j = 0; j < 5; ++j) {
    cum_h += table[0][j];
    cum_s += table[1][j];
    out.points.push_back({std::min(1.0, cum_s / total[1]), std::min(1.0, cum_h / total[0])});
  }
  out.points.push_back({1.0, 1.0});
  return out;
}

inline ROCPoints rating_roc(const RatingCounts& counts) {
  counts.validate();
  return rating_roc(counts.as_double());
}

// --- spline ------------------------------------------------------------------------

inline constexpr std::size_t kRocGridSize = 101;
inline constexpr double kDuplicateFaEpsilon = 1e-9;

namespace detail {

// Monotone piecewise-cubic Hermite interpolation (Fritsch-Carlson slopes with
// the three-point shape-preserving end conditions, as in PCHIP).
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    ensure(n >= 2 && y_.size() == n, "MonotoneCubic: need >= 2 points");
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      ensure(h[i] > 0.0, "MonotoneCubic: abscissae must be strictly increasing");
      delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    m_.assign(n, 0.0);
    if (n == 2) {
      m_[0] = m_[1] = delta[0];
      return;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (delta[k - 1] * delta[k] <= 0.0) continue;
      const double w1 = 2.0 * h[k] + h[k - 1];
      const double w2 = h[k] + 2.0 * h[k - 1];
      m_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
    }
    m_[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
    m_[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }

  double operator()(double t) const {
    const std::size_t n = x_.size();
    std::size_t i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin());
    i = std::clamp<std::size_t>(i, 1, n - 1) - 1;
    const double h = x_[i + 1] - x_[i];
    const double s = (t - x_[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
  }

 private:
  static int sgn(double v) { return (v > 0.0) - (v < 0.0); }

  static double edge_slope(double h0, double h1, double d0, double d1) {
    double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (sgn(d) != sgn(d0)) {
      d = 0.0;
    } else if (sgn(d0) != sgn(d1) && std::fabs(d) > 3.0 * std::fabs(d0)) {
      d = 3.0 * d0;
    }
    return d;
  }

  std::vector<double> x_, y_, m_;
};

inline std::size_t distinct_points(const std::vector<RocPoint>& pts) {
  auto sorted = pts;
  std::sort(sorted.begin(), sorted.end(), [](auto a, auto b) { return a.fa < b.fa || (a.fa == b.fa && a.hit < b.hit); });
  return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

}  // namespace detail

inline double grid_fa(std::size_t i) { return static_cast<double>(i) / static_cast<double>(kRocGridSize - 1); }

// Interpolates a rating ROC (endpoints included) with a monotone cubic and
// samples it at 101 evenly spaced false-alarm rates. Samples are clamped to
// [0, 1] and made nondecreasing by a running maximum. Coincident false-alarm
// rates are separated by 1e-9 steps, with a warning.
inline ROCCurve spline_roc(const ROCPoints& rp) {
  const auto interior = rp.interior();
  if (detail::distinct_points(interior) < 3) {
    throw InputError("spline_roc: need at least 3 distinct interior ROC points");
  }
  auto pts = rp.points;
  std::sort(pts.begin(), pts.end(), [](auto a, auto b) { return a.fa < b.fa || (a.fa == b.fa && a.hit < b.hit); });

  ROCCurve curve;
  curve.source = RocSource::Spline;
  std::vector<double> x(pts.size()), y(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    x[i] = pts[i].fa;
    y[i] = pts[i].hit;
  }
  bool perturbed = false;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (x[i] <= x[i - 1]) {
      x[i] = x[i - 1] + kDuplicateFaEpsilon;
      perturbed = true;
    }
  }
  if (x.back() > 1.0) {
    x.back() = 1.0;
    for (std::size_t i = x.size() - 1; i-- > 0;) x[i] = std::min(x[i], x[i + 1] - kDuplicateFaEpsilon);
  }
  if (perturbed) curve.warnings.push_back("duplicate false-alarm rates separated by 1e-9");

  const detail::MonotoneCubic spline(std::move(x), std::move(y));
  curve.points.reserve(kRocGridSize);
  double running = 0.0;
  for (std::size_t i = 0; i < kRocGridSize; ++i) {
    const double f = grid_fa(i);
    running = std::max(running, std::clamp(spline(f), 0.0, 1.0));
    curve.points.push_back({f, running});
  }
  return curve;
}

// Hit rate of a curve at false-alarm rate f by linear interpolation; where
// several points share f the largest hit wins (upper envelope).
inline double hit_at(const ROCCurve& curve, double f) {
  const auto& p = curve.points;
  detail::require(!p.empty(), "empty ROC curve");
  const auto upper = static_cast<std::size_t>(
      std::upper_bound(p.begin(), p.end(), f, [](double v, const RocPoint& q) { return v < q.fa; }) - p.begin());
  if (upper == 0) return p.front().hit;
  const std::size_t left = upper - 1;
  if (p[left].fa == f || upper == p.size()) {
    double best = p[left].hit;
    for (std::size_t j = left; j-- > 0 && p[j].fa == p[left].fa;) best = std::max(best, p[j].hit);
    return best;
  }
  const double w = (f - p[left].fa) / (p[upper].fa - p[left].fa);
  return p[left].hit + w * (p[upper].hit - p[left].hit);
}

inline std::vector<double> resample(const ROCCurve& curve) {
  std::vector<double> out(kRocGridSize);
  for (std::size_t i = 0; i < kRocGridSize; ++i) out[i] = hit_at(curve, grid_fa(i));
  return out;
}

// Mean Euclidean gap over the common 101-point grid. Both curves share the
// abscissae, so each term is |delta hit|.
inline double curve_distance(const ROCCurve& a, const ROCCurve& b) {
  const auto ha = resample(a);
  const auto hb = resample(b);
  double sum = 0.0;
  for (std::size_t i = 0; i < kRocGridSize; ++i) sum += std::fabs(ha[i] - hb[i]);
  return sum / static_cast<double>(kRocGridSize);
}

}  // namespace neurosdt
