#pragma once

// Graded confidence on top of the Bayesian observer: |d(x)| as confidence,
// six-region rating classification, predicted rating frequencies, and the
// search for the five criteria whose rating ROC best matches an empirical one.

#include <algorithm>
#include <array>
#include <cfenv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "neurosdt/criteria.hpp"
#include "neurosdt/error.hpp"
#include "neurosdt/observer.hpp"
#include "neurosdt/random.hpp"
#include "neurosdt/roc.hpp"

namespace neurosdt {

inline double confidence_value(double x, const ObserverModel& m) { return std::fabs(log_odds(x, m)); }

struct SearchConfig {
  std::size_t grid_points_per_criterion = 15;
  std::size_t refinement_rounds = 12;
  std::size_t mc_samples = 0;  // 0: analytic region masses
  std::uint64_t seed = kDefaultSeed;

  void validate() const {
    detail::require(grid_points_per_criterion >= 5, "search: grid must have >= 5 points per criterion");
    detail::require(refinement_rounds >= 1, "search: need >= 1 refinement round");
  }
};

// Probability of each response column under each true condition.
inline RatingTable<double> predict_rating_masses(const ObserverModel& m, const CriteriaSet& c) {
  m.validate();
  RatingTable<double> out{};
  const double mus[2] = {m.mu_plus, m.mu_minus};
  for (std::size_t row = 0; row < 2; ++row) {
    // Region r (low to high) is (c_r, c_{r+1}], column 5 - r.
    double below = 0.0;
    for (std::size_t r = 0; r < 6; ++r) {
      const double upper = r < 5 ? norm_cdf((c[r] - mus[row]) / m.sigma) : 1.0;
      out[row][5 - r] = std::max(0.0, upper - below);
      below = upper;
    }
  }
  return out;
}

namespace detail {

// Half-to-even rounding, then a largest-remainder repair so the row sums to n.
inline std::array<std::int64_t, 6> round_row(const std::array<double, 6>& expected, std::int64_t n) {
  std::array<std::int64_t, 6> out{};
  std::array<double, 6> remainder{};
  std::int64_t total = 0;
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  for (std::size_t i = 0; i < 6; ++i) {
    out[i] = static_cast<std::int64_t>(std::nearbyint(expected[i]));
    remainder[i] = expected[i] - static_cast<double>(out[i]);
    total += out[i];
  }
  std::fesetround(saved);
  std::array<std::size_t, 6> order{};
  std::iota(order.begin(), order.end(), 0);
  while (total != n) {
    if (total < n) {
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return remainder[a] > remainder[b]; });
      out[order[0]] += 1;
      remainder[order[0]] -= 1.0;
      ++total;
    } else {
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return remainder[a] < remainder[b]; });
      const auto i = *std::find_if(order.begin(), order.end(), [&](auto k) { return out[k] > 0; });
      out[i] -= 1;
      remainder[i] += 1.0;
      --total;
    }
  }
  return out;
}

}  // namespace detail

// Analytic mode (config.mc_samples == 0): rounded expected counts. MC mode:
// draws n_per_condition features per condition from the model (Hazard on
// substream 0, Safe on substream 1 of config.seed) and classifies each.
inline RatingCounts predict_rating_counts(const ObserverModel& m, const CriteriaSet& c,
                                          std::int64_t n_per_condition, const SearchConfig& config = {}) {
  detail::require(n_per_condition >= 1, "predict_rating_counts: n_per_condition must be >= 1");
  RatingCounts rc;
  if (config.mc_samples == 0) {
    const auto masses = predict_rating_masses(m, c);
    for (std::size_t row = 0; row < 2; ++row) {
      std::array<double, 6> expected{};
      for (std::size_t j = 0; j < 6; ++j) expected[j] = masses[row][j] * static_cast<double>(n_per_condition);
      rc.counts[row] = detail::round_row(expected, n_per_condition);
    }
    return rc;
  }
  m.validate();
  const double mus[2] = {m.mu_plus, m.mu_minus};
  for (std::size_t row = 0; row < 2; ++row) {
    Rng rng(config.seed, row);
    for (std::int64_t i = 0; i < n_per_condition; ++i) {
      rc.counts[row][category_column(classify_rating(rng.normal(mus[row], m.sigma), c))] += 1;
    }
  }
  return rc;
}

// --- criteria search ----------------------------------------------------------

struct CriteriaEvaluation {
  double curve_distance = std::numeric_limits<double>::infinity();
  double point_distance = std::numeric_limits<double>::infinity();
  double objective() const { return curve_distance + point_distance; }
};

struct CriteriaFit {
  CriteriaSet criteria;
  CriteriaEvaluation best;
  double boundary_gap = 0.0;  // |c3 - model criterion|
  bool flat_objective = false;
  double top10_objective_spread = 0.0;
  double top10_distance_spread = 0.0;
  std::vector<double> round_objectives;  // [grid, round 1, ..., round R]
  std::size_t evaluations = 0;
  std::vector<std::string> warnings;
};

inline constexpr double kFlatObjectiveSpread = 1e-3;

// Quantile of the equal-weight mixture of the two class distributions.
inline double pooled_quantile(const ObserverModel& m, double p) {
  const double lo_mu = std::min(m.mu_plus, m.mu_minus), hi_mu = std::max(m.mu_plus, m.mu_minus);
  double lo = lo_mu - 40.0 * m.sigma, hi = hi_mu + 40.0 * m.sigma;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double cdf = 0.5 * norm_cdf((mid - m.mu_plus) / m.sigma) + 0.5 * norm_cdf((mid - m.mu_minus) / m.sigma);
    (cdf < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Scores candidate criteria against one fixed empirical rating ROC.
//
// The reported distance is the mean gap between the two spline-resampled
// curves. The search minimizes that distance plus the mean Euclidean gap
// between the five matching rating points: candidates on the same model ROC
// differ in the curve term only through interpolation artefacts, while the
// point term pins where along the curve each criterion sits.
class CriteriaObjective {
 public:
  CriteriaObjective(const ObserverModel& model, const RatingCounts& empirical, const SearchConfig& config)
      : model_(model), config_(config) {
    model_.validate();
    const auto pts = rating_roc(empirical);
    empirical_points_ = pts.interior();
    empirical_curve_ = spline_roc(pts);
  }

  CriteriaEvaluation operator()(const std::array<double, 5>& c) const {
    for (std::size_t i = 1; i < 5; ++i) {
      if (!(c[i - 1] < c[i])) return {};
    }
    const CriteriaSet cs(c);
    ROCPoints pts;
    if (config_.mc_samples == 0) {
      pts = rating_roc(predict_rating_masses(model_, cs));
    } else {
      pts = rating_roc(predict_rating_counts(model_, cs, static_cast<std::int64_t>(config_.mc_samples), config_).as_double());
    }
    const auto interior = pts.interior();
    if (detail::distinct_points(interior) < 3) return {};
    CriteriaEvaluation e;
    e.curve_distance = curve_distance(spline_roc(pts), empirical_curve_);
    double sum = 0.0;
    for (std::size_t j = 0; j < interior.size(); ++j) {
      sum += std::hypot(interior[j].fa - empirical_points_[j].fa, interior[j].hit - empirical_points_[j].hit);
    }
    e.point_distance = sum / static_cast<double>(interior.size());
    return e;
  }

 private:
  ObserverModel model_;
  SearchConfig config_;
  std::vector<RocPoint> empirical_points_;
  ROCCurve empirical_curve_;
};

// Coarse grid over pooled-distribution quantiles, then halved-step ordered
// coordinate descent. Candidates are visited in lexicographic order and only
// strict improvements replace the incumbent, so ties keep the
// lexicographically smallest tuple.
inline CriteriaFit fit_criteria(const ObserverModel& model, const RatingCounts& empirical,
                                const SearchConfig& config = {}) {
  config.validate();
  empirical.validate();
  const CriteriaObjective objective(model, empirical, config);

  const std::size_t g = config.grid_points_per_criterion;
  std::vector<double> grid(g);
  for (std::size_t i = 0; i < g; ++i) {
    grid[i] = pooled_quantile(model, (static_cast<double>(i) + 0.5) / static_cast<double>(g));
  }

  CriteriaFit fit;
  std::array<double, 5> best_c{};
  CriteriaEvaluation best;
  struct Scored {
    double objective;
    double distance;
  };
  std::vector<Scored> scored;
  std::array<std::size_t, 5> idx{0, 1, 2, 3, 4};
  while (true) {
    std::array<double, 5> c{};
    for (std::size_t j = 0; j < 5; ++j) c[j] = grid[idx[j]];
    const auto e = objective(c);
    ++fit.evaluations;
    if (std::isfinite(e.objective())) scored.push_back({e.objective(), e.curve_distance});
    if (e.objective() < best.objective()) {
      best = e;
      best_c = c;
    }
    // Next 5-combination of grid indices in lexicographic order.
    int j = 4;
    while (j >= 0 && idx[j] == g - 5 + static_cast<std::size_t>(j)) --j;
    if (j < 0) break;
    ++idx[j];
    for (int k = j + 1; k < 5; ++k) idx[k] = idx[k - 1] + 1;
  }
  if (!std::isfinite(best.objective())) {
    throw InputError("fit_criteria: no grid candidate produced a usable ROC");
  }

  // Flatness is judged on the ten best grid candidates.
  std::stable_sort(scored.begin(), scored.end(), [](auto a, auto b) { return a.objective < b.objective; });
  const std::size_t top = std::min<std::size_t>(10, scored.size());
  double d_lo = std::numeric_limits<double>::infinity(), d_hi = -d_lo;
  for (std::size_t i = 0; i < top; ++i) {
    d_lo = std::min(d_lo, scored[i].distance);
    d_hi = std::max(d_hi, scored[i].distance);
  }
  fit.top10_objective_spread = scored[top - 1].objective - scored[0].objective;
  fit.top10_distance_spread = d_hi - d_lo;
  fit.flat_objective = top >= 2 && fit.top10_objective_spread < kFlatObjectiveSpread;
  if (fit.flat_objective) {
    fit.warnings.push_back("near-flat objective: the ten best grid candidates score within " +
                           csv::format_double(kFlatObjectiveSpread) + "; criteria are weakly identified");
  }
  fit.round_objectives.push_back(best.objective());

  double step = (grid.back() - grid.front()) / static_cast<double>(g - 1);
  for (std::size_t round = 0; round < config.refinement_rounds; ++round) {
    step *= 0.5;
    for (int pass = 0; pass < 1000; ++pass) {
      bool improved = false;
      for (std::size_t j = 0; j < 5; ++j) {
        for (double dir : {-1.0, 1.0}) {
          auto cand = best_c;
          cand[j] += dir * step;
          const auto e = objective(cand);  // infeasible order scores +inf
          ++fit.evaluations;
          if (e.objective() < best.objective()) {
            best = e;
            best_c = cand;
            improved = true;
          }
        }
      }
      if (!improved) break;
    }
    fit.round_objectives.push_back(best.objective());
  }

  fit.criteria = CriteriaSet(best_c);
  fit.best = best;
  fit.boundary_gap = std::fabs(best_c[2] - model.criterion);
  return fit;
}

}  // namespace neurosdt
