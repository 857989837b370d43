#pragma once

// Nonparametric tests (Lilliefors, Wilcoxon signed-rank, Spearman) and the
// 3-SD nearest-neighbour outlier replacement.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "neurosdt/error.hpp"
#include "neurosdt/probability.hpp"
#include "neurosdt/random.hpp"

namespace neurosdt {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::string method;
  std::size_t n = 0;
  std::string notes;
};

inline double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Sample standard deviation (n - 1 denominator).
inline double sd_of(std::span<const double> x) {
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

// Ranks starting at 1; tied values share the average of their positions.
inline std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

// --- Lilliefors -----------------------------------------------------------

// Kolmogorov-Smirnov distance between the sample and N(mean, sd) with both
// parameters estimated from the sample.
inline double lilliefors_statistic(std::span<const double> samples) {
  const std::size_t n = samples.size();
  detail::require(n >= 5, "lilliefors: need n >= 5, got " + std::to_string(n));
  const double m = mean_of(samples);
  const double s = sd_of(samples);
  detail::require(s > 0.0, "lilliefors: zero standard deviation");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double nn = static_cast<double>(n);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = norm_cdf((sorted[i] - m) / s);
    d = std::max({d, static_cast<double>(i + 1) / nn - f, f - static_cast<double>(i) / nn});
  }
  return d;
}

// Monte Carlo null distribution of the statistic for sample size n.
class LillieforsNull {
 public:
  LillieforsNull(std::size_t n, std::size_t reps, std::uint64_t seed) : n_(n) {
    detail::require(n >= 5, "lilliefors: need n >= 5");
    detail::require(reps >= 1, "lilliefors: need mc_reps >= 1");
    Rng rng(seed, 0x4C494C4CULL);
    std::vector<double> buf(n);
    stats_.reserve(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      for (auto& v : buf) v = rng.normal();
      stats_.push_back(lilliefors_statistic(buf));
    }
    std::sort(stats_.begin(), stats_.end());
  }

  std::size_t n() const { return n_; }
  std::size_t reps() const { return stats_.size(); }

  // (1 + #{D* >= d}) / (reps + 1)
  double p_value(double d) const {
    const auto at_least = static_cast<double>(stats_.end() - std::lower_bound(stats_.begin(), stats_.end(), d));
    return (1.0 + at_least) / (static_cast<double>(stats_.size()) + 1.0);
  }

 private:
  std::size_t n_;
  std::vector<double> stats_;
};

inline TestResult lilliefors(std::span<const double> samples, const LillieforsNull& null) {
  detail::require(null.n() == samples.size(), "lilliefors: null table built for a different n");
  TestResult r;
  r.statistic = lilliefors_statistic(samples);
  r.p_value = null.p_value(r.statistic);
  r.method = "lilliefors (monte carlo, " + std::to_string(null.reps()) + " reps)";
  r.n = samples.size();
  return r;
}

inline TestResult lilliefors(std::span<const double> samples, std::size_t mc_reps = 2000,
                             std::uint64_t seed = kDefaultSeed) {
  // Validate before paying for the null table.
  lilliefors_statistic(samples);
  return lilliefors(samples, LillieforsNull(samples.size(), mc_reps, seed));
}

// --- Wilcoxon signed-rank ---------------------------------------------------

inline constexpr std::size_t kWilcoxonExactMaxN = 25;

struct SignedRanks {
  std::vector<double> ranks;  // average ranks of |d| over nonzero differences
  std::vector<bool> positive;
  double w_plus = 0.0;
};

inline SignedRanks signed_ranks(std::span<const double> x, std::span<const double> y) {
  detail::require(x.size() == y.size(), "wilcoxon: x and y differ in length");
  std::vector<double> absd;
  SignedRanks sr;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    if (d == 0.0) continue;
    absd.push_back(std::fabs(d));
    sr.positive.push_back(d > 0.0);
  }
  detail::require(!absd.empty(), "wilcoxon: all differences are zero");
  sr.ranks = average_ranks(absd);
  for (std::size_t i = 0; i < sr.ranks.size(); ++i) {
    if (sr.positive[i]) sr.w_plus += sr.ranks[i];
  }
  return sr;
}

// Exact two-sided p for W+ over all 2^n equally likely sign assignments.
// Ranks are doubled to integers so ties (half-integer ranks) count exactly;
// the subset-sum table holds the number of assignments per doubled sum.
inline double wilcoxon_exact_p(const std::vector<double>& ranks, double w_plus) {
  std::vector<std::int64_t> twice(ranks.size());
  std::int64_t total = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    twice[i] = std::llround(2.0 * ranks[i]);
    total += twice[i];
  }
  std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
  ways[0] = 1.0;
  std::int64_t reach = 0;
  for (auto r : twice) {
    for (std::int64_t s = reach; s >= 0; --s) {
      if (ways[s] != 0.0) ways[s + r] += ways[s];
    }
    reach += r;
  }
  const auto w = std::llround(2.0 * w_plus);
  double lower = 0.0, upper = 0.0;
  for (std::int64_t s = 0; s <= total; ++s) {
    if (s <= w) lower += ways[s];
    if (s >= w) upper += ways[s];
  }
  const double all = std::ldexp(1.0, static_cast<int>(ranks.size()));
  return std::min(1.0, 2.0 * std::min(lower, upper) / all);
}

inline double wilcoxon_normal_p(const std::vector<double>& ranks, double w_plus) {
  const double n = static_cast<double>(ranks.size());
  const double mean = n * (n + 1.0) / 4.0;
  double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
  std::vector<double> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    var -= (t * t * t - t) / 48.0;
    i = j + 1;
  }
  if (var <= 0.0) return 1.0;
  const double z = std::max(0.0, std::fabs(w_plus - mean) - 0.5) / std::sqrt(var);
  return std::min(1.0, 2.0 * norm_sf(z));
}

enum class WilcoxonMethod { Auto, Exact, Normal };

inline TestResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                       WilcoxonMethod method = WilcoxonMethod::Auto) {
  const auto sr = signed_ranks(x, y);
  TestResult r;
  r.statistic = sr.w_plus;
  r.n = sr.ranks.size();
  const bool exact = method == WilcoxonMethod::Exact ||
                     (method == WilcoxonMethod::Auto && r.n <= kWilcoxonExactMaxN);
  if (exact) {
    r.p_value = wilcoxon_exact_p(sr.ranks, sr.w_plus);
    r.method = "wilcoxon signed-rank (exact)";
  } else {
    r.p_value = wilcoxon_normal_p(sr.ranks, sr.w_plus);
    r.method = "wilcoxon signed-rank (normal approximation, tie-corrected, continuity 0.5)";
  }
  const std::size_t dropped = x.size() - r.n;
  if (dropped) r.notes = std::to_string(dropped) + " zero difference(s) dropped";
  return r;
}

// --- Spearman --------------------------------------------------------------

inline TestResult spearman(std::span<const double> x, std::span<const double> y) {
  detail::require(x.size() == y.size(), "spearman: x and y differ in length");
  detail::require(x.size() >= 3, "spearman: need n >= 3");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mx = mean_of(rx), my = mean_of(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  detail::require(sxx > 0.0 && syy > 0.0, "spearman: constant input vector");
  TestResult r;
  r.method = "spearman";
  r.n = x.size();
  r.statistic = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(r.n) - 2.0;
  if (std::fabs(r.statistic) >= 1.0 - 1e-15) {
    r.statistic = std::copysign(1.0, r.statistic);
    r.p_value = 0.0;
    r.notes = "perfect rank correlation; p reported as 0";
  } else if (df <= 0.0) {
    r.p_value = 1.0;
    r.notes = "no degrees of freedom";
  } else {
    const double t = r.statistic * std::sqrt(df / (1.0 - r.statistic * r.statistic));
    r.p_value = student_t_two_sided(t, df);
  }
  return r;
}

// --- outliers ---------------------------------------------------------------

// Points outside mean +- 3 SD (estimated once, on the raw series).
inline std::vector<bool> outlier_mask(std::span<const double> series) {
  std::vector<bool> mask(series.size(), false);
  if (series.size() < 2) return mask;
  const double m = mean_of(series);
  const double s = sd_of(series);
  for (std::size_t i = 0; i < series.size(); ++i) mask[i] = std::fabs(series[i] - m) > 3.0 * s;
  return mask;
}

// Replaces each masked point by the nearest unmasked element by index; an
// equidistant pair resolves to the earlier index.
inline std::vector<double> replace_masked(std::span<const double> series, const std::vector<bool>& mask) {
  std::vector<double> out(series.begin(), series.end());
  const auto n = static_cast<std::ptrdiff_t>(series.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    for (std::ptrdiff_t k = 1; k < n; ++k) {
      if (i - k >= 0 && !mask[i - k]) {
        out[i] = series[i - k];
        break;
      }
      if (i + k < n && !mask[i + k]) {
        out[i] = series[i + k];
        break;
      }
    }
  }
  return out;
}

// Single pass; re-running on the output may flag new points because the
// mean and SD shift once outliers are gone.
inline std::vector<double> replace_outliers(std::span<const double> series) {
  const auto mask = outlier_mask(series);
  const auto outliers = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
  if (outliers == 0) return {series.begin(), series.end()};
  if (series.size() - outliers < 2) {
    throw InputError("replace_outliers: all but " + std::to_string(series.size() - outliers) +
                     " point(s) are outliers");
  }
  return replace_masked(series, mask);
}

}  // namespace neurosdt
