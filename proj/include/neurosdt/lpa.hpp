#pragma once

// Latent profile analysis: diagonal Gaussian mixtures fitted by EM over
// per-participant accuracy vectors, BIC model selection and posterior class
// assignment.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "neurosdt/csv.hpp"
#include "neurosdt/error.hpp"
#include "neurosdt/random.hpp"

namespace neurosdt {

struct AccuracyMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> values;  // rows x columns
  bool standardized = false;

  std::size_t rows() const { return values.size(); }
  std::size_t cols() const { return columns.size(); }

  void validate() const {
    detail::require(!values.empty(), "accuracy matrix has no rows");
    detail::require(!columns.empty(), "accuracy matrix has no columns");
    for (const auto& r : values) {
      detail::require(r.size() == columns.size(), "accuracy matrix: ragged row");
      for (double v : r) detail::require(std::isfinite(v), "accuracy matrix: missing or non-finite cell");
    }
  }
};

inline AccuracyMatrix load_accuracy(const std::string& path) {
  const auto t = csv::read_file(path);
  detail::require(!t.header.empty() && t.header[0] == "participant_id",
                  path + ": first column must be participant_id");
  detail::require(t.header.size() >= 2, path + ": need at least one accuracy column");
  AccuracyMatrix m;
  m.columns.assign(t.header.begin() + 1, t.header.end());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    m.row_ids.push_back(t.rows[r][0]);
    std::vector<double> row;
    for (std::size_t c = 1; c < t.header.size(); ++c) {
      const auto v = csv::parse_double(t.rows[r][c]);
      if (!v) {
        throw InputError(path + ":" + std::to_string(t.line_numbers[r]) + ": column '" + t.header[c] +
                         "': not a number: '" + t.rows[r][c] + "'");
      }
      row.push_back(*v);
    }
    m.values.push_back(std::move(row));
  }
  m.validate();
  return m;
}

// Column centring and scaling (n - 1 denominator).
inline AccuracyMatrix standardize(const AccuracyMatrix& m) {
  m.validate();
  detail::require(m.rows() >= 2, "standardize: need at least two rows");
  AccuracyMatrix out = m;
  const double n = static_cast<double>(m.rows());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double mean = 0.0;
    for (const auto& r : m.values) mean += r[c];
    mean /= n;
    double ss = 0.0;
    for (const auto& r : m.values) ss += (r[c] - mean) * (r[c] - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 0.0)) throw InputError("standardize: column '" + m.columns[c] + "' has zero standard deviation");
    for (auto& r : out.values) r[c] = (r[c] - mean) / sd;
  }
  out.standardized = true;
  return out;
}

enum class Covariance {
  DiagonalVarying,  // per-class diagonal variances
  DiagonalEqual,    // one diagonal variance vector shared by all classes
};

inline Covariance parse_covariance(const std::string& s) {
  if (s == "equal") return Covariance::DiagonalEqual;
  if (s == "varying") return Covariance::DiagonalVarying;
  throw InputError("unknown covariance structure '" + s + "' (expected equal or varying)");
}

inline const char* to_string(Covariance c) {
  return c == Covariance::DiagonalEqual ? "diagonal, equal across classes" : "diagonal, varying across classes";
}

struct MixtureModel {
  std::size_t k = 1;
  std::size_t dim = 0;
  Covariance covariance = Covariance::DiagonalEqual;
  std::vector<double> weights;
  std::vector<std::vector<double>> means;      // k x dim
  std::vector<std::vector<double>> variances;  // k x dim
  double loglik = -std::numeric_limits<double>::infinity();
  std::size_t n_params = 0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> loglik_trace;
  std::size_t restart_index = 0;
};

struct GmmOptions {
  Covariance covariance = Covariance::DiagonalEqual;
  std::size_t max_iterations = 500;
  double tolerance = 1e-8;
  double variance_floor = 1e-6;
};

inline std::size_t mixture_parameters(std::size_t k, std::size_t d, Covariance cov) {
  return (k - 1) + k * d + (cov == Covariance::DiagonalEqual ? d : k * d);
}

namespace detail {

inline double log_sum_exp(const std::vector<double>& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

inline double log_component(const MixtureModel& g, std::size_t j, const std::vector<double>& x) {
  double lp = std::log(g.weights[j]);
  for (std::size_t d = 0; d < g.dim; ++d) {
    const double v = g.variances[j][d];
    const double z = x[d] - g.means[j][d];
    lp -= 0.5 * (std::log(2.0 * std::numbers::pi * v) + z * z / v);
  }
  return lp;
}

// Returns false when a component has (numerically) no members.
inline bool m_step(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& resp,
                   MixtureModel& g, const GmmOptions& opt) {
  const std::size_t n = x.size(), k = g.k, dim = g.dim;
  std::vector<double> nk(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) nk[j] += resp[i][j];
  }
  for (double v : nk) {
    if (v < 1e-10) return false;
  }
  g.weights.assign(k, 0.0);
  g.means.assign(k, std::vector<double>(dim, 0.0));
  g.variances.assign(k, std::vector<double>(dim, 0.0));
  for (std::size_t j = 0; j < k; ++j) {
    g.weights[j] = nk[j] / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < dim; ++d) g.means[j][d] += resp[i][j] * x[i][d];
    }
    for (auto& v : g.means[j]) v /= nk[j];
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < dim; ++d) {
        const double z = x[i][d] - g.means[j][d];
        g.variances[j][d] += resp[i][j] * z * z;
      }
    }
  }
  if (g.covariance == Covariance::DiagonalEqual) {
    std::vector<double> shared(dim, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t d = 0; d < dim; ++d) shared[d] += g.variances[j][d];
    }
    for (auto& v : shared) v = std::max(opt.variance_floor, v / static_cast<double>(n));
    for (auto& row : g.variances) row = shared;
  } else {
    for (std::size_t j = 0; j < k; ++j) {
      for (auto& v : g.variances[j]) v = std::max(opt.variance_floor, v / nk[j]);
    }
  }
  return true;
}

// E-step; fills resp and returns the log-likelihood.
inline double e_step(const std::vector<std::vector<double>>& x, const MixtureModel& g,
                     std::vector<std::vector<double>>& resp) {
  double ll = 0.0;
  std::vector<double> lp(g.k);
  resp.assign(x.size(), std::vector<double>(g.k, 0.0));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < g.k; ++j) lp[j] = log_component(g, j, x[i]);
    const double lse = log_sum_exp(lp);
    ll += lse;
    for (std::size_t j = 0; j < g.k; ++j) resp[i][j] = std::exp(lp[j] - lse);
  }
  return ll;
}

// k-means++ seeding followed by a hard assignment to the nearest seed.
inline std::vector<std::vector<double>> kmeanspp_responsibilities(const std::vector<std::vector<double>>& x,
                                                                  std::size_t k, Rng& rng) {
  const std::size_t n = x.size();
  auto dist2 = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t d = 0; d < x[a].size(); ++d) s += (x[a][d] - x[b][d]) * (x[a][d] - x[b][d]);
    return s;
  };
  std::vector<std::size_t> centers{static_cast<std::size_t>(rng.below(n))};
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = dist2(i, centers[0]);
  while (centers.size() < k) {
    const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        if (u < nearest[i]) {
          pick = i;
          break;
        }
        u -= nearest[i];
      }
    } else {
      pick = static_cast<std::size_t>(rng.below(n));
    }
    centers.push_back(pick);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], dist2(i, pick));
  }
  std::vector<std::vector<double>> resp(n, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      const double d = dist2(i, centers[j]);
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    resp[i][best] = 1.0;
  }
  return resp;
}

}  // namespace detail

// One EM run from a k-means++ start drawn from `rng`. Returns a model with
// loglik = -inf when the start collapses (an empty component).
inline MixtureModel fit_gmm_once(const AccuracyMatrix& m, std::size_t k, Rng& rng, const GmmOptions& opt = {}) {
  MixtureModel g;
  g.k = k;
  g.dim = m.cols();
  g.covariance = opt.covariance;
  g.n_params = mixture_parameters(k, g.dim, opt.covariance);
  auto resp = detail::kmeanspp_responsibilities(m.values, k, rng);
  if (!detail::m_step(m.values, resp, g, opt)) return g;
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    const double ll = detail::e_step(m.values, g, resp);
    g.loglik_trace.push_back(ll);
    g.loglik = ll;
    g.iterations = it + 1;
    if (it > 0 && ll - prev < opt.tolerance) {
      g.converged = true;
      break;
    }
    prev = ll;
    MixtureModel next = g;
    if (!detail::m_step(m.values, resp, next, opt)) break;
    next.loglik_trace = std::move(g.loglik_trace);
    g = std::move(next);
  }
  return g;
}

// Best of `restarts` seeded runs by log-likelihood; ties keep the lower
// restart index. Restart r draws from substream r of `seed`.
inline MixtureModel fit_gmm(const AccuracyMatrix& m, std::size_t k, std::size_t restarts, std::uint64_t seed,
                            const GmmOptions& opt = {}) {
  m.validate();
  detail::require(k >= 1, "fit_gmm: k must be >= 1");
  detail::require(k <= m.rows(), "fit_gmm: k = " + std::to_string(k) + " exceeds the number of rows (" +
                                     std::to_string(m.rows()) + ")");
  detail::require(restarts >= 1, "fit_gmm: need >= 1 restart");
  MixtureModel best;
  bool found = false;
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(seed, r);
    auto g = fit_gmm_once(m, k, rng, opt);
    g.restart_index = r;
    if (!std::isfinite(g.loglik)) continue;
    if (!found || g.loglik > best.loglik) {
      best = std::move(g);
      found = true;
    }
  }
  if (!found) throw InputError("fit_gmm: every restart collapsed for k = " + std::to_string(k));
  return best;
}

inline double bic(const MixtureModel& g, const AccuracyMatrix& m) {
  detail::require(g.dim == m.cols(), "bic: model dimensionality does not match the data");
  return -2.0 * g.loglik + static_cast<double>(g.n_params) * std::log(static_cast<double>(m.rows()));
}

inline std::vector<std::vector<double>> posteriors(const MixtureModel& g, const AccuracyMatrix& m) {
  std::vector<std::vector<double>> resp;
  detail::e_step(m.values, g, resp);
  return resp;
}

struct ProfileAssignment {
  std::string row_id;
  std::vector<double> posterior;
  std::size_t label = 0;
};

struct ProfileSolution {
  std::size_t chosen_k = 1;
  std::vector<std::pair<std::size_t, double>> bic_trace;
  std::vector<ProfileAssignment> assignments;
  std::vector<std::string> class_names;    // per component of the chosen model
  std::vector<double> class_mean_accuracy;  // grand mean of each component's means
  MixtureModel model;
  bool standardized = false;
};

// Fits k = 1..k_max, keeps the BIC minimum (first on ties), and assigns rows
// to their maximum-posterior class. The class with the highest grand-mean
// accuracy is "good performers", the lowest "bad performers".
inline ProfileSolution select_profiles(const AccuracyMatrix& m, std::size_t k_max, std::size_t restarts,
                                       std::uint64_t seed, const GmmOptions& opt = {}) {
  detail::require(k_max >= 2, "select_profiles: k_max must be >= 2");
  m.validate();
  ProfileSolution sol;
  sol.standardized = m.standardized;
  double best_bic = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k <= std::min(k_max, m.rows()); ++k) {
    auto g = fit_gmm(m, k, restarts, seed + k, opt);
    const double b = bic(g, m);
    sol.bic_trace.emplace_back(k, b);
    if (b < best_bic) {
      best_bic = b;
      sol.chosen_k = k;
      sol.model = std::move(g);
    }
  }
  const auto& g = sol.model;
  for (const auto& mean : g.means) {
    sol.class_mean_accuracy.push_back(std::accumulate(mean.begin(), mean.end(), 0.0) / static_cast<double>(mean.size()));
  }
  sol.class_names.assign(g.k, "");
  std::vector<std::size_t> order(g.k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return sol.class_mean_accuracy[a] > sol.class_mean_accuracy[b]; });
  for (std::size_t rank = 0; rank < g.k; ++rank) {
    std::string name = "profile " + std::to_string(rank + 1);
    if (g.k >= 2 && rank == 0) name = "good performers";
    if (g.k >= 2 && rank == g.k - 1) name = "bad performers";
    sol.class_names[order[rank]] = name;
  }
  const auto post = posteriors(g, m);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    ProfileAssignment a;
    a.row_id = i < m.row_ids.size() ? m.row_ids[i] : std::to_string(i + 1);
    a.posterior = post[i];
    a.label = static_cast<std::size_t>(std::max_element(post[i].begin(), post[i].end()) - post[i].begin());
    sol.assignments.push_back(std::move(a));
  }
  return sol;
}

}  // namespace neurosdt
