#pragma once

// Equal-variance Gaussian Bayesian observer.
//
//   x | C=+1 ~ N(mu_plus, sigma^2),   x | C=-1 ~ N(mu_minus, sigma^2)
//   d(x) = (mu_plus - mu_minus) / sigma^2 * (x - (mu_plus + mu_minus) / 2) + prior_log_odds
//
// The observer reports Hazard iff d(x) > 0. With a flat prior that is
// x > (mu_plus + mu_minus) / 2 on the transformed feature axis.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "neurosdt/error.hpp"
#include "neurosdt/npstats.hpp"
#include "neurosdt/probability.hpp"
#include "neurosdt/random.hpp"
#include "neurosdt/trials.hpp"

namespace neurosdt {

enum class Transform { Identity, Sqrt };
enum class Locking { Stimulus, Response };
enum class Normalization { None, PerParticipantZ };

inline const char* to_string(Transform t) { return t == Transform::Sqrt ? "sqrt" : "identity"; }
inline const char* to_string(Locking l) { return l == Locking::Response ? "response" : "stimulus"; }
inline const char* to_string(Normalization n) {
  return n == Normalization::PerParticipantZ ? "per-participant-z" : "none";
}

inline Transform parse_transform(const std::string& s) {
  const auto v = lower(s);
  if (v == "sqrt") return Transform::Sqrt;
  if (v == "identity" || v == "none") return Transform::Identity;
  throw InputError("unknown transform '" + s + "' (expected sqrt or identity)");
}

inline Locking parse_locking(const std::string& s) {
  const auto v = lower(s);
  if (v == "stimulus") return Locking::Stimulus;
  if (v == "response") return Locking::Response;
  throw InputError("unknown locking '" + s + "' (expected stimulus or response)");
}

inline Normalization parse_normalization(const std::string& s) {
  const auto v = lower(s);
  if (v == "none") return Normalization::None;
  if (v == "per-participant-z") return Normalization::PerParticipantZ;
  throw InputError("unknown normalization '" + s + "'");
}

inline double apply_transform(double x, Transform t) {
  if (t == Transform::Identity) return x;
  if (x < 0.0) throw InputError("sqrt transform: negative feature " + std::to_string(x));
  return std::sqrt(x);
}

struct ObserverModel {
  double mu_plus = 1.0;
  double mu_minus = 0.0;
  double sigma = 1.0;
  Transform transform = Transform::Identity;
  double criterion = 0.5;
  double prior_log_odds = 0.0;

  double midpoint() const { return 0.5 * (mu_plus + mu_minus); }
  double slope() const { return (mu_plus - mu_minus) / (sigma * sigma); }
  bool flat_prior() const { return prior_log_odds == 0.0; }

  void validate() const {
    detail::require(std::isfinite(mu_plus) && std::isfinite(mu_minus), "observer model: non-finite mean");
    detail::require(sigma > 0.0 && std::isfinite(sigma), "observer model: sigma must be > 0");
    detail::require(std::isfinite(prior_log_odds), "observer model: non-finite prior log-odds");
  }
};

// The x at which d(x) = 0. Falls back to the midpoint when the means coincide.
inline double decision_criterion(double mu_plus, double mu_minus, double sigma, double prior_log_odds) {
  const double mid = 0.5 * (mu_plus + mu_minus);
  if (mu_plus == mu_minus || prior_log_odds == 0.0) return mid;
  return mid - prior_log_odds * sigma * sigma / (mu_plus - mu_minus);
}

inline ObserverModel make_model(double mu_plus, double mu_minus, double sigma,
                                Transform transform = Transform::Identity,
                                double prior_log_odds = 0.0) {
  ObserverModel m{mu_plus, mu_minus, sigma, transform, 0.0, prior_log_odds};
  m.validate();
  m.criterion = decision_criterion(mu_plus, mu_minus, sigma, prior_log_odds);
  return m;
}

inline double log_odds(double x, const ObserverModel& m) {
  return m.slope() * (x - m.midpoint()) + m.prior_log_odds;
}

// Ties (d = 0) go to Safe.
inline Condition map_decide(double x, const ObserverModel& m) {
  return log_odds(x, m) > 0.0 ? Condition::Hazard : Condition::Safe;
}

struct ThresholdReport {
  double transformed = 0.0;
  double raw = 0.0;
  bool prior_shifted = false;
  bool zero_sensitivity = false;
};

inline ThresholdReport threshold(const ObserverModel& m) {
  ThresholdReport r;
  r.transformed = m.criterion;
  r.prior_shifted = !m.flat_prior();
  r.zero_sensitivity = m.mu_plus == m.mu_minus;
  if (m.transform == Transform::Sqrt) {
    r.raw = r.transformed > 0.0 ? r.transformed * r.transformed : 0.0;
  } else {
    r.raw = r.transformed;
  }
  return r;
}

enum class RateMethod { MonteCarlo, Analytic };

inline const char* to_string(RateMethod m) { return m == RateMethod::MonteCarlo ? "mc" : "analytic"; }

struct RatePrediction {
  double hit = 0.0;
  double fa = 0.0;
  RateMethod method = RateMethod::Analytic;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

// Hit/FA for the generalized rule "Hazard iff x > k".
inline std::pair<double, double> rates_at_criterion(const ObserverModel& m, double k) {
  return {norm_sf((k - m.mu_plus) / m.sigma), norm_sf((k - m.mu_minus) / m.sigma)};
}

// Closed form of P(d(x) > 0 | C). Handles reversed polarity and equal means.
inline RatePrediction predict_rates_analytic(const ObserverModel& m) {
  m.validate();
  RatePrediction r;
  r.method = RateMethod::Analytic;
  const double k = m.criterion;
  const double slope = m.slope();
  if (slope > 0.0) {
    std::tie(r.hit, r.fa) = rates_at_criterion(m, k);
  } else if (slope < 0.0) {
    r.hit = norm_cdf((k - m.mu_plus) / m.sigma);
    r.fa = norm_cdf((k - m.mu_minus) / m.sigma);
  } else {
    r.hit = r.fa = m.prior_log_odds > 0.0 ? 1.0 : 0.0;
  }
  return r;
}

// Draws n_samples per condition from the generative model and applies
// map_decide. Hazard draws use substream 0 of `seed`, Safe draws substream 1.
inline RatePrediction predict_rates_mc(const ObserverModel& m, std::size_t n_samples, std::uint64_t seed) {
  m.validate();
  detail::require(n_samples >= 1, "predict_rates_mc: n_samples must be >= 1");
  RatePrediction r;
  r.method = RateMethod::MonteCarlo;
  r.n_samples = n_samples;
  r.seed = seed;
  Rng hazard(seed, 0), safe(seed, 1);
  std::size_t hits = 0, fas = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    hits += map_decide(hazard.normal(m.mu_plus, m.sigma), m) == Condition::Hazard;
    fas += map_decide(safe.normal(m.mu_minus, m.sigma), m) == Condition::Hazard;
  }
  r.hit = static_cast<double>(hits) / static_cast<double>(n_samples);
  r.fa = static_cast<double>(fas) / static_cast<double>(n_samples);
  return r;
}

// --- fitting ------------------------------------------------------------------

struct FitOptions {
  Transform transform = Transform::Sqrt;
  Locking locking = Locking::Stimulus;
  Normalization normalize = Normalization::None;
  std::optional<std::string> participant;  // nullopt pools all participants
  double prior_log_odds = 0.0;
  std::size_t normality_reps = 1000;  // 0 skips the Lilliefors screen
  std::uint64_t seed = kDefaultSeed;
  double alpha = 0.05;
};

struct GroupDiagnostics {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  std::optional<double> lilliefors_stat;
  std::optional<double> lilliefors_p;
};

struct FitDiagnostics {
  GroupDiagnostics hazard;
  GroupDiagnostics safe;
  bool normal = true;  // both groups pass Lilliefors at alpha (or were not tested)
  bool normality_tested = false;
  bool polarity_warning = false;
  std::vector<std::string> warnings;
};

struct FitResult {
  ObserverModel model;
  FitDiagnostics diagnostics;
};

inline FitResult fit_observer(const TrialSet& trials, const FitOptions& opt = {}) {
  // Transformed feature per selected trial, plus its grouping label.
  std::vector<double> x;
  std::vector<Condition> group;
  std::vector<std::string> who;
  for (const auto& t : trials.trials) {
    if (opt.participant && t.participant_id != *opt.participant) continue;
    double v;
    try {
      v = apply_transform(t.feature, opt.transform);
    } catch (const InputError& e) {
      throw InputError("participant " + t.participant_id + ", trial " + t.trial_id + ": " + e.what());
    }
    x.push_back(v);
    group.push_back(opt.locking == Locking::Stimulus ? t.condition : t.response);
    who.push_back(t.participant_id);
  }
  if (opt.participant && x.empty()) throw InputError("no trials for participant " + *opt.participant);

  if (opt.normalize == Normalization::PerParticipantZ) {
    std::map<std::string, std::vector<std::size_t>> idx;
    for (std::size_t i = 0; i < x.size(); ++i) idx[who[i]].push_back(i);
    for (const auto& [pid, rows] : idx) {
      std::vector<double> v;
      for (auto i : rows) v.push_back(x[i]);
      detail::require(v.size() >= 2, "per-participant z: participant " + pid + " has < 2 trials");
      const double m = mean_of(v), s = sd_of(v);
      detail::require(s > 0.0, "per-participant z: participant " + pid + " has constant features");
      for (auto i : rows) x[i] = (x[i] - m) / s;
    }
  }

  std::vector<double> xp, xm;
  for (std::size_t i = 0; i < x.size(); ++i) (group[i] == Condition::Hazard ? xp : xm).push_back(x[i]);
  const char* basis = opt.locking == Locking::Stimulus ? "condition" : "response";
  if (xp.size() < 2 || xm.size() < 2) {
    throw InputError(std::string("fit_observer: need >= 2 trials per ") + basis + " (have " +
                     std::to_string(xp.size()) + " hazard, " + std::to_string(xm.size()) + " safe)");
  }

  FitResult out;
  auto& d = out.diagnostics;
  auto describe = [](const std::vector<double>& v, GroupDiagnostics& g) {
    g.n = v.size();
    g.mean = mean_of(v);
    g.sd = sd_of(v);
  };
  describe(xp, d.hazard);
  describe(xm, d.safe);

  const double np = static_cast<double>(xp.size()), nm = static_cast<double>(xm.size());
  double ss = 0.0;
  for (double v : xp) ss += (v - d.hazard.mean) * (v - d.hazard.mean);
  for (double v : xm) ss += (v - d.safe.mean) * (v - d.safe.mean);
  const double pooled = std::sqrt(ss / (np + nm - 2.0));
  if (!(pooled > 0.0)) {
    throw InputError("fit_observer: degenerate variance (all features equal within each group)");
  }

  ObserverModel& m = out.model;
  m.mu_plus = d.hazard.mean;
  m.mu_minus = d.safe.mean;
  m.sigma = pooled;
  m.transform = opt.transform;
  m.prior_log_odds = opt.prior_log_odds;
  m.criterion = decision_criterion(m.mu_plus, m.mu_minus, m.sigma, m.prior_log_odds);

  if (m.mu_plus < m.mu_minus) {
    d.polarity_warning = true;
    d.warnings.push_back("hazard mean below safe mean: hazard does not induce stronger activity");
  } else if (m.mu_plus == m.mu_minus) {
    d.warnings.push_back("zero sensitivity: group means are equal");
  }

  if (opt.normality_reps > 0) {
    auto screen = [&](const std::vector<double>& v, GroupDiagnostics& g, std::uint64_t stream) {
      if (v.size() < 5 || g.sd <= 0.0) {
        d.warnings.push_back("normality screen skipped for a group with n < 5 or zero spread");
        return;
      }
      const auto r = lilliefors(v, opt.normality_reps, opt.seed + stream);
      g.lilliefors_stat = r.statistic;
      g.lilliefors_p = r.p_value;
      d.normality_tested = true;
      if (r.p_value < opt.alpha) d.normal = false;
    };
    screen(xp, d.hazard, 0);
    screen(xm, d.safe, 1);
    if (!d.normal) d.warnings.push_back("Lilliefors rejects normality for at least one group");
  }
  return out;
}

}  // namespace neurosdt
