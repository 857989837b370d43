#pragma once

// Behavioural signal-detection indices: hit/false-alarm rates with the
// extreme-rate correction, sensitivity d' and likelihood-ratio bias beta.

#include <cmath>
#include <string>
#include <vector>

#include "neurosdt/error.hpp"
#include "neurosdt/probability.hpp"
#include "neurosdt/trials.hpp"

namespace neurosdt {

struct SDTRates {
  double hit = 0.0;
  double fa = 0.0;
  std::size_t n_signal = 0;
  std::size_t n_noise = 0;
  bool corrected = false;
};

struct SDTIndices {
  double d_prime = 0.0;
  double beta = 1.0;  // < 1 liberal, > 1 conservative, 1 neutral

  double log_beta() const { return std::log(beta); }
};

// A rate of exactly 0 becomes 0.5/n and a rate of exactly 1 becomes
// (n - 0.5)/n. Other rates pass through untouched.
inline double correct_extreme_rate(std::size_t count, std::size_t n, bool& corrected) {
  const double nn = static_cast<double>(n);
  if (count == 0) {
    corrected = true;
    return 0.5 / nn;
  }
  if (count == n) {
    corrected = true;
    return (nn - 0.5) / nn;
  }
  return static_cast<double>(count) / nn;
}

inline SDTRates rates_from_counts(std::size_t hits, std::size_t n_signal, std::size_t false_alarms,
                                  std::size_t n_noise) {
  detail::require(n_signal > 0, "no signal (hazard) trials");
  detail::require(n_noise > 0, "no noise (safe) trials");
  detail::require(hits <= n_signal && false_alarms <= n_noise, "counts exceed trial totals");
  SDTRates r;
  r.n_signal = n_signal;
  r.n_noise = n_noise;
  r.hit = correct_extreme_rate(hits, n_signal, r.corrected);
  r.fa = correct_extreme_rate(false_alarms, n_noise, r.corrected);
  return r;
}

inline SDTRates compute_rates(const TrialSet& trials, const std::string& participant) {
  std::size_t hits = 0, n_signal = 0, fas = 0, n_noise = 0;
  for (const auto& t : trials.trials) {
    if (t.participant_id != participant) continue;
    const bool said_hazard = t.response == Condition::Hazard;
    if (t.condition == Condition::Hazard) {
      ++n_signal;
      hits += said_hazard;
    } else {
      ++n_noise;
      fas += said_hazard;
    }
  }
  if (n_signal == 0 || n_noise == 0) {
    throw InputError("participant " + participant + ": need at least one hazard and one safe trial (have " +
                     std::to_string(n_signal) + " hazard, " + std::to_string(n_noise) + " safe)");
  }
  return rates_from_counts(hits, n_signal, fas, n_noise);
}

// d' = Z(hit) - Z(fa); beta = exp(-0.5 (Z(hit) + Z(fa)) d').
inline SDTIndices sdt_indices(double hit, double fa) {
  if (!(hit > 0.0 && hit < 1.0) || !(fa > 0.0 && fa < 1.0)) {
    throw InputError("sdt_indices: rates must lie strictly inside (0, 1); apply the extreme-rate correction first");
  }
  const double zh = norm_quantile(hit);
  const double zf = norm_quantile(fa);
  SDTIndices out;
  out.d_prime = zh - zf;
  out.beta = std::exp(-0.5 * (zh + zf) * out.d_prime);
  return out;
}

inline SDTIndices sdt_indices(const SDTRates& r) { return sdt_indices(r.hit, r.fa); }

struct ParticipantSDT {
  std::string participant_id;
  SDTRates rates;
  SDTIndices indices;
};

struct GroupSDT {
  std::vector<ParticipantSDT> participants;
  double mean_d_prime = 0.0;
  double mean_beta_arithmetic = 0.0;
  double mean_beta_geometric = 0.0;
};

inline GroupSDT sdt_by_participant(const TrialSet& trials) {
  GroupSDT g;
  double sum_d = 0.0, sum_b = 0.0, sum_logb = 0.0;
  for (const auto& pid : trials.participants()) {
    ParticipantSDT p{pid, compute_rates(trials, pid), {}};
    p.indices = sdt_indices(p.rates);
    sum_d += p.indices.d_prime;
    sum_b += p.indices.beta;
    sum_logb += std::log(p.indices.beta);
    g.participants.push_back(std::move(p));
  }
  detail::require(!g.participants.empty(), "no trials");
  const double n = static_cast<double>(g.participants.size());
  g.mean_d_prime = sum_d / n;
  g.mean_beta_arithmetic = sum_b / n;
  g.mean_beta_geometric = std::exp(sum_logb / n);
  return g;
}

}  // namespace neurosdt
