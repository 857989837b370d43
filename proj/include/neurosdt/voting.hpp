#pragma once

// Group decisions from ensembles of Bayesian observers: majority rule,
// grade-weighted votes and summed log-odds.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "neurosdt/criteria.hpp"
#include "neurosdt/error.hpp"
#include "neurosdt/observer.hpp"
#include "neurosdt/random.hpp"
#include "neurosdt/types.hpp"

namespace neurosdt {

enum class AgentKind { Human, Machine };

inline const char* to_string(AgentKind k) { return k == AgentKind::Machine ? "machine" : "human"; }

inline AgentKind parse_agent_kind(const std::string& s) {
  const auto v = lower(s);
  if (v == "human") return AgentKind::Human;
  if (v == "machine") return AgentKind::Machine;
  throw InputError("unknown agent kind '" + s + "' (expected human or machine)");
}

struct Agent {
  std::string id;
  ObserverModel model;
  std::optional<CriteriaSet> criteria;
  AgentKind kind = AgentKind::Human;
};

struct Vote {
  std::string agent_id;
  Condition decision = Condition::Safe;
  std::optional<Grade> grade;
  std::optional<double> log_odds;
};

struct AggregationStrategy {
  enum class Kind { Majority, GradeWeighted, LogOddsSum };
  Kind kind = Kind::Majority;
  std::array<double, 3> weights{1.0, 2.0, 3.0};  // Low, Medium, High

  static AggregationStrategy majority() { return {Kind::Majority, {1.0, 2.0, 3.0}}; }
  static AggregationStrategy grade_weighted(std::array<double, 3> w = {1.0, 2.0, 3.0}) {
    return {Kind::GradeWeighted, w};
  }
  static AggregationStrategy log_odds_sum() { return {Kind::LogOddsSum, {1.0, 2.0, 3.0}}; }

  void validate() const {
    if (kind != Kind::GradeWeighted) return;
    detail::require(weights[0] > 0.0 && std::isfinite(weights[2]), "grade weights must be positive and finite");
    detail::require(weights[0] < weights[1] && weights[1] < weights[2],
                    "grade weights must increase strictly from low to high");
  }

  std::string name() const {
    switch (kind) {
      case Kind::Majority: return "majority";
      case Kind::GradeWeighted: return "grade";
      case Kind::LogOddsSum: return "logodds";
    }
    return "";
  }
};

inline AggregationStrategy parse_strategy(const std::string& s) {
  const auto v = lower(s);
  if (v == "majority") return AggregationStrategy::majority();
  if (v == "grade" || v == "grade_weighted" || v == "gradeweighted") return AggregationStrategy::grade_weighted();
  if (v == "logodds" || v == "log_odds" || v == "logoddssum") return AggregationStrategy::log_odds_sum();
  throw InputError("unknown strategy '" + s + "' (expected majority, grade or logodds)");
}

// Sign of the weighted sum of decisions; a zero sum goes to Safe. Log-odds
// votes count with magnitude |d| in the direction of the agent's decision.
inline Condition aggregate(const std::vector<Vote>& votes, const AggregationStrategy& strategy) {
  detail::require(!votes.empty(), "aggregate: no votes");
  strategy.validate();
  double sum = 0.0;
  for (const auto& v : votes) {
    const double s = sign(v.decision);
    switch (strategy.kind) {
      case AggregationStrategy::Kind::Majority:
        sum += s;
        break;
      case AggregationStrategy::Kind::GradeWeighted:
        if (!v.grade) throw InputError("aggregate: vote from agent " + v.agent_id + " has no confidence grade");
        sum += strategy.weights[static_cast<std::size_t>(*v.grade)] * s;
        break;
      case AggregationStrategy::Kind::LogOddsSum:
        if (!v.log_odds) throw InputError("aggregate: vote from agent " + v.agent_id + " has no log-odds");
        sum += std::fabs(*v.log_odds) * s;
        break;
    }
  }
  return sum > 0.0 ? Condition::Hazard : Condition::Safe;
}

// An agent's vote on a feature value drawn in its model space. With criteria
// the six-region classification gives decision and grade; otherwise the MAP
// rule decides and no grade is attached.
inline Vote cast_vote(const Agent& a, double x) {
  Vote v;
  v.agent_id = a.id;
  v.log_odds = log_odds(x, a.model);
  if (a.criteria) {
    const auto cat = classify_rating(x, *a.criteria);
    v.decision = cat.decision;
    v.grade = cat.grade;
  } else {
    v.decision = map_decide(x, a.model);
  }
  return v;
}

struct DecisionTally {
  std::size_t n_hazard = 0, n_safe = 0;
  std::size_t hits = 0, false_alarms = 0, correct = 0;

  void add(Condition truth, Condition said) {
    if (truth == Condition::Hazard) {
      ++n_hazard;
      if (said == Condition::Hazard) ++hits;
    } else {
      ++n_safe;
      if (said == Condition::Hazard) ++false_alarms;
    }
    if (truth == said) ++correct;
  }
  double accuracy() const { return static_cast<double>(correct) / static_cast<double>(n_hazard + n_safe); }
  double hit_rate() const { return n_hazard ? static_cast<double>(hits) / static_cast<double>(n_hazard) : 0.0; }
  double fa_rate() const { return n_safe ? static_cast<double>(false_alarms) / static_cast<double>(n_safe) : 0.0; }
};

struct GroupReport {
  std::size_t n_trials = 0;
  std::uint64_t seed = kDefaultSeed;
  double p_hazard = 0.5;
  std::vector<std::pair<std::string, DecisionTally>> strategies;
  std::vector<std::pair<std::string, DecisionTally>> agents;
};

// Trial conditions come from substream 0 of `seed`; agent i draws its
// features from substream i + 1, independently given the condition.
inline GroupReport simulate_group(const std::vector<Agent>& agents, std::size_t n_trials,
                                  const std::vector<AggregationStrategy>& strategies, std::uint64_t seed,
                                  double p_hazard = 0.5) {
  detail::require(!agents.empty(), "simulate_group: need >= 1 agent");
  detail::require(n_trials >= 1, "simulate_group: need >= 1 trial");
  detail::require(!strategies.empty(), "simulate_group: need >= 1 strategy");
  detail::require(p_hazard >= 0.0 && p_hazard <= 1.0, "simulate_group: p_hazard must lie in [0, 1]");
  for (const auto& a : agents) a.model.validate();
  for (const auto& s : strategies) {
    s.validate();
    if (s.kind == AggregationStrategy::Kind::GradeWeighted) {
      for (const auto& a : agents) {
        if (!a.criteria) throw InputError("strategy grade: agent " + a.id + " has no confidence criteria");
      }
    }
  }

  GroupReport rep;
  rep.n_trials = n_trials;
  rep.seed = seed;
  rep.p_hazard = p_hazard;
  for (const auto& s : strategies) rep.strategies.emplace_back(s.name(), DecisionTally{});
  for (const auto& a : agents) rep.agents.emplace_back(a.id, DecisionTally{});

  Rng truth_rng(seed, 0);
  std::vector<Rng> agent_rng;
  for (std::size_t i = 0; i < agents.size(); ++i) agent_rng.emplace_back(seed, i + 1);

  std::vector<Vote> votes(agents.size());
  for (std::size_t t = 0; t < n_trials; ++t) {
    const Condition truth = truth_rng.uniform() < p_hazard ? Condition::Hazard : Condition::Safe;
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const auto& m = agents[i].model;
      const double x = agent_rng[i].normal(truth == Condition::Hazard ? m.mu_plus : m.mu_minus, m.sigma);
      votes[i] = cast_vote(agents[i], x);
      rep.agents[i].second.add(truth, votes[i].decision);
    }
    for (std::size_t s = 0; s < strategies.size(); ++s) rep.strategies[s].second.add(truth, aggregate(votes, strategies[s]));
  }
  return rep;
}

}  // namespace neurosdt
