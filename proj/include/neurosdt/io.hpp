#pragma once

// JSON encodings of models and reports, and the rating-count CSV format.

#include <array>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "neurosdt/confidence.hpp"
#include "neurosdt/criteria.hpp"
#include "neurosdt/csv.hpp"
#include "neurosdt/error.hpp"
#include "neurosdt/lpa.hpp"
#include "neurosdt/npstats.hpp"
#include "neurosdt/observer.hpp"
#include "neurosdt/roc.hpp"
#include "neurosdt/voting.hpp"

namespace neurosdt::io {

using Json = nlohmann::ordered_json;

inline Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": invalid JSON: " + e.what());
  }
}

// --- observer models ------------------------------------------------------------

inline Json to_json(const ObserverModel& m) {
  return Json{{"mu_plus", m.mu_plus},   {"mu_minus", m.mu_minus},   {"sigma", m.sigma},
              {"transform", to_string(m.transform)}, {"criterion", m.criterion},
              {"prior_log_odds", m.prior_log_odds}};
}

namespace detail {

inline double number(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw InputError(where + ": missing field '" + key + "'");
  if (!j[key].is_number()) throw InputError(where + ": field '" + std::string(key) + "' must be a number");
  return j[key].get<double>();
}

}  // namespace detail

// Accepts either a bare model object or a document with the model fields at
// its top level. The criterion is recomputed from the generative parameters.
inline ObserverModel model_from_json(const Json& j, const std::string& where = "model") {
  if (!j.is_object()) throw InputError(where + ": expected a JSON object");
  const Json& src = j.contains("model") && j["model"].is_object() ? j["model"] : j;
  Transform t = Transform::Identity;
  if (src.contains("transform")) {
    if (!src["transform"].is_string()) throw InputError(where + ": field 'transform' must be a string");
    t = parse_transform(src["transform"].get<std::string>());
  }
  const double prior = src.contains("prior_log_odds") ? detail::number(src, "prior_log_odds", where) : 0.0;
  try {
    return make_model(detail::number(src, "mu_plus", where), detail::number(src, "mu_minus", where),
                      detail::number(src, "sigma", where), t, prior);
  } catch (const InputError& e) {
    throw InputError(where + ": " + e.what());
  }
}

inline ObserverModel load_model(const std::string& path) { return model_from_json(read_json(path), path); }

inline Json to_json(const ThresholdReport& r) {
  return Json{{"transformed", r.transformed}, {"raw", r.raw}, {"prior_shifted", r.prior_shifted},
              {"zero_sensitivity", r.zero_sensitivity}};
}

inline Json to_json(const GroupDiagnostics& g) {
  Json j{{"n", g.n}, {"mean", g.mean}, {"sd", g.sd}};
  j["lilliefors_stat"] = g.lilliefors_stat ? Json(*g.lilliefors_stat) : Json(nullptr);
  j["lilliefors_p"] = g.lilliefors_p ? Json(*g.lilliefors_p) : Json(nullptr);
  return j;
}

inline Json to_json(const FitDiagnostics& d) {
  return Json{{"hazard", to_json(d.hazard)},
              {"safe", to_json(d.safe)},
              {"normality_tested", d.normality_tested},
              {"normal", d.normal},
              {"polarity_warning", d.polarity_warning},
              {"warnings", d.warnings}};
}

inline Json to_json(const RatePrediction& r) {
  return Json{{"hit", r.hit},           {"fa", r.fa},     {"method", to_string(r.method)},
              {"n_samples", r.n_samples}, {"seed", r.seed}, {"workers", r.workers}};
}

// --- criteria -------------------------------------------------------------------

inline Json to_json(const CriteriaSet& c) { return Json(std::vector<double>(c.values().begin(), c.values().end())); }

inline CriteriaSet criteria_from_json(const Json& j, const std::string& where) {
  const Json& src = j.is_object() && j.contains("c") ? j["c"] : j;
  if (!src.is_array() || src.size() != 5) throw InputError(where + ": criteria must be an array of five numbers");
  std::array<double, 5> c{};
  for (std::size_t i = 0; i < 5; ++i) {
    if (!src[i].is_number()) throw InputError(where + ": criteria must be numbers");
    c[i] = src[i].get<double>();
  }
  try {
    return CriteriaSet(c);
  } catch (const InputError& e) {
    throw InputError(where + ": " + e.what());
  }
}

inline Json to_json(const CriteriaFit& f, Transform axis) {
  return Json{{"c", to_json(f.criteria)},
              {"distance", f.best.curve_distance},
              {"axis", to_string(axis)},
              {"point_distance", f.best.point_distance},
              {"objective", f.best.objective()},
              {"boundary_gap", f.boundary_gap},
              {"flat_objective", f.flat_objective},
              {"top10_objective_spread", f.top10_objective_spread},
              {"top10_distance_spread", f.top10_distance_spread},
              {"round_objectives", f.round_objectives},
              {"evaluations", f.evaluations},
              {"warnings", f.warnings}};
}

// --- rating counts --------------------------------------------------------------

// Two rows (hazard, safe) under a header of the six category names, with an
// optional leading `condition` column.
inline RatingCounts parse_rating_counts(const csv::Table& t, const std::string& source) {
  const bool labelled = !t.header.empty() && t.header[0] == "condition";
  const std::size_t off = labelled ? 1 : 0;
  if (t.header.size() != 6 + off) throw InputError(source + ": expected six category columns");
  for (std::size_t c = 0; c < 6; ++c) {
    if (t.header[c + off] != kCategoryNames[c]) {
      throw InputError(source + ": column " + std::to_string(c + off + 1) + " must be '" + kCategoryNames[c] +
                       "', got '" + t.header[c + off] + "'");
    }
  }
  if (t.rows.size() != 2) throw InputError(source + ": expected exactly two rows (hazard, safe)");
  RatingCounts rc;
  std::array<bool, 2> seen{};
  for (std::size_t r = 0; r < 2; ++r) {
    std::size_t row = r;
    if (labelled) {
      const auto cond = parse_condition(t.rows[r][0]);
      if (!cond) throw InputError(source + ":" + std::to_string(t.line_numbers[r]) + ": unknown condition '" + t.rows[r][0] + "'");
      row = *cond == Condition::Hazard ? 0 : 1;
      if (seen[row]) throw InputError(source + ": both rows carry the same condition");
      seen[row] = true;
    }
    for (std::size_t c = 0; c < 6; ++c) {
      const auto v = csv::parse_double(t.rows[r][c + off]);
      if (!v || *v < 0 || std::floor(*v) != *v) {
        throw InputError(source + ":" + std::to_string(t.line_numbers[r]) + ": column '" + kCategoryNames[c] +
                         "': expected a non-negative integer count, got '" + t.rows[r][c + off] + "'");
      }
      rc.counts[row][c] = static_cast<std::int64_t>(*v);
    }
  }
  rc.validate();
  return rc;
}

inline RatingCounts load_rating_counts(const std::string& path) { return parse_rating_counts(csv::read_file(path), path); }

inline void write_rating_counts(std::ostream& out, const RatingCounts& rc) {
  std::vector<std::string> header{"condition"};
  header.insert(header.end(), kCategoryNames.begin(), kCategoryNames.end());
  csv::write_row(out, header);
  for (std::size_t r = 0; r < 2; ++r) {
    std::vector<std::string> row{r == 0 ? "hazard" : "safe"};
    for (auto c : rc.counts[r]) row.push_back(std::to_string(c));
    csv::write_row(out, row);
  }
}

// --- profiles, tests, voting ----------------------------------------------------

inline Json to_json(const ProfileSolution& s, const AccuracyMatrix& m) {
  Json trace = Json::array();
  for (const auto& [k, b] : s.bic_trace) trace.push_back({{"k", k}, {"bic", b}});
  Json classes = Json::array();
  for (std::size_t j = 0; j < s.model.k; ++j) {
    classes.push_back({{"label", j},
                       {"name", s.class_names[j]},
                       {"weight", s.model.weights[j]},
                       {"mean_accuracy", s.class_mean_accuracy[j]},
                       {"means", s.model.means[j]},
                       {"variances", s.model.variances[j]}});
  }
  Json rows = Json::array();
  for (const auto& a : s.assignments) {
    rows.push_back({{"participant_id", a.row_id},
                    {"label", a.label},
                    {"class", s.class_names[a.label]},
                    {"posterior", a.posterior}});
  }
  return Json{{"chosen_k", s.chosen_k},
              {"bic_trace", trace},
              {"columns", m.columns},
              {"covariance", to_string(s.model.covariance)},
              {"standardized", s.standardized},
              {"loglik", s.model.loglik},
              {"n_params", s.model.n_params},
              {"iterations", s.model.iterations},
              {"converged", s.model.converged},
              {"classes", classes},
              {"assignments", rows}};
}

inline Json to_json(const TestResult& r) {
  return Json{{"statistic", r.statistic}, {"p_value", r.p_value}, {"method", r.method}, {"n", r.n}, {"notes", r.notes}};
}

inline Json to_json(const DecisionTally& t) {
  return Json{{"accuracy", t.accuracy()}, {"hit", t.hit_rate()},   {"fa", t.fa_rate()},
              {"n_hazard", t.n_hazard},   {"n_safe", t.n_safe},     {"correct", t.correct}};
}

inline Json to_json(const GroupReport& r) {
  Json strategies = Json::array();
  for (const auto& [name, tally] : r.strategies) {
    Json j{{"strategy", name}};
    j.update(to_json(tally));
    strategies.push_back(j);
  }
  Json agents = Json::array();
  for (const auto& [id, tally] : r.agents) {
    Json j{{"id", id}};
    j.update(to_json(tally));
    agents.push_back(j);
  }
  return Json{{"n_trials", r.n_trials}, {"seed", r.seed}, {"p_hazard", r.p_hazard},
              {"strategies", strategies}, {"agents", agents}};
}

// {"agents": [{"id": "...", "kind": "human", "model": {...}, "criteria": [...]}]}
inline std::vector<Agent> agents_from_json(const Json& j, const std::string& where) {
  const Json& list = j.is_object() && j.contains("agents") ? j["agents"] : j;
  if (!list.is_array() || list.empty()) throw InputError(where + ": expected a non-empty 'agents' array");
  std::vector<Agent> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& a = list[i];
    const std::string w = where + ": agents[" + std::to_string(i) + "]";
    if (!a.is_object()) throw InputError(w + ": expected an object");
    Agent agent;
    agent.id = a.contains("id") && a["id"].is_string() ? a["id"].get<std::string>() : "agent" + std::to_string(i + 1);
    if (a.contains("kind")) agent.kind = parse_agent_kind(a["kind"].get<std::string>());
    if (!a.contains("model")) throw InputError(w + ": missing 'model'");
    agent.model = model_from_json(a["model"], w + ".model");
    if (a.contains("criteria") && !a["criteria"].is_null()) agent.criteria = criteria_from_json(a["criteria"], w + ".criteria");
    out.push_back(std::move(agent));
  }
  return out;
}

}  // namespace neurosdt::io
