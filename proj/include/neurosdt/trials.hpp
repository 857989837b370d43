#pragma once

// Trial-level data: the canonical in-memory model, CSV ingestion and export,
// repeated-presentation consistency checks, and ground-truth synthesis.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "neurosdt/criteria.hpp"
#include "neurosdt/csv.hpp"
#include "neurosdt/error.hpp"
#include "neurosdt/random.hpp"
#include "neurosdt/types.hpp"

namespace neurosdt {

struct Trial {
  std::string participant_id;
  std::string trial_id;
  std::string scene_id;
  Condition condition = Condition::Safe;
  Condition response = Condition::Safe;
  std::optional<Grade> rating;
  std::optional<double> rt_ms;
  double feature = 0.0;  // raw, untransformed
  std::vector<std::string> extra;  // aligned with TrialSet::extra_columns

  friend bool operator==(const Trial&, const Trial&) = default;
};

struct TrialSet {
  std::vector<Trial> trials;
  std::map<std::string, std::string> metadata;
  std::vector<std::string> extra_columns;

  // Participants in order of first appearance.
  std::vector<std::string> participants() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& t : trials) {
      if (seen.insert(t.participant_id).second) out.push_back(t.participant_id);
    }
    return out;
  }

  TrialSet for_participant(const std::string& id) const {
    TrialSet out;
    out.metadata = metadata;
    out.extra_columns = extra_columns;
    for (const auto& t : trials) {
      if (t.participant_id == id) out.trials.push_back(t);
    }
    return out;
  }

  std::size_t size() const { return trials.size(); }

  friend bool operator==(const TrialSet&, const TrialSet&) = default;
};

inline constexpr std::array<const char*, 8> kTrialColumns = {
    "participant_id", "trial_id", "scene_id", "condition",
    "response",       "rating",   "rt_ms",    "feature"};

namespace detail {

inline void check_rating_coverage(const TrialSet& ts) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> per;  // (rated, total)
  for (const auto& t : ts.trials) {
    auto& [rated, total] = per[t.participant_id];
    ++total;
    if (t.rating) ++rated;
  }
  for (const auto& [pid, c] : per) {
    if (c.first != 0 && c.first != c.second) {
      throw InputError("participant " + pid + ": rating present on " +
                       std::to_string(c.first) + " of " + std::to_string(c.second) +
                       " trials (must be all or none)");
    }
  }
}

}  // namespace detail

inline TrialSet trials_from_table(const csv::Table& table, const std::string& source) {
  const char* required[] = {"participant_id", "trial_id", "condition", "response", "feature"};
  for (const char* name : required) {
    if (!table.column(name)) {
      throw InputError(source + ": missing required column '" + name + "'");
    }
  }
  const auto col = [&](const char* name) { return table.column(name); };
  const auto c_pid = *col("participant_id");
  const auto c_tid = *col("trial_id");
  const auto c_cond = *col("condition");
  const auto c_resp = *col("response");
  const auto c_feat = *col("feature");
  const auto c_scene = col("scene_id");
  const auto c_rating = col("rating");
  const auto c_rt = col("rt_ms");

  TrialSet ts;
  std::vector<std::size_t> extra_idx;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    bool known = false;
    for (const char* k : kTrialColumns) known = known || table.header[i] == k;
    if (!known) {
      extra_idx.push_back(i);
      ts.extra_columns.push_back(table.header[i]);
    }
  }

  std::set<std::pair<std::string, std::string>> ids;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto where = [&](const char* column) {
      return source + ":" + std::to_string(table.line_numbers[r]) + ": column '" + column + "'";
    };
    Trial t;
    t.participant_id = row[c_pid];
    t.trial_id = row[c_tid];
    if (t.participant_id.empty()) throw InputError(where("participant_id") + ": empty");
    if (t.trial_id.empty()) throw InputError(where("trial_id") + ": empty");
    if (c_scene) t.scene_id = row[*c_scene];

    auto cond = parse_condition(row[c_cond]);
    if (!cond) throw InputError(where("condition") + ": unknown label '" + row[c_cond] + "'");
    t.condition = *cond;
    auto resp = parse_condition(row[c_resp]);
    if (!resp) throw InputError(where("response") + ": unknown label '" + row[c_resp] + "'");
    t.response = *resp;

    if (c_rating && !row[*c_rating].empty()) {
      auto g = parse_grade(row[*c_rating]);
      if (!g) throw InputError(where("rating") + ": unknown rating '" + row[*c_rating] + "'");
      t.rating = *g;
    }
    if (c_rt && !row[*c_rt].empty()) {
      auto v = csv::parse_double(row[*c_rt]);
      if (!v || *v <= 0.0) {
        throw InputError(where("rt_ms") + ": expected a positive number, got '" + row[*c_rt] + "'");
      }
      t.rt_ms = *v;
    }
    auto f = csv::parse_double(row[c_feat]);
    if (!f) {
      throw InputError(where("feature") + ": not a finite number: '" + row[c_feat] + "'");
    }
    t.feature = *f;
    for (auto i : extra_idx) t.extra.push_back(row[i]);

    if (!ids.emplace(t.participant_id, t.trial_id).second) {
      throw InputError(source + ":" + std::to_string(table.line_numbers[r]) +
                       ": duplicate trial (participant_id=" + t.participant_id +
                       ", trial_id=" + t.trial_id + ")");
    }
    ts.trials.push_back(std::move(t));
  }
  detail::check_rating_coverage(ts);

  ts.metadata["source"] = source;
  std::string cols;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) cols += ',';
    cols += table.header[i];
  }
  ts.metadata["columns"] = cols;
  // "key: value" comment lines carry provenance from upstream tools.
  for (const auto& c : table.comments) {
    const auto pos = c.find(": ");
    if (pos != std::string::npos && pos > 0) ts.metadata[c.substr(0, pos)] = c.substr(pos + 2);
  }
  return ts;
}

inline TrialSet load_trials(const std::string& path) {
  return trials_from_table(csv::read_file(path), path);
}

inline TrialSet parse_trials(const std::string& text, const std::string& source = "<memory>") {
  std::istringstream in(text);
  return trials_from_table(csv::parse(in, source), source);
}

inline void write_trials(std::ostream& out, const TrialSet& ts) {
  std::vector<std::string> header(kTrialColumns.begin(), kTrialColumns.end());
  header.insert(header.end(), ts.extra_columns.begin(), ts.extra_columns.end());
  csv::write_row(out, header);
  for (const auto& t : ts.trials) {
    std::vector<std::string> row = {
        t.participant_id,
        t.trial_id,
        t.scene_id,
        to_string(t.condition),
        to_string(t.response),
        t.rating ? to_string(*t.rating) : "",
        t.rt_ms ? csv::format_double(*t.rt_ms) : "",
        csv::format_double(t.feature)};
    row.insert(row.end(), t.extra.begin(), t.extra.end());
    csv::write_row(out, row);
  }
}

inline void save_trials(const std::string& path, const TrialSet& ts) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  write_trials(out, ts);
}

// --- repeated-presentation consistency -------------------------------------

struct ParticipantConsistency {
  std::string participant_id;
  std::size_t repeats = 0;
  std::size_t differing = 0;
  double rate = 0.0;
  bool flagged = false;
};

struct ValidationReport {
  double threshold = 0.5;
  std::vector<ParticipantConsistency> participants;
  std::vector<std::string> unmatched;  // participants in b with no overlapping scene

  std::vector<std::string> flagged() const {
    std::vector<std::string> out;
    for (const auto& p : participants) {
      if (p.flagged) out.push_back(p.participant_id);
    }
    return out;
  }
};

// Compares responses to the same (participant, scene) across the main block
// `a` and the validation block `b`. A participant is flagged when the rate of
// differing responses is strictly greater than `threshold`.
inline ValidationReport validate_consistency(const TrialSet& a, const TrialSet& b,
                                             double threshold) {
  detail::require(threshold >= 0.0 && threshold <= 1.0, "threshold must be in [0, 1]");
  std::map<std::pair<std::string, std::string>, Condition> first_response;
  for (const auto& t : a.trials) {
    if (t.scene_id.empty()) continue;
    first_response.try_emplace({t.participant_id, t.scene_id}, t.response);
  }

  ValidationReport report;
  report.threshold = threshold;
  std::map<std::string, std::size_t> index;
  std::size_t total = 0;
  for (const auto& t : b.trials) {
    if (!index.contains(t.participant_id)) {
      index[t.participant_id] = report.participants.size();
      report.participants.push_back({t.participant_id});
    }
    auto it = first_response.find({t.participant_id, t.scene_id});
    if (t.scene_id.empty() || it == first_response.end()) continue;
    auto& p = report.participants[index[t.participant_id]];
    ++p.repeats;
    ++total;
    if (it->second != t.response) ++p.differing;
  }
  if (total == 0) {
    throw InputError("validate_consistency: no (participant, scene) pair appears in both sets");
  }
  std::vector<ParticipantConsistency> kept;
  for (auto& p : report.participants) {
    if (p.repeats == 0) {
      report.unmatched.push_back(p.participant_id);
      continue;
    }
    p.rate = static_cast<double>(p.differing) / static_cast<double>(p.repeats);
    p.flagged = p.rate > threshold;
    kept.push_back(p);
  }
  report.participants = std::move(kept);
  return report;
}

// Returns a copy whose `feature` is taken from the named column: either
// "feature" itself or one of the extra columns.
inline TrialSet select_feature(const TrialSet& ts, const std::string& column) {
  if (column == "feature") return ts;
  const auto it = std::find(ts.extra_columns.begin(), ts.extra_columns.end(), column);
  if (it == ts.extra_columns.end()) throw InputError("no feature column named '" + column + "'");
  const auto idx = static_cast<std::size_t>(it - ts.extra_columns.begin());
  TrialSet out = ts;
  for (auto& t : out.trials) {
    const auto v = csv::parse_double(t.extra[idx]);
    if (!v) {
      throw InputError("participant " + t.participant_id + ", trial " + t.trial_id + ": column '" + column +
                       "': not a finite number: '" + t.extra[idx] + "'");
    }
    t.feature = *v;
  }
  out.metadata["feature_column"] = column;
  return out;
}

// --- synthesis ----------------------------------------------------------------

struct ObserverSpec {
  double mu_plus = 1.0;
  double mu_minus = 0.0;
  double sigma = 1.0;
  double criterion_offset = 0.0;
  std::optional<CriteriaSet> confidence_criteria;
  std::size_t n_trials_per_condition = 100;
  std::uint64_t seed = kDefaultSeed;
  std::string participant_id = "S01";
  std::uint64_t participant_index = 0;  // selects the participant's substream

  void validate() const {
    detail::require(std::isfinite(mu_plus) && std::isfinite(mu_minus),
                    "observer spec: means must be finite");
    detail::require(mu_plus > mu_minus, "observer spec: mu_plus must exceed mu_minus");
    detail::require(sigma > 0.0 && std::isfinite(sigma), "observer spec: sigma must be > 0");
    detail::require(n_trials_per_condition >= 1, "observer spec: need >= 1 trial per condition");
  }

  double midpoint() const { return 0.5 * (mu_plus + mu_minus); }
};

// Draws n features per condition from N(mu_C, sigma^2). Without confidence
// criteria the response is Hazard iff feature > midpoint + offset. With
// criteria, the six-region classification supplies both the response and the
// grade, so c3 acts as the decision threshold.
//
// Hazard trials come first (trial ids 1..n), then Safe trials (n+1..2n). All
// draws come from the participant's own substream of `seed`.
inline TrialSet synthesize(const ObserverSpec& spec) {
  spec.validate();
  Rng rng(spec.seed, spec.participant_index);
  const double threshold = spec.midpoint() + spec.criterion_offset;
  const std::size_t n = spec.n_trials_per_condition;

  TrialSet ts;
  ts.trials.reserve(2 * n);
  for (Condition c : {Condition::Hazard, Condition::Safe}) {
    const double mu = c == Condition::Hazard ? spec.mu_plus : spec.mu_minus;
    const char prefix = c == Condition::Hazard ? 'h' : 's';
    for (std::size_t i = 0; i < n; ++i) {
      Trial t;
      t.participant_id = spec.participant_id;
      t.trial_id = std::to_string(ts.trials.size() + 1);
      t.scene_id = prefix + std::to_string(i + 1);
      t.condition = c;
      t.feature = rng.normal(mu, spec.sigma);
      if (spec.confidence_criteria) {
        const auto cat = classify_rating(t.feature, *spec.confidence_criteria);
        t.response = cat.decision;
        t.rating = cat.grade;
      } else {
        t.response = t.feature > threshold ? Condition::Hazard : Condition::Safe;
      }
      ts.trials.push_back(std::move(t));
    }
  }
  ts.metadata["source"] = "synthetic";
  ts.metadata["generator"] = "equal-variance gaussian, xoshiro256** stream " +
                             std::to_string(spec.participant_index) + " of seed " +
                             std::to_string(spec.seed);
  return ts;
}

}  // namespace neurosdt
