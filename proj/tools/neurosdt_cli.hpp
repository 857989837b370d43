#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "neurosdt/neurosdt.hpp"

namespace neurosdt::cli {

using io::Json;

class Context {
 public:
  Context(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  std::string out_path;
  bool quiet = false;
  std::optional<std::uint64_t> seed;

  void warn(const std::string& msg) const {
    if (!quiet) err_ << "warning: " << msg << '\n';
  }

  std::uint64_t effective_seed() const {
    if (seed) return *seed;
    warn("--seed not given; using the default seed " + std::to_string(kDefaultSeed));
    return kDefaultSeed;
  }

  void emit(const std::string& text) const {
    if (out_path.empty()) {
      out_ << text;
      return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw InputError("cannot write " + out_path);
    f << text;
  }

  void emit_json(Json doc, const Json& config) const {
    doc["config"] = config;
    doc["version"] = kVersion;
    emit(doc.dump(2) + "\n");
  }

  // CSV bodies get two leading comment lines: tool version and config echo.
  void emit_csv(const std::string& body, const Json& config, const std::vector<std::string>& notes = {}) const {
    std::string text = std::string("# neurosdt: ") + kVersion + "\n# config: " + config.dump() + "\n";
    for (const auto& n : notes) text += "# " + n + "\n";
    emit(text + body);
  }

 private:
  std::ostream& out_;
  std::ostream& err_;
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = csv::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::string fmt(double v) { return csv::format_double(v); }

}  // namespace detail

// --- sdt ----------------------------------------------------------------------

struct SdtArgs {
  std::string input;
  std::string by = "participant";
};

inline void cmd_sdt(const Context& ctx, const SdtArgs& a) {
  TrialSet ts = load_trials(a.input);
  if (a.by == "pooled") {
    for (auto& t : ts.trials) t.participant_id = "pooled";
  }
  const auto g = sdt_by_participant(ts);
  std::ostringstream body;
  csv::write_row(body, {"participant_id", "n_signal", "n_noise", "hit", "fa", "corrected", "d_prime", "beta", "log_beta"});
  for (const auto& p : g.participants) {
    csv::write_row(body, {p.participant_id, std::to_string(p.rates.n_signal), std::to_string(p.rates.n_noise),
                          detail::fmt(p.rates.hit), detail::fmt(p.rates.fa), p.rates.corrected ? "true" : "false",
                          detail::fmt(p.indices.d_prime), detail::fmt(p.indices.beta),
                          detail::fmt(p.indices.log_beta())});
  }
  const Json config{{"subcommand", "sdt"}, {"input", a.input}, {"by", a.by}};
  ctx.emit_csv(body.str(), config,
               {"mean_d_prime: " + detail::fmt(g.mean_d_prime),
                "mean_beta_arithmetic: " + detail::fmt(g.mean_beta_arithmetic),
                "mean_beta_geometric: " + detail::fmt(g.mean_beta_geometric)});
}

// --- fit-observer ---------------------------------------------------------------

struct FitArgs {
  std::string input;
  std::string transform = "sqrt";
  std::string locking = "stimulus";
  std::string normalize = "none";
  std::string participant;
  std::string feature = "feature";
  double prior_log_odds = 0.0;
  std::size_t normality_reps = 1000;
  double alpha = 0.05;
};

inline void cmd_fit_observer(const Context& ctx, const FitArgs& a) {
  const TrialSet ts = select_feature(load_trials(a.input), a.feature);
  FitOptions opt;
  opt.transform = parse_transform(a.transform);
  opt.locking = parse_locking(a.locking);
  opt.normalize = parse_normalization(a.normalize);
  if (!a.participant.empty()) opt.participant = a.participant;
  opt.prior_log_odds = a.prior_log_odds;
  opt.normality_reps = a.normality_reps;
  opt.alpha = a.alpha;
  opt.seed = opt.normality_reps > 0 ? ctx.effective_seed() : (ctx.seed ? *ctx.seed : kDefaultSeed);

  const auto fit = fit_observer(ts, opt);
  for (const auto& w : fit.diagnostics.warnings) ctx.warn(w);

  Json doc = io::to_json(fit.model);
  doc["threshold"] = io::to_json(threshold(fit.model));
  doc["normalize"] = to_string(opt.normalize);
  doc["diagnostics"] = io::to_json(fit.diagnostics);

  // The fit under the other normalization choice, for comparison.
  FitOptions other = opt;
  other.normalize = opt.normalize == Normalization::None ? Normalization::PerParticipantZ : Normalization::None;
  other.normality_reps = 0;
  Json alt{{"normalize", to_string(other.normalize)}};
  try {
    const auto f2 = fit_observer(ts, other);
    alt["model"] = io::to_json(f2.model);
  } catch (const InputError& e) {
    alt["error"] = e.what();
  }
  doc["alternative"] = alt;

  Json config{{"subcommand", "fit-observer"}, {"input", a.input},         {"feature", a.feature},
              {"transform", a.transform},     {"locking", a.locking},     {"normalize", a.normalize},
              {"participant", a.participant.empty() ? Json(nullptr) : Json(a.participant)},
              {"prior_log_odds", a.prior_log_odds}, {"normality_reps", a.normality_reps},
              {"alpha", a.alpha},             {"seed", opt.seed}};
  ctx.emit_json(doc, config);
}

// --- predict ------------------------------------------------------------------

struct PredictArgs {
  std::string model;
  std::string method = "mc";
  std::size_t samples = 10000;
};

inline void cmd_predict(const Context& ctx, const PredictArgs& a) {
  const auto m = io::load_model(a.model);
  Json config{{"subcommand", "predict"}, {"model", a.model}, {"method", a.method}};
  RatePrediction r;
  if (a.method == "analytic") {
    r = predict_rates_analytic(m);
  } else if (a.method == "mc") {
    const auto seed = ctx.effective_seed();
    r = predict_rates_mc(m, a.samples, seed);
    config["samples"] = a.samples;
    config["seed"] = seed;
  } else {
    throw InputError("--method must be mc or analytic");
  }
  Json doc = io::to_json(r);
  doc["model"] = io::to_json(m);
  ctx.emit_json(doc, config);
}

// --- roc ----------------------------------------------------------------------

struct RocArgs {
  std::string model;
  std::string ratings;
  std::size_t points = 2001;
  bool spline = false;
};

inline void cmd_roc(const Context& ctx, const RocArgs& a) {
  if (a.model.empty() == a.ratings.empty()) throw InputError("roc: give exactly one of --model or --ratings");
  ROCCurve curve;
  Json config{{"subcommand", "roc"}};
  if (!a.model.empty()) {
    curve = model_roc(io::load_model(a.model), a.points);
    config["model"] = a.model;
    config["points"] = a.points;
  } else {
    const auto pts = rating_roc(io::load_rating_counts(a.ratings));
    config["ratings"] = a.ratings;
    config["spline"] = a.spline;
    if (a.spline) {
      curve = spline_roc(pts);
    } else {
      curve.points = pts.points;
    }
  }
  for (const auto& w : curve.warnings) ctx.warn(w);
  std::ostringstream body;
  csv::write_row(body, {"fa", "hit"});
  for (const auto& p : curve.points) csv::write_row(body, {detail::fmt(p.fa), detail::fmt(p.hit)});
  ctx.emit_csv(body.str(), config, {"auc: " + detail::fmt(auc(curve))});
}

// --- fit-confidence -------------------------------------------------------------

struct ConfidenceArgs {
  std::string model;
  std::string ratings;
  std::size_t grid = 15;
  std::size_t rounds = 12;
  std::size_t mc_samples = 0;
};

inline void cmd_fit_confidence(const Context& ctx, const ConfidenceArgs& a) {
  const auto m = io::load_model(a.model);
  const auto counts = io::load_rating_counts(a.ratings);
  SearchConfig sc;
  sc.grid_points_per_criterion = a.grid;
  sc.refinement_rounds = a.rounds;
  sc.mc_samples = a.mc_samples;
  Json config{{"subcommand", "fit-confidence"}, {"model", a.model}, {"ratings", a.ratings},
              {"grid", a.grid}, {"rounds", a.rounds}, {"mc_samples", a.mc_samples}};
  if (a.mc_samples > 0) {
    sc.seed = ctx.effective_seed();
    config["seed"] = sc.seed;
  }
  const auto fit = fit_criteria(m, counts, sc);
  for (const auto& w : fit.warnings) ctx.warn(w);
  ctx.emit_json(io::to_json(fit, m.transform), config);
}

// --- lpa ----------------------------------------------------------------------

struct LpaArgs {
  std::string input;
  std::size_t k_max = 6;
  std::size_t restarts = 20;
  bool standardize = false;
  std::string covariance = "equal";
};

inline void cmd_lpa(const Context& ctx, const LpaArgs& a) {
  AccuracyMatrix m = load_accuracy(a.input);
  if (a.standardize) m = standardize(m);
  GmmOptions opt;
  opt.covariance = parse_covariance(a.covariance);
  const auto seed = ctx.effective_seed();
  const auto sol = select_profiles(m, a.k_max, a.restarts, seed, opt);
  Json config{{"subcommand", "lpa"},           {"input", a.input},          {"k_max", a.k_max},
              {"restarts", a.restarts},        {"standardize", a.standardize}, {"covariance", a.covariance},
              {"seed", seed}};
  ctx.emit_json(io::to_json(sol, m), config);
}

// --- stats ----------------------------------------------------------------------

struct StatsArgs {
  std::string test;
  std::string input;
  std::vector<std::string> columns;
  std::size_t reps = 2000;
  std::string method = "auto";
};

inline void cmd_stats(const Context& ctx, const StatsArgs& a) {
  const auto t = csv::read_file(a.input);
  auto column = [&](const std::string& name) {
    const auto idx = t.column(name);
    if (!idx) throw InputError(a.input + ": no column named '" + name + "'");
    std::vector<double> v;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto x = csv::parse_double(t.rows[r][*idx]);
      if (!x) {
        throw InputError(a.input + ":" + std::to_string(t.line_numbers[r]) + ": column '" + name +
                         "': not a number: '" + t.rows[r][*idx] + "'");
      }
      v.push_back(*x);
    }
    return v;
  };
  const auto names = a.columns.empty() ? t.header : a.columns;
  Json config{{"subcommand", "stats"}, {"test", a.test}, {"input", a.input}, {"columns", names}};
  Json doc{{"test", a.test}};
  if (a.test == "lilliefors") {
    const auto seed = ctx.effective_seed();
    config["reps"] = a.reps;
    config["seed"] = seed;
    Json results = Json::array();
    for (const auto& name : names) {
      Json r = io::to_json(lilliefors(column(name), a.reps, seed));
      r["column"] = name;
      results.push_back(r);
    }
    doc["results"] = results;
  } else {
    if (names.size() != 2) {
      throw InputError("stats " + a.test + ": needs exactly two columns (use --columns a,b)");
    }
    const auto x = column(names[0]), y = column(names[1]);
    TestResult r;
    if (a.test == "wilcoxon") {
      WilcoxonMethod m = WilcoxonMethod::Auto;
      if (a.method == "exact") {
        m = WilcoxonMethod::Exact;
      } else if (a.method == "normal") {
        m = WilcoxonMethod::Normal;
      } else if (a.method != "auto") {
        throw InputError("--method must be auto, exact or normal");
      }
      config["method"] = a.method;
      r = wilcoxon_signed_rank(x, y, m);
    } else {
      r = spearman(x, y);
    }
    doc["result"] = io::to_json(r);
  }
  ctx.emit_json(doc, config);
}

// --- tfr ----------------------------------------------------------------------

struct TfrArgs {
  std::string signal;
  std::string events;
  std::string locking = "stimulus";
  std::vector<double> window;
  std::vector<double> baseline;
  bool no_baseline = false;
  double threshold = 100.0;
  double win_ms = 500.0;
  double step_ms = 50.0;
  std::string feature;
};

inline void cmd_tfr(const Context& ctx, const TfrArgs& a) {
  MultiSignal sig = load_signal(a.signal);
  auto ev = load_events(a.events);
  sig.events = ev.events;
  if (ev.labels.empty()) {
    throw InputError(a.events + ": needs participant_id, condition and response columns to label trials");
  }
  const Locking locking = parse_locking(a.locking);
  const TimeWindow window = a.window.empty() ? default_epoch_window(locking) : TimeWindow{a.window[0], a.window[1]};
  std::optional<TimeWindow> baseline;
  if (!a.no_baseline) baseline = a.baseline.empty() ? default_baseline(locking) : TimeWindow{a.baseline[0], a.baseline[1]};

  const auto epochs = reject_artifacts(epoch(sig, locking, window, baseline), a.threshold);
  for (const auto& r : epochs.rejected) ctx.warn("trial " + r.trial_id + " rejected (" + r.reason + ")");
  if (epochs.trials.empty()) throw InputError("tfr: every trial was rejected");
  const auto power = tfr_power(epochs, a.win_ms, a.step_ms);

  const auto rois = restrict_rois(default_rois(), sig.channels);
  if (rois.empty()) throw InputError("tfr: no channel of the recording belongs to a known ROI");
  const auto wanted = default_segments();
  const auto segments = feasible_segments(power, wanted);
  std::vector<std::string> dropped;
  for (const auto& s : wanted) {
    if (std::none_of(segments.begin(), segments.end(), [&](const Segment& k) { return k.start_ms == s.start_ms; })) {
      dropped.push_back(detail::fmt(s.start_ms) + "-" + detail::fmt(s.end_ms));
    }
  }
  if (!dropped.empty()) {
    std::string list;
    for (const auto& d : dropped) list += (list.empty() ? "" : ",") + d;
    ctx.warn("segments without window centres skipped: " + list + " ms");
  }
  if (segments.empty()) throw InputError("tfr: no time segment contains a window centre");
  const auto ft = band_roi_power(power, default_bands(), rois, segments);
  const std::string primary = a.feature.empty() ? ft.names.front() : a.feature;
  const auto ts = features_to_trials(ft, ev.labels, primary);

  std::ostringstream body;
  write_trials(body, ts);
  std::string rejected;
  for (const auto& r : epochs.rejected) rejected += (rejected.empty() ? "" : ",") + r.trial_id + ":" + r.reason;
  Json config{{"subcommand", "tfr"},     {"signal", a.signal},     {"events", a.events},
              {"locking", a.locking},    {"window_ms", {window.start_ms, window.end_ms}},
              {"baseline_ms", baseline ? Json{baseline->start_ms, baseline->end_ms} : Json(nullptr)},
              {"threshold_uv", a.threshold}, {"win_ms", a.win_ms}, {"step_ms", a.step_ms},
              {"feature", primary}};
  ctx.emit_csv(body.str(), config,
               {"spectrum: hanning taper, no zero padding, power normalized by taper energy",
                "sample_rate_hz: " + detail::fmt(sig.sample_rate),
                "rejected: " + (rejected.empty() ? std::string("none") : rejected)});
}

// --- simulate -------------------------------------------------------------------

struct SimulateArgs {
  double mu_plus = 1.0;
  double mu_minus = 0.0;
  double sigma = 1.0;
  double offset = 0.0;
  std::size_t n = 100;
  std::size_t participants = 1;
  std::vector<double> criteria;
};

inline void cmd_simulate(const Context& ctx, const SimulateArgs& a) {
  const auto seed = ctx.effective_seed();
  neurosdt::detail::require(a.participants >= 1, "--participants must be >= 1");
  TrialSet all;
  for (std::size_t p = 0; p < a.participants; ++p) {
    ObserverSpec spec;
    spec.mu_plus = a.mu_plus;
    spec.mu_minus = a.mu_minus;
    spec.sigma = a.sigma;
    spec.criterion_offset = a.offset;
    spec.n_trials_per_condition = a.n;
    spec.seed = seed;
    spec.participant_index = p;
    char id[16];
    std::snprintf(id, sizeof id, "S%02zu", p + 1);
    spec.participant_id = id;
    if (!a.criteria.empty()) {
      std::array<double, 5> c{};
      std::copy(a.criteria.begin(), a.criteria.end(), c.begin());
      spec.confidence_criteria = CriteriaSet(c);
    }
    auto ts = synthesize(spec);
    all.trials.insert(all.trials.end(), ts.trials.begin(), ts.trials.end());
  }
  std::ostringstream body;
  write_trials(body, all);
  Json config{{"subcommand", "simulate"}, {"mu_plus", a.mu_plus},  {"mu_minus", a.mu_minus},
              {"sigma", a.sigma},         {"offset", a.offset},    {"n", a.n},
              {"participants", a.participants},
              {"criteria", a.criteria.empty() ? Json(nullptr) : Json(a.criteria)},
              {"seed", seed}};
  ctx.emit_csv(body.str(), config);
}

// --- vote ---------------------------------------------------------------------

struct VoteArgs {
  std::string agents;
  std::size_t trials = 100000;
  std::string strategies = "majority,logodds";
  double p_hazard = 0.5;
};

inline void cmd_vote(const Context& ctx, const VoteArgs& a) {
  const auto agents = io::agents_from_json(io::read_json(a.agents), a.agents);
  std::vector<AggregationStrategy> strategies;
  for (const auto& s : detail::split(a.strategies, ',')) strategies.push_back(parse_strategy(s));
  if (strategies.empty()) throw InputError("--strategies is empty");
  const auto seed = ctx.effective_seed();
  const auto rep = simulate_group(agents, a.trials, strategies, seed, a.p_hazard);
  Json config{{"subcommand", "vote"}, {"agents", a.agents},     {"trials", a.trials},
              {"strategies", a.strategies}, {"p_hazard", a.p_hazard}, {"seed", seed}};
  ctx.emit_json(io::to_json(rep), config);
}

// --- entry point ----------------------------------------------------------------

// Exit codes: 0 success, 1 usage or input error, 2 internal invariant violation.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decision thresholds and confidence from trial features with a Gaussian Bayesian observer",
               "neurosdt"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);
  app.fallthrough();

  Context ctx(out, err);
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Random seed (default 42)");
  app.add_option("--out", ctx.out_path, "Output file (default: standard output)");
  app.add_flag("--quiet", ctx.quiet, "Suppress warnings");

  SdtArgs sdt;
  auto* c_sdt = app.add_subcommand("sdt", "Hit/false-alarm rates, d' and beta per participant");
  c_sdt->add_option("--input", sdt.input, "Trial CSV")->required();
  c_sdt->add_option("--by", sdt.by, "participant or pooled")->check(CLI::IsMember({"participant", "pooled"}));

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit-observer", "Fit the equal-variance Gaussian observer");
  c_fit->add_option("--input", fit.input, "Trial CSV")->required();
  c_fit->add_option("--transform", fit.transform, "sqrt or identity")->check(CLI::IsMember({"sqrt", "identity"}));
  c_fit->add_option("--locking", fit.locking, "stimulus or response")->check(CLI::IsMember({"stimulus", "response"}));
  c_fit->add_option("--normalize", fit.normalize, "none or per-participant-z")
      ->check(CLI::IsMember({"none", "per-participant-z"}));
  c_fit->add_option("--participant", fit.participant, "Fit one participant (default: pool all)");
  c_fit->add_option("--feature", fit.feature, "Feature column");
  c_fit->add_option("--prior-log-odds", fit.prior_log_odds, "log p(hazard)/p(safe)");
  c_fit->add_option("--normality-reps", fit.normality_reps, "Lilliefors Monte Carlo reps (0 skips)");
  c_fit->add_option("--alpha", fit.alpha, "Normality screen level");

  PredictArgs pred;
  auto* c_pred = app.add_subcommand("predict", "Predict hit and false-alarm rates of a fitted model");
  c_pred->add_option("--model", pred.model, "Model JSON")->required();
  c_pred->add_option("--method", pred.method, "mc or analytic")->check(CLI::IsMember({"mc", "analytic"}));
  c_pred->add_option("--samples", pred.samples, "Monte Carlo samples per condition")->check(CLI::PositiveNumber);

  RocArgs roc;
  auto* c_roc = app.add_subcommand("roc", "Model or rating ROC curve");
  auto* roc_model = c_roc->add_option("--model", roc.model, "Model JSON");
  auto* roc_ratings = c_roc->add_option("--ratings", roc.ratings, "2x6 rating count CSV");
  roc_model->excludes(roc_ratings);
  c_roc->add_option("--points", roc.points, "Criterion sweep size for --model")->check(CLI::Range(3, 10000000));
  c_roc->add_flag("--spline", roc.spline, "Emit the 101-point spline for --ratings");

  ConfidenceArgs conf;
  auto* c_conf = app.add_subcommand("fit-confidence", "Fit five confidence criteria to a rating ROC");
  c_conf->add_option("--model", conf.model, "Model JSON")->required();
  c_conf->add_option("--ratings", conf.ratings, "2x6 rating count CSV")->required();
  c_conf->add_option("--grid", conf.grid, "Grid points per criterion");
  c_conf->add_option("--rounds", conf.rounds, "Refinement rounds");
  c_conf->add_option("--mc-samples", conf.mc_samples, "Monte Carlo samples per condition (0: analytic)");

  LpaArgs lpa;
  auto* c_lpa = app.add_subcommand("lpa", "Latent profile analysis of accuracy vectors");
  c_lpa->add_option("--input", lpa.input, "Accuracy CSV")->required();
  c_lpa->add_option("--k-max", lpa.k_max, "Largest number of profiles")->check(CLI::Range(2, 100));
  c_lpa->add_option("--restarts", lpa.restarts, "EM restarts per k")->check(CLI::PositiveNumber);
  c_lpa->add_flag("--standardize", lpa.standardize, "Standardize columns before fitting");
  c_lpa->add_option("--covariance", lpa.covariance, "equal or varying diagonal variances")
      ->check(CLI::IsMember({"equal", "varying"}));

  StatsArgs st;
  auto* c_st = app.add_subcommand("stats", "Lilliefors, Wilcoxon signed-rank or Spearman tests");
  c_st->add_option("test", st.test, "lilliefors, wilcoxon or spearman")
      ->required()
      ->check(CLI::IsMember({"lilliefors", "wilcoxon", "spearman"}));
  c_st->add_option("--input", st.input, "CSV of numeric columns")->required();
  c_st->add_option("--columns", st.columns, "Columns to use")->delimiter(',');
  c_st->add_option("--reps", st.reps, "Lilliefors Monte Carlo reps")->check(CLI::PositiveNumber);
  c_st->add_option("--method", st.method, "Wilcoxon p-value: auto, exact or normal")
      ->check(CLI::IsMember({"auto", "exact", "normal"}));

  TfrArgs tfr;
  auto* c_tfr = app.add_subcommand("tfr", "Band power features from a multichannel recording");
  c_tfr->add_option("--signal", tfr.signal, "Signal CSV (time_s, channels...)")->required();
  c_tfr->add_option("--events", tfr.events, "Events CSV")->required();
  c_tfr->add_option("--locking", tfr.locking, "stimulus or response")->check(CLI::IsMember({"stimulus", "response"}));
  c_tfr->add_option("--window", tfr.window, "Epoch window start,end in ms")->delimiter(',')->expected(2);
  auto* bl = c_tfr->add_option("--baseline", tfr.baseline, "Baseline start,end in ms")->delimiter(',')->expected(2);
  c_tfr->add_flag("--no-baseline", tfr.no_baseline, "Skip baseline correction")->excludes(bl);
  c_tfr->add_option("--threshold", tfr.threshold, "Artifact threshold in microvolts");
  c_tfr->add_option("--win-ms", tfr.win_ms, "Sliding window length");
  c_tfr->add_option("--step-ms", tfr.step_ms, "Sliding window step");
  c_tfr->add_option("--feature", tfr.feature, "Feature written to the feature column");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Synthesize trials from a known observer");
  c_sim->add_option("--mu-plus", sim.mu_plus, "Hazard mean");
  c_sim->add_option("--mu-minus", sim.mu_minus, "Safe mean");
  c_sim->add_option("--sigma", sim.sigma, "Common standard deviation");
  c_sim->add_option("--offset", sim.offset, "Criterion offset from the midpoint");
  c_sim->add_option("--n", sim.n, "Trials per condition")->check(CLI::PositiveNumber);
  c_sim->add_option("--participants", sim.participants, "Number of participants")->check(CLI::PositiveNumber);
  c_sim->add_option("--criteria", sim.criteria, "Five confidence criteria")->delimiter(',')->expected(5);

  VoteArgs vote;
  auto* c_vote = app.add_subcommand("vote", "Compare group aggregation strategies");
  c_vote->add_option("--agents", vote.agents, "Agents JSON")->required();
  c_vote->add_option("--trials", vote.trials, "Number of simulated trials")->check(CLI::PositiveNumber);
  c_vote->add_option("--strategies", vote.strategies, "Comma list of majority, grade, logodds");
  c_vote->add_option("--p-hazard", vote.p_hazard, "Probability of a hazard trial");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const auto rest = app.remaining();
    if (app.get_subcommands().empty() && !rest.empty() && rest.front().rfind("-", 0) != 0) {
      err << "error: unknown subcommand '" << rest.front() << "'\n";
      return 1;
    }
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }
  if (seed_opt->count() > 0) ctx.seed = seed;

  try {
    if (c_sdt->parsed()) cmd_sdt(ctx, sdt);
    else if (c_fit->parsed()) cmd_fit_observer(ctx, fit);
    else if (c_pred->parsed()) cmd_predict(ctx, pred);
    else if (c_roc->parsed()) cmd_roc(ctx, roc);
    else if (c_conf->parsed()) cmd_fit_confidence(ctx, conf);
    else if (c_lpa->parsed()) cmd_lpa(ctx, lpa);
    else if (c_st->parsed()) cmd_stats(ctx, st);
    else if (c_tfr->parsed()) cmd_tfr(ctx, tfr);
    else if (c_sim->parsed()) cmd_simulate(ctx, sim);
    else if (c_vote->parsed()) cmd_vote(ctx, vote);
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << '\n';
    return 2;
  } catch (const std::logic_error& e) {
    err << "internal error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace neurosdt::cli
