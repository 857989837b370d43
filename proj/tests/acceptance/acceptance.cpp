// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "neurosdt/neurosdt.hpp"
#include "oracles.hpp"

using namespace neurosdt;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

Verdict sdt_identities() {
  Verdict v;
  const double d = sdt_indices(0.8413, 0.1587).d_prime;
  v.pass = std::fabs(d - 2.0) <= 1e-3;
  double worst_beta = 0.0;
  for (double h : {0.55, 0.6915, 0.8413, 0.9, 0.99}) {
    worst_beta = std::max(worst_beta, std::fabs(sdt_indices(h, 1.0 - h).beta - 1.0));
  }
  v.pass = v.pass && worst_beta <= 1e-12;
  bool antisym = true;
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double h = 0.001 + 0.998 * rng.uniform(), f = 0.001 + 0.998 * rng.uniform();
    antisym = antisym && sdt_indices(f, h).d_prime == -sdt_indices(h, f).d_prime;
  }
  v.pass = v.pass && antisym;
  v.detail = "d'=" + num(d) + " max|beta-1|=" + sci(worst_beta) + (antisym ? " antisymmetric" : " asymmetric");
  return v;
}

Verdict paper_input() {
  const auto r = sdt_indices(0.7597, 0.5145);
  const double zh = oracle::phi_inv_boost(0.7597), zf = oracle::phi_inv_boost(0.5145);
  const double d_oracle = zh - zf;
  const double beta_oracle = std::exp(-0.5 * (zh * zh - zf * zf));
  Verdict v;
  v.pass = std::fabs(r.d_prime - 0.669) <= 2e-3 && std::fabs(r.beta - 0.780) <= 2e-3 &&
           std::fabs(r.d_prime - d_oracle) <= 1e-9 && std::fabs(r.beta - beta_oracle) <= 1e-9;
  v.detail = "d'=" + num(r.d_prime) + " beta=" + num(r.beta) + " (oracle " + num(d_oracle) + ", " + num(beta_oracle) + ")";
  return v;
}

Verdict observer_recovery() {
  Verdict v;
  double worst_ratio = 0.0, worst_se = 0.0;
  for (int i = 0; i < 20; ++i) {
    ObserverSpec spec;
    const double dprime = 0.3 + 2.7 * i / 19.0;
    spec.sigma = 0.5 + 0.1 * (i % 4);
    spec.mu_minus = -1.0 + 0.25 * (i % 5);
    spec.mu_plus = spec.mu_minus + dprime * spec.sigma;
    spec.n_trials_per_condition = 100000;
    spec.seed = 1000 + static_cast<std::uint64_t>(i);
    FitOptions opt;
    opt.transform = Transform::Identity;
    opt.normality_reps = 0;
    const auto fit = fit_observer(synthesize(spec), opt);
    const double truth = 0.5 * (spec.mu_plus + spec.mu_minus);
    worst_ratio = std::max(worst_ratio, std::fabs(fit.model.criterion - truth) / (spec.mu_plus - spec.mu_minus));

    const auto analytic = predict_rates_analytic(fit.model);
    const auto mc = predict_rates_mc(fit.model, 10000, spec.seed);
    for (auto [p, q] : {std::pair{analytic.hit, mc.hit}, std::pair{analytic.fa, mc.fa}}) {
      const double se = std::sqrt(p * (1 - p) / 10000.0);
      worst_se = std::max(worst_se, std::fabs(q - p) / se);
    }
  }
  v.pass = worst_ratio <= 0.02 && worst_se <= 3.0;
  v.detail = "max|crit err|/(mu+-mu-)=" + num(worst_ratio) + " max MC dev=" + num(worst_se, 2) + " SE";
  return v;
}

Verdict roc_auc() {
  const double a = auc(model_roc(make_model(1.0, 0.0, 1.0), 2001));
  ROCCurve diag;
  for (std::size_t i = 0; i < kRocGridSize; ++i) diag.points.push_back({grid_fa(i), grid_fa(i)});
  const double flat = auc(model_roc(make_model(0.0, 0.0, 1.0), 2001));
  Verdict v;
  v.pass = std::fabs(a - 0.7602) <= 1e-3 && std::fabs(a - oracle::phi(1.0 / std::sqrt(2.0))) <= 1e-3 &&
           auc(diag) == 0.5 && flat == 0.5;
  v.detail = "AUC(d'=1)=" + num(a, 5) + " diagonal=" + num(auc(diag), 15);
  return v;
}

Verdict confidence_recovery() {
  const auto m = make_model(1.0, 0.0, 1.0);
  const double mid = 0.5;
  std::array<double, 5> truth{};
  const double offsets[] = {-1.5, -0.5, 0.5, 1.5, 2.5};
  for (std::size_t j = 0; j < 5; ++j) truth[j] = mid + offsets[j] * m.sigma;
  const auto counts = predict_rating_counts(m, CriteriaSet(truth), 100000);
  const auto fit = fit_criteria(m, counts);
  const CriteriaObjective objective(m, counts, {});
  const double true_distance = objective(truth).curve_distance;
  double worst = 0.0;
  for (std::size_t j = 0; j < 5; ++j) worst = std::max(worst, std::fabs(fit.criteria[j] - truth[j]) / m.sigma);
  Verdict v;
  v.pass = worst <= 0.1 && fit.best.curve_distance <= 1.5 * true_distance + 1e-12;
  v.detail = "max|c err|=" + num(worst) + " sigma, distance=" + sci(fit.best.curve_distance) + " vs true " +
             sci(true_distance);
  return v;
}

Verdict lpa_selection() {
  int two = 0, one = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    two += select_profiles(fixture::two_profiles(1000 + seed), 6, 20, seed).chosen_k == 2;
    one += select_profiles(fixture::one_profile(2000 + seed), 6, 20, seed).chosen_k == 1;
  }
  Verdict v;
  v.pass = two >= 95 && one >= 95;
  v.detail = "k=2 chosen " + std::to_string(two) + "/100, k=1 chosen " + std::to_string(one) + "/100";
  return v;
}

Verdict nonparametric() {
  Rng rng(2024);
  int agree = 0;
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t n = 1 + rng.below(10);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.below(7));
      y[i] = static_cast<double>(rng.below(7));
    }
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < n; ++i) nonzero += x[i] != y[i];
    if (nonzero == 0) x[0] += 1.0;
    const auto sr = signed_ranks(x, y);
    agree += wilcoxon_signed_rank(x, y, WilcoxonMethod::Exact).p_value == oracle::wilcoxon_enumerate(sr.ranks, sr.w_plus);
  }
  // Each null dataset is tested as a separate run with its own seed and the
  // default number of Monte Carlo reps.
  int rejected = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng r(seed, 3);
    std::vector<double> s(50);
    for (auto& v : s) v = r.normal(3.0, 2.0);
    rejected += lilliefors(s, 2000, seed).p_value < 0.05;
  }
  const double rate = rejected / 1000.0;
  Verdict v;
  v.pass = agree == 500 && std::fabs(rate - 0.05) <= 0.02;
  v.detail = "Wilcoxon exact==enumeration " + std::to_string(agree) + "/500, Lilliefors FPR=" + num(rate, 3);
  return v;
}

Verdict tfr_oracle() {
  const auto signal = fixture::sine_recording(fixture::standard_montage(), fixture::parietal_channels(), 10.0);
  const auto e = epoch(signal, Locking::Stimulus, default_epoch_window(Locking::Stimulus),
                       default_baseline(Locking::Stimulus));
  const auto p = tfr_power(e);
  const auto ft = band_roi_power(p, default_bands(), default_rois(), feasible_segments(p, default_segments()));
  double alpha_min = INFINITY, other_max = 0.0;
  for (std::size_t f = 0; f < ft.names.size(); ++f) {
    const bool alpha = ft.names[f].rfind("pow_parietal_alpha_", 0) == 0;
    for (const auto& row : ft.values) {
      if (alpha) {
        alpha_min = std::min(alpha_min, row[f]);
      } else {
        other_max = std::max(other_max, row[f]);
      }
    }
  }

  const std::size_t win = 125;
  const auto taper = oracle::hann(win);
  double taper_energy = 0.0;
  for (double h : taper) taper_energy += h * h;
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::size_t t = 0; t < e.trials.size(); ++t) {
    for (std::size_t c = 0; c < e.channels.size(); ++c) {
      for (std::size_t w = 0; w < p.times_ms.size(); ++w) {
        const auto start = static_cast<std::size_t>(std::floor(static_cast<double>(w) * 12.5 + 0.5));
        double energy = 0.0;
        for (std::size_t i = 0; i < win; ++i) energy += std::pow(e.trials[t].data[c][start + i] * taper[i], 2);
        double total = 0.0;
        for (std::size_t f = 0; f < p.freqs_hz.size(); ++f) total += p.at(t, c, f, w);
        const double expected = energy / taper_energy;
        if (expected > 0.0) worst = std::max(worst, std::fabs(total - expected) / expected);
        else worst = std::max(worst, std::fabs(total));
        ++checked;
      }
    }
  }
  Verdict v;
  v.pass = alpha_min >= 20.0 * other_max && alpha_min > 0.0 && worst <= 1e-6;
  v.detail = "parietal alpha min=" + num(alpha_min, 6) + " other max=" + num(other_max, 6) + " Parseval max rel err=" +
             sci(worst) + " over " + std::to_string(checked) + " windows";
  return v;
}

Verdict voting_benchmark() {
  const auto rep = simulate_group(fixture::iid_agents(3), 100000,
                                  {AggregationStrategy::majority(), AggregationStrategy::log_odds_sum()}, 42);
  const double p = oracle::phi(0.5);
  const double majority_oracle = p * p * p + 3 * p * p * (1 - p);
  const double pooled_oracle = oracle::phi(std::sqrt(3.0) / 2.0);
  const double maj = rep.strategies[0].second.accuracy(), lo = rep.strategies[1].second.accuracy();
  double best_single = 0.0;
  for (const auto& a : rep.agents) best_single = std::max(best_single, a.second.accuracy());
  Verdict v;
  v.pass = std::fabs(maj - 0.7733) <= 0.01 && std::fabs(lo - 0.8068) <= 0.01 && std::fabs(maj - majority_oracle) <= 0.01 &&
           std::fabs(lo - pooled_oracle) <= 0.01 && lo >= maj && maj >= best_single;
  v.detail = "majority=" + num(maj) + " logodds=" + num(lo) + " best agent=" + num(best_single);
  return v;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  oracle::TempDir dir("acceptance");
  const auto model = dir.write("model.json", R"({"mu_plus": 1, "mu_minus": 0, "sigma": 1})");
  const auto ratings = dir.write("ratings.csv",
                                 "condition,hazard_high,hazard_med,hazard_low,safe_low,safe_med,safe_high\n"
                                 "hazard,40,25,20,10,3,2\nsafe,5,10,15,25,20,25\n");
  const auto agents = dir.write(
      "agents.json",
      R"({"agents": [{"model": {"mu_plus": 1, "mu_minus": 0, "sigma": 1}, "criteria": [-0.5, 0, 0.5, 1, 1.5]},
                     {"model": {"mu_plus": 1.5, "mu_minus": 0, "sigma": 1}, "criteria": [-0.5, 0, 0.75, 1, 1.5]}]})");
  std::string acc = "participant_id";
  const auto m = fixture::two_profiles(3);
  for (const auto& c : m.columns) acc += "," + c;
  acc += "\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    acc += m.row_ids[i];
    for (double x : m.values[i]) acc += "," + csv::format_double(x);
    acc += "\n";
  }
  const auto accuracy = dir.write("accuracy.csv", acc);
  std::string col = "x,y\n";
  Rng rng(5);
  for (int i = 0; i < 40; ++i) col += csv::format_double(rng.normal()) + "," + csv::format_double(rng.normal()) + "\n";
  const auto columns = dir.write("columns.csv", col);
  const auto trials = dir.file("trials.csv");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"simulate", "--seed 11 simulate --mu-plus 1.5 --n 500 --participants 3 --criteria=-1,0,0.75,1.5,2.5"},
      {"fit-observer", "--seed 11 fit-observer --input " + trials + " --transform identity --normality-reps 200"},
      {"predict", "--seed 11 predict --model " + model + " --method mc --samples 20000"},
      {"fit-confidence", "--seed 11 fit-confidence --model " + model + " --ratings " + ratings +
                             " --mc-samples 2000 --grid 8 --rounds 2"},
      {"lpa", "--seed 11 lpa --input " + accuracy + " --k-max 4 --restarts 10"},
      {"stats", "--seed 11 stats lilliefors --input " + columns + " --reps 500"},
      {"vote", "--seed 11 vote --agents " + agents + " --trials 5000 --strategies majority,grade,logodds"},
  };
  Verdict v;
  std::string failed;
  for (const auto& [name, args] : commands) {
    std::string outputs[2];
    for (int run = 0; run < 2; ++run) {
      const auto out = dir.file(name + "_" + std::to_string(run) + ".out");
      const std::string cmd = std::string(NEUROSDT_CLI_PATH) + " --quiet --out " + out + " " + args + " 2>/dev/null";
      const int rc = std::system(cmd.c_str());
      outputs[run] = rc == 0 ? read_bytes(out) : std::string();
    }
    if (name == "simulate" && !outputs[0].empty()) {
      std::ofstream(trials, std::ios::binary) << outputs[0];
    }
    if (outputs[0].empty() || outputs[0] != outputs[1]) failed += (failed.empty() ? "" : ",") + name;
  }
  v.pass = failed.empty();
  v.detail = std::to_string(commands.size()) + " subcommands rerun" + (failed.empty() ? "" : "; differing: " + failed);
  return v;
}

struct Criterion {
  std::string name;
  std::function<Verdict()> check;
  double time_limit_s;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"sdt-identities", sdt_identities, 1.0},
      {"paper-input-check", paper_input, 0.0},
      {"observer-recovery", observer_recovery, 30.0},
      {"roc-auc-identity", roc_auc, 0.0},
      {"confidence-criteria-recovery", confidence_recovery, 120.0},
      {"lpa-selection", lpa_selection, 60.0},
      {"nonparametric-calibration", nonparametric, 0.0},
      {"tfr-oracle", tfr_oracle, 0.0},
      {"voting-benchmark", voting_benchmark, 0.0},
      {"determinism", determinism, 0.0},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit_s > 0.0 && secs > c.time_limit_s) {
      v.pass = false;
      v.detail += "; over the " + num(c.time_limit_s, 0) + " s limit";
    }
    failures += !v.pass;
    std::printf("%s %s: %s [%.2f s]\n", v.pass ? "PASS" : "FAIL", c.name.c_str(), v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
