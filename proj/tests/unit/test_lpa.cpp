#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <set>

#include "fixtures.hpp"
#include "neurosdt/lpa.hpp"
#include "oracles.hpp"

using namespace neurosdt;
using Catch::Approx;

namespace {

AccuracyMatrix from_rows(const std::vector<std::vector<double>>& rows) {
  AccuracyMatrix m;
  for (std::size_t c = 0; c < rows.front().size(); ++c) m.columns.push_back("c" + std::to_string(c));
  for (std::size_t i = 0; i < rows.size(); ++i) m.row_ids.push_back(std::to_string(i));
  m.values = rows;
  return m;
}

// Clusters at -1 and +1 in every coordinate, within-SD 0.05, 30% / 70% split.
AccuracyMatrix tight_clusters(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 200; ++i) {
    const double c = i < 60 ? -1.0 : 1.0;
    rows.push_back({rng.normal(c, 0.05), rng.normal(c, 0.05), rng.normal(c, 0.05)});
  }
  return from_rows(rows);
}

std::set<std::set<std::size_t>> partition(const ProfileSolution& s) {
  std::vector<std::set<std::size_t>> groups(s.model.k);
  for (std::size_t i = 0; i < s.assignments.size(); ++i) groups[s.assignments[i].label].insert(i);
  return {groups.begin(), groups.end()};
}

}  // namespace

TEST_CASE("standardize a two-value column") {
  const auto s = standardize(from_rows({{0.0}, {1.0}}));
  CHECK(s.values[0][0] == Approx(-0.7071).margin(1e-4));
  CHECK(s.values[1][0] == Approx(0.7071).margin(1e-4));
  CHECK(s.standardized);
}

TEST_CASE("standardize is idempotent") {
  const auto once = standardize(fixture::two_profiles(3));
  const auto twice = standardize(once);
  for (std::size_t i = 0; i < once.rows(); ++i) {
    for (std::size_t c = 0; c < once.cols(); ++c) CHECK(twice.values[i][c] == Approx(once.values[i][c]).margin(1e-9));
  }
}

TEST_CASE("standardize names a constant column") {
  auto m = from_rows({{1.0, 2.0}, {1.0, 3.0}, {1.0, 5.0}});
  m.columns = {"flat", "ok"};
  try {
    standardize(m);
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("flat") != std::string::npos);
  }
}

TEST_CASE("a single component is the sample mean and MLE variance") {
  const auto m = fixture::two_profiles(11);
  Rng rng(1);
  const auto g = fit_gmm_once(m, 1, rng);
  const double n = static_cast<double>(m.rows());
  double closed_form = 0.0;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    std::vector<double> col;
    for (const auto& r : m.values) col.push_back(r[c]);
    const double mean = oracle::mean(col);
    const double var = std::pow(oracle::sample_sd(col), 2) * (n - 1.0) / n;
    CHECK(g.means[0][c] == Approx(mean).epsilon(1e-12));
    CHECK(g.variances[0][c] == Approx(var).epsilon(1e-10));
    closed_form += -0.5 * n * (std::log(2.0 * std::numbers::pi * var) + 1.0);
  }
  CHECK(g.weights[0] == 1.0);
  CHECK(g.loglik == Approx(closed_form).epsilon(1e-10));
}

TEST_CASE("two tight clusters are recovered") {
  for (auto cov : {Covariance::DiagonalEqual, Covariance::DiagonalVarying}) {
    GmmOptions opt;
    opt.covariance = cov;
    const auto g = fit_gmm(tight_clusters(8), 2, 10, 8, opt);
    const std::size_t lo = g.means[0][0] < g.means[1][0] ? 0 : 1;
    for (std::size_t d = 0; d < 3; ++d) {
      CHECK(g.means[lo][d] == Approx(-1.0).margin(0.02));
      CHECK(g.means[1 - lo][d] == Approx(1.0).margin(0.02));
    }
    CHECK(g.weights[lo] == Approx(0.3).margin(0.05));
    CHECK(g.weights[1 - lo] == Approx(0.7).margin(0.05));
  }
}

TEST_CASE("EM never decreases the log-likelihood") {
  for (auto cov : {Covariance::DiagonalEqual, Covariance::DiagonalVarying}) {
    GmmOptions opt;
    opt.covariance = cov;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto m = fixture::two_profiles(seed);
      for (std::size_t k = 1; k <= 4; ++k) {
        Rng rng(seed, k);
        const auto g = fit_gmm_once(m, k, rng, opt);
        for (std::size_t i = 1; i < g.loglik_trace.size(); ++i) {
          CHECK(g.loglik_trace[i] >= g.loglik_trace[i - 1] - 1e-9 * std::fabs(g.loglik_trace[i - 1]));
        }
      }
    }
  }
}

TEST_CASE("fit_gmm refuses more components than rows") {
  const auto m = from_rows({{0.1}, {0.2}, {0.3}});
  CHECK_THROWS_AS(fit_gmm(m, 4, 1, 0), InputError);
  CHECK_NOTHROW(fit_gmm(m, 3, 5, 0));
}

TEST_CASE("parameter counts") {
  CHECK(mixture_parameters(1, 5, Covariance::DiagonalEqual) == 10);
  CHECK(mixture_parameters(2, 5, Covariance::DiagonalEqual) == 16);
  CHECK(mixture_parameters(2, 5, Covariance::DiagonalVarying) == 21);
}

TEST_CASE("BIC arithmetic") {
  MixtureModel g;
  g.dim = 1;
  g.loglik = 0.0;
  g.n_params = 3;
  AccuracyMatrix m;
  m.columns = {"a"};
  m.values.assign(70, {0.0});
  CHECK(bic(g, m) == Approx(3.0 * std::log(70.0)).epsilon(1e-15));
  CHECK(bic(g, m) == Approx(12.745).margin(1e-3));
  auto bigger = g;
  bigger.n_params = 6;
  CHECK(bic(bigger, m) > bic(g, m));
}

TEST_CASE("two components beat one on the two-profile data") {
  const auto m = fixture::two_profiles(21);
  CHECK(bic(fit_gmm(m, 2, 20, 1), m) < bic(fit_gmm(m, 1, 1, 1), m));
}

TEST_CASE("profile selection on the two-profile data") {
  const auto m = fixture::two_profiles(5);
  const auto s = select_profiles(m, 6, 20, 5);
  REQUIRE(s.chosen_k == 2);
  std::size_t good = 0;
  for (const auto& a : s.assignments) good += s.class_names[a.label] == "good performers";
  CHECK(std::llabs(static_cast<long long>(good) - static_cast<long long>(fixture::kGoodRows)) <= 3);
  CHECK(s.bic_trace.size() == 6);
  CHECK(std::count(s.class_names.begin(), s.class_names.end(), "bad performers") == 1);
}

TEST_CASE("profile selection over seeds") {
  int two = 0, one = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    two += select_profiles(fixture::two_profiles(100 + seed), 6, 20, seed).chosen_k == 2;
    one += select_profiles(fixture::one_profile(200 + seed), 6, 20, seed).chosen_k == 1;
  }
  CHECK(two >= 19);
  CHECK(one >= 19);
}

TEST_CASE("posterior rows sum to one") {
  const auto m = fixture::two_profiles(9);
  const auto g = fit_gmm(m, 3, 5, 9);
  for (const auto& row : posteriors(g, m)) {
    double s = 0.0;
    for (double p : row) s += p;
    CHECK(s == Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("relabelling components changes neither BIC nor the partition") {
  const auto m = fixture::two_profiles(4);
  const auto g = fit_gmm(m, 3, 10, 4);
  auto swapped = g;
  std::swap(swapped.weights[0], swapped.weights[2]);
  std::swap(swapped.means[0], swapped.means[2]);
  std::swap(swapped.variances[0], swapped.variances[2]);
  CHECK(bic(swapped, m) == Approx(bic(g, m)).epsilon(1e-14));
  const auto a = posteriors(g, m), b = posteriors(swapped, m);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    CHECK(a[i][0] == Approx(b[i][2]).margin(1e-12));
    CHECK(a[i][1] == Approx(b[i][1]).margin(1e-12));
  }
}

TEST_CASE("standardizing first yields the same partition on the two-profile data") {
  const auto m = fixture::two_profiles(12);
  auto scaled = m;
  const double factors[] = {2.0, 0.5, 3.0, 1.5, 0.25};
  for (auto& row : scaled.values) {
    for (std::size_t c = 0; c < row.size(); ++c) row[c] *= factors[c];
  }
  const auto raw = select_profiles(m, 4, 20, 12);
  const auto std_fit = select_profiles(standardize(scaled), 4, 20, 12);
  CHECK(std_fit.standardized);
  CHECK(raw.chosen_k == std_fit.chosen_k);
  CHECK(partition(raw) == partition(std_fit));
}

TEST_CASE("fits are deterministic per seed") {
  const auto m = fixture::two_profiles(30);
  const auto a = select_profiles(m, 4, 10, 77), b = select_profiles(m, 4, 10, 77);
  CHECK(a.model.loglik == b.model.loglik);
  CHECK(a.bic_trace == b.bic_trace);
}

TEST_CASE("select_profiles needs k_max of at least two") {
  CHECK_THROWS_AS(select_profiles(fixture::two_profiles(1), 1, 5, 1), InputError);
}

TEST_CASE("accuracy files load with participant ids") {
  oracle::TempDir dir("lpa");
  const auto path = dir.write("acc.csv", "participant_id,a,b\nP1,0.5,0.6\nP2,0.7,0.8\n");
  const auto m = load_accuracy(path);
  CHECK(m.row_ids == std::vector<std::string>{"P1", "P2"});
  CHECK(m.columns == std::vector<std::string>{"a", "b"});
  CHECK(m.values[1][0] == 0.7);
  CHECK_THROWS_AS(load_accuracy(dir.write("bad.csv", "id,a\nP1,0.5\n")), InputError);
  CHECK_THROWS_AS(load_accuracy(dir.write("nan.csv", "participant_id,a\nP1,x\n")), InputError);
  CHECK(parse_covariance("varying") == Covariance::DiagonalVarying);
  CHECK_THROWS_AS(parse_covariance("full"), InputError);
}
