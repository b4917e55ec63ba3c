#include <cmath>
#include <numeric>

#include "doctest.h"
#include "hdpca/experiments.hpp"
#include "oracles.hpp"

using namespace hdpca;

namespace {

ExperimentSpec small_spike() {
  ExperimentSpec s = presets::spike(0.3, 400, 20);
  s.n_test = 10;
  s.reps = 6;
  s.master_seed = 3;
  s.threads = 1;
  return s;
}

ExperimentSpec small_mixture() {
  ExperimentSpec s = presets::mixture(600, 40);
  s.a = 0.4;
  s.n_test = 40;
  s.reps = 4;
  s.master_seed = 9;
  s.threads = 1;
  return s;
}

void check_same(const ExperimentReport& a, const ExperimentReport& b) {
  REQUIRE(a.columns == b.columns);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    CHECK(a.rows[r].rep == b.rows[r].rep);
    CHECK(a.rows[r].excluded == b.rows[r].excluded);
    for (std::size_t c = 0; c < a.columns.size(); ++c) {
      const double x = a.rows[r].values[c], y = b.rows[r].values[c];
      CHECK(((std::isnan(x) && std::isnan(y)) || x == y));
    }
  }
}

}  // namespace

TEST_CASE("estimator names round-trip and accept aliases") {
  for (Estimator e : all_estimators()) CHECK(parse_estimator(to_string(e)) == e);
  CHECK(parse_estimator("procrustes") == Estimator::Best);
  CHECK(parse_estimator("jackknife") == Estimator::Jackknife1);
  CHECK(!parse_estimator("nope").has_value());
}

TEST_CASE("spec validation") {
  ExperimentSpec s = small_spike();
  CHECK_NOTHROW(s.validate());
  s.sigma_sq = {0.02};
  CHECK_THROWS_AS(s.validate(), Error);
  s = small_spike();
  s.reps = 0;
  CHECK_THROWS_AS(s.validate(), Error);
  s = small_mixture();
  s.m = 3;
  CHECK_THROWS_AS(s.validate(), Error);
  CHECK(small_spike().describe().find("beta=0.3 ") != std::string::npos);
  CHECK(!small_spike().effective_center());
  CHECK(small_mixture().effective_center());
}

TEST_CASE("make_dataset depends only on the spec and the repetition") {
  const ExperimentSpec s = small_spike();
  CHECK(make_dataset(s, 2).train.values() == make_dataset(s, 2).train.values());
  CHECK(make_dataset(s, 2).train.values() != make_dataset(s, 3).train.values());
  ExperimentSpec more = s;
  more.reps = 50;
  CHECK(make_dataset(more, 2).train.values() == make_dataset(s, 2).train.values());
}

TEST_CASE("bias table is reproducible and independent of the thread count") {
  ExperimentSpec s = small_spike();
  const ExperimentReport a = run_bias_table(s);
  s.threads = 3;
  const ExperimentReport b = run_bias_table(s);
  check_same(a, b);
  CHECK(a.has_column("theory_1"));
  CHECK(a.has_column("best_2"));
  CHECK(a.has_column("lzw_1"));
  CHECK(a.has_column("theta_best"));
  CHECK(a.rows.size() == 6);
}

TEST_CASE("aggregates equal an independent mean and sd over used rows") {
  const ExperimentReport rep = run_bias_table(small_spike());
  for (const std::string col : {"theory_1", "asymptotic_2", "best_1"}) {
    std::vector<double> xs;
    for (const auto& row : rep.rows) {
      const double v = row.values[static_cast<std::size_t>(rep.column(col))];
      if (!row.excluded && !std::isnan(v)) xs.push_back(v);
    }
    REQUIRE(!xs.empty());
    const double mean = oracle::mean(xs);
    double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    CHECK(rep.mean(col) == doctest::Approx(mean).epsilon(1e-14));
    CHECK(rep.sd(col) == doctest::Approx(std::sqrt(ss / static_cast<double>(xs.size() - 1))).epsilon(1e-12));
  }
  CHECK_THROWS_AS(rep.column("missing"), Error);
}

TEST_CASE("excluded rows and NaN cells are left out of the aggregate") {
  std::vector<ReportRow> rows(4);
  rows[0].values = {1.0, 10.0};
  rows[1].values = {3.0, NAN};
  rows[2].values = {5.0, 20.0};
  rows[3].values = {100.0, 100.0};
  rows[3].excluded = true;
  const Aggregate agg = aggregate_rows(2, rows);
  CHECK(agg.used == 3);
  CHECK(agg.excluded == 1);
  CHECK(agg.mean[0] == doctest::Approx(3.0));
  CHECK(agg.sd[0] == doctest::Approx(2.0));
  CHECK(agg.mean[1] == doctest::Approx(15.0));
  CHECK(agg.count[1] == 2);
}

TEST_CASE("sample scores are inflated and the estimators track the oracle factor") {
  ExperimentSpec s = small_spike();
  s.d = 3000;
  const ExperimentReport rep = run_bias_table(s);
  for (int k = 1; k <= 2; ++k) {
    const std::string t = "theory_" + std::to_string(k);
    CHECK(rep.mean(t) > 1.0);
    for (const char* e : {"asymptotic", "jackknife1", "lzw"}) {
      CHECK(std::abs(rep.mean(std::string(e) + "_" + std::to_string(k)) - rep.mean(t)) <
            0.25 * rep.mean(t));
    }
  }
}

TEST_CASE("mixture with a = 0 cannot run") {
  ExperimentSpec s = small_mixture();
  s.a = 0.0;
  CHECK_THROWS_AS(run_bias_table(s), Error);
}

TEST_CASE("noise component: sample variance inflated, prediction variance matches u^T Sigma u") {
  ExperimentSpec s = small_spike();
  s.n_test = 100;
  const ExperimentReport rep = run_noise_component_table(s, 3);
  // n^-1 ||w-hat_3||^2 is about d tau^2 / n, far above the prediction variance
  CHECK(rep.mean("sample_var") > 5.0 * rep.mean("pred_var"));
  CHECK(std::abs(rep.mean("pred_var") / rep.mean("pred_var_oracle") - 1.0) < 0.2);
  CHECK(std::abs(rep.mean("sample_corr")) < 0.5);
  CHECK_THROWS_AS(run_noise_component_table(s, 2), Error);
  CHECK_THROWS_AS(run_noise_component_table(s, 20), Error);
  CHECK_THROWS_AS(run_noise_component_table(small_mixture(), 3), Error);
}

TEST_CASE("one strong spike: sample scores correlate with the truth") {
  ExperimentSpec s = presets::spike(0.3, 500, 20);
  s.m = 1;
  s.sigma_sq = {0.1};
  s.reps = 3;
  s.threads = 1;
  const ExperimentReport rep = run_correlation_figure(s);
  for (double r : rep.values("r_sample_1")) CHECK(r > 0.9);
  CHECK(!rep.has_column("theta_best"));
}

TEST_CASE("correlation limits are close to the observed correlations") {
  ExperimentSpec s = small_spike();
  s.d = 2000;
  const ExperimentReport rep = run_correlation_figure(s);
  CHECK(std::abs(rep.mean("r_sample_1") - rep.mean("limit_sample_1")) < 0.05);
  CHECK(std::abs(rep.mean("r_pred_1") - rep.mean("limit_pred_1")) < 0.1);
}

TEST_CASE("convergence residuals shrink as d grows") {
  ExperimentSpec s = small_spike();
  s.reps = 4;
  s.d = 300;
  const ExperimentReport small = run_convergence(s);
  s.d = 4800;
  const ExperimentReport large = run_convergence(s);
  CHECK(large.mean("resid_sample") < small.mean("resid_sample"));
  CHECK(large.mean("resid_pred") < small.mean("resid_pred"));
}

TEST_CASE("score pairs: unit rho leaves the scores alone") {
  ExperimentSpec s = small_spike();
  s.reps = 2;
  const ScorePairTable t = run_score_pairs(s, Estimator::Asymptotic, Eigen::Vector2d(1.0, 1.0));
  REQUIRE(t.rows.size() == 2 * (20 + 10));
  for (const auto& row : t.rows) {
    CHECK(row.adjusted[0] == row.estimate[0]);
    CHECK(row.adjusted[1] == row.estimate[1]);
  }
  CHECK_THROWS_AS(run_score_pairs(s, Estimator::Asymptotic, Eigen::Vector3d(1, 1, 1)), Error);
}

TEST_CASE("score pairs: adjustment moves prediction scores towards the truth") {
  ExperimentSpec s = presets::score_pairs();
  s.d = 4000;
  s.reps = 3;
  s.threads = 1;
  const ScorePairTable t = run_score_pairs(s);
  REQUIRE(t.summaries.size() == 3);
  for (const auto& sum : t.summaries) {
    CHECK(sum.rms_prediction_adjusted < sum.rms_prediction);
    CHECK((sum.rho_used.array() > 1.0).all());
  }
  // adjusted sample scores are the raw ones divided by rho
  const auto& first = t.rows.front();
  CHECK(first.adjusted[0] == doctest::Approx(first.estimate[0] / t.summaries[0].rho_used(0)));
}

TEST_CASE("classifier separates well-separated groups") {
  Eigen::MatrixXd X = 0.1 * oracle::gaussian(2, 60, 5);
  std::vector<int> labels(60);
  const double centers[3][2] = {{0, 0}, {3, 0}, {0, 3}};
  for (Index j = 0; j < 60; ++j) {
    const int g = static_cast<int>(j % 3);
    labels[static_cast<std::size_t>(j)] = g + 7;
    X(0, j) += centers[g][0];
    X(1, j) += centers[g][1];
  }
  const LinearClassifier c = train_classifier(ScoreMatrix(X, ScoreKind::Sample), labels);
  CHECK(c.error_percent(X, labels) == 0.0);
  CHECK(c.classes == std::vector<int>{7, 8, 9});

  // observation order does not matter
  std::vector<Index> perm(60);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  Eigen::MatrixXd Xp(2, 60);
  std::vector<int> lp(60);
  for (Index j = 0; j < 60; ++j) {
    Xp.col(j) = X.col(perm[static_cast<std::size_t>(j)]);
    lp[static_cast<std::size_t>(j)] = labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
  }
  const LinearClassifier cp = train_classifier(ScoreMatrix(Xp, ScoreKind::Sample), lp);
  CHECK((c.weights - cp.weights).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(train_classifier(ScoreMatrix(X, ScoreKind::Sample), std::vector<int>(60, 1)), Error);
  CHECK_THROWS_AS(train_classifier(ScoreMatrix(X, ScoreKind::Sample), std::vector<int>(59, 1)), Error);
  CHECK_THROWS_AS(c.predict(Eigen::MatrixXd::Zero(3, 2)), Error);
}

TEST_CASE("classification arms with unit rho agree") {
  const ExperimentSpec s = small_mixture();
  const Dataset ds = make_dataset(s, 0);
  const PcaFit f = fit(ds.train, true);
  const ScoreMatrix sample = sample_scores(f, 2);
  const ScoreMatrix pred = predict_scores(f, ds.test, 2);
  const BiasFactors unit{Eigen::Vector2d(1.0, 1.0), std::nullopt, Provenance::Theory};
  const ClassificationErrors e =
      classification_arms(sample, pred, ds.oracle.labels, ds.oracle_test.labels, unit);
  CHECK(e.train_adjusted == e.train_unadjusted);
  CHECK(e.test_adjusted == e.test_unadjusted);
}

TEST_CASE("classification demo runs and adjustment does not hurt") {
  const ExperimentReport rep = run_classification_demo(small_mixture());
  CHECK(rep.mean("test_err_adj") <= rep.mean("test_err_unadj") + 1e-12);
  CHECK(rep.mean("rho_1") > 1.0);
  CHECK_THROWS_AS(run_classification_demo(small_spike()), Error);
}

TEST_CASE("presets") {
  const auto grid = presets::bias_table_grid();
  CHECK(grid.size() == 12);
  int mixtures = 0;
  for (const auto& s : grid) {
    CHECK_NOTHROW(s.validate());
    mixtures += s.model == ModelKind::Mixture;
  }
  CHECK(mixtures == 4);
  CHECK(presets::classification().n == 100);
  CHECK(presets::classification().model == ModelKind::Mixture);
  CHECK(presets::score_pairs().d == 10000);
  CHECK(presets::correlation().beta == 0.3);
}
