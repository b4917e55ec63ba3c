#include <cmath>

#include "doctest.h"
#include "hdpca/bias.hpp"
#include "oracles.hpp"

using namespace hdpca;

namespace {

// Fit holding only a spectrum, for the closed-form estimators.
PcaFit spectrum_fit(const Eigen::VectorXd& variances, Index n, bool centered = false) {
  PcaFit f;
  const Index r = variances.size();
  f.variances = variances;
  f.directions = Eigen::MatrixXd::Zero(3, r);
  f.right_vectors = Eigen::MatrixXd::Zero(n, r);
  f.sample_scores = Eigen::MatrixXd::Zero(r, n);
  f.centered = centered;
  f.col_mean = Eigen::VectorXd::Zero(3);
  return f;
}

SpikeSpec spike(Index d, Index n) {
  SpikeSpec s;
  s.d = d;
  s.n = n;
  s.m = 2;
  s.sigma_sq = {0.02, 0.01};
  s.beta = 0.3;
  s.seed = 3;
  return s;
}

}  // namespace

TEST_CASE("score covariance and theory factors against a Jacobi oracle") {
  const Eigen::MatrixXd W1 = oracle::gaussian(2, 30, 1);
  const ScoreCov cov = score_cov(ScoreMatrix(W1, ScoreKind::True));
  CHECK((cov.matrix - W1 * W1.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  const oracle::Eig ref = oracle::jacobi_eigen(W1 * W1.transpose());
  CHECK((cov.eigenvalues - ref.values).cwiseAbs().maxCoeff() < 1e-10);
  const BiasFactors f = rho_theory(cov, 0.7);
  CHECK(f.provenance == Provenance::Theory);
  for (Index k = 0; k < 2; ++k) {
    CHECK(f.rho(k) == doctest::Approx(std::sqrt(1.0 + 0.7 / ref.values(k))).epsilon(1e-12));
  }
  REQUIRE(f.rotation.has_value());
  CHECK(oracle::max_abs_diff_up_to_sign(*f.rotation, ref.vectors) < 1e-10);
  CHECK(rho_theory(cov, 0.0).rho.isApproxToConstant(1.0));
  CHECK_THROWS_AS(rho_theory(cov, -1.0), Error);
}

TEST_CASE("theory factors need a full-rank score covariance") {
  Eigen::MatrixXd W1(2, 5);
  W1.row(0) << 1, 2, 3, 4, 5;
  W1.row(1) = W1.row(0);
  const ScoreCov cov = score_cov(ScoreMatrix(W1, ScoreKind::True));
  try {
    rho_theory(cov, 1.0);
    FAIL("expected DegenerateSignal");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateSignal);
  }
  CHECK_THROWS_AS(score_cov(ScoreMatrix(oracle::gaussian(5, 5, 2), ScoreKind::True)), Error);
}

TEST_CASE("noise level and asymptotic factors from a known spectrum") {
  Eigen::VectorXd v(6);
  v << 50, 20, 3, 2.5, 2, 1.5;
  const Index n = 6, d = 100, m = 2;
  const PcaFit f = spectrum_fit(v, n);
  const double tau = (3 + 2.5 + 2 + 1.5) / 4.0 * n / d;
  CHECK(tau_sq_estimate(f, m, d) == doctest::Approx(tau).epsilon(1e-14));
  const BiasFactors a = rho_asymptotic(f, m, d);
  CHECK(a.provenance == Provenance::Asymptotic);
  for (Index k = 0; k < m; ++k) {
    const double lam = n * v(k) / d - tau;
    CHECK(a.rho(k) == doctest::Approx(std::sqrt(1.0 + tau / lam)).epsilon(1e-14));
  }
}

TEST_CASE("centered fits average the n - 1 non-null eigenvalues") {
  Eigen::VectorXd v(6);
  v << 50, 20, 3, 2.5, 2, 0.0;
  const PcaFit f = spectrum_fit(v, 6, true);
  CHECK(tau_sq_estimate(f, 2, 100) == doctest::Approx((3 + 2.5 + 2) / 3.0 * 6 / 100.0));
  CHECK_THROWS_AS(tau_sq_estimate(f, 5, 100), Error);
}

TEST_CASE("noise level needs m < n and names the constraint") {
  const PcaFit f = spectrum_fit(Eigen::VectorXd::Ones(4), 4);
  try {
    tau_sq_estimate(f, 4, 100);
    FAIL("expected InvalidInput");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidInput);
    CHECK(std::string(e.what()).find("n - m") != std::string::npos);
  }
}

TEST_CASE("flat spectrum gives a degenerate signal") {
  const PcaFit f = spectrum_fit(Eigen::VectorXd::Constant(5, 2.0), 5);
  try {
    rho_asymptotic(f, 1, 100);
    FAIL("expected DegenerateSignal");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateSignal);
  }
}

TEST_CASE("jackknife variants from given scores") {
  const Index n = 5;
  PcaFit f = spectrum_fit(Eigen::VectorXd::Ones(2), n);
  f.sample_scores.resize(2, n);
  f.sample_scores << 4, -9, 1, 16, 2.25, 1, 1, -1, 1, 1;
  Eigen::MatrixXd loo(2, n);
  loo << 1, 1, -1, 4, 1, 0.25, 0.25, 0.25, 0.25, 0.25;

  const auto full = f.sample_scores.cwiseAbs();
  const auto held = loo.cwiseAbs();
  double mean_roots = 0.0;
  for (Index j = 0; j < n; ++j) mean_roots += std::sqrt(full(0, j) / held(0, j)) / n;
  const double root_sums = std::sqrt(full.row(0).sum() / held.row(0).sum());
  const double root_squares = std::pow(full.row(0).squaredNorm() / held.row(0).squaredNorm(), 0.25);

  CHECK(rho_jackknife(f, loo, 2, JackknifeVariant::MeanOfRoots).rho(0) == doctest::Approx(mean_roots));
  CHECK(rho_jackknife(f, loo, 2, JackknifeVariant::RootOfSums).rho(0) == doctest::Approx(root_sums));
  CHECK(rho_jackknife(f, loo, 2, JackknifeVariant::RootOfSquares).rho(0) ==
        doctest::Approx(root_squares));
  CHECK(rho_jackknife(f, loo, 2, JackknifeVariant::RootOfSums).rho(1) == doctest::Approx(2.0));
  CHECK(rho_jackknife(f, loo, 2, JackknifeVariant::RootOfSums).provenance == Provenance::Jackknife2);
}

TEST_CASE("jackknife variant 1 skips vanishing leave-one-out scores") {
  const Index n = 5;
  PcaFit f = spectrum_fit(Eigen::VectorXd::Ones(1), n);
  f.sample_scores.resize(1, n);
  f.sample_scores << 4, 4, 4, 4, 4;
  Eigen::MatrixXd loo(1, n);
  loo << 1, 1, 0.0, 1, 1e-12;
  std::vector<Index> skipped;
  const BiasFactors b = rho_jackknife(f, loo, 1, JackknifeVariant::MeanOfRoots, &skipped);
  CHECK(skipped[0] == 2);
  CHECK(b.rho(0) == doctest::Approx(2.0));
}

TEST_CASE("jackknife from refits equals jackknife from explicit leave-one-out projections") {
  const Dataset ds = gen_spike(spike(800, 15), 1);
  const PcaFit f = fit(ds.train, false);
  const auto loo = loo_fits(ds.train, 2, false, f);
  Eigen::MatrixXd direct(2, 15);
  for (Index j = 0; j < 15; ++j) {
    const PcaFit g = fit(ds.train.without_column(j), false);
    direct.col(j) = g.directions.leftCols(2).transpose() * ds.train.values().col(j);
  }
  for (auto v : {JackknifeVariant::MeanOfRoots, JackknifeVariant::RootOfSums,
                 JackknifeVariant::RootOfSquares}) {
    const BiasFactors a = rho_jackknife(f, loo, ds.train, 2, v);
    const BiasFactors b = rho_jackknife(f, direct, 2, v);
    CHECK((a.rho - b.rho).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("ratio-regime factor inverts the eigenvalue map") {
  const Dataset ds = gen_spike(spike(2000, 40), 1);
  const PcaFit f = fit(ds.train, false);
  const BiasFactors b = rho_lzw(f, 2, 2000);
  CHECK(b.provenance == Provenance::Lzw);
  const double tau = tau_sq_estimate(f, 2, 2000);
  const double gamma = 2000.0 / 40.0;
  for (Index k = 0; k < 2; ++k) {
    const double observed = f.variances(k) / tau;
    // recover ell from rho^2 = (ell + gamma - 1) / (ell - 1)
    const double r2 = b.rho(k) * b.rho(k);
    const double ell = (r2 + gamma - 1.0) / (r2 - 1.0);
    CHECK(ell > 1.0 + std::sqrt(gamma));
    CHECK(ell + gamma * ell / (ell - 1.0) == doctest::Approx(observed).epsilon(1e-10));
  }
}

TEST_CASE("ratio-regime factor below the detectability threshold") {
  const PcaFit f = spectrum_fit(Eigen::VectorXd::Constant(5, 1.0), 5);
  CHECK_THROWS_AS(rho_lzw(f, 1, 100), Error);
}

TEST_CASE("adjustment divides sample scores and multiplies prediction scores") {
  const Eigen::MatrixXd W = oracle::gaussian(2, 7, 4);
  BiasFactors b;
  b.rho = Eigen::Vector2d(1.3, 2.1);
  const ScoreMatrix s = adjust(ScoreMatrix(W, ScoreKind::Sample), b);
  const ScoreMatrix p = adjust(ScoreMatrix(W, ScoreKind::Prediction), b);
  CHECK(s.kind == ScoreKind::AdjustedSample);
  CHECK(p.kind == ScoreKind::AdjustedPrediction);
  CHECK((b.rho.asDiagonal() * s.values - W).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((b.rho.cwiseInverse().asDiagonal() * p.values - W).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(adjust(ScoreMatrix(W, ScoreKind::True), b), Error);
  CHECK_THROWS_AS(adjust(s, b), Error);
  CHECK_THROWS_AS(adjust(ScoreMatrix(oracle::gaussian(3, 2, 1), ScoreKind::Sample), b), Error);
  BiasFactors one;
  one.rho = Eigen::Vector2d::Ones();
  CHECK(adjust(ScoreMatrix(W, ScoreKind::Sample), one).values == W);
}

TEST_CASE("theory limits: identities that hold for any score covariance") {
  const Dataset ds = gen_spike(spike(3000, 25), 1);
  const ScoreCov cov = score_cov(ScoreMatrix(ds.oracle.scaled_scores, ScoreKind::True));
  const TheoryLimits lim = theory_limits(ds.oracle, cov, ds.oracle.population_eigs);
  const Eigen::VectorXd& eig = ds.oracle.population_eigs;
  const double ups = eig.tail(2998).array().square().sum() / 3000.0;
  CHECK(lim.upsilon_sq == doctest::Approx(ups).epsilon(1e-12));
  CHECK(lim.tau_sq == doctest::Approx(eig.tail(2998).sum() / 3000.0));
  for (Index k = 0; k < 2; ++k) {
    const double lam = cov.eigenvalues(k);
    CHECK(lim.eps_var(k) == doctest::Approx(ups / (lam + lim.tau_sq)));
    CHECK(lim.eigval_limits(k) == doctest::Approx(lam + lim.tau_sq));
    // squared limiting correlation and xi are two views of the same quantity
    CHECK(lim.corr_sample(k, k) * lim.corr_sample(k, k) ==
          doctest::Approx(1.0 / (1.0 + lim.xi(k))).epsilon(1e-12));
    // each true score is fully explained by the m sample scores in the limit
    double total = 0.0;
    for (Index i = 0; i < 2; ++i) total += lim.corr_sample(i, k) * lim.corr_sample(i, k);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(lim.inner_prod_limits(k)) ==
          doctest::Approx(std::abs(cov.rotation(k, k)) / std::sqrt(1.0 + lim.tau_sq / lam)));
  }
  CHECK(lim.eps_var_noise_avg == doctest::Approx(ups / lim.tau_sq));
  CHECK(lim.noise_eigval_limit == lim.tau_sq);
}

TEST_CASE("eigenvalue inflation by hand") {
  const auto r = eigen_inflation({0.02, 0.01}, 1.0, 50);
  CHECK(r[0] == doctest::Approx(1.0 + (1.0 + 50.0) / 50.0));
  CHECK(r[1] == doctest::Approx(1.0 + (-2.0 + 100.0) / 50.0));
  try {
    eigen_inflation({0.02, 0.02}, 1.0, 50);
    FAIL("expected DegenerateSpectrum");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateSpectrum);
  }
}

TEST_CASE("epsilon decomposition removes the signal part of prediction scores") {
  const Dataset ds = gen_spike(spike(500, 12), 30);
  const PcaFit f = fit(ds.train, false);
  const Eigen::MatrixXd eps = epsilon_decomposition(f, ds.oracle, ds.test);
  REQUIRE(eps.rows() == f.components());
  REQUIRE(eps.cols() == 30);
  const Eigen::MatrixXd U = ds.oracle.directions;
  const Eigen::MatrixXd expect = f.directions.transpose() * ds.test.values() -
                                 f.directions.transpose() * U * (U.transpose() * ds.test.values());
  CHECK((eps - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("align_rotation flips only the columns that disagree") {
  const Eigen::MatrixXd W1 = oracle::gaussian(2, 20, 5);
  const Eigen::MatrixXd R = oracle::orthogonal(2, 6);
  Eigen::MatrixXd W1_hat = R.transpose() * W1;
  W1_hat.row(1) *= -1.0;
  const Eigen::MatrixXd A = align_rotation(R, W1, W1_hat);
  CHECK(A.col(0) == R.col(0));
  CHECK(A.col(1) == -R.col(1));
}

TEST_CASE("correlation helpers") {
  Eigen::RowVectorXd x(4), y(4);
  x << 1, 2, 3, 4;
  y << 2, 4, 6, 8.5;
  CHECK(r_uncentered(x, 2 * x) == doctest::Approx(1.0));
  CHECK(pearson(x, -x + Eigen::RowVectorXd::Constant(4, 3.0)) == doctest::Approx(-1.0));
  CHECK(sample_variance(x) == doctest::Approx(5.0 / 3.0));
  CHECK(pearson(x, y) < 1.0);
  CHECK(to_string(Provenance::Procrustes) == "procrustes");
}
