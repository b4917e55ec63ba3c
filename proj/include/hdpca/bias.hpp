#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "hdpca/pca.hpp"
#include "hdpca/simulate.hpp"

namespace hdpca {

/// Second-moment matrix of the scaled true scores, W1 W1^T (m x m), with its
/// eigenpairs. Column k of `rotation` is v_k; loading j of it is v_kj.
struct ScoreCov {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd rotation;
};

enum class Provenance { Theory, Asymptotic, Jackknife1, Jackknife2, Jackknife3, Lzw, Procrustes };

std::string_view to_string(Provenance p);

struct BiasFactors {
  Eigen::VectorXd rho;
  std::optional<Eigen::MatrixXd> rotation;
  Provenance provenance = Provenance::Theory;

  Index comps() const { return rho.size(); }
};

/// Limits of sample/prediction score behaviour as d grows, evaluated from the
/// oracle at the current d.
struct TheoryLimits {
  double tau_sq = 0.0;
  double upsilon_sq = 0.0;              // d^{-1} sum_{i>m} lambda_i^2
  Eigen::MatrixXd corr_sample;          // (k, j): limit of r(w-hat_k, w_j)
  Eigen::MatrixXd corr_prediction;      // (k, j): limit of Corr(w-hat_k*, w_j* | W1)
  Eigen::MatrixXd zeta;                 // zeta_kj
  Eigen::MatrixXd zeta_bar;             // zeta-bar_kj as used by corr_prediction
  Eigen::VectorXd eps_var;              // limit Var(eps_k* | W1), k <= m
  double eps_var_noise_avg = 0.0;       // average over k > m
  Eigen::VectorXd inner_prod_limits;    // u-hat_k^T u_k -> v_kk / rho_k
  Eigen::VectorXd eigval_limits;        // d^{-1} n lambda-hat_k -> lambda_k(W) + tau^2
  double noise_eigval_limit = 0.0;      // ... -> tau^2 for k > m
  Eigen::VectorXd xi;                   // xi_k(W)
};

ScoreCov score_cov(const ScoreMatrix& W1);

BiasFactors rho_theory(const ScoreCov& cov, double tau_sq);

/// Noise-level estimate (sum_{i=m+1}^{n} lambda-hat_i / (n - m)) * n / d.
double tau_sq_estimate(const PcaFit& fit, Index m, Index d);

BiasFactors rho_asymptotic(const PcaFit& fit, Index m, Index d);

enum class JackknifeVariant { MeanOfRoots = 1, RootOfSums = 2, RootOfSquares = 3 };

/// Jackknife factors from full-data sample scores and leave-one-out
/// prediction scores (absolute values). For variant 1, observations whose
/// leave-one-out score magnitude is below 1e-8 * median are skipped; the
/// number skipped per component is written to `excluded` when given.
BiasFactors rho_jackknife(const PcaFit& fit, const std::vector<PcaFit>& loo, const DataMatrix& X,
                          Index m, JackknifeVariant variant,
                          std::vector<Index>* excluded = nullptr);

/// Same, starting from precomputed leave-one-out prediction scores (m x n).
BiasFactors rho_jackknife(const PcaFit& fit, const Eigen::MatrixXd& loo_scores, Index m,
                          JackknifeVariant variant, std::vector<Index>* excluded = nullptr);

/// Closed-form factor from the ratio-regime shrinkage (lambda - 1) /
/// (lambda + gamma - 1): the sample eigenvalue, in units of the estimated
/// noise level, is mapped back to the population spike through
/// lambda-hat = ell + gamma ell / (ell - 1) with gamma = d / n.
BiasFactors rho_lzw(const PcaFit& fit, Index m, Index d);

/// Sample rows are divided by rho, prediction rows multiplied by rho.
ScoreMatrix adjust(const ScoreMatrix& scores, const BiasFactors& factors);

TheoryLimits theory_limits(const OracleTruth& oracle, const ScoreCov& cov,
                           const Eigen::VectorXd& population_eigs);

/// First-order n^{-1} inflation of E(lambda-hat_i / lambda_i).
std::vector<double> eigen_inflation(const std::vector<double>& sigma_sq, double tau_sq, Index n);

/// eps_k* = w-hat_k* - sum_{i<=m} w_i* u-hat_k^T u_i for every fitted
/// component k (rows) and column of X_new.
Eigen::MatrixXd epsilon_decomposition(const PcaFit& fit, const OracleTruth& oracle,
                                      const DataMatrix& X_new);

/// Copy of `rotation` with columns flipped so that row k of R^T W1 points the
/// same way as row k of W1_hat. Needed before comparing fitted scores with
/// S R^T W1, since PCA signs are conventional.
Eigen::MatrixXd align_rotation(const Eigen::MatrixXd& rotation, const Eigen::MatrixXd& W1,
                               const Eigen::MatrixXd& W1_hat);

/// x^T y / sqrt(x^T x y^T y): correlation about zero.
double r_uncentered(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                    const Eigen::Ref<const Eigen::RowVectorXd>& y);
/// Pearson correlation.
double pearson(const Eigen::Ref<const Eigen::RowVectorXd>& x,
               const Eigen::Ref<const Eigen::RowVectorXd>& y);
/// Sample variance with n - 1 denominator.
double sample_variance(const Eigen::Ref<const Eigen::RowVectorXd>& x);

}  // namespace hdpca
