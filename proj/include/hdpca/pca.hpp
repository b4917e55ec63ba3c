#pragma once

#include <string_view>
#include <vector>

#include "hdpca/numerics.hpp"

namespace hdpca {

/// Standard PCA of a d x n data matrix (sample covariance n^{-1} X X^T).
struct PcaFit {
  Eigen::MatrixXd directions;     // d x r, u-hat_i
  Eigen::VectorXd variances;      // r, lambda-hat_i, non-increasing
  Eigen::MatrixXd right_vectors;  // n x r, v-hat_i
  Eigen::MatrixXd sample_scores;  // r x n, w-hat_i = sqrt(n lambda-hat_i) v-hat_i^T
  bool centered = false;
  Eigen::VectorXd col_mean;       // d, zero when not centered

  Index dim() const { return directions.rows(); }
  Index components() const { return directions.cols(); }
  Index observations() const { return right_vectors.rows(); }
};

enum class ScoreKind { True, Sample, Prediction, AdjustedSample, AdjustedPrediction };

std::string_view to_string(ScoreKind kind);

/// m x cols block of principal component scores, tagged with what it holds.
struct ScoreMatrix {
  Eigen::MatrixXd values;
  ScoreKind kind = ScoreKind::Sample;

  ScoreMatrix() = default;
  ScoreMatrix(Eigen::MatrixXd v, ScoreKind k);

  Index comps() const { return values.rows(); }
  Index cols() const { return values.cols(); }
};

/// Fits PCA keeping all r = min(d, n) components. With `center`, the column
/// mean is subtracted first and stored for prediction.
PcaFit fit(const DataMatrix& X, bool center);

ScoreMatrix sample_scores(const PcaFit& fit, Index m);

/// u-hat_i^T (X_new - col_mean) for the first m directions.
ScoreMatrix predict_scores(const PcaFit& fit, const DataMatrix& X_new, Index m);

/// Leave-one-out refits: element j is the PCA of X without column j,
/// truncated to its first m components, with every direction sign-aligned to
/// the corresponding direction of `full` (non-negative inner product). Each
/// refit solves its own (n-1) x (n-1) Gram eigenproblem; the Gram entries are
/// shared with the full data.
std::vector<PcaFit> loo_fits(const DataMatrix& X, Index m, bool center, const PcaFit& full,
                             std::size_t threads = 1);
std::vector<PcaFit> loo_fits(const DataMatrix& X, Index m, bool center, std::size_t threads = 1);

/// Prediction score of each left-out column under its own refit: entry
/// (i, j) = u-hat_{i(-j)}^T (X_j - mean_{(-j)}).
Eigen::MatrixXd loo_prediction_scores(const std::vector<PcaFit>& loo, const DataMatrix& X,
                                      Index m);

}  // namespace hdpca
