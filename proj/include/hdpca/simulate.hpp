#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "hdpca/numerics.hpp"

namespace hdpca {

/// Spiked covariance model: m eigenvalues sigma_i^2 * d on top of a noise
/// spectrum tau0 * i^-beta (i > m) whose mean is exactly 1.
struct SpikeSpec {
  Index d = 0;
  Index n = 0;
  Index m = 0;
  std::vector<double> sigma_sq;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;  // selects the stream block; see stream_for()
  bool random_frame = false;    // rotate the leading max(m, 10) coordinates

  void validate() const;
};

/// Three-group Gaussian mixture X | G=g ~ N(mu_g, I_d), mean entries drawn
/// from {-a, 0, a}.
struct MixtureSpec {
  Index d = 0;
  Index n = 0;
  double a = 0.0;
  std::array<double, 3> probs{0.5, 0.3, 0.2};
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;

  void validate() const;
};

enum class ModelKind { Spike, Mixture };

/// Population-side truth attached to a simulated data set.
struct OracleTruth {
  ModelKind model = ModelKind::Spike;
  Eigen::MatrixXd directions;      // d x m, orthonormal
  std::vector<double> sigma_sq;    // lambda_i / d for i <= m
  double tau_sq = 0.0;             // sum_{i>m} lambda_i / d at this d
  Eigen::MatrixXd true_scores;     // m x n, w_ij = u_i^T (X_j - mu)
  Eigen::MatrixXd scaled_scores;   // d^{-1/2} * true_scores
  std::vector<int> labels;         // mixture only
  Eigen::VectorXd population_eigs; // all d population eigenvalues, non-increasing
  Eigen::VectorXd population_mean; // zero for the spike model
  Eigen::MatrixXd group_means;     // d x 3, mixture only
  Eigen::MatrixXd frame_rotation;  // q x q rotation of the leading coordinates (spike)

  Index dim() const { return directions.rows(); }
  Index spikes() const { return directions.cols(); }

  /// Population direction u_k (0-based k). Any k for the spike model,
  /// k < m for the mixture model.
  Eigen::VectorXd direction(Index k) const;
  /// Population variance of u_k^T X.
  double population_variance(Index k) const;
  /// u_k^T (X_j - mu) for every column of X.
  Eigen::RowVectorXd true_scores_for(const DataMatrix& X, Index k) const;
  /// Population variance of v^T X, i.e. v^T Sigma v.
  double quadratic_form(const Eigen::VectorXd& v) const;
};

struct TestTruth {
  Eigen::MatrixXd true_scores;    // m x n_test
  Eigen::MatrixXd scaled_scores;  // d^{-1/2} * true_scores
  std::vector<int> labels;
};

struct Dataset {
  DataMatrix train;
  DataMatrix test;
  OracleTruth oracle;
  TestTruth oracle_test;
};

/// Stream layout: replicate r uses stream ids 8r + purpose, so the training
/// draws never depend on how many test points are requested.
enum class StreamPurpose : std::uint64_t { Train = 0, Test = 1, Frame = 2, GroupMeans = 3 };
std::uint64_t stream_for(std::uint64_t replicate, StreamPurpose purpose);

/// Noise eigenvalues tau0 * i^-beta for i = m+1..d, scaled to mean 1.
Eigen::VectorXd spike_population_eigs(const SpikeSpec& spec);

Dataset gen_spike(const SpikeSpec& spec, Index n_test);
Dataset gen_mixture(const MixtureSpec& spec, Index n_test);

}  // namespace hdpca
