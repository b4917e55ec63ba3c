#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string_view>

#include "hdpca/error.hpp"

namespace hdpca {

using Index = Eigen::Index;

/// Dense d x n data matrix: rows are variables, columns are observations.
/// Every entry is finite; shape is at least 1 x 1. Immutable once built.
class DataMatrix {
 public:
  DataMatrix() = default;
  explicit DataMatrix(Eigen::MatrixXd values);

  Index rows() const noexcept { return values_.rows(); }
  Index cols() const noexcept { return values_.cols(); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  double operator()(Index i, Index j) const { return values_(i, j); }

  /// Copy with column `j` removed.
  DataMatrix without_column(Index j) const;

 private:
  Eigen::MatrixXd values_;
};

struct ThinSvd {
  Eigen::MatrixXd left;      // d x r, orthonormal columns
  Eigen::VectorXd singular;  // r, non-increasing, >= 0
  Eigen::MatrixXd right;     // n x r, orthonormal columns
  Index rank = 0;            // number of singular values above the cutoff
};

struct SymEig {
  Eigen::VectorXd values;   // k, non-increasing
  Eigen::MatrixXd vectors;  // dim x k, orthonormal columns
};

/// Thin SVD through the eigendecomposition of the min(d, n)-sized Gram
/// matrix. Singular values whose squares fall below
/// kRankCutoff * sigma_max^2 are reported as exactly zero; their left (or
/// right, when d < n) columns are completed to an orthonormal set.
/// Sign convention: the largest-magnitude entry of every right vector is
/// positive, lowest index wins ties.
ThinSvd thin_svd(const DataMatrix& X);
ThinSvd thin_svd(const Eigen::MatrixXd& X);

/// Same as thin_svd for d >= n, reusing a precomputed gram = X^T X.
ThinSvd thin_svd_from_gram(const Eigen::MatrixXd& X, const Eigen::MatrixXd& gram);

inline constexpr double kRankCutoff = 1e-12;

/// X^T X, exactly symmetric.
Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& X);

/// Top-k eigenpairs of a symmetric matrix, largest first. Eigenvalues that
/// tie (within 1e-12 of the spectral scale) are ordered by the position of
/// their eigenvector's dominant coordinate. Each vector's largest-magnitude
/// entry is positive.
SymEig sym_eig(const Eigen::MatrixXd& A, Index k);
SymEig sym_eig(const Eigen::MatrixXd& A);

/// Flip signs of columns so that each column's largest-magnitude entry is
/// positive. Returns the applied signs.
Eigen::VectorXd canonicalize_signs(Eigen::MatrixXd& vectors);

/// Counter-free split-stream generator: xoshiro256** whose 256-bit state is
/// filled by splitmix64 from a mix of (master_seed, stream_id). Normal
/// variates use the Marsaglia polar method. The algorithm identifier below is
/// written into every report so results can be traced to the exact stream
/// definition.
class SeededRng {
 public:
  static constexpr std::string_view kAlgorithm =
      "xoshiro256**+splitmix64-seed+polar-normal/v1";

  SeededRng(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform integer in [0, bound), unbiased.
  std::uint64_t uniform_index(std::uint64_t bound) noexcept;
  double normal() noexcept;

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> state_{};
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// rows x cols matrix of i.i.d. standard normals, filled column by column.
DataMatrix sample_gaussian(SeededRng& rng, Index rows, Index cols);

}  // namespace hdpca
