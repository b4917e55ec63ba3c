#include "hdpca/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace hdpca {

namespace {

void require_finite(const Eigen::MatrixXd& X, const char* what) {
  if (!X.allFinite()) {
    throw Error(ErrorKind::InvalidInput, std::string(what) + " contains non-finite entries");
  }
}

Index dominant_index(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Index best = 0;
  double best_abs = -1.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  return best;
}

// Gram-Schmidt against columns [0, col) applied twice, which is enough to
// reach working precision even for nearly dependent input.
double orthogonalize_against(Eigen::MatrixXd& Q, Index col, Eigen::VectorXd& v) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Index k = 0; k < col; ++k) {
      v -= Q.col(k).dot(v) * Q.col(k);
    }
  }
  return v.norm();
}

// Columns [0, rank) hold X v / sigma. Well conditioned columns are already
// orthonormal to working precision; the rest are re-orthogonalized. Columns
// [rank, r) are completed with coordinate vectors.
void finish_orthonormal_basis(Eigen::MatrixXd& Q, Index rank, const Eigen::VectorXd& eig,
                              double eig_max) {
  const Index r = Q.cols();
  for (Index i = 0; i < rank; ++i) {
    if (eig(i) < 1e-4 * eig_max) {
      Eigen::VectorXd v = Q.col(i);
      const double norm = orthogonalize_against(Q, i, v);
      Q.col(i) = v / norm;
    }
  }
  Index candidate = 0;
  for (Index i = rank; i < r; ++i) {
    for (;; ++candidate) {
      Eigen::VectorXd v = Eigen::VectorXd::Unit(Q.rows(), candidate);
      const double norm = orthogonalize_against(Q, i, v);
      if (norm > 0.5) {
        Q.col(i) = v / norm;
        ++candidate;
        break;
      }
    }
  }
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

DataMatrix::DataMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw Error(ErrorKind::InvalidInput, "data matrix must have at least one row and one column");
  }
  require_finite(values_, "data matrix");
}

DataMatrix DataMatrix::without_column(Index j) const {
  if (j < 0 || j >= cols() || cols() < 2) {
    throw Error(ErrorKind::InvalidInput, "cannot drop column " + std::to_string(j));
  }
  Eigen::MatrixXd out(rows(), cols() - 1);
  out.leftCols(j) = values_.leftCols(j);
  out.rightCols(cols() - 1 - j) = values_.rightCols(cols() - 1 - j);
  return DataMatrix(std::move(out));
}

Eigen::VectorXd canonicalize_signs(Eigen::MatrixXd& vectors) {
  Eigen::VectorXd signs = Eigen::VectorXd::Ones(vectors.cols());
  for (Index c = 0; c < vectors.cols(); ++c) {
    const Index i = dominant_index(vectors.col(c));
    if (vectors(i, c) < 0.0) {
      vectors.col(c) *= -1.0;
      signs(c) = -1.0;
    }
  }
  return signs;
}

SymEig sym_eig(const Eigen::MatrixXd& A) { return sym_eig(A, A.rows()); }

SymEig sym_eig(const Eigen::MatrixXd& A, Index k) {
  if (A.rows() != A.cols() || A.rows() < 1) {
    throw Error(ErrorKind::InvalidInput, "sym_eig needs a non-empty square matrix");
  }
  require_finite(A, "symmetric matrix");
  const Index dim = A.rows();
  if (k < 1 || k > dim) {
    throw Error(ErrorKind::InvalidInput, "requested eigenpair count out of range");
  }
  const double scale = A.cwiseAbs().maxCoeff();
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorKind::InvalidInput, "matrix is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::InvalidInput, "symmetric eigensolver did not converge");
  }
  const Eigen::VectorXd& vals = solver.eigenvalues();
  const Eigen::MatrixXd& vecs = solver.eigenvectors();

  std::vector<Index> order(static_cast<std::size_t>(dim));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return vals(a) > vals(b); });

  // ties: order by dominant coordinate of the eigenvector
  const double tie_tol = 1e-12 * std::max(vals.cwiseAbs().maxCoeff(), 1e-300);
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start + 1;
    while (end < order.size() && vals(order[start]) - vals(order[end]) <= tie_tol) ++end;
    if (end - start > 1) {
      std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(start),
                       order.begin() + static_cast<std::ptrdiff_t>(end), [&](Index a, Index b) {
                         return dominant_index(vecs.col(a)) < dominant_index(vecs.col(b));
                       });
    }
    start = end;
  }

  SymEig out;
  out.values.resize(k);
  out.vectors.resize(dim, k);
  for (Index i = 0; i < k; ++i) {
    out.values(i) = vals(order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = vecs.col(order[static_cast<std::size_t>(i)]);
  }
  canonicalize_signs(out.vectors);
  return out;
}

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& X) {
  const Index n = X.cols();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  G.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
  G.triangularView<Eigen::StrictlyUpper>() = G.transpose();
  return G;
}

ThinSvd thin_svd_from_gram(const Eigen::MatrixXd& X, const Eigen::MatrixXd& gram) {
  const Index n = X.cols();
  if (X.rows() < n) {
    throw Error(ErrorKind::InvalidInput, "thin_svd_from_gram needs rows >= cols");
  }
  SymEig eig = sym_eig(gram);
  const double eig_max = std::max(eig.values(0), 0.0);

  ThinSvd out;
  out.singular = Eigen::VectorXd::Zero(n);
  out.right = std::move(eig.vectors);
  out.left = Eigen::MatrixXd::Zero(X.rows(), n);
  Index rank = 0;
  while (rank < n && eig_max > 0.0 && eig.values(rank) > kRankCutoff * eig_max) {
    out.singular(rank) = std::sqrt(eig.values(rank));
    ++rank;
  }
  if (rank > 0) {
    out.left.leftCols(rank) = X * out.right.leftCols(rank);
    for (Index i = 0; i < rank; ++i) out.left.col(i) /= out.singular(i);
  }
  finish_orthonormal_basis(out.left, rank, eig.values, eig_max);
  out.rank = rank;
  return out;
}

ThinSvd thin_svd(const DataMatrix& X) { return thin_svd(X.values()); }

ThinSvd thin_svd(const Eigen::MatrixXd& X) {
  if (X.rows() < 1 || X.cols() < 1) {
    throw Error(ErrorKind::InvalidInput, "thin_svd needs a non-empty matrix");
  }
  require_finite(X, "input to thin_svd");
  if (X.rows() >= X.cols()) {
    return thin_svd_from_gram(X, gram_matrix(X));
  }
  const Eigen::MatrixXd Xt = X.transpose();
  ThinSvd t = thin_svd_from_gram(Xt, gram_matrix(Xt));
  ThinSvd out;
  out.singular = std::move(t.singular);
  out.left = std::move(t.right);
  out.right = std::move(t.left);
  out.rank = t.rank;
  const Eigen::VectorXd signs = canonicalize_signs(out.right);
  for (Index c = 0; c < out.left.cols(); ++c) out.left.col(c) *= signs(c);
  return out;
}

SeededRng::SeededRng(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id) {
  std::uint64_t a = master_seed;
  std::uint64_t b = stream_id ^ 0x6A09E667F3BCC909ULL;
  std::uint64_t x = splitmix64(a) ^ rotl(splitmix64(b), 29);
  for (auto& word : state_) word = splitmix64(x);
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

std::uint64_t SeededRng::next_u64() noexcept {
  auto& s = state_;
  const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
  const std::uint64_t t = s[1] << 17;
  s[2] ^= s[0];
  s[3] ^= s[1];
  s[1] ^= s[2];
  s[0] ^= s[3];
  s[2] ^= t;
  s[3] = rotl(s[3], 45);
  return result;
}

double SeededRng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t SeededRng::uniform_index(std::uint64_t bound) noexcept {
  if (bound <= 1) return 0;
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

double SeededRng::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * f;
  has_spare_ = true;
  return u * f;
}

DataMatrix sample_gaussian(SeededRng& rng, Index rows, Index cols) {
  if (rows < 1 || cols < 1) {
    throw Error(ErrorKind::InvalidInput, "sample_gaussian needs rows, cols >= 1");
  }
  Eigen::MatrixXd Z(rows, cols);
  double* p = Z.data();
  for (Index i = 0, total = rows * cols; i < total; ++i) p[i] = rng.normal();
  return DataMatrix(std::move(Z));
}

}  // namespace hdpca
