#include "hdpca/pca.hpp"

#include <cmath>
#include <string>

#include "hdpca/parallel.hpp"

namespace hdpca {

std::string_view to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::True: return "true";
    case ScoreKind::Sample: return "sample";
    case ScoreKind::Prediction: return "prediction";
    case ScoreKind::AdjustedSample: return "adjusted-sample";
    case ScoreKind::AdjustedPrediction: return "adjusted-prediction";
  }
  return "unknown";
}

ScoreMatrix::ScoreMatrix(Eigen::MatrixXd v, ScoreKind k) : values(std::move(v)), kind(k) {
  if (!values.allFinite()) throw Error(ErrorKind::InvalidInput, "scores must be finite");
}

PcaFit fit(const DataMatrix& X, bool center) {
  const Index d = X.rows();
  const Index n = X.cols();
  if (d < 2 || n < 2) throw Error(ErrorKind::InvalidInput, "PCA needs d >= 2 and n >= 2");

  PcaFit out;
  out.centered = center;
  out.col_mean = Eigen::VectorXd::Zero(d);
  ThinSvd svd;
  if (center) {
    out.col_mean = X.values().rowwise().mean();
    svd = thin_svd(Eigen::MatrixXd(X.values().colwise() - out.col_mean));
  } else {
    svd = thin_svd(X);
  }
  out.variances = svd.singular.array().square() / static_cast<double>(n);
  out.sample_scores = svd.singular.asDiagonal() * svd.right.transpose();
  out.directions = std::move(svd.left);
  out.right_vectors = std::move(svd.right);
  return out;
}

ScoreMatrix sample_scores(const PcaFit& fit, Index m) {
  if (m < 1 || m > fit.components()) {
    throw Error(ErrorKind::RankExceeded, "requested " + std::to_string(m) + " components, fit has " +
                                             std::to_string(fit.components()));
  }
  return ScoreMatrix(fit.sample_scores.topRows(m), ScoreKind::Sample);
}

ScoreMatrix predict_scores(const PcaFit& fit, const DataMatrix& X_new, Index m) {
  if (X_new.rows() != fit.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "new data has " + std::to_string(X_new.rows()) +
                                                  " rows, fit expects " + std::to_string(fit.dim()));
  }
  if (m < 1 || m > fit.components()) {
    throw Error(ErrorKind::RankExceeded, "requested more components than the fit holds");
  }
  const auto U = fit.directions.leftCols(m);
  if (fit.centered) {
    return ScoreMatrix(U.transpose() * (X_new.values().colwise() - fit.col_mean),
                       ScoreKind::Prediction);
  }
  return ScoreMatrix(U.transpose() * X_new.values(), ScoreKind::Prediction);
}

std::vector<PcaFit> loo_fits(const DataMatrix& X, Index m, bool center, std::size_t threads) {
  return loo_fits(X, m, center, fit(X, center), threads);
}

std::vector<PcaFit> loo_fits(const DataMatrix& X, Index m, bool center, const PcaFit& full,
                             std::size_t threads) {
  const Index d = X.rows();
  const Index n = X.cols();
  if (m < 1 || n < m + 2) {
    throw Error(ErrorKind::InvalidInput, "leave-one-out needs 1 <= m and n >= m + 2");
  }
  if (full.components() < m || full.dim() != d) {
    throw Error(ErrorKind::DimensionMismatch, "full fit does not match the data");
  }

  const Eigen::MatrixXd& data = X.values();
  const Eigen::MatrixXd gram = gram_matrix(data);
  const Eigen::VectorXd col_sum = data.rowwise().sum();

  std::vector<PcaFit> out(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t jj) {
    const Index j = static_cast<Index>(jj);
    const Index k = n - 1;
    std::vector<Index> keep;
    keep.reserve(static_cast<std::size_t>(k));
    for (Index c = 0; c < n; ++c) {
      if (c != j) keep.push_back(c);
    }
    Eigen::MatrixXd g(k, k);
    for (Index a = 0; a < k; ++a) {
      for (Index b = 0; b < k; ++b) g(a, b) = gram(keep[a], keep[b]);
    }
    if (center) {
      const Eigen::VectorXd row_mean = g.rowwise().mean();
      const double grand = row_mean.mean();
      for (Index a = 0; a < k; ++a) {
        for (Index b = 0; b < k; ++b) g(a, b) += grand - row_mean(a) - row_mean(b);
      }
      g = (0.5 * (g + g.transpose())).eval();
    }

    const SymEig eig = sym_eig(g, m);
    if (!(eig.values(m - 1) > kRankCutoff * eig.values(0))) {
      throw Error(ErrorKind::DegenerateInput, "leave-one-out data has rank below m");
    }

    PcaFit f;
    f.centered = center;
    f.col_mean = center ? Eigen::VectorXd((col_sum - data.col(j)) / static_cast<double>(k))
                        : Eigen::VectorXd::Zero(d);
    f.variances = eig.values / static_cast<double>(k);
    const Eigen::VectorXd sing = eig.values.cwiseSqrt();
    f.right_vectors = eig.vectors;

    Eigen::MatrixXd v_full = Eigen::MatrixXd::Zero(n, m);
    for (Index a = 0; a < k; ++a) v_full.row(keep[a]) = eig.vectors.row(a);
    f.directions = data * v_full;
    if (center) f.directions -= f.col_mean * eig.vectors.colwise().sum();
    for (Index c = 0; c < m; ++c) {
      f.directions.col(c) /= sing(c);
      if (f.directions.col(c).dot(full.directions.col(c)) < 0.0) {
        f.directions.col(c) *= -1.0;
        f.right_vectors.col(c) *= -1.0;
      }
    }
    f.sample_scores = sing.asDiagonal() * f.right_vectors.transpose();
    out[jj] = std::move(f);
  });
  return out;
}

Eigen::MatrixXd loo_prediction_scores(const std::vector<PcaFit>& loo, const DataMatrix& X,
                                      Index m) {
  const Index n = X.cols();
  if (static_cast<Index>(loo.size()) != n) {
    throw Error(ErrorKind::DimensionMismatch, "need one refit per observation");
  }
  Eigen::MatrixXd out(m, n);
  for (Index j = 0; j < n; ++j) {
    const PcaFit& f = loo[static_cast<std::size_t>(j)];
    if (f.components() < m || f.dim() != X.rows()) {
      throw Error(ErrorKind::DimensionMismatch, "refit does not match the data");
    }
    out.col(j) = f.directions.leftCols(m).transpose() * (X.values().col(j) - f.col_mean);
  }
  return out;
}

}  // namespace hdpca
