#include "hdpca/procrustes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hdpca {

namespace {

double residual(const Eigen::MatrixXd& W1, const Eigen::MatrixXd& W1_hat,
                const Eigen::VectorXd& scale, const Eigen::MatrixXd& R) {
  return (W1_hat - scale.asDiagonal() * (R.transpose() * W1)).norm();
}

// argmax_R tr(R^T N) over orthogonal R
Eigen::MatrixXd polar_factor(const Eigen::MatrixXd& N) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(N, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

void scale_step(const Eigen::MatrixXd& W1, const Eigen::MatrixXd& W1_hat, Eigen::VectorXd& scale,
                Eigen::MatrixXd& R) {
  const Eigen::MatrixXd rotated = R.transpose() * W1;
  for (Index i = 0; i < scale.size(); ++i) {
    double s = rotated.row(i).dot(W1_hat.row(i)) / rotated.row(i).squaredNorm();
    if (s < 0.0) {
      R.col(i) *= -1.0;
      s = -s;
    }
    scale(i) = std::max(s, kScaleFloor);
  }
}

double residual_true(const Eigen::MatrixXd& W1, const Eigen::MatrixXd& W1_hat,
                     const Eigen::VectorXd& scale, const Eigen::MatrixXd& R) {
  return (R.transpose() * W1 - scale.cwiseInverse().asDiagonal() * W1_hat).norm();
}

// ||R^T W1 - T W1_hat|| with T = S^-1; both block updates are exact.
void fit_true_form(const Eigen::MatrixXd& W1, const Eigen::MatrixXd& W1_hat, double tol,
                   Index max_iter, ProcrustesFit& out) {
  const Index m = W1.rows();
  const double floor = 1e-15 * W1.norm();
  double current = std::numeric_limits<double>::infinity();
  for (Index iter = 1; iter <= max_iter; ++iter) {
    const double start = current;

    const Eigen::VectorXd inv = out.scale.cwiseInverse();
    Eigen::MatrixXd R = polar_factor(W1 * (inv.asDiagonal() * W1_hat).transpose());
    double f = residual_true(W1, W1_hat, out.scale, R);
    if (f <= current) {
      out.rotation = R;
      current = f;
    }

    R = out.rotation;
    const Eigen::MatrixXd rotated = R.transpose() * W1;
    Eigen::VectorXd scale(m);
    for (Index i = 0; i < m; ++i) {
      double t = rotated.row(i).dot(W1_hat.row(i)) / W1_hat.row(i).squaredNorm();
      if (t < 0.0) {
        R.col(i) *= -1.0;
        t = -t;
      }
      scale(i) = 1.0 / std::max(t, kScaleFloor);
    }
    f = residual_true(W1, W1_hat, scale, R);
    if (f <= current) {
      out.scale = scale;
      out.rotation = R;
      current = f;
    }

    out.history.push_back(current);
    out.iters = iter;
    if (current <= floor) break;
    if (std::isfinite(start) && start - current <= tol * start) break;
  }
  out.objective = current;
}

}  // namespace

ProcrustesFit fit_scale_rotation(const ScoreMatrix& W1, const ScoreMatrix& W1_hat, double tol,
                                 Index max_iter, ProcrustesForm form) {
  return fit_scale_rotation(W1.values, W1_hat.values, tol, max_iter, form);
}

ProcrustesFit fit_scale_rotation(const Eigen::MatrixXd& W1, const Eigen::MatrixXd& W1_hat,
                                 double tol, Index max_iter, ProcrustesForm form) {
  const Index m = W1.rows();
  const Index n = W1.cols();
  if (W1_hat.rows() != m || W1_hat.cols() != n) {
    throw Error(ErrorKind::DimensionMismatch, "score matrices must have the same shape");
  }
  if (m < 1 || m >= n) throw Error(ErrorKind::InvalidInput, "Procrustes fit needs 1 <= m < n");
  if (!W1.allFinite() || !W1_hat.allFinite()) {
    throw Error(ErrorKind::InvalidInput, "scores must be finite");
  }
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(W1).singularValues();
  if (!(sv(m - 1) > 1e-12 * sv(0))) {
    throw Error(ErrorKind::DegenerateInput, "true scores are rank deficient");
  }

  if (form == ProcrustesForm::True && !(Eigen::JacobiSVD<Eigen::MatrixXd>(W1_hat)
                                             .singularValues()(m - 1) > 0.0)) {
    throw Error(ErrorKind::DegenerateInput, "fitted scores are rank deficient");
  }

  ProcrustesFit out;
  out.scale = Eigen::VectorXd::Ones(m);
  out.rotation = Eigen::MatrixXd::Identity(m, m);
  if (form == ProcrustesForm::True) {
    fit_true_form(W1, W1_hat, tol, max_iter, out);
    out.theta = m == 2 ? std::acos(std::clamp(out.rotation(0, 0), -1.0, 1.0))
                       : std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const double floor = 1e-15 * W1_hat.norm();
  double current = std::numeric_limits<double>::infinity();

  for (Index iter = 1; iter <= max_iter; ++iter) {
    const double start = current;

    // R step: repeated majorization steps, each non-increasing
    for (int inner = 0; inner < 20; ++inner) {
      const double s_max_sq = out.scale.array().square().maxCoeff();
      const Eigen::MatrixXd rotated = out.rotation.transpose() * W1;
      const Eigen::VectorXd shrink = (s_max_sq - out.scale.array().square()).matrix();
      const Eigen::MatrixXd target =
          out.scale.asDiagonal() * W1_hat + shrink.asDiagonal() * rotated;
      const Eigen::MatrixXd candidate = polar_factor(W1 * target.transpose());
      const double f = residual(W1, W1_hat, out.scale, candidate);
      if (!(f <= current)) break;
      const bool small_gain = current - f <= tol * current;
      out.rotation = candidate;
      current = f;
      if (small_gain) break;
    }

    // S step: exact per-row minimizer
    Eigen::VectorXd scale = out.scale;
    Eigen::MatrixXd rotation = out.rotation;
    scale_step(W1, W1_hat, scale, rotation);
    const double f = residual(W1, W1_hat, scale, rotation);
    if (f <= current) {
      out.scale = scale;
      out.rotation = rotation;
      current = f;
    }

    out.history.push_back(current);
    out.iters = iter;
    if (current <= floor) break;
    if (std::isfinite(start) && start - current <= tol * start) break;
  }

  out.objective = current;
  out.theta = m == 2 ? std::acos(std::clamp(out.rotation(0, 0), -1.0, 1.0))
                     : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace hdpca
