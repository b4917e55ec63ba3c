#pragma once

#include <vector>

#include "hdpca/pca.hpp"

namespace hdpca {

struct ProcrustesFit {
  Eigen::VectorXd scale;            // diagonal of S, all > 0
  Eigen::MatrixXd rotation;         // orthogonal R (det may be -1)
  double objective = 0.0;           // residual of the chosen form at the returned solution
  Index iters = 0;
  double theta = 0.0;               // acos(R(0,0)) when m == 2, NaN otherwise
  std::vector<double> history;      // objective after every iteration
};

inline constexpr double kScaleFloor = 1e-12;

/// Which side the residual is measured on.
///  Fitted: ||W1_hat - S R^T W1||_F, the regression of the fitted scores on
///          the rotated true scores.
///  True:   ||R^T W1 - S^-1 W1_hat||_F, the regression of the true scores on
///          the fitted ones. Attenuation makes its scales larger than the
///          Fitted ones when W1_hat is noisy.
enum class ProcrustesForm { Fitted, True };

/// Best diagonal-scale-plus-orthogonal alignment minimizing
/// ||W1_hat - S R^T W1||_F by block coordinate descent from S = I:
///  - R step: majorize the quadratic term by the largest s_i^2, which turns
///    the subproblem into an orthogonal Procrustes problem solved by one SVD
///    of W1 T^T with T = S W1_hat + (s_max^2 - S^2) R^T W1. With S a multiple
///    of I this is exactly the classical closed form (SVD of W1 W1_hat^T S).
///  - S step: s_i = <row_i(W1_hat), row_i(R^T W1)> / ||row_i(R^T W1)||^2,
///    a negative optimum flips column i of R instead.
/// For ProcrustesForm::True both steps are exact: R from one SVD of
/// W1 W1_hat^T S^-1, then 1/s_i = <row_i(R^T W1), row_i(W1_hat)> / ||row_i(W1_hat)||^2.
/// Both steps never increase the objective. Stops when the relative change
/// drops below `tol` or after `max_iter` iterations.
ProcrustesFit fit_scale_rotation(const ScoreMatrix& W1, const ScoreMatrix& W1_hat,
                                 double tol = 1e-10, Index max_iter = 1000,
                                 ProcrustesForm form = ProcrustesForm::Fitted);
ProcrustesFit fit_scale_rotation(const Eigen::MatrixXd& W1, const Eigen::MatrixXd& W1_hat,
                                 double tol = 1e-10, Index max_iter = 1000,
                                 ProcrustesForm form = ProcrustesForm::Fitted);

}  // namespace hdpca
