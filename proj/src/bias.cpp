#include "hdpca/bias.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hdpca {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Theory: return "theory";
    case Provenance::Asymptotic: return "asymptotic";
    case Provenance::Jackknife1: return "jackknife1";
    case Provenance::Jackknife2: return "jackknife2";
    case Provenance::Jackknife3: return "jackknife3";
    case Provenance::Lzw: return "lzw";
    case Provenance::Procrustes: return "procrustes";
  }
  return "unknown";
}

ScoreCov score_cov(const ScoreMatrix& W1) {
  const Index m = W1.comps();
  if (m < 1 || m >= W1.cols()) {
    throw Error(ErrorKind::InvalidInput, "score covariance needs 1 <= m < n");
  }
  ScoreCov out;
  out.matrix = gram_matrix(W1.values.transpose());
  SymEig eig = sym_eig(out.matrix);
  out.eigenvalues = std::move(eig.values);
  out.rotation = std::move(eig.vectors);
  return out;
}

BiasFactors rho_theory(const ScoreCov& cov, double tau_sq) {
  if (!(tau_sq >= 0.0)) throw Error(ErrorKind::InvalidInput, "tau^2 must be non-negative");
  const Index m = cov.eigenvalues.size();
  BiasFactors out;
  out.provenance = Provenance::Theory;
  out.rho.resize(m);
  for (Index k = 0; k < m; ++k) {
    const double lam = cov.eigenvalues(k);
    if (!(lam > 0.0)) {
      throw Error(ErrorKind::DegenerateSignal,
                  "eigenvalue " + std::to_string(k + 1) + " of the score covariance is not positive");
    }
    out.rho(k) = std::sqrt(1.0 + tau_sq / lam);
  }
  out.rotation = cov.rotation;
  return out;
}

double tau_sq_estimate(const PcaFit& fit, Index m, Index d) {
  const Index n = fit.observations();
  if (m < 1 || m >= n) {
    throw Error(ErrorKind::InvalidInput,
                "m must be smaller than n: the noise level averages the n - m trailing eigenvalues");
  }
  if (m > fit.components()) throw Error(ErrorKind::RankExceeded, "fit has fewer than m components");
  // centering removes one dimension: only n - 1 eigenvalues carry noise
  const Index last = std::min(fit.centered ? n - 1 : n, fit.components());
  if (last <= m) {
    throw Error(ErrorKind::InvalidInput, "centered fit needs m < n - 1 to estimate the noise level");
  }
  const double tail = fit.variances.segment(m, last - m).sum();
  return tail / static_cast<double>(last - m) * static_cast<double>(n) / static_cast<double>(d);
}

BiasFactors rho_asymptotic(const PcaFit& fit, Index m, Index d) {
  const double tau_sq = tau_sq_estimate(fit, m, d);
  const double scale = static_cast<double>(fit.observations()) / static_cast<double>(d);
  BiasFactors out;
  out.provenance = Provenance::Asymptotic;
  out.rho.resize(m);
  for (Index i = 0; i < m; ++i) {
    const double signal = scale * fit.variances(i) - tau_sq;
    if (!(signal > 0.0)) {
      throw Error(ErrorKind::DegenerateSignal,
                  "component " + std::to_string(i + 1) + " is not separable from the noise level");
    }
    out.rho(i) = std::sqrt(1.0 + tau_sq / signal);
  }
  return out;
}

namespace {

double median_of(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

Provenance jackknife_provenance(JackknifeVariant v) {
  switch (v) {
    case JackknifeVariant::MeanOfRoots: return Provenance::Jackknife1;
    case JackknifeVariant::RootOfSums: return Provenance::Jackknife2;
    case JackknifeVariant::RootOfSquares: return Provenance::Jackknife3;
  }
  return Provenance::Jackknife1;
}

}  // namespace

BiasFactors rho_jackknife(const PcaFit& fit, const std::vector<PcaFit>& loo, const DataMatrix& X,
                          Index m, JackknifeVariant variant, std::vector<Index>* excluded) {
  return rho_jackknife(fit, loo_prediction_scores(loo, X, m), m, variant, excluded);
}

BiasFactors rho_jackknife(const PcaFit& fit, const Eigen::MatrixXd& loo_scores, Index m,
                          JackknifeVariant variant, std::vector<Index>* excluded) {
  const Index n = fit.observations();
  if (m < 1 || m > fit.components() || loo_scores.rows() < m || loo_scores.cols() != n) {
    throw Error(ErrorKind::DimensionMismatch, "leave-one-out scores do not match the fit");
  }
  const Eigen::MatrixXd full = fit.sample_scores.topRows(m).cwiseAbs();
  const Eigen::MatrixXd held = loo_scores.topRows(m).cwiseAbs();

  BiasFactors out;
  out.provenance = jackknife_provenance(variant);
  out.rho.resize(m);
  if (excluded) excluded->assign(static_cast<std::size_t>(m), 0);

  for (Index i = 0; i < m; ++i) {
    double value = 0.0;
    switch (variant) {
      case JackknifeVariant::MeanOfRoots: {
        std::vector<double> mags;
        mags.reserve(static_cast<std::size_t>(n));
        for (Index j = 0; j < n; ++j) mags.push_back(held(i, j));
        const double delta = 1e-8 * median_of(mags);
        double sum = 0.0;
        Index used = 0;
        for (Index j = 0; j < n; ++j) {
          if (held(i, j) < delta || held(i, j) == 0.0) continue;
          sum += std::sqrt(full(i, j) / held(i, j));
          ++used;
        }
        if (excluded) (*excluded)[static_cast<std::size_t>(i)] = n - used;
        if (used == 0) {
          throw Error(ErrorKind::DegenerateScore,
                      "every leave-one-out score of component " + std::to_string(i + 1) + " is ~0");
        }
        value = sum / static_cast<double>(used);
        break;
      }
      case JackknifeVariant::RootOfSums: {
        const double den = held.row(i).sum();
        if (!(den > 0.0)) throw Error(ErrorKind::DegenerateScore, "leave-one-out scores sum to 0");
        value = std::sqrt(full.row(i).sum() / den);
        break;
      }
      case JackknifeVariant::RootOfSquares: {
        const double den = held.row(i).squaredNorm();
        if (!(den > 0.0)) throw Error(ErrorKind::DegenerateScore, "leave-one-out scores sum to 0");
        value = std::sqrt(std::sqrt(full.row(i).squaredNorm() / den));
        break;
      }
    }
    out.rho(i) = value;
  }
  return out;
}

BiasFactors rho_lzw(const PcaFit& fit, Index m, Index d) {
  const double tau_sq = tau_sq_estimate(fit, m, d);
  const double gamma = static_cast<double>(d) / static_cast<double>(fit.observations());
  BiasFactors out;
  out.provenance = Provenance::Lzw;
  out.rho.resize(m);
  for (Index i = 0; i < m; ++i) {
    if (tau_sq == 0.0) {
      out.rho(i) = 1.0;
      continue;
    }
    const double sample = fit.variances(i) / tau_sq;
    const double b = sample + 1.0 - gamma;
    const double disc = b * b - 4.0 * sample;
    if (!(b > 0.0) || !(disc >= 0.0)) {
      throw Error(ErrorKind::DegenerateSignal,
                  "component " + std::to_string(i + 1) + " is below the detectability threshold");
    }
    const double spike = 0.5 * (b + std::sqrt(disc));
    if (!(spike > 1.0)) {
      throw Error(ErrorKind::DegenerateSignal,
                  "component " + std::to_string(i + 1) + " is below the detectability threshold");
    }
    out.rho(i) = std::sqrt((spike + gamma - 1.0) / (spike - 1.0));
  }
  return out;
}

ScoreMatrix adjust(const ScoreMatrix& scores, const BiasFactors& factors) {
  if (scores.comps() != factors.comps()) {
    throw Error(ErrorKind::DimensionMismatch, "score rows and factor count differ");
  }
  switch (scores.kind) {
    case ScoreKind::Sample:
      return ScoreMatrix(factors.rho.cwiseInverse().asDiagonal() * scores.values,
                         ScoreKind::AdjustedSample);
    case ScoreKind::Prediction:
      return ScoreMatrix(factors.rho.asDiagonal() * scores.values, ScoreKind::AdjustedPrediction);
    default:
      throw Error(ErrorKind::InvalidKind,
                  "only sample or prediction scores can be adjusted, got " +
                      std::string(to_string(scores.kind)));
  }
}

TheoryLimits theory_limits(const OracleTruth& oracle, const ScoreCov& cov,
                           const Eigen::VectorXd& population_eigs) {
  const Index m = cov.eigenvalues.size();
  const Index d = population_eigs.size();
  if (static_cast<Index>(oracle.sigma_sq.size()) != m || d <= m) {
    throw Error(ErrorKind::DimensionMismatch, "oracle and score covariance disagree on m");
  }
  const Eigen::MatrixXd& R = cov.rotation;  // v_kj = R(j, k)
  const Eigen::VectorXd& lam = cov.eigenvalues;
  const Eigen::VectorXd sig = Eigen::Map<const Eigen::VectorXd>(oracle.sigma_sq.data(), m);

  TheoryLimits out;
  out.tau_sq = oracle.tau_sq;
  out.upsilon_sq = population_eigs.tail(d - m).squaredNorm() / static_cast<double>(d);
  out.zeta.resize(m, m);
  out.zeta_bar.resize(m, m);
  out.corr_sample.resize(m, m);
  out.corr_prediction.resize(m, m);
  for (Index k = 0; k < m; ++k) {
    double pred_den = 0.0;
    for (Index l = 0; l < m; ++l) pred_den += R(l, k) * R(l, k) * sig(l);
    for (Index j = 0; j < m; ++j) {
      double den = 0.0;
      for (Index l = 0; l < m; ++l) den += R(j, l) * R(j, l) * lam(l);
      out.zeta(k, j) = lam(k) / den;
      out.zeta_bar(k, j) = sig(j) / pred_den;
      out.corr_sample(k, j) = std::clamp(R(j, k) * std::sqrt(out.zeta(k, j)), -1.0, 1.0);
      out.corr_prediction(k, j) = std::clamp(R(j, k) * std::sqrt(out.zeta_bar(k, j)), -1.0, 1.0);
    }
  }
  out.eps_var.resize(m);
  out.inner_prod_limits.resize(m);
  out.eigval_limits.resize(m);
  out.xi.resize(m);
  for (Index k = 0; k < m; ++k) {
    out.eps_var(k) = out.upsilon_sq / (lam(k) + out.tau_sq);
    out.inner_prod_limits(k) = R(k, k) / std::sqrt(1.0 + out.tau_sq / lam(k));
    out.eigval_limits(k) = lam(k) + out.tau_sq;
    double other = 0.0;
    for (Index l = 0; l < m; ++l) {
      if (l != k) other += R(k, l) * R(k, l) * lam(l);
    }
    out.xi(k) = other / (R(k, k) * R(k, k) * lam(k));
  }
  out.eps_var_noise_avg = out.upsilon_sq / out.tau_sq;
  out.noise_eigval_limit = out.tau_sq;
  return out;
}

std::vector<double> eigen_inflation(const std::vector<double>& sigma_sq, double tau_sq, Index n) {
  if (n < 1) throw Error(ErrorKind::InvalidInput, "n must be positive");
  const std::size_t m = sigma_sq.size();
  double scale = 0.0;
  for (double s : sigma_sq) scale = std::max(scale, std::abs(s));
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(sigma_sq[i] > 0.0)) throw Error(ErrorKind::InvalidInput, "sigma^2 must be positive");
    double cross = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const double gap = sigma_sq[i] - sigma_sq[j];
      if (std::abs(gap) <= 1e-12 * scale) {
        throw Error(ErrorKind::DegenerateSpectrum, "spike variances must be distinct");
      }
      cross += sigma_sq[j] / gap;
    }
    out[i] = 1.0 + (cross + tau_sq / sigma_sq[i]) / static_cast<double>(n);
  }
  return out;
}

Eigen::MatrixXd epsilon_decomposition(const PcaFit& fit, const OracleTruth& oracle,
                                      const DataMatrix& X_new) {
  if (X_new.rows() != fit.dim() || oracle.dim() != fit.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "fit, oracle and data dimensions differ");
  }
  const Eigen::MatrixXd pred = predict_scores(fit, X_new, fit.components()).values;
  Eigen::MatrixXd truth = oracle.directions.transpose() * X_new.values();
  if (oracle.population_mean.size() > 0) {
    truth.colwise() -= oracle.directions.transpose() * oracle.population_mean;
  }
  const Eigen::MatrixXd inner = fit.directions.transpose() * oracle.directions;
  return pred - inner * truth;
}

Eigen::MatrixXd align_rotation(const Eigen::MatrixXd& rotation, const Eigen::MatrixXd& W1,
                               const Eigen::MatrixXd& W1_hat) {
  Eigen::MatrixXd R = rotation;
  const Eigen::MatrixXd rotated = R.transpose() * W1;
  for (Index k = 0; k < R.cols(); ++k) {
    if (rotated.row(k).dot(W1_hat.row(k)) < 0.0) R.col(k) *= -1.0;
  }
  return R;
}

double r_uncentered(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                    const Eigen::Ref<const Eigen::RowVectorXd>& y) {
  return x.dot(y) / std::sqrt(x.squaredNorm() * y.squaredNorm());
}

double pearson(const Eigen::Ref<const Eigen::RowVectorXd>& x,
               const Eigen::Ref<const Eigen::RowVectorXd>& y) {
  const Eigen::RowVectorXd xc = x.array() - x.mean();
  const Eigen::RowVectorXd yc = y.array() - y.mean();
  return r_uncentered(xc, yc);
}

double sample_variance(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  const double mean = x.mean();
  return (x.array() - mean).square().sum() / static_cast<double>(x.size() - 1);
}

}  // namespace hdpca
