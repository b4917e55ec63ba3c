#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hdpca/bias.hpp"
#include "hdpca/procrustes.hpp"
#include "hdpca/simulate.hpp"

namespace hdpca {

enum class Estimator { Theory, Best, Asymptotic, Jackknife1, Jackknife2, Jackknife3, Lzw };

std::string_view to_string(Estimator e);
std::optional<Estimator> parse_estimator(std::string_view name);
std::vector<Estimator> all_estimators();

struct ExperimentSpec {
  ModelKind model = ModelKind::Spike;
  std::vector<double> sigma_sq{0.02, 0.01};  // spike model
  double beta = 0.3;                         // spike model
  double a = 0.15;                           // mixture model
  std::array<double, 3> probs{0.5, 0.3, 0.2};
  Index d = 5000;
  Index n = 50;
  Index n_test = 20;
  Index m = 2;
  Index reps = 100;
  std::uint64_t master_seed = 1;
  std::optional<bool> center;  // unset: centered for the mixture, raw for the spike model
  std::vector<Estimator> estimators = all_estimators();
  std::size_t threads = 0;
  bool random_frame = false;

  bool effective_center() const { return center.value_or(model == ModelKind::Mixture); }
  bool wants(Estimator e) const;
  void validate() const;
  std::string describe() const;
};

/// Data set of repetition `rep`: a pure function of (spec, rep).
Dataset make_dataset(const ExperimentSpec& spec, Index rep);

struct ReportRow {
  Index rep = 0;
  std::uint64_t seed = 0;
  bool excluded = false;
  std::string note;
  std::vector<double> values;
};

struct Aggregate {
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<Index> count;  // non-NaN values per column among used rows
  Index used = 0;
  Index excluded = 0;
};

/// Per-repetition rows (sorted by rep) plus column means and standard
/// deviations over non-excluded rows. NaN cells are skipped column-wise.
struct ExperimentReport {
  std::string title;
  std::vector<std::string> columns;
  std::vector<ReportRow> rows;
  Aggregate aggregate;
  std::vector<std::pair<std::string, std::string>> metadata;

  Index column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  double mean(std::string_view name) const;
  double sd(std::string_view name) const;
  /// Values of a column over non-excluded rows, NaN included.
  std::vector<double> values(std::string_view name) const;
  void finalize();
};

Aggregate aggregate_rows(std::size_t columns, const std::vector<ReportRow>& rows);

/// Scaling-factor table: oracle rho and the Procrustes fit (true-score
/// residual form) always, plus the requested estimators. Repetitions where an
/// estimator reports a degenerate signal are kept as excluded rows.
ExperimentReport run_bias_table(const ExperimentSpec& spec);

/// Behaviour of the k-th (1-based, k > m) component: sample and prediction
/// score variances and their correlations with the true scores.
ExperimentReport run_noise_component_table(const ExperimentSpec& spec, Index k);

/// |r(w-hat_k, w_k)| and the prediction-score correlation next to their
/// large-d limits, plus rotation angles and rho against the Procrustes fit.
ExperimentReport run_correlation_figure(const ExperimentSpec& spec);

/// Residuals ||W1_hat - S R^T W1||_F and ||W*_hat - S^-1 R^T W*||_F (scaled
/// scores, oracle S and R) and |rho-tilde_k - rho_k| per repetition.
ExperimentReport run_convergence(const ExperimentSpec& spec);

struct ScorePairRow {
  Index rep = 0;
  bool test = false;
  Index obs = 0;
  std::array<double, 2> truth{};
  std::array<double, 2> estimate{};
  std::array<double, 2> adjusted{};
};

struct ScorePairSummary {
  Index rep = 0;
  Eigen::VectorXd rho_used;
  Eigen::VectorXd rho_theory;
  double theta_theory = 0.0;
  double rms_sample = 0.0;
  double rms_sample_adjusted = 0.0;
  double rms_prediction = 0.0;
  double rms_prediction_adjusted = 0.0;
};

struct ScorePairTable {
  Estimator adjusted_with = Estimator::Asymptotic;
  std::vector<ScorePairRow> rows;
  std::vector<ScorePairSummary> summaries;
};

/// Long-format true / estimated / adjusted score pairs for m = 2. Estimated
/// scores are sign-aligned with the truth (PCA signs are arbitrary).
/// `rho_override` replaces the estimated factors.
ScorePairTable run_score_pairs(const ExperimentSpec& spec,
                               Estimator adjust_with = Estimator::Asymptotic,
                               const std::optional<Eigen::VectorXd>& rho_override = std::nullopt);

/// One-vs-rest least squares on +-1 targets with a fixed ridge on
/// standardized inputs; the intercept is not penalized.
struct LinearClassifier {
  Eigen::MatrixXd weights;  // (m + 1) x G, row 0 is the intercept
  std::vector<int> classes;
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_scale;

  std::vector<int> predict(const Eigen::MatrixXd& scores) const;
  double error_percent(const Eigen::MatrixXd& scores, const std::vector<int>& labels) const;
};

inline constexpr double kClassifierRidge = 1e-3;

LinearClassifier train_classifier(const ScoreMatrix& scores, const std::vector<int>& labels,
                                  double ridge = kClassifierRidge);

struct ClassificationErrors {
  double train_unadjusted = 0.0;
  double test_unadjusted = 0.0;
  double train_adjusted = 0.0;
  double test_adjusted = 0.0;
};

/// Trains on sample scores and tests on prediction scores, once as given and
/// once after adjusting both with `factors`.
ClassificationErrors classification_arms(const ScoreMatrix& sample, const ScoreMatrix& prediction,
                                         const std::vector<int>& train_labels,
                                         const std::vector<int>& test_labels,
                                         const BiasFactors& factors);

/// Misclassification percentages for the mixture model, unadjusted vs
/// adjusted scores. Adjusts with the first data-side estimator in
/// spec.estimators (asymptotic when none is listed).
ExperimentReport run_classification_demo(const ExperimentSpec& spec);

/// Presets for the reproduced tables and figures.
namespace presets {
ExperimentSpec spike(double beta, Index d, Index n);
ExperimentSpec mixture(Index d, Index n);
/// Spike beta in {0.3, 0.5} and mixture, each at (d, n) in
/// {(5000, 50), (10000, 50), (10000, 100), (20000, 100)}.
std::vector<ExperimentSpec> bias_table_grid();
ExperimentSpec noise_component();  // spike beta 0.3, d 5000, n 50
ExperimentSpec score_pairs();      // spike beta 0.3, d 10000, n 50, 20 test points
ExperimentSpec correlation();      // spike beta 0.3, d 5000, n 50
ExperimentSpec classification();   // mixture, d 5000, n = n_test = 100
}  // namespace presets

}  // namespace hdpca
