#include "hdpca/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "hdpca/parallel.hpp"

namespace hdpca {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::pair<Estimator, std::string_view> kEstimatorNames[] = {
    {Estimator::Theory, "theory"},         {Estimator::Best, "best"},
    {Estimator::Asymptotic, "asymptotic"}, {Estimator::Jackknife1, "jackknife1"},
    {Estimator::Jackknife2, "jackknife2"}, {Estimator::Jackknife3, "jackknife3"},
    {Estimator::Lzw, "lzw"},
};

bool is_data_side(Estimator e) { return e != Estimator::Theory && e != Estimator::Best; }

// Shortest text that reads back as the same double.
std::string shortest(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string indexed(std::string_view base, Index k) {
  return std::string(base) + "_" + std::to_string(k + 1);
}

// Everything one repetition needs, with the expensive optional parts cached.
struct RepFit {
  Dataset data;
  PcaFit pca;
  Index m = 0;
  double inv_sqrt_d = 0.0;
  Eigen::MatrixXd W1;      // scaled true scores, rows centered for centered fits
  Eigen::MatrixXd W1_hat;  // scaled sample scores
  std::optional<ScoreCov> cov;
  std::optional<ProcrustesFit> best;
  std::optional<Eigen::MatrixXd> loo_scores;

  RepFit(const ExperimentSpec& spec, Index rep)
      : data(make_dataset(spec, rep)), pca(fit(data.train, spec.effective_center())), m(spec.m) {
    inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(data.train.rows()));
    W1 = data.oracle.scaled_scores;
    if (pca.centered) W1.colwise() -= W1.rowwise().mean().eval();
    W1_hat = inv_sqrt_d * pca.sample_scores.topRows(m);
  }

  const ScoreCov& score_covariance() {
    if (!cov) cov = score_cov(ScoreMatrix(W1, ScoreKind::True));
    return *cov;
  }

  const ProcrustesFit& procrustes() {
    if (!best) best = fit_scale_rotation(W1, W1_hat, 1e-10, 1000, ProcrustesForm::True);
    return *best;
  }

  const Eigen::MatrixXd& loo() {
    if (!loo_scores) {
      const auto fits = loo_fits(data.train, m, pca.centered, pca, 1);
      loo_scores = loo_prediction_scores(fits, data.train, m);
    }
    return *loo_scores;
  }

  // Theory rotation with columns aligned to the fitted scores.
  Eigen::MatrixXd theory_rotation() {
    return align_rotation(score_covariance().rotation, W1, W1_hat);
  }

  BiasFactors factors(Estimator e) {
    const Index d = data.train.rows();
    switch (e) {
      case Estimator::Theory: return rho_theory(score_covariance(), data.oracle.tau_sq);
      case Estimator::Best: {
        const ProcrustesFit& p = procrustes();
        return BiasFactors{p.scale, p.rotation, Provenance::Procrustes};
      }
      case Estimator::Asymptotic: return rho_asymptotic(pca, m, d);
      case Estimator::Jackknife1:
        return rho_jackknife(pca, loo(), m, JackknifeVariant::MeanOfRoots);
      case Estimator::Jackknife2:
        return rho_jackknife(pca, loo(), m, JackknifeVariant::RootOfSums);
      case Estimator::Jackknife3:
        return rho_jackknife(pca, loo(), m, JackknifeVariant::RootOfSquares);
      case Estimator::Lzw: return rho_lzw(pca, m, d);
    }
    throw Error(ErrorKind::InvalidInput, "unknown estimator");
  }
};

bool is_degenerate(const Error& e) {
  return e.kind() == ErrorKind::DegenerateSignal || e.kind() == ErrorKind::DegenerateScore;
}

void flag(ReportRow& row, std::string_view what, const Error& e) {
  row.excluded = true;
  if (!row.note.empty()) row.note += "; ";
  row.note += std::string(what) + ": " + e.what();
}

double theta_of(const Eigen::MatrixXd& R) {
  return R.rows() == 2 ? std::acos(std::clamp(R(0, 0), -1.0, 1.0)) : kNaN;
}

template <class Body>
ExperimentReport run_reps(const ExperimentSpec& spec, std::string title,
                          std::vector<std::string> columns, Body body) {
  spec.validate();
  ExperimentReport report;
  report.title = std::move(title);
  report.columns = std::move(columns);
  report.rows.resize(static_cast<std::size_t>(spec.reps));
  parallel_for(static_cast<std::size_t>(spec.reps), spec.threads, [&](std::size_t r) {
    ReportRow row;
    row.rep = static_cast<Index>(r);
    row.seed = spec.master_seed;
    row.values.assign(report.columns.size(), kNaN);
    body(row);
    report.rows[r] = std::move(row);
  });
  report.metadata = {{"experiment", report.title},
                     {"config", spec.describe()},
                     {"rng", std::string(SeededRng::kAlgorithm)}};
  report.finalize();
  return report;
}

// Column index lookup used while filling rows.
class Columns {
 public:
  void add(std::string name) {
    index_[name] = static_cast<Index>(names_.size());
    names_.push_back(std::move(name));
  }
  Index operator[](const std::string& name) const { return index_.at(name); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, Index> index_;
};

}  // namespace

std::string_view to_string(Estimator e) {
  for (const auto& [value, name] : kEstimatorNames) {
    if (value == e) return name;
  }
  return "unknown";
}

std::optional<Estimator> parse_estimator(std::string_view name) {
  for (const auto& [value, label] : kEstimatorNames) {
    if (label == name) return value;
  }
  if (name == "procrustes") return Estimator::Best;
  if (name == "jackknife") return Estimator::Jackknife1;
  return std::nullopt;
}

std::vector<Estimator> all_estimators() {
  std::vector<Estimator> out;
  for (const auto& entry : kEstimatorNames) out.push_back(entry.first);
  return out;
}

bool ExperimentSpec::wants(Estimator e) const {
  return std::find(estimators.begin(), estimators.end(), e) != estimators.end();
}

void ExperimentSpec::validate() const {
  if (reps < 1) throw Error(ErrorKind::InvalidSpec, "reps must be at least 1");
  if (estimators.empty()) throw Error(ErrorKind::InvalidSpec, "no estimators requested");
  if (m < 1 || m >= n) throw Error(ErrorKind::InvalidSpec, "need 1 <= m < n");
  if (n_test < 1) throw Error(ErrorKind::InvalidSpec, "n_test must be at least 1");
  if (model == ModelKind::Spike) {
    if (static_cast<Index>(sigma_sq.size()) != m) {
      throw Error(ErrorKind::InvalidSpec, "spike model needs one sigma^2 per component");
    }
  } else if (m != 2) {
    throw Error(ErrorKind::InvalidSpec, "the three-group mixture has exactly m = 2 spikes");
  }
}

std::string ExperimentSpec::describe() const {
  std::ostringstream os;
  os << "model=" << (model == ModelKind::Spike ? "spike" : "mixture") << " d=" << d << " n=" << n
     << " n_test=" << n_test << " m=" << m << " reps=" << reps << " seed=" << master_seed
     << " center=" << (effective_center() ? "true" : "false");
  if (model == ModelKind::Spike) {
    os << " beta=" << shortest(beta) << " sigma_sq=";
    for (std::size_t i = 0; i < sigma_sq.size(); ++i) os << (i ? ";" : "") << shortest(sigma_sq[i]);
    if (random_frame) os << " random_frame=true";
  } else {
    os << " a=" << shortest(a) << " probs=" << shortest(probs[0]) << ";" << shortest(probs[1])
       << ";" << shortest(probs[2]);
  }
  os << " estimators=";
  for (std::size_t i = 0; i < estimators.size(); ++i) {
    os << (i ? ";" : "") << to_string(estimators[i]);
  }
  return os.str();
}

Dataset make_dataset(const ExperimentSpec& spec, Index rep) {
  if (spec.model == ModelKind::Spike) {
    SpikeSpec s;
    s.d = spec.d;
    s.n = spec.n;
    s.m = spec.m;
    s.sigma_sq = spec.sigma_sq;
    s.beta = spec.beta;
    s.seed = spec.master_seed;
    s.replicate = static_cast<std::uint64_t>(rep);
    s.random_frame = spec.random_frame;
    return gen_spike(s, spec.n_test);
  }
  MixtureSpec s;
  s.d = spec.d;
  s.n = spec.n;
  s.a = spec.a;
  s.probs = spec.probs;
  s.seed = spec.master_seed;
  s.replicate = static_cast<std::uint64_t>(rep);
  return gen_mixture(s, spec.n_test);
}

Index ExperimentReport::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<Index>(i);
  }
  throw Error(ErrorKind::InvalidInput, "no column named " + std::string(name));
}

bool ExperimentReport::has_column(std::string_view name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

double ExperimentReport::mean(std::string_view name) const {
  return aggregate.mean[static_cast<std::size_t>(column(name))];
}

double ExperimentReport::sd(std::string_view name) const {
  return aggregate.sd[static_cast<std::size_t>(column(name))];
}

std::vector<double> ExperimentReport::values(std::string_view name) const {
  const auto c = static_cast<std::size_t>(column(name));
  std::vector<double> out;
  for (const auto& row : rows) {
    if (!row.excluded) out.push_back(row.values[c]);
  }
  return out;
}

void ExperimentReport::finalize() {
  std::sort(rows.begin(), rows.end(),
            [](const ReportRow& x, const ReportRow& y) { return x.rep < y.rep; });
  aggregate = aggregate_rows(columns.size(), rows);
}

Aggregate aggregate_rows(std::size_t columns, const std::vector<ReportRow>& rows) {
  Aggregate agg;
  agg.mean.assign(columns, kNaN);
  agg.sd.assign(columns, kNaN);
  agg.count.assign(columns, 0);
  for (const auto& row : rows) (row.excluded ? agg.excluded : agg.used) += 1;
  for (std::size_t c = 0; c < columns; ++c) {
    double sum = 0.0;
    Index count = 0;
    for (const auto& row : rows) {
      if (row.excluded || std::isnan(row.values[c])) continue;
      sum += row.values[c];
      ++count;
    }
    agg.count[c] = count;
    if (count == 0) continue;
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (const auto& row : rows) {
      if (row.excluded || std::isnan(row.values[c])) continue;
      ss += (row.values[c] - mean) * (row.values[c] - mean);
    }
    agg.mean[c] = mean;
    agg.sd[c] = count > 1 ? std::sqrt(ss / static_cast<double>(count - 1)) : 0.0;
  }
  return agg;
}

ExperimentReport run_bias_table(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<Estimator> order{Estimator::Theory, Estimator::Best};
  for (Estimator e : spec.estimators) {
    if (is_data_side(e) && std::find(order.begin(), order.end(), e) == order.end()) {
      order.push_back(e);
    }
  }
  Columns cols;
  for (Estimator e : order) {
    for (Index k = 0; k < spec.m; ++k) cols.add(indexed(to_string(e), k));
  }
  if (spec.m == 2) {
    cols.add("theta_theory");
    cols.add("theta_best");
  }

  return run_reps(spec, "bias_table", cols.names(), [&](ReportRow& row) {
    RepFit rf(spec, row.rep);
    for (Estimator e : order) {
      try {
        const BiasFactors f = rf.factors(e);
        for (Index k = 0; k < spec.m; ++k) {
          row.values[cols[indexed(to_string(e), k)]] = f.rho(k);
        }
      } catch (const Error& err) {
        if (!is_degenerate(err)) throw;
        flag(row, to_string(e), err);
      }
    }
    if (spec.m == 2) {
      row.values[cols["theta_theory"]] = theta_of(rf.theory_rotation());
      row.values[cols["theta_best"]] = rf.procrustes().theta;
    }
  });
}

ExperimentReport run_noise_component_table(const ExperimentSpec& spec, Index k) {
  spec.validate();
  if (spec.model != ModelKind::Spike) {
    throw Error(ErrorKind::InvalidSpec, "noise components are only defined for the spike model");
  }
  if (k <= spec.m || k > spec.n - 1) {
    throw Error(ErrorKind::InvalidSpec, "component index must satisfy m < k < n");
  }
  if (spec.n_test < 2) throw Error(ErrorKind::InvalidSpec, "need at least 2 test points");
  const std::vector<std::string> columns{"sample_var", "pred_var",     "sample_corr",
                                         "pred_corr",  "pop_var",      "pred_var_oracle"};
  const Index c = k - 1;
  ExperimentReport report = run_reps(spec, "noise_component_" + std::to_string(k), columns,
                                     [&](ReportRow& row) {
    const Dataset ds = make_dataset(spec, row.rep);
    const PcaFit pca = fit(ds.train, spec.effective_center());
    const Eigen::RowVectorXd sample = pca.sample_scores.row(c);
    const Eigen::RowVectorXd pred = predict_scores(pca, ds.test, k).values.row(c);
    const Eigen::RowVectorXd truth = ds.oracle.true_scores_for(ds.train, c);
    const Eigen::RowVectorXd truth_test = ds.oracle.true_scores_for(ds.test, c);
    row.values = {sample_variance(sample),
                  sample_variance(pred),
                  r_uncentered(sample, truth),
                  pearson(pred, truth_test),
                  ds.oracle.population_variance(c),
                  ds.oracle.quadratic_form(pca.directions.col(c))};
  });
  report.metadata.emplace_back("component", std::to_string(k));
  return report;
}

ExperimentReport run_correlation_figure(const ExperimentSpec& spec) {
  spec.validate();
  Columns cols;
  for (Index k = 0; k < spec.m; ++k) {
    cols.add(indexed("r_sample", k));
    cols.add(indexed("limit_sample", k));
    cols.add(indexed("r_pred", k));
    cols.add(indexed("limit_pred", k));
    cols.add(indexed("rho_theory", k));
    cols.add(indexed("rho_best", k));
  }
  if (spec.m == 2) {
    cols.add("theta_theory");
    cols.add("theta_best");
  }
  return run_reps(spec, "correlation", cols.names(), [&](ReportRow& row) {
    RepFit rf(spec, row.rep);
    const Eigen::MatrixXd pred = predict_scores(rf.pca, rf.data.test, spec.m).values;
    const Eigen::MatrixXd& truth_test = rf.data.oracle_test.true_scores;
    const ScoreCov& cov = rf.score_covariance();
    const TheoryLimits lim = theory_limits(rf.data.oracle, cov, rf.data.oracle.population_eigs);
    const BiasFactors theory = rho_theory(cov, rf.data.oracle.tau_sq);
    const ProcrustesFit& best = rf.procrustes();
    for (Index k = 0; k < spec.m; ++k) {
      row.values[cols[indexed("r_sample", k)]] =
          std::abs(r_uncentered(rf.W1_hat.row(k), rf.W1.row(k)));
      row.values[cols[indexed("limit_sample", k)]] = std::abs(lim.corr_sample(k, k));
      row.values[cols[indexed("r_pred", k)]] = std::abs(pearson(pred.row(k), truth_test.row(k)));
      row.values[cols[indexed("limit_pred", k)]] = std::abs(lim.corr_prediction(k, k));
      row.values[cols[indexed("rho_theory", k)]] = theory.rho(k);
      row.values[cols[indexed("rho_best", k)]] = best.scale(k);
    }
    if (spec.m == 2) {
      row.values[cols["theta_theory"]] = theta_of(rf.theory_rotation());
      row.values[cols["theta_best"]] = best.theta;
    }
  });
}

ExperimentReport run_convergence(const ExperimentSpec& spec) {
  spec.validate();
  Columns cols;
  cols.add("resid_sample");
  cols.add("resid_pred");
  for (Index k = 0; k < spec.m; ++k) {
    cols.add(indexed("rho_theory", k));
    cols.add(indexed("rho_asymptotic", k));
    cols.add(indexed("abs_err", k));
  }
  return run_reps(spec, "convergence", cols.names(), [&](ReportRow& row) {
    RepFit rf(spec, row.rep);
    const BiasFactors theory = rho_theory(rf.score_covariance(), rf.data.oracle.tau_sq);
    const Eigen::MatrixXd R = rf.theory_rotation();
    const Eigen::MatrixXd pred =
        rf.inv_sqrt_d * predict_scores(rf.pca, rf.data.test, spec.m).values;
    const Eigen::MatrixXd& W_star = rf.data.oracle_test.scaled_scores;
    row.values[cols["resid_sample"]] =
        (rf.W1_hat - theory.rho.asDiagonal() * (R.transpose() * rf.W1)).norm();
    row.values[cols["resid_pred"]] =
        (pred - theory.rho.cwiseInverse().asDiagonal() * (R.transpose() * W_star)).norm();
    for (Index k = 0; k < spec.m; ++k) row.values[cols[indexed("rho_theory", k)]] = theory.rho(k);
    try {
      const BiasFactors est = rho_asymptotic(rf.pca, spec.m, spec.d);
      for (Index k = 0; k < spec.m; ++k) {
        row.values[cols[indexed("rho_asymptotic", k)]] = est.rho(k);
        row.values[cols[indexed("abs_err", k)]] = std::abs(est.rho(k) - theory.rho(k));
      }
    } catch (const Error& err) {
      if (!is_degenerate(err)) throw;
      flag(row, "asymptotic", err);
    }
  });
}

ScorePairTable run_score_pairs(const ExperimentSpec& spec, Estimator adjust_with,
                               const std::optional<Eigen::VectorXd>& rho_override) {
  spec.validate();
  if (spec.m != 2) throw Error(ErrorKind::InvalidSpec, "score pairs are defined for m = 2");
  if (rho_override && rho_override->size() != 2) {
    throw Error(ErrorKind::DimensionMismatch, "rho override needs two entries");
  }
  ScorePairTable table;
  table.adjusted_with = adjust_with;
  std::vector<std::vector<ScorePairRow>> per_rep(static_cast<std::size_t>(spec.reps));
  table.summaries.resize(static_cast<std::size_t>(spec.reps));

  parallel_for(static_cast<std::size_t>(spec.reps), spec.threads, [&](std::size_t r) {
    const Index rep = static_cast<Index>(r);
    RepFit rf(spec, rep);
    const BiasFactors theory = rho_theory(rf.score_covariance(), rf.data.oracle.tau_sq);
    Eigen::VectorXd rho = rho_override ? *rho_override : rf.factors(adjust_with).rho;
    const BiasFactors used{rho, std::nullopt, Provenance::Theory};

    // truth in the same (raw) units as the fitted scores
    Eigen::MatrixXd truth = rf.data.oracle.true_scores;
    if (rf.pca.centered) truth.colwise() -= truth.rowwise().mean().eval();
    const Eigen::MatrixXd& truth_test = rf.data.oracle_test.true_scores;
    Eigen::MatrixXd sample = rf.pca.sample_scores.topRows(2);
    Eigen::MatrixXd pred = predict_scores(rf.pca, rf.data.test, 2).values;
    for (Index k = 0; k < 2; ++k) {
      if (sample.row(k).dot(truth.row(k)) < 0.0) {
        sample.row(k) *= -1.0;
        pred.row(k) *= -1.0;
      }
    }
    const Eigen::MatrixXd sample_adj = adjust(ScoreMatrix(sample, ScoreKind::Sample), used).values;
    const Eigen::MatrixXd pred_adj = adjust(ScoreMatrix(pred, ScoreKind::Prediction), used).values;

    auto rms = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
      return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.cols()));
    };
    ScorePairSummary& s = table.summaries[r];
    s.rep = rep;
    s.rho_used = rho;
    s.rho_theory = theory.rho;
    s.theta_theory = theta_of(rf.theory_rotation());
    s.rms_sample = rms(sample, truth);
    s.rms_sample_adjusted = rms(sample_adj, truth);
    s.rms_prediction = rms(pred, truth_test);
    s.rms_prediction_adjusted = rms(pred_adj, truth_test);

    auto& rows = per_rep[r];
    auto push = [&](bool test, const Eigen::MatrixXd& t, const Eigen::MatrixXd& e,
                    const Eigen::MatrixXd& a) {
      for (Index j = 0; j < t.cols(); ++j) {
        rows.push_back(ScorePairRow{rep, test, j, {t(0, j), t(1, j)}, {e(0, j), e(1, j)},
                                    {a(0, j), a(1, j)}});
      }
    };
    push(false, truth, sample, sample_adj);
    push(true, truth_test, pred, pred_adj);
  });
  for (auto& rows : per_rep) {
    table.rows.insert(table.rows.end(), rows.begin(), rows.end());
  }
  return table;
}

std::vector<int> LinearClassifier::predict(const Eigen::MatrixXd& scores) const {
  if (scores.rows() != feature_mean.size()) {
    throw Error(ErrorKind::DimensionMismatch, "classifier was trained on a different m");
  }
  const Index m = scores.rows();
  std::vector<int> out(static_cast<std::size_t>(scores.cols()));
  for (Index j = 0; j < scores.cols(); ++j) {
    Eigen::VectorXd z(m + 1);
    z(0) = 1.0;
    z.tail(m) = (scores.col(j) - feature_mean).cwiseQuotient(feature_scale);
    const Eigen::VectorXd response = weights.transpose() * z;
    Index best = 0;
    response.maxCoeff(&best);
    out[static_cast<std::size_t>(j)] = classes[static_cast<std::size_t>(best)];
  }
  return out;
}

double LinearClassifier::error_percent(const Eigen::MatrixXd& scores,
                                       const std::vector<int>& labels) const {
  if (static_cast<Index>(labels.size()) != scores.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "one label per observation");
  }
  if (labels.empty()) return 0.0;
  const std::vector<int> pred = predict(scores);
  std::size_t wrong = 0;
  for (std::size_t j = 0; j < labels.size(); ++j) wrong += pred[j] != labels[j];
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(labels.size());
}

LinearClassifier train_classifier(const ScoreMatrix& scores, const std::vector<int>& labels,
                                  double ridge) {
  const Index m = scores.comps();
  const Index n = scores.cols();
  if (static_cast<Index>(labels.size()) != n) {
    throw Error(ErrorKind::DimensionMismatch, "one label per observation");
  }
  if (!(ridge > 0.0)) throw Error(ErrorKind::InvalidInput, "ridge must be positive");
  std::map<int, Index> counts;
  for (int g : labels) ++counts[g];
  if (counts.size() < 2) throw Error(ErrorKind::InvalidInput, "need at least 2 classes");
  for (const auto& [g, c] : counts) {
    if (c < 2) {
      throw Error(ErrorKind::InvalidInput, "class " + std::to_string(g) + " has fewer than 2 samples");
    }
  }

  LinearClassifier out;
  for (const auto& entry : counts) out.classes.push_back(entry.first);
  out.feature_mean = scores.values.rowwise().mean();
  const Eigen::MatrixXd centered = scores.values.colwise() - out.feature_mean;
  out.feature_scale = (centered.rowwise().squaredNorm() / static_cast<double>(n)).cwiseSqrt();
  for (Index i = 0; i < m; ++i) {
    if (!(out.feature_scale(i) > 0.0)) out.feature_scale(i) = 1.0;
  }

  Eigen::MatrixXd Z(n, m + 1);
  Z.col(0).setOnes();
  Z.rightCols(m) = (out.feature_scale.cwiseInverse().asDiagonal() * centered).transpose();
  const auto G = static_cast<Index>(out.classes.size());
  Eigen::MatrixXd Y = -Eigen::MatrixXd::Ones(n, G);
  for (Index j = 0; j < n; ++j) {
    const auto pos = std::lower_bound(out.classes.begin(), out.classes.end(),
                                      labels[static_cast<std::size_t>(j)]);
    Y(j, pos - out.classes.begin()) = 1.0;
  }
  Eigen::MatrixXd A = Z.transpose() * Z;
  A.diagonal().tail(m).array() += ridge;
  out.weights = A.ldlt().solve(Z.transpose() * Y);
  return out;
}

ClassificationErrors classification_arms(const ScoreMatrix& sample, const ScoreMatrix& prediction,
                                         const std::vector<int>& train_labels,
                                         const std::vector<int>& test_labels,
                                         const BiasFactors& factors) {
  ClassificationErrors out;
  const LinearClassifier raw = train_classifier(sample, train_labels);
  out.train_unadjusted = raw.error_percent(sample.values, train_labels);
  out.test_unadjusted = raw.error_percent(prediction.values, test_labels);

  const ScoreMatrix sample_adj = adjust(sample, factors);
  const ScoreMatrix pred_adj = adjust(prediction, factors);
  const LinearClassifier adj = train_classifier(sample_adj, train_labels);
  out.train_adjusted = adj.error_percent(sample_adj.values, train_labels);
  out.test_adjusted = adj.error_percent(pred_adj.values, test_labels);
  return out;
}

ExperimentReport run_classification_demo(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.model != ModelKind::Mixture) {
    throw Error(ErrorKind::InvalidSpec, "classification needs labelled (mixture) data");
  }
  Estimator with = Estimator::Asymptotic;
  for (Estimator e : spec.estimators) {
    if (is_data_side(e)) {
      with = e;
      break;
    }
  }
  Columns cols;
  for (const char* name : {"train_err_unadj", "test_err_unadj", "train_err_adj", "test_err_adj"}) {
    cols.add(name);
  }
  for (Index k = 0; k < spec.m; ++k) cols.add(indexed("rho", k));
  ExperimentReport report = run_reps(spec, "classification", cols.names(), [&](ReportRow& row) {
    RepFit rf(spec, row.rep);
    const ScoreMatrix sample = sample_scores(rf.pca, spec.m);
    const ScoreMatrix pred = predict_scores(rf.pca, rf.data.test, spec.m);
    BiasFactors factors;
    try {
      factors = rf.factors(with);
    } catch (const Error& err) {
      if (!is_degenerate(err)) throw;
      flag(row, to_string(with), err);
      return;
    }
    const ClassificationErrors e = classification_arms(sample, pred, rf.data.oracle.labels,
                                                       rf.data.oracle_test.labels, factors);
    row.values[cols["train_err_unadj"]] = e.train_unadjusted;
    row.values[cols["test_err_unadj"]] = e.test_unadjusted;
    row.values[cols["train_err_adj"]] = e.train_adjusted;
    row.values[cols["test_err_adj"]] = e.test_adjusted;
    for (Index k = 0; k < spec.m; ++k) row.values[cols[indexed("rho", k)]] = factors.rho(k);
  });
  report.metadata.emplace_back("adjusted_with", std::string(to_string(with)));
  return report;
}

namespace presets {

ExperimentSpec spike(double beta, Index d, Index n) {
  ExperimentSpec s;
  s.model = ModelKind::Spike;
  s.beta = beta;
  s.d = d;
  s.n = n;
  return s;
}

ExperimentSpec mixture(Index d, Index n) {
  ExperimentSpec s;
  s.model = ModelKind::Mixture;
  s.d = d;
  s.n = n;
  return s;
}

std::vector<ExperimentSpec> bias_table_grid() {
  const std::pair<Index, Index> sizes[] = {{5000, 50}, {10000, 50}, {10000, 100}, {20000, 100}};
  std::vector<ExperimentSpec> out;
  for (double beta : {0.3, 0.5}) {
    for (const auto& [d, n] : sizes) out.push_back(spike(beta, d, n));
  }
  for (const auto& [d, n] : sizes) out.push_back(mixture(d, n));
  return out;
}

ExperimentSpec noise_component() {
  ExperimentSpec s = spike(0.3, 5000, 50);
  s.n_test = 200;
  return s;
}

ExperimentSpec score_pairs() {
  ExperimentSpec s = spike(0.3, 10000, 50);
  s.n_test = 20;
  return s;
}

ExperimentSpec correlation() { return spike(0.3, 5000, 50); }

ExperimentSpec classification() {
  ExperimentSpec s = mixture(5000, 100);
  s.n_test = 100;
  return s;
}

}  // namespace presets

}  // namespace hdpca
