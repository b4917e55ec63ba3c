#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "hdpca/csv.hpp"

namespace fs = std::filesystem;

namespace hdpca::cli {

namespace {

// Where a command writes: a single named file when --out ends in .csv
// (companion files get its stem as prefix), a directory otherwise.
struct OutputPlan {
  fs::path dir;
  std::string prefix;
  std::optional<fs::path> main_file;

  fs::path file(const std::string& name) const { return dir / (prefix + name); }
  fs::path main(const std::string& name) const { return main_file ? *main_file : file(name); }
};

OutputPlan plan_output(const CliConfig& cfg) {
  OutputPlan plan;
  const fs::path out = cfg.out.value_or(".");
  if (out.extension() == ".csv") {
    plan.dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
    plan.prefix = out.stem().string() + "_";
    plan.main_file = out;
  } else {
    plan.dir = out;
  }
  fs::create_directories(plan.dir);
  return plan;
}

std::ofstream open_file(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::InvalidInput, "cannot write " + path.string());
  return f;
}

std::vector<Estimator> parse_estimators(const std::vector<std::string>& names) {
  std::vector<Estimator> out;
  for (const auto& name : names) {
    const auto e = parse_estimator(name);
    if (!e) throw UsageError("unknown estimator '" + name + "'");
    if (std::find(out.begin(), out.end(), *e) == out.end()) out.push_back(*e);
  }
  return out;
}

std::vector<double> default_sigma_sq(Index m) {
  std::vector<double> out;
  for (Index k = 1; k <= m; ++k) out.push_back(0.02 / static_cast<double>(k));
  return out;
}

std::array<double, 3> probs_from(const std::vector<double>& p) {
  if (p.size() != 3) throw Error(ErrorKind::InvalidSpec, "--probs needs exactly 3 values");
  return {p[0], p[1], p[2]};
}

void apply_overrides(ExperimentSpec& spec, const CliConfig& cfg) {
  if (cfg.d) spec.d = *cfg.d;
  if (cfg.n) spec.n = *cfg.n;
  if (cfg.n_test) spec.n_test = *cfg.n_test;
  if (cfg.beta) spec.beta = *cfg.beta;
  if (cfg.a) spec.a = *cfg.a;
  if (!cfg.sigma_sq.empty()) {
    spec.sigma_sq = cfg.sigma_sq;
    spec.m = static_cast<Index>(cfg.sigma_sq.size());
  }
  if (cfg.m) {
    spec.m = *cfg.m;
    if (spec.model == ModelKind::Spike && cfg.sigma_sq.empty()) spec.sigma_sq = default_sigma_sq(spec.m);
  }
  if (!cfg.probs.empty()) spec.probs = probs_from(cfg.probs);
  if (cfg.seed) spec.master_seed = *cfg.seed;
  if (cfg.reps) spec.reps = *cfg.reps;
  if (cfg.center) spec.center = cfg.center;
  if (!cfg.estimators.empty()) spec.estimators = parse_estimators(cfg.estimators);
  spec.threads = cfg.threads;
  spec.random_frame = cfg.random_frame;
}

void print_manifest(std::ostream& out, const CliConfig& cfg, const std::string& resolved) {
  out << "# command=" << cfg.command;
  if (!cfg.target.empty()) out << " " << cfg.target;
  out << "\n# config " << resolved << "\n# rng=" << SeededRng::kAlgorithm
      << "\n# threads=" << (cfg.threads ? std::to_string(cfg.threads) : std::string("auto"))
      << "\n# precision=" << (cfg.full_precision ? csv::kFullDigits : csv::kDefaultDigits) << "\n";
}

void print_aggregate(std::ostream& out, const ExperimentReport& r, bool full) {
  out << r.title << " (" << r.aggregate.used << " used, " << r.aggregate.excluded
      << " excluded)\n";
  for (std::size_t c = 0; c < r.columns.size(); ++c) {
    out << "  " << r.columns[c] << ": " << csv::format(r.aggregate.mean[c], full) << " ("
        << csv::format(r.aggregate.sd[c], full) << ")\n";
  }
}

int finish(Index excluded, std::ostream& err) {
  if (excluded == 0) return kOk;
  err << "warning: " << excluded << " repetition(s) excluded as degenerate\n";
  return kExclusions;
}

int write_single_report(const CliConfig& cfg, const ExperimentReport& report,
                        const std::string& name, std::ostream& out, std::ostream& err) {
  const OutputPlan plan = plan_output(cfg);
  const fs::path path = plan.main(name);
  auto f = open_file(path);
  csv::write_report(f, report, cfg.full_precision);
  print_aggregate(out, report, cfg.full_precision);
  out << "wrote " << path.string() << "\n";
  return finish(report.aggregate.excluded, err);
}

std::string slug(const ExperimentSpec& s) {
  std::ostringstream os;
  if (s.model == ModelKind::Spike) {
    os << "spike_beta" << s.beta;
  } else {
    os << "mixture_a" << s.a;
  }
  os << "_d" << s.d << "_n" << s.n;
  return os.str();
}

int reproduce_table2(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<ExperimentSpec> grid;
  for (ExperimentSpec s : presets::bias_table_grid()) {
    if (cfg.d && s.d != *cfg.d) continue;
    if (cfg.n && s.n != *cfg.n) continue;
    if (cfg.beta && (s.model != ModelKind::Spike || s.beta != *cfg.beta)) continue;
    if (cfg.a && (s.model != ModelKind::Mixture || s.a != *cfg.a)) continue;
    CliConfig rest = cfg;
    rest.d.reset();
    rest.n.reset();
    rest.beta.reset();
    rest.a.reset();
    apply_overrides(s, rest);
    grid.push_back(s);
  }
  if (grid.empty()) throw UsageError("no table2 configuration matches the given --d/--n/--beta/--a");
  if (cfg.manifest) {
    for (const auto& s : grid) print_manifest(out, cfg, s.describe());
  }

  const OutputPlan plan = plan_output(cfg);
  const fs::path summary_path = plan.main("table2.csv");
  auto summary = open_file(summary_path);
  summary << "# experiment=table2\n# rng=" << SeededRng::kAlgorithm << "\n";
  summary << "model,param,d,n,estimator,component,mean,sd,count,used,excluded\n";
  Index excluded = 0;
  for (const auto& s : grid) {
    const ExperimentReport r = run_bias_table(s);
    excluded += r.aggregate.excluded;
    const bool spike = s.model == ModelKind::Spike;
    for (std::size_t c = 0; c < r.columns.size(); ++c) {
      const std::string& col = r.columns[c];
      const auto cut = col.rfind('_');
      const std::string est = col.substr(0, cut);
      const std::string comp = col.substr(cut + 1);
      summary << (spike ? "spike" : "mixture") << ','
              << csv::format(spike ? s.beta : s.a, cfg.full_precision) << ',' << s.d << ','
              << s.n << ',' << est << ',' << comp << ','
              << csv::format(r.aggregate.mean[c], cfg.full_precision) << ','
              << csv::format(r.aggregate.sd[c], cfg.full_precision) << ',' << r.aggregate.count[c]
              << ',' << r.aggregate.used << ',' << r.aggregate.excluded << '\n';
    }
    if (!plan.main_file) {
      auto f = open_file(plan.file("table2_" + slug(s) + ".csv"));
      csv::write_report(f, r, cfg.full_precision);
    }
    out << slug(s) << ": ";
    print_aggregate(out, r, cfg.full_precision);
  }
  out << "wrote " << summary_path.string() << "\n";
  return finish(excluded, err);
}

int reproduce_pairs(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  ExperimentSpec spec = presets::score_pairs();
  spec.reps = 1;
  apply_overrides(spec, cfg);
  Estimator with = Estimator::Asymptotic;
  if (cfg.estimator) {
    const auto e = parse_estimator(*cfg.estimator);
    if (!e) throw UsageError("unknown estimator '" + *cfg.estimator + "'");
    with = *e;
  }
  if (cfg.manifest) print_manifest(out, cfg, spec.describe());
  const ScorePairTable table = run_score_pairs(spec, with);

  const OutputPlan plan = plan_output(cfg);
  const fs::path pairs_path = plan.main(cfg.target + ".csv");
  {
    auto f = open_file(pairs_path);
    csv::write_score_pairs(f, table, cfg.full_precision);
  }
  const fs::path summary_path =
      plan.file(plan.main_file ? std::string("summary.csv") : cfg.target + "_summary.csv");
  auto f = open_file(summary_path);
  f << "# adjusted_with=" << to_string(with) << "\n";
  f << "rep,rho_1,rho_2,rho_theory_1,rho_theory_2,theta_theory_deg,rms_sample,"
       "rms_sample_adjusted,rms_prediction,rms_prediction_adjusted\n";
  const bool full = cfg.full_precision;
  for (const auto& s : table.summaries) {
    f << s.rep << ',' << csv::format(s.rho_used(0), full) << ',' << csv::format(s.rho_used(1), full)
      << ',' << csv::format(s.rho_theory(0), full) << ',' << csv::format(s.rho_theory(1), full)
      << ',' << csv::format(s.theta_theory * 180.0 / std::numbers::pi, full) << ','
      << csv::format(s.rms_sample, full) << ',' << csv::format(s.rms_sample_adjusted, full) << ','
      << csv::format(s.rms_prediction, full) << ','
      << csv::format(s.rms_prediction_adjusted, full) << '\n';
    out << "rep " << s.rep << ": rho (" << to_string(with) << ") = " << csv::format(s.rho_used(0))
        << ", " << csv::format(s.rho_used(1)) << "; theory = " << csv::format(s.rho_theory(0))
        << ", " << csv::format(s.rho_theory(1)) << "; prediction rms " << csv::format(s.rms_prediction)
        << " -> " << csv::format(s.rms_prediction_adjusted) << "\n";
  }
  out << "wrote " << pairs_path.string() << " and " << summary_path.string() << "\n";
  (void)err;
  return kOk;
}

}  // namespace

int cmd_simulate(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::string model = cfg.model.value_or("spike");
  Dataset data = [&] {
    const Index n_test = cfg.n_test.value_or(20);
    if (model == "spike") {
      SpikeSpec s;
      s.d = cfg.d.value_or(1000);
      s.n = cfg.n.value_or(20);
      s.sigma_sq = cfg.sigma_sq;
      s.m = cfg.m.value_or(s.sigma_sq.empty() ? 2 : static_cast<Index>(s.sigma_sq.size()));
      if (s.sigma_sq.empty()) s.sigma_sq = default_sigma_sq(s.m);
      s.beta = cfg.beta.value_or(0.3);
      s.seed = cfg.seed.value_or(1);
      s.random_frame = cfg.random_frame;
      if (cfg.manifest) {
        std::ostringstream os;
        os << "model=spike d=" << s.d << " n=" << s.n << " n_test=" << n_test << " m=" << s.m
           << " beta=" << s.beta << " seed=" << s.seed;
        print_manifest(out, cfg, os.str());
      }
      return gen_spike(s, n_test);
    }
    if (model == "mixture") {
      MixtureSpec s;
      s.d = cfg.d.value_or(1000);
      s.n = cfg.n.value_or(20);
      s.a = cfg.a.value_or(0.15);
      if (!cfg.probs.empty()) s.probs = probs_from(cfg.probs);
      s.seed = cfg.seed.value_or(1);
      if (cfg.manifest) {
        std::ostringstream os;
        os << "model=mixture d=" << s.d << " n=" << s.n << " n_test=" << n_test << " a=" << s.a
           << " seed=" << s.seed;
        print_manifest(out, cfg, os.str());
      }
      return gen_mixture(s, n_test);
    }
    throw UsageError("unknown model '" + model + "' (spike or mixture)");
  }();

  const OutputPlan plan = plan_output(cfg);
  const bool full = cfg.full_precision;
  std::vector<fs::path> written;
  written.push_back(plan.main("train.csv"));
  csv::write_dataset(written.back(), data.train.values(), full);
  written.push_back(plan.file("test.csv"));
  csv::write_dataset(written.back(), data.test.values(), full);
  for (auto& p : csv::write_oracle(plan.dir, plan.prefix + "oracle_", data.oracle, full)) {
    written.push_back(p);
  }
  written.push_back(plan.file("oracle_test_true_scores.csv"));
  csv::write_field(written.back(), "true_scores", data.oracle_test.true_scores, full);
  if (!data.oracle_test.labels.empty()) {
    Eigen::VectorXd labels(static_cast<Index>(data.oracle_test.labels.size()));
    for (std::size_t i = 0; i < data.oracle_test.labels.size(); ++i) {
      labels(static_cast<Index>(i)) = data.oracle_test.labels[i];
    }
    written.push_back(plan.file("oracle_test_labels.csv"));
    csv::write_field(written.back(), "labels", labels, full);
  }
  for (const auto& p : written) out << "wrote " << p.string() << "\n";
  (void)err;
  return kOk;
}

int cmd_scores(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!cfg.train) throw UsageError("scores needs --train");
  const Estimator est = [&] {
    const auto e = parse_estimator(cfg.estimator.value_or("asymptotic"));
    if (!e) throw UsageError("unknown estimator '" + *cfg.estimator + "'");
    if (*e == Estimator::Theory || *e == Estimator::Best) {
      throw UsageError("estimator '" + *cfg.estimator + "' needs the true scores");
    }
    return *e;
  }();
  const Index m = cfg.m.value_or(2);
  const bool center = cfg.center.value_or(true);

  const DataMatrix X = csv::read_dataset(*cfg.train);
  const Index d = X.rows();
  const Index n = X.cols();
  if (cfg.manifest) {
    std::ostringstream os;
    os << "train=" << *cfg.train << " d=" << d << " n=" << n << " m=" << m
       << " center=" << (center ? "true" : "false") << " estimator=" << to_string(est);
    if (cfg.test) os << " test=" << *cfg.test;
    print_manifest(out, cfg, os.str());
  }
  if (d <= n) {
    err << "warning: d = " << d << " <= n = " << n
        << "; the high-dimension low-sample-size assumptions behind the adjustment fail\n";
  }
  if (m < 1 || m >= n) {
    throw Error(ErrorKind::InvalidInput,
                "m = " + std::to_string(m) + " must satisfy 1 <= m < n = " + std::to_string(n) +
                    ": the noise level is the average of the n - m trailing eigenvalues");
  }

  const PcaFit pca = fit(X, center);
  BiasFactors factors;
  switch (est) {
    case Estimator::Asymptotic: factors = rho_asymptotic(pca, m, d); break;
    case Estimator::Lzw: factors = rho_lzw(pca, m, d); break;
    default: {
      const auto loo = loo_fits(X, m, center, pca, cfg.threads);
      const auto variant = est == Estimator::Jackknife1   ? JackknifeVariant::MeanOfRoots
                           : est == Estimator::Jackknife2 ? JackknifeVariant::RootOfSums
                                                          : JackknifeVariant::RootOfSquares;
      factors = rho_jackknife(pca, loo, X, m, variant);
    }
  }

  const OutputPlan plan = plan_output(cfg);
  const bool full = cfg.full_precision;
  std::vector<fs::path> written;
  auto emit_scores = [&](const std::string& name, const ScoreMatrix& s) {
    written.push_back(plan.file(name));
    auto f = open_file(written.back());
    csv::write_scores(f, s, full);
  };
  const ScoreMatrix sample = sample_scores(pca, m);
  emit_scores("sample_scores.csv", sample);
  emit_scores("sample_scores_adjusted.csv", adjust(sample, factors));
  if (cfg.test) {
    const DataMatrix T = csv::read_dataset(*cfg.test);
    const ScoreMatrix pred = predict_scores(pca, T, m);
    emit_scores("prediction_scores.csv", pred);
    emit_scores("prediction_scores_adjusted.csv", adjust(pred, factors));
  }
  written.push_back(plan.file("bias_factors.csv"));
  {
    auto f = open_file(written.back());
    csv::write_factors(f, factors, full);
  }
  out << "rho (" << to_string(factors.provenance) << "):";
  for (Index k = 0; k < m; ++k) out << ' ' << csv::format(factors.rho(k), full);
  out << "\n";
  for (const auto& p : written) out << "wrote " << p.string() << "\n";
  return kOk;
}

int cmd_reproduce(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.model) throw UsageError("reproduce targets fix the model; drop --model");
  const std::string& t = cfg.target;
  if (t == "table1") {
    ExperimentSpec spec = presets::noise_component();
    apply_overrides(spec, cfg);
    if (cfg.manifest) print_manifest(out, cfg, spec.describe());
    return write_single_report(cfg, run_noise_component_table(spec, spec.m + 1), "table1.csv", out,
                               err);
  }
  if (t == "table2") return reproduce_table2(cfg, out, err);
  if (t == "table3") {
    ExperimentSpec spec = presets::classification();
    apply_overrides(spec, cfg);
    if (cfg.manifest) print_manifest(out, cfg, spec.describe());
    return write_single_report(cfg, run_classification_demo(spec), "table3.csv", out, err);
  }
  if (t == "fig1" || t == "fig3") return reproduce_pairs(cfg, out, err);
  if (t == "fig4") {
    ExperimentSpec spec = presets::correlation();
    apply_overrides(spec, cfg);
    if (cfg.manifest) print_manifest(out, cfg, spec.describe());
    return write_single_report(cfg, run_correlation_figure(spec), "fig4.csv", out, err);
  }
  throw UsageError("unknown target '" + t + "' (table1, table2, table3, fig1, fig3, fig4)");
}

}  // namespace hdpca::cli
