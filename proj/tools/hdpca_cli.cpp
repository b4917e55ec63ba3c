#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

using hdpca::cli::CliConfig;

namespace {

void add_common(CLI::App& app, CliConfig& cfg) {
  app.add_option("--model", cfg.model, "spike or mixture (simulate)");
  app.add_option("--d", cfg.d, "dimension");
  app.add_option("--n", cfg.n, "training sample size");
  app.add_option("--m", cfg.m, "number of signal components");
  app.add_option("--n-test", cfg.n_test, "number of test observations");
  app.add_option("--beta", cfg.beta, "noise decay exponent (spike model)");
  app.add_option("--a", cfg.a, "group mean magnitude (mixture model)");
  app.add_option("--sigma-sq", cfg.sigma_sq, "spike variances / d, comma separated")
      ->delimiter(',');
  app.add_option("--probs", cfg.probs, "three group probabilities (mixture model)")
      ->delimiter(',');
  app.add_option("--seed", cfg.seed, "master seed");
  app.add_option("--reps", cfg.reps, "Monte Carlo repetitions");
  app.add_flag("--center,!--no-center", cfg.center, "subtract the column mean before PCA");
  app.add_option("--estimators", cfg.estimators,
                 "comma separated: theory,best,asymptotic,jackknife1,jackknife2,jackknife3,lzw")
      ->delimiter(',');
  app.add_option("--estimator", cfg.estimator, "single estimator (scores, fig1, fig3)");
  app.add_option("--out", cfg.out, "output directory, or a file name ending in .csv");
  app.add_option("--train", cfg.train, "training data CSV (d rows, one column per observation)");
  app.add_option("--test", cfg.test, "new observations CSV");
  app.add_option("--threads", cfg.threads, "worker cap, 0 = all cores; results do not depend on it");
  app.add_flag("--full-precision", cfg.full_precision, "print 17 significant digits");
  app.add_flag("--manifest", cfg.manifest, "print the resolved configuration and RNG identifier");
  app.add_flag("--random-frame", cfg.random_frame, "rotate the leading coordinates (spike model)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-dimensional PCA score bias: simulation, adjustment and reproduction"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key = value file; flags override it");

  CliConfig cfg;
  add_common(app, cfg);
  auto* simulate = app.add_subcommand("simulate", "write a simulated data set and its oracle");
  auto* scores = app.add_subcommand("scores", "sample/prediction scores with bias adjustment");
  auto* reproduce = app.add_subcommand("reproduce", "rerun a table or figure experiment");
  reproduce->add_option("target", cfg.target, "table1|table2|table3|fig1|fig3|fig4")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hdpca::cli::kUsage;
  }

  try {
    if (simulate->parsed()) {
      cfg.command = "simulate";
      return hdpca::cli::cmd_simulate(cfg, std::cout, std::cerr);
    }
    if (scores->parsed()) {
      cfg.command = "scores";
      return hdpca::cli::cmd_scores(cfg, std::cout, std::cerr);
    }
    cfg.command = "reproduce";
    return hdpca::cli::cmd_reproduce(cfg, std::cout, std::cerr);
  } catch (const hdpca::cli::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return hdpca::cli::kUsage;
  } catch (const hdpca::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hdpca::cli::kDataError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return hdpca::cli::kInternal;
  }
}
