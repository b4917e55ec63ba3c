#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hdpca/experiments.hpp"

namespace hdpca::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kExclusions = 2,
  kUsage = 64,
  kDataError = 65,
};

/// Thrown for bad flag combinations detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything the commands read from flags or the config file. Unset values
/// fall back to the per-command defaults.
struct CliConfig {
  std::string command;
  std::string target;  // reproduce only

  std::optional<std::string> model;
  std::optional<Index> d;
  std::optional<Index> n;
  std::optional<Index> m;
  std::optional<Index> n_test;
  std::optional<double> beta;
  std::optional<double> a;
  std::vector<double> sigma_sq;
  std::vector<double> probs;
  std::optional<std::uint64_t> seed;
  std::optional<Index> reps;
  std::optional<bool> center;
  std::vector<std::string> estimators;
  std::optional<std::string> estimator;
  std::optional<std::string> out;
  std::optional<std::string> train;
  std::optional<std::string> test;
  std::size_t threads = 0;
  bool full_precision = false;
  bool manifest = false;
  bool random_frame = false;
};

int cmd_simulate(const CliConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_scores(const CliConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_reproduce(const CliConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace hdpca::cli
