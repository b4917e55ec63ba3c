#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hdpca/bias.hpp"
#include "hdpca/experiments.hpp"
#include "hdpca/procrustes.hpp"

namespace hdpca::csv {

// Comma separated, '.' decimal point, LF line endings; lines starting with
// '#' carry metadata and are skipped by the readers.

inline constexpr int kDefaultDigits = 9;
inline constexpr int kFullDigits = 17;  // enough to round-trip every double

std::string format(double x, bool full_precision = false);

struct Table {
  std::vector<std::string> header;        // empty when read without a header
  Eigen::MatrixXd values;                 // one CSV line per row
  std::vector<std::string> comments;      // '#' lines, marker stripped
};

/// Parses numeric CSV. Ragged lines and non-numeric fields raise ParseError
/// naming the 1-based line number.
Table read_table(std::istream& in, bool has_header);
Table read_table(const std::filesystem::path& path, bool has_header);

void write_matrix(std::ostream& out, const Eigen::MatrixXd& values, bool full_precision,
                  const std::vector<std::string>& header = {});

/// Data set file: d lines, one column per observation, no header.
void write_dataset(const std::filesystem::path& path, const Eigen::MatrixXd& X,
                   bool full_precision);
DataMatrix read_dataset(const std::filesystem::path& path);

/// Single-field file: a "# field=<name>" line, then the values.
void write_field(const std::filesystem::path& path, std::string_view name,
                 const Eigen::MatrixXd& values, bool full_precision);

/// Writes every populated oracle field as <prefix><field>.csv in `dir`.
std::vector<std::filesystem::path> write_oracle(const std::filesystem::path& dir,
                                                const std::string& prefix,
                                                const OracleTruth& oracle, bool full_precision);

/// Scores: header comp_1..comp_m, one observation per line, plus a
/// "# kind=..." line.
void write_scores(std::ostream& out, const ScoreMatrix& scores, bool full_precision);
ScoreMatrix read_scores(std::istream& in);

void write_factors(std::ostream& out, const BiasFactors& factors, bool full_precision);
void write_procrustes(std::ostream& out, const ProcrustesFit& fit, bool full_precision);

/// Report: metadata lines, header rep,seed,excluded,note,<columns>, one line
/// per repetition, then "# aggregate" followed by stat,<columns> lines for
/// mean, sd and count.
void write_report(std::ostream& out, const ExperimentReport& report, bool full_precision);

/// rep,set,obs,true_1,true_2,estimate_1,estimate_2,adjusted_1,adjusted_2
void write_score_pairs(std::ostream& out, const ScorePairTable& table, bool full_precision);

}  // namespace hdpca::csv
