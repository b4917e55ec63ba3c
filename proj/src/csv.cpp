#include "hdpca/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace hdpca::csv {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_number(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": '" +
                                           std::string(field) + "' is not a number");
  }
  return value;
}

std::string quote(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + path.string());
  return out;
}

void write_header(std::ostream& out, const std::vector<std::string>& header) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
}

std::vector<std::string> numbered(std::string_view base, Index count) {
  std::vector<std::string> out;
  for (Index i = 1; i <= count; ++i) out.push_back(std::string(base) + "_" + std::to_string(i));
  return out;
}

}  // namespace

std::string format(double x, bool full_precision) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", full_precision ? kFullDigits : kDefaultDigits, x);
  return buf;
}

Table read_table(std::istream& in, bool has_header) {
  Table table;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::size_t line_no = 0;
  std::string line;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      table.comments.emplace_back(trim(view.substr(1)));
      continue;
    }
    const auto fields = split(view);
    if (header_pending) {
      for (auto f : fields) table.header.emplace_back(trim(f));
      width = fields.size();
      header_pending = false;
      continue;
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(width) + " fields, found " +
                                             std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(width);
    for (auto f : fields) row.push_back(parse_number(f, line_no));
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw Error(ErrorKind::ParseError, "read error");
  table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      table.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return table;
}

Table read_table(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path.string());
  return read_table(in, has_header);
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& values, bool full_precision,
                  const std::vector<std::string>& header) {
  if (!header.empty()) write_header(out, header);
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      if (j) out << ',';
      out << format(values(i, j), full_precision);
    }
    out << '\n';
  }
}

void write_dataset(const std::filesystem::path& path, const Eigen::MatrixXd& X,
                   bool full_precision) {
  auto out = open_out(path);
  write_matrix(out, X, full_precision);
}

DataMatrix read_dataset(const std::filesystem::path& path) {
  Table t = read_table(path, false);
  if (t.values.size() == 0) {
    throw Error(ErrorKind::ParseError, path.string() + " holds no data");
  }
  return DataMatrix(std::move(t.values));
}

void write_field(const std::filesystem::path& path, std::string_view name,
                 const Eigen::MatrixXd& values, bool full_precision) {
  auto out = open_out(path);
  out << "# field=" << name << '\n';
  write_matrix(out, values, full_precision);
}

std::vector<std::filesystem::path> write_oracle(const std::filesystem::path& dir,
                                                const std::string& prefix,
                                                const OracleTruth& oracle, bool full_precision) {
  std::vector<std::filesystem::path> written;
  auto emit = [&](std::string_view name, const Eigen::MatrixXd& values) {
    if (values.size() == 0) return;
    const auto path = dir / (prefix + std::string(name) + ".csv");
    write_field(path, name, values, full_precision);
    written.push_back(path);
  };
  const Index m = static_cast<Index>(oracle.sigma_sq.size());
  emit("directions", oracle.directions);
  emit("sigma_sq", Eigen::Map<const Eigen::VectorXd>(oracle.sigma_sq.data(), m));
  emit("tau_sq", Eigen::MatrixXd::Constant(1, 1, oracle.tau_sq));
  emit("true_scores", oracle.true_scores);
  emit("scaled_scores", oracle.scaled_scores);
  emit("population_eigs", oracle.population_eigs);
  if (!oracle.labels.empty()) {
    Eigen::VectorXd labels(static_cast<Index>(oracle.labels.size()));
    for (std::size_t i = 0; i < oracle.labels.size(); ++i) {
      labels(static_cast<Index>(i)) = oracle.labels[i];
    }
    emit("labels", labels);
  }
  if (oracle.model == ModelKind::Mixture) {
    emit("population_mean", oracle.population_mean);
    emit("group_means", oracle.group_means);
  }
  emit("frame_rotation", oracle.frame_rotation);
  return written;
}

void write_scores(std::ostream& out, const ScoreMatrix& scores, bool full_precision) {
  out << "# kind=" << to_string(scores.kind) << '\n';
  write_matrix(out, scores.values.transpose(), full_precision, numbered("comp", scores.comps()));
}

ScoreMatrix read_scores(std::istream& in) {
  Table t = read_table(in, true);
  ScoreKind kind = ScoreKind::Sample;
  for (const auto& c : t.comments) {
    if (c.rfind("kind=", 0) != 0) continue;
    const std::string_view name = std::string_view(c).substr(5);
    for (ScoreKind k : {ScoreKind::True, ScoreKind::Sample, ScoreKind::Prediction,
                        ScoreKind::AdjustedSample, ScoreKind::AdjustedPrediction}) {
      if (to_string(k) == name) kind = k;
    }
  }
  return ScoreMatrix(t.values.transpose(), kind);
}

void write_factors(std::ostream& out, const BiasFactors& factors, bool full_precision) {
  std::vector<std::string> header{"provenance"};
  for (auto& h : numbered("rho", factors.comps())) header.push_back(h);
  write_header(out, header);
  out << to_string(factors.provenance);
  for (Index k = 0; k < factors.comps(); ++k) out << ',' << format(factors.rho(k), full_precision);
  out << '\n';
}

void write_procrustes(std::ostream& out, const ProcrustesFit& fit, bool full_precision) {
  std::vector<std::string> header{"theta"};
  for (auto& h : numbered("scale", fit.scale.size())) header.push_back(h);
  header.push_back("objective");
  header.push_back("iters");
  write_header(out, header);
  out << format(fit.theta, full_precision);
  for (Index k = 0; k < fit.scale.size(); ++k) out << ',' << format(fit.scale(k), full_precision);
  out << ',' << format(fit.objective, full_precision) << ',' << fit.iters << '\n';
}

void write_report(std::ostream& out, const ExperimentReport& report, bool full_precision) {
  for (const auto& [key, value] : report.metadata) out << "# " << key << '=' << value << '\n';
  std::vector<std::string> header{"rep", "seed", "excluded", "note"};
  header.insert(header.end(), report.columns.begin(), report.columns.end());
  write_header(out, header);
  for (const auto& row : report.rows) {
    out << row.rep << ',' << row.seed << ',' << (row.excluded ? 1 : 0) << ',' << quote(row.note);
    for (double v : row.values) out << ',' << format(v, full_precision);
    out << '\n';
  }
  const Aggregate& agg = report.aggregate;
  out << "# aggregate\n";
  out << "# used=" << agg.used << " excluded=" << agg.excluded << '\n';
  std::vector<std::string> agg_header{"stat"};
  agg_header.insert(agg_header.end(), report.columns.begin(), report.columns.end());
  write_header(out, agg_header);
  out << "mean";
  for (double v : agg.mean) out << ',' << format(v, full_precision);
  out << "\nsd";
  for (double v : agg.sd) out << ',' << format(v, full_precision);
  out << "\ncount";
  for (Index c : agg.count) out << ',' << c;
  out << '\n';
}

void write_score_pairs(std::ostream& out, const ScorePairTable& table, bool full_precision) {
  out << "# adjusted_with=" << to_string(table.adjusted_with) << '\n';
  write_header(out, {"rep", "set", "obs", "true_1", "true_2", "estimate_1", "estimate_2",
                     "adjusted_1", "adjusted_2"});
  for (const auto& r : table.rows) {
    out << r.rep << ',' << (r.test ? "test" : "train") << ',' << r.obs;
    for (double v : r.truth) out << ',' << format(v, full_precision);
    for (double v : r.estimate) out << ',' << format(v, full_precision);
    for (double v : r.adjusted) out << ',' << format(v, full_precision);
    out << '\n';
  }
}

}  // namespace hdpca::csv
