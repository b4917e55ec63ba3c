#include "hdpca/simulate.hpp"

#include <cmath>
#include <string>

namespace hdpca {

namespace {

[[noreturn]] void bad_spec(const std::string& msg) { throw Error(ErrorKind::InvalidSpec, msg); }

void check_n_test(Index n_test) {
  if (n_test < 1) bad_spec("n_test must be at least 1");
}

// Random orthogonal q x q matrix: QR of a Gaussian matrix with R's diagonal
// made positive.
Eigen::MatrixXd random_rotation(SeededRng& rng, Index q) {
  const Eigen::MatrixXd G = sample_gaussian(rng, q, q).values();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(q, q);
  const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < q; ++i) {
    if (R(i, i) < 0.0) Q.col(i) *= -1.0;
  }
  return Q;
}

Eigen::MatrixXd spike_draw(SeededRng& rng, const Eigen::VectorXd& sqrt_eigs,
                           const Eigen::MatrixXd& frame, Index cols, Eigen::MatrixXd& z_lead,
                           Index m) {
  Eigen::MatrixXd X = sample_gaussian(rng, sqrt_eigs.size(), cols).values();
  z_lead = X.topRows(m);
  X = sqrt_eigs.asDiagonal() * X;
  if (frame.size() > 0) {
    const Index q = frame.rows();
    X.topRows(q) = (frame * X.topRows(q)).eval();
  }
  return X;
}

}  // namespace

std::uint64_t stream_for(std::uint64_t replicate, StreamPurpose purpose) {
  return replicate * 8 + static_cast<std::uint64_t>(purpose);
}

void SpikeSpec::validate() const {
  if (m < 1) bad_spec("spike model needs m >= 1");
  if (n <= m) bad_spec("spike model needs n > m");
  if (d <= n) bad_spec("spike model needs d > n");
  if (static_cast<Index>(sigma_sq.size()) != m) bad_spec("sigma_sq must have m entries");
  for (std::size_t i = 0; i < sigma_sq.size(); ++i) {
    if (!(sigma_sq[i] > 0.0) || !std::isfinite(sigma_sq[i])) bad_spec("sigma_sq must be positive");
    if (i > 0 && sigma_sq[i] > sigma_sq[i - 1]) bad_spec("sigma_sq must be non-increasing");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) bad_spec("beta must be >= 0");
}

void MixtureSpec::validate() const {
  if (d < 3) bad_spec("mixture model needs d >= 3");
  if (n < 2) bad_spec("mixture model needs n >= 2");
  if (!(a >= 0.0) || !std::isfinite(a)) bad_spec("entry magnitude a must be positive");
  double total = 0.0;
  for (double p : probs) {
    if (!(p > 0.0)) bad_spec("group probabilities must be positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) bad_spec("group probabilities must sum to 1");
}

Eigen::VectorXd spike_population_eigs(const SpikeSpec& spec) {
  spec.validate();
  Eigen::VectorXd eigs(spec.d);
  for (Index i = 0; i < spec.m; ++i) {
    eigs(i) = spec.sigma_sq[static_cast<std::size_t>(i)] * static_cast<double>(spec.d);
  }
  double decay_sum = 0.0;
  for (Index i = spec.m + 1; i <= spec.d; ++i) {
    decay_sum += std::pow(static_cast<double>(i), -spec.beta);
  }
  const double tau0 = static_cast<double>(spec.d - spec.m) / decay_sum;
  for (Index i = spec.m + 1; i <= spec.d; ++i) {
    eigs(i - 1) = tau0 * std::pow(static_cast<double>(i), -spec.beta);
  }
  return eigs;
}

Eigen::VectorXd OracleTruth::direction(Index k) const {
  const Index d = dim();
  if (k < 0 || k >= d) throw Error(ErrorKind::InvalidInput, "direction index out of range");
  if (k < spikes()) return directions.col(k);
  if (model == ModelKind::Mixture) {
    throw Error(ErrorKind::InvalidInput, "mixture oracle only knows the spike directions");
  }
  Eigen::VectorXd u = Eigen::VectorXd::Zero(d);
  if (k < frame_rotation.rows()) {
    u.head(frame_rotation.rows()) = frame_rotation.col(k);
  } else {
    u(k) = 1.0;
  }
  return u;
}

double OracleTruth::population_variance(Index k) const {
  if (k < 0 || k >= population_eigs.size()) {
    throw Error(ErrorKind::InvalidInput, "component index out of range");
  }
  return population_eigs(k);
}

Eigen::RowVectorXd OracleTruth::true_scores_for(const DataMatrix& X, Index k) const {
  if (X.rows() != dim()) throw Error(ErrorKind::DimensionMismatch, "dimension differs from oracle");
  const Eigen::VectorXd u = direction(k);
  Eigen::RowVectorXd w = u.transpose() * X.values();
  if (population_mean.size() > 0) w.array() -= u.dot(population_mean);
  return w;
}

double OracleTruth::quadratic_form(const Eigen::VectorXd& v) const {
  if (v.size() != dim()) throw Error(ErrorKind::DimensionMismatch, "dimension differs from oracle");
  if (model == ModelKind::Mixture) {
    // Sigma = sum_g p_g (mu_g - mu)(mu_g - mu)^T + I; spikes carry the between-group part
    double total = v.squaredNorm();
    for (Index k = 0; k < spikes(); ++k) {
      const double c = directions.col(k).dot(v);
      total += (population_eigs(k) - 1.0) * c * c;
    }
    return total;
  }
  const Index q = frame_rotation.rows();
  double total = 0.0;
  if (q > 0) {
    const Eigen::VectorXd c = frame_rotation.transpose() * v.head(q);
    total += (population_eigs.head(q).array() * c.array().square()).sum();
  }
  total += (population_eigs.tail(dim() - q).array() * v.tail(dim() - q).array().square()).sum();
  return total;
}

Dataset gen_spike(const SpikeSpec& spec, Index n_test) {
  spec.validate();
  check_n_test(n_test);
  const Index d = spec.d;
  const Index m = spec.m;

  OracleTruth oracle;
  oracle.model = ModelKind::Spike;
  oracle.population_eigs = spike_population_eigs(spec);
  oracle.population_mean = Eigen::VectorXd::Zero(d);
  oracle.sigma_sq = spec.sigma_sq;
  oracle.tau_sq = oracle.population_eigs.tail(d - m).sum() / static_cast<double>(d);
  if (spec.random_frame) {
    SeededRng frame_rng(spec.seed, stream_for(spec.replicate, StreamPurpose::Frame));
    oracle.frame_rotation = random_rotation(frame_rng, std::min(d, std::max<Index>(m, 10)));
  }
  oracle.directions.resize(d, m);
  for (Index k = 0; k < m; ++k) {
    oracle.directions.col(k) = Eigen::VectorXd::Unit(d, k);
    if (k < oracle.frame_rotation.rows()) {
      oracle.directions.col(k).setZero();
      oracle.directions.col(k).head(oracle.frame_rotation.rows()) = oracle.frame_rotation.col(k);
    }
  }

  const Eigen::VectorXd sqrt_eigs = oracle.population_eigs.cwiseSqrt();
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  SeededRng train_rng(spec.seed, stream_for(spec.replicate, StreamPurpose::Train));
  Eigen::MatrixXd z_train;
  Eigen::MatrixXd X = spike_draw(train_rng, sqrt_eigs, oracle.frame_rotation, spec.n, z_train, m);
  oracle.true_scores = sqrt_eigs.head(m).asDiagonal() * z_train;
  oracle.scaled_scores = oracle.true_scores * inv_sqrt_d;

  SeededRng test_rng(spec.seed, stream_for(spec.replicate, StreamPurpose::Test));
  Eigen::MatrixXd z_test;
  Eigen::MatrixXd Xt = spike_draw(test_rng, sqrt_eigs, oracle.frame_rotation, n_test, z_test, m);
  TestTruth test_truth;
  test_truth.true_scores = sqrt_eigs.head(m).asDiagonal() * z_test;
  test_truth.scaled_scores = test_truth.true_scores * inv_sqrt_d;

  return Dataset{DataMatrix(std::move(X)), DataMatrix(std::move(Xt)), std::move(oracle),
                 std::move(test_truth)};
}

namespace {

void mixture_draw(SeededRng& rng, const MixtureSpec& spec, const Eigen::MatrixXd& means,
                  Index cols, Eigen::MatrixXd& X, std::vector<int>& labels) {
  X.resize(spec.d, cols);
  labels.resize(static_cast<std::size_t>(cols));
  for (Index j = 0; j < cols; ++j) {
    const double u = rng.uniform();
    int g = 2;
    if (u < spec.probs[0]) {
      g = 0;
    } else if (u < spec.probs[0] + spec.probs[1]) {
      g = 1;
    }
    labels[static_cast<std::size_t>(j)] = g;
    for (Index i = 0; i < spec.d; ++i) X(i, j) = means(i, g) + rng.normal();
  }
}

}  // namespace

Dataset gen_mixture(const MixtureSpec& spec, Index n_test) {
  spec.validate();
  check_n_test(n_test);
  const Index d = spec.d;
  constexpr Index m = 2;

  SeededRng mean_rng(spec.seed, stream_for(spec.replicate, StreamPurpose::GroupMeans));
  Eigen::MatrixXd means(d, 3);
  const double levels[3] = {-spec.a, 0.0, spec.a};
  for (Index g = 0; g < 3; ++g) {
    for (Index i = 0; i < d; ++i) means(i, g) = levels[mean_rng.uniform_index(3)];
  }

  OracleTruth oracle;
  oracle.model = ModelKind::Mixture;
  oracle.group_means = means;
  oracle.population_mean = Eigen::VectorXd::Zero(d);
  for (Index g = 0; g < 3; ++g) {
    oracle.population_mean += spec.probs[static_cast<std::size_t>(g)] * means.col(g);
  }

  // Between-group covariance B B^T with B = [sqrt(p_g) (mu_g - mu)]; its
  // nonzero spectrum comes from the 3 x 3 matrix B^T B.
  Eigen::MatrixXd B(d, 3);
  for (Index g = 0; g < 3; ++g) {
    B.col(g) = std::sqrt(spec.probs[static_cast<std::size_t>(g)]) *
               (means.col(g) - oracle.population_mean);
  }
  const SymEig small = sym_eig(gram_matrix(B));
  if (!(small.values(0) > 0.0) || !(small.values(1) > 1e-12 * small.values(0))) {
    throw Error(ErrorKind::DegenerateSpike,
                "group means do not span two spike directions (a = " + std::to_string(spec.a) + ")");
  }

  oracle.directions.resize(d, m);
  for (Index k = 0; k < m; ++k) {
    oracle.directions.col(k) = B * small.vectors.col(k) / std::sqrt(small.values(k));
  }
  canonicalize_signs(oracle.directions);
  oracle.population_eigs = Eigen::VectorXd::Ones(d);
  oracle.sigma_sq.resize(m);
  for (Index k = 0; k < m; ++k) {
    oracle.population_eigs(k) = small.values(k) + 1.0;
    oracle.sigma_sq[static_cast<std::size_t>(k)] = oracle.population_eigs(k) / static_cast<double>(d);
  }
  oracle.tau_sq = static_cast<double>(d - m) / static_cast<double>(d);

  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  const Eigen::RowVectorXd mean_proj = oracle.population_mean.transpose() * oracle.directions;

  SeededRng train_rng(spec.seed, stream_for(spec.replicate, StreamPurpose::Train));
  Eigen::MatrixXd X;
  mixture_draw(train_rng, spec, means, spec.n, X, oracle.labels);
  oracle.true_scores = oracle.directions.transpose() * X;
  oracle.true_scores.colwise() -= mean_proj.transpose();
  oracle.scaled_scores = oracle.true_scores * inv_sqrt_d;

  SeededRng test_rng(spec.seed, stream_for(spec.replicate, StreamPurpose::Test));
  Eigen::MatrixXd Xt;
  TestTruth test_truth;
  mixture_draw(test_rng, spec, means, n_test, Xt, test_truth.labels);
  test_truth.true_scores = oracle.directions.transpose() * Xt;
  test_truth.true_scores.colwise() -= mean_proj.transpose();
  test_truth.scaled_scores = test_truth.true_scores * inv_sqrt_d;

  return Dataset{DataMatrix(std::move(X)), DataMatrix(std::move(Xt)), std::move(oracle),
                 std::move(test_truth)};
}

}  // namespace hdpca
