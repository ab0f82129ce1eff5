#include "dsgpa/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <fmt/core.h>

#include "dsgpa/random.hpp"

namespace dsgpa {

Problem::Problem(Index agents, Index dim, double noise_sigma) : agents_(agents), dim_(dim), noise_sigma_(noise_sigma) {
  if (agents <= 0 || dim <= 0) throw std::invalid_argument("problem needs at least one agent and one dimension");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument(fmt::format("noise sigma must be >= 0, got {}", noise_sigma));
}

double Problem::value(const Vector& x) const {
  double acc = 0.0;
  for (Index i = 0; i < agents_; ++i) acc += local_value(i, x);
  return acc / static_cast<double>(agents_);
}

Vector Problem::grad(const Vector& x) const {
  Vector acc = Vector::Zero(dim_);
  for (Index i = 0; i < agents_; ++i) acc += local_grad(i, x);
  return acc / static_cast<double>(agents_);
}

// ---------------------------------------------------------------------------
// Oracle

namespace {

constexpr double kNoiseTruncation = 6.0;

}  // namespace

void add_oracle_noise(Eigen::Ref<Vector> grad, double sigma, Index i, std::int64_t k, int batch, std::uint64_t seed) {
  if (batch < 1) throw std::invalid_argument(fmt::format("batch size must be >= 1, got {}", batch));
  if (sigma == 0.0) return;
  const Index p = grad.size();
  const double scale = sigma / std::sqrt(static_cast<double>(p)) / static_cast<double>(batch);
  Vector noise = Vector::Zero(p);
  for (int b = 0; b < batch; ++b) {
    SplitMix64 rng(derive_seed(seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(k),
                                      static_cast<std::uint64_t>(b)}));
    std::normal_distribution<double> normal;
    for (Index l = 0; l < p; ++l) {
      double z = normal(rng);
      while (std::abs(z) > kNoiseTruncation) z = normal(rng);
      noise(l) += z;
    }
  }
  grad += scale * noise;
}

OracleSample stochastic_grad(const Problem& prob, Index i, const Vector& x, std::int64_t k, int batch,
                             std::uint64_t seed) {
  if (batch < 1) throw std::invalid_argument(fmt::format("batch size must be >= 1, got {}", batch));
  if (i < 0 || i >= prob.agents()) throw std::invalid_argument(fmt::format("agent index {} out of range", i));
  if (x.size() != prob.dim())
    throw std::invalid_argument(fmt::format("oracle expects dimension {}, got {}", prob.dim(), x.size()));
  OracleSample out;
  out.grad_estimate = prob.local_grad(i, x);
  out.agent = i;
  out.iteration = k;
  out.batch_size = batch;
  add_oracle_noise(out.grad_estimate, prob.noise_sigma(), i, k, batch, seed);
  return out;
}

// ---------------------------------------------------------------------------
// Quadratic

QuadraticProblem::QuadraticProblem(std::vector<Eigen::MatrixXd> hessians, std::vector<Vector> centers,
                                   double noise_sigma)
    : Problem(static_cast<Index>(hessians.size()), hessians.empty() ? 0 : hessians.front().rows(), noise_sigma),
      hessians_(std::move(hessians)),
      centers_(std::move(centers)) {
  if (centers_.size() != hessians_.size()) throw std::invalid_argument("quadratic problem needs one center per Hessian");
  Eigen::MatrixXd sum_a = Eigen::MatrixXd::Zero(dim_, dim_);
  Vector sum_ac = Vector::Zero(dim_);
  for (std::size_t i = 0; i < hessians_.size(); ++i) {
    const auto& a = hessians_[i];
    if (a.rows() != dim_ || a.cols() != dim_ || centers_[i].size() != dim_)
      throw std::invalid_argument("quadratic problem blocks have inconsistent dimensions");
    if (!a.isApprox(a.transpose(), 1e-12)) throw std::invalid_argument("quadratic Hessians must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()))
      throw std::invalid_argument("quadratic Hessians must be positive semidefinite");
    smoothness_ = std::max(smoothness_, es.eigenvalues()(dim_ - 1));
    sum_a += a;
    sum_ac += a * centers_[i];
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sum_a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sum_a, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) > 1e-10 * std::max(1.0, es.eigenvalues()(dim_ - 1))) {
    Vector x_star = ldlt.solve(sum_ac);
    hint_.x_star = x_star;
    hint_.f_star = value(x_star);
  }
}

double QuadraticProblem::local_value(Index i, const Vector& x) const {
  const Vector d = x - centers_[static_cast<std::size_t>(i)];
  return 0.5 * d.dot(hessians_[static_cast<std::size_t>(i)] * d);
}

Vector QuadraticProblem::local_grad(Index i, const Vector& x) const {
  return hessians_[static_cast<std::size_t>(i)] * (x - centers_[static_cast<std::size_t>(i)]);
}

QuadraticProblem QuadraticProblem::translated(const Vector& shift) const {
  std::vector<Vector> moved = centers_;
  for (auto& c : moved) c += shift;
  return QuadraticProblem(hessians_, std::move(moved), noise_sigma_);
}

std::shared_ptr<QuadraticProblem> quadratic_problem(Index n, Index p, double condition_number, double heterogeneity,
                                                    double sigma, std::uint64_t seed) {
  if (n <= 0 || p <= 0) throw std::invalid_argument("quadratic_problem needs n, p >= 1");
  if (!(condition_number >= 1.0)) throw std::invalid_argument("condition number must be >= 1");
  if (!(heterogeneity >= 0.0)) throw std::invalid_argument("heterogeneity must be >= 0");

  Vector spectrum(p);
  for (Index l = 0; l < p; ++l)
    spectrum(l) = p == 1 ? 1.0 : std::pow(condition_number, static_cast<double>(l) / static_cast<double>(p - 1));

  // Fresh distributions per stream: normal_distribution caches a spare
  // variate between calls.
  SplitMix64 base_rng(derive_seed(seed, {0xc0ffeeULL}));
  std::normal_distribution<double> base_normal;
  Vector base(p);
  for (Index l = 0; l < p; ++l) base(l) = base_normal(base_rng);

  std::vector<Eigen::MatrixXd> hessians;
  std::vector<Vector> centers;
  for (Index i = 0; i < n; ++i) {
    SplitMix64 rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    std::normal_distribution<double> normal;
    Eigen::MatrixXd g(p, p);
    for (Index r = 0; r < p; ++r)
      for (Index c = 0; c < p; ++c) g(r, c) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::MatrixXd a = q * spectrum.asDiagonal() * q.transpose();
    a = (0.5 * (a + a.transpose())).eval();
    hessians.push_back(std::move(a));

    Vector c = base;
    for (Index l = 0; l < p; ++l) c(l) += heterogeneity * normal(rng);
    centers.push_back(std::move(c));
  }
  return std::make_shared<QuadraticProblem>(std::move(hessians), std::move(centers), sigma);
}

// ---------------------------------------------------------------------------
// Nonconvex

NonconvexProblem::NonconvexProblem(std::vector<Eigen::MatrixXd> maps, std::vector<Vector> targets, double lambda,
                                   double noise_sigma)
    : Problem(static_cast<Index>(maps.size()), maps.empty() ? 0 : maps.front().cols(), noise_sigma),
      maps_(std::move(maps)),
      targets_(std::move(targets)),
      lambda_(lambda) {
  if (targets_.size() != maps_.size()) throw std::invalid_argument("nonconvex problem needs one target per map");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  double top = 0.0;
  for (std::size_t i = 0; i < maps_.size(); ++i) {
    if (maps_[i].cols() != dim_ || targets_[i].size() != maps_[i].rows())
      throw std::invalid_argument("nonconvex problem blocks have inconsistent dimensions");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(maps_[i].transpose() * maps_[i], Eigen::EigenvaluesOnly);
    top = std::max(top, es.eigenvalues()(dim_ - 1));
  }
  smoothness_ = top + 2.0 * lambda_;
  if (smoothness_ == 0.0) smoothness_ = 1.0;
}

double NonconvexProblem::local_value(Index i, const Vector& x) const {
  const Vector r = maps_[static_cast<std::size_t>(i)] * x - targets_[static_cast<std::size_t>(i)];
  double reg = 0.0;
  for (Index l = 0; l < x.size(); ++l) {
    const double t2 = x(l) * x(l);
    reg += t2 / (1.0 + t2);
  }
  return 0.5 * r.squaredNorm() + lambda_ * reg;
}

Vector NonconvexProblem::local_grad(Index i, const Vector& x) const {
  const auto& m = maps_[static_cast<std::size_t>(i)];
  Vector g = m.transpose() * (m * x - targets_[static_cast<std::size_t>(i)]);
  for (Index l = 0; l < x.size(); ++l) {
    const double d = 1.0 + x(l) * x(l);
    g(l) += lambda_ * 2.0 * x(l) / (d * d);
  }
  return g;
}

std::shared_ptr<NonconvexProblem> nonconvex_problem(Index n, Index p, double sigma, std::uint64_t seed,
                                                    const NonconvexOptions& options) {
  if (n <= 0 || p <= 0) throw std::invalid_argument("nonconvex_problem needs n, p >= 1");
  const Index rows = options.rows > 0 ? options.rows : std::max<Index>(1, p / 2);
  std::vector<Eigen::MatrixXd> maps;
  std::vector<Vector> targets;
  const double entry_scale = 1.0 / std::sqrt(static_cast<double>(p));
  for (Index i = 0; i < n; ++i) {
    SplitMix64 rng(derive_seed(seed, {0x6e63ULL, static_cast<std::uint64_t>(i)}));
    std::normal_distribution<double> normal;
    Eigen::MatrixXd m(rows, p);
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < p; ++c) m(r, c) = entry_scale * normal(rng);
    Vector b(rows);
    for (Index r = 0; r < rows; ++r) b(r) = options.zero_targets ? 0.0 : normal(rng);
    maps.push_back(std::move(m));
    targets.push_back(std::move(b));
  }
  return std::make_shared<NonconvexProblem>(std::move(maps), std::move(targets), options.lambda, sigma);
}

// ---------------------------------------------------------------------------
// Two-layer sigmoid network

namespace {

inline double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

inline double softplus(double s) { return std::max(s, 0.0) + std::log1p(std::exp(-std::abs(s))); }

// max |Sig''| = 1 / (6 sqrt(3)), rounded up.
constexpr double kSigmoidCurvature = 0.0962251;

}  // namespace

double sigmoid_net_smoothness(double input_norm, Index hidden, int classes, double radius) {
  const double s = input_norm;
  const double q = std::sqrt(static_cast<double>(hidden + 1));
  const double rc = std::sqrt(static_cast<double>(classes));
  const double r = radius;
  // Bounds on the directional derivative of the gradient along (D1, D2),
  // split as c1 ||D1|| + c2 ||D2||.
  const double c1 = q * r * s / 16.0 + rc * s / 4.0 + s * s * (r * r / 64.0 + kSigmoidCurvature * r * rc);
  const double c2 = q * q / 4.0 + s * (rc / 4.0 + r * q / 16.0);
  return std::hypot(c1, c2);
}

TwoLayerSigmoidProblem::TwoLayerSigmoidProblem(const Dataset& data, Index n, const SigmoidNetOptions& options)
    : Problem(n,
              options.hidden * (data.dim() + 1) + static_cast<Index>(options.classes) * (options.hidden + 1),
              options.sigma),
      hidden_(options.hidden),
      classes_(options.classes),
      features_(data.dim()) {
  if (options.hidden <= 0 || options.classes <= 0) throw std::invalid_argument("network needs hidden, classes >= 1");
  if (static_cast<Index>(data.labels.size()) != data.samples())
    throw std::invalid_argument("dataset has mismatched label count");
  for (int label : data.labels)
    if (label < 0 || label >= classes_)
      throw std::invalid_argument(fmt::format("label {} outside [0, {})", label, classes_));
  if (data.samples() < n)
    throw std::invalid_argument(fmt::format("{} samples cannot fill {} non-empty shards", data.samples(), n));

  std::vector<Index> order(static_cast<std::size_t>(data.samples()));
  std::iota(order.begin(), order.end(), Index{0});
  SplitMix64 rng(derive_seed(options.shuffle_seed, {0x5368756666ULL}));
  std::shuffle(order.begin(), order.end(), rng);

  const Index base = data.samples() / n;
  const Index extra = data.samples() % n;
  Index cursor = 0;
  double input_norm = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Index m = base + (i < extra ? 1 : 0);
    Shard shard;
    shard.inputs.resize(m, features_ + 1);
    shard.targets = Eigen::MatrixXd::Zero(m, classes_);
    for (Index r = 0; r < m; ++r, ++cursor) {
      const Index src = order[static_cast<std::size_t>(cursor)];
      shard.inputs(r, 0) = 1.0;
      shard.inputs.row(r).tail(features_) = data.features.row(src);
      shard.targets(r, data.labels[static_cast<std::size_t>(src)]) = 1.0;
      input_norm = std::max(input_norm, shard.inputs.row(r).norm());
    }
    shards_.push_back(std::move(shard));
  }
  smoothness_ = sigmoid_net_smoothness(input_norm, hidden_, classes_, options.weight_radius);
}

void TwoLayerSigmoidProblem::forward(const Shard& s, const Vector& z, Eigen::MatrixXd& hidden_out,
                                     Eigen::MatrixXd& logits) const {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> w1(z.data(), hidden_, features_ + 1);
  Eigen::Map<const RowMat> w2(z.data() + hidden_ * (features_ + 1), classes_, hidden_ + 1);
  const Index m = s.inputs.rows();
  hidden_out.resize(m, hidden_ + 1);
  hidden_out.col(0).setOnes();
  hidden_out.rightCols(hidden_) = (s.inputs * w1.transpose()).unaryExpr([](double u) { return sigmoid(u); });
  logits = hidden_out * w2.transpose();
}

double TwoLayerSigmoidProblem::local_value(Index i, const Vector& z) const {
  const Shard& s = shards_[static_cast<std::size_t>(i)];
  Eigen::MatrixXd h, a;
  forward(s, z, h, a);
  double risk = 0.0;
  for (Index r = 0; r < a.rows(); ++r)
    for (Index k = 0; k < a.cols(); ++k) {
      const double t = s.targets(r, k);
      risk += t * softplus(-a(r, k)) + (1.0 - t) * softplus(a(r, k));
    }
  return risk / static_cast<double>(a.rows());
}

Vector TwoLayerSigmoidProblem::local_grad(Index i, const Vector& z) const {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Shard& s = shards_[static_cast<std::size_t>(i)];
  Eigen::MatrixXd h, a;
  forward(s, z, h, a);
  const double inv_m = 1.0 / static_cast<double>(a.rows());

  Eigen::MatrixXd delta = a.unaryExpr([](double v) { return sigmoid(v); }) - s.targets;  // m x C
  Eigen::Map<const RowMat> w2(z.data() + hidden_ * (features_ + 1), classes_, hidden_ + 1);
  Eigen::MatrixXd hid = h.rightCols(hidden_);
  Eigen::MatrixXd back = (delta * w2.rightCols(hidden_)).cwiseProduct(hid.cwiseProduct((1.0 - hid.array()).matrix()));

  Vector g(dim_);
  Eigen::Map<RowMat> g1(g.data(), hidden_, features_ + 1);
  Eigen::Map<RowMat> g2(g.data() + hidden_ * (features_ + 1), classes_, hidden_ + 1);
  g1 = inv_m * back.transpose() * s.inputs;
  g2 = inv_m * delta.transpose() * h;
  return g;
}

double TwoLayerSigmoidProblem::accuracy(const Vector& z, const Dataset& data) const {
  Shard s;
  s.inputs.resize(data.samples(), features_ + 1);
  s.inputs.col(0).setOnes();
  s.inputs.rightCols(features_) = data.features;
  Eigen::MatrixXd h, a;
  forward(s, z, h, a);
  Index hits = 0;
  for (Index r = 0; r < a.rows(); ++r) {
    Index best = 0;
    a.row(r).maxCoeff(&best);
    if (best == data.labels[static_cast<std::size_t>(r)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(a.rows());
}

}  // namespace dsgpa
