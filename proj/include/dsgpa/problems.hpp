#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dsgpa/datasets.hpp"
#include "dsgpa/types.hpp"

namespace dsgpa {

// Known optimum, when the problem can certify one.
struct OptimumHint {
  std::optional<Vector> x_star;
  std::optional<double> f_star;
};

// Global objective f(x) = (1/n) sum_i f_i(x) over n agents. Each f_i is
// smooth with the declared constant and comes with an additive noise model of
// standard deviation noise_sigma() for the stochastic oracle.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string name() const = 0;
  virtual double local_value(Index i, const Vector& x) const = 0;
  virtual Vector local_grad(Index i, const Vector& x) const = 0;

  Index agents() const { return agents_; }
  Index dim() const { return dim_; }
  double smoothness() const { return smoothness_; }
  double noise_sigma() const { return noise_sigma_; }
  const OptimumHint& optimum_hint() const { return hint_; }

  double value(const Vector& x) const;
  Vector grad(const Vector& x) const;

 protected:
  Problem(Index agents, Index dim, double noise_sigma);

  Index agents_;
  Index dim_;
  double smoothness_ = 0.0;
  double noise_sigma_;
  OptimumHint hint_;
};

using ProblemPtr = std::shared_ptr<const Problem>;

struct OracleSample {
  Vector grad_estimate;
  Index agent = 0;
  std::int64_t iteration = 0;
  int batch_size = 1;
};

// Mini-batch stochastic gradient: local_grad(i, x) plus the mean of B
// independent noise draws. Draw b is generated from a stream keyed by
// (seed, i, k, b) alone. Noise is isotropic Gaussian with per-coordinate
// deviation sigma / sqrt(p), truncated at 6 deviations, so that
// E||noise||^2 <= sigma^2.
OracleSample stochastic_grad(const Problem& prob, Index i, const Vector& x, std::int64_t k, int batch,
                             std::uint64_t seed);

// Adds the mini-batch noise term for (seed, i, k) to `grad` in place.
void add_oracle_noise(Eigen::Ref<Vector> grad, double sigma, Index i, std::int64_t k, int batch, std::uint64_t seed);

// f_i(x) = 1/2 (x - c_i)^T A_i (x - c_i).
class QuadraticProblem final : public Problem {
 public:
  QuadraticProblem(std::vector<Eigen::MatrixXd> hessians, std::vector<Vector> centers, double noise_sigma);

  std::string name() const override { return "quadratic"; }
  double local_value(Index i, const Vector& x) const override;
  Vector local_grad(Index i, const Vector& x) const override;

  const Eigen::MatrixXd& hessian(Index i) const { return hessians_[static_cast<std::size_t>(i)]; }
  const Vector& center(Index i) const { return centers_[static_cast<std::size_t>(i)]; }

  // Same Hessians with every center moved by `shift`.
  QuadraticProblem translated(const Vector& shift) const;

 private:
  std::vector<Eigen::MatrixXd> hessians_;
  std::vector<Vector> centers_;
};

// Randomly rotated quadratics whose Hessian spectra are log-spaced in
// [1, condition_number] (both ends attained when p >= 2). Centers are a
// shared random point plus heterogeneity times independent N(0, I)
// offsets. The minimizer (sum A_i)^-1 sum A_i c_i is stored in the hint.
std::shared_ptr<QuadraticProblem> quadratic_problem(Index n, Index p, double condition_number, double heterogeneity,
                                                    double sigma, std::uint64_t seed);

struct NonconvexOptions {
  Index rows = 0;          // rows of each M_i; 0 picks max(1, p / 2)
  double lambda = 1.0;     // weight of the sum_l x_l^2 / (1 + x_l^2) term
  bool zero_targets = false;
};

// f_i(x) = 1/2 ||M_i x - b_i||^2 + lambda sum_l x_l^2 / (1 + x_l^2).
// The regularizer has second derivative in [-1/2, 2], so L_f is
// max_i ||M_i^T M_i|| + 2 lambda.
class NonconvexProblem final : public Problem {
 public:
  NonconvexProblem(std::vector<Eigen::MatrixXd> maps, std::vector<Vector> targets, double lambda, double noise_sigma);

  std::string name() const override { return "nonconvex"; }
  double local_value(Index i, const Vector& x) const override;
  Vector local_grad(Index i, const Vector& x) const override;

  const Eigen::MatrixXd& map(Index i) const { return maps_[static_cast<std::size_t>(i)]; }
  const Vector& target(Index i) const { return targets_[static_cast<std::size_t>(i)]; }
  double lambda() const { return lambda_; }

 private:
  std::vector<Eigen::MatrixXd> maps_;
  std::vector<Vector> targets_;
  double lambda_;
};

std::shared_ptr<NonconvexProblem> nonconvex_problem(Index n, Index p, double sigma, std::uint64_t seed,
                                                    const NonconvexOptions& options = {});

struct SigmoidNetOptions {
  Index hidden = 50;
  int classes = 10;
  double sigma = 0.0;
  std::uint64_t shuffle_seed = 0;
  // Declared smoothness holds on the set where the output-layer weights have
  // Frobenius norm at most this radius.
  double weight_radius = 10.0;
};

// Per-agent empirical cross-entropy risk of a two-layer sigmoid network
//   y_k(x, z) = Sig(sum_j z2_{k,j} Sig(sum_i z1_{j,i} x_i)),
// with x_0 = 1 and hidden_0 = 1 as bias inputs. The decision vector is z1
// (hidden x (d+1), row-major) followed by z2 (classes x (hidden+1)).
class TwoLayerSigmoidProblem final : public Problem {
 public:
  TwoLayerSigmoidProblem(const Dataset& data, Index n, const SigmoidNetOptions& options = {});

  std::string name() const override { return "two_layer_sigmoid"; }
  double local_value(Index i, const Vector& z) const override;
  Vector local_grad(Index i, const Vector& z) const override;

  Index hidden() const { return hidden_; }
  int classes() const { return classes_; }
  Index features() const { return features_; }
  Index shard_size(Index i) const { return shards_[static_cast<std::size_t>(i)].inputs.rows(); }

  // Fraction of samples in `data` whose arg-max output matches the label.
  double accuracy(const Vector& z, const Dataset& data) const;

 private:
  struct Shard {
    Eigen::MatrixXd inputs;   // m x (d+1), bias column first
    Eigen::MatrixXd targets;  // m x classes, one-hot
  };

  void forward(const Shard& s, const Vector& z, Eigen::MatrixXd& hidden_out, Eigen::MatrixXd& logits) const;

  Index hidden_;
  int classes_;
  Index features_;
  std::vector<Shard> shards_;
};

// Certified Hessian-norm bound of the per-sample risk on ||z2||_F <= radius,
// for inputs with ||(1, x)|| <= input_norm.
double sigmoid_net_smoothness(double input_norm, Index hidden, int classes, double radius);

}  // namespace dsgpa
