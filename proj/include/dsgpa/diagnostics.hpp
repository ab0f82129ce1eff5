#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>

#include <Eigen/Core>

#include "dsgpa/hyperparams.hpp"
#include "dsgpa/netgraph.hpp"
#include "dsgpa/problems.hpp"
#include "dsgpa/types.hpp"

namespace dsgpa {

// The four-term Lyapunov candidate
//   W1 = 1/2 ||x||_K^2
//   W2 = 1/2 ||v + g0 / beta||^2_{Q + kappa1 K}
//   W3 = x^T K (v + g0 / beta)
//   W4 = n (f(xbar) - f*)
// where K centers the agent dimension, Q = R Lambda1^-1 R^T is the
// Laplacian pseudo-inverse and g0 stacks the local gradients at xbar.
struct LyapunovTerms {
  double w1 = 0.0;
  double w2 = 0.0;
  double w3 = 0.0;
  double w4 = 0.0;
  double total = 0.0;
};

struct TraceRecord {
  std::int64_t k = 0;
  double consensus_err = 0.0;
  double grad_norm_2 = 0.0;   // ||grad f(xbar)||^2
  double grad_norm_pg = 0.0;  // ||grad f(xbar)||_{1+gamma}^2
  double fbar = 0.0;          // f(xbar)
  std::optional<LyapunovTerms> lyapunov;
  std::optional<std::int64_t> wall_ns;
};

Vector agent_mean(const Matrix& x);

// (1/n) sum_i ||x_i - xbar||^2.
double consensus_error(const Matrix& x);

// Metric columns of a trace row at iterate x (no Lyapunov, no timing).
TraceRecord measure(std::int64_t k, const Matrix& x, const Problem& prob, Gamma gamma);

// Caches Q = sum over positive Laplacian eigenpairs of u u^T / lambda.
class LyapunovMonitor {
 public:
  explicit LyapunovMonitor(const Network& net);

  const Eigen::MatrixXd& pseudo_inverse() const { return q_; }

  // beta and kappa1 are the values in effect at state.k.
  LyapunovTerms evaluate(const AlgoState& state, const Problem& prob, double beta, double kappa1, double fstar) const;

 private:
  Eigen::MatrixXd q_;
};

// One-shot evaluation with beta from hp.at(state.k) and kappa1 = alpha / beta
// (equal to hp.kappa1 under the theorem1 schedule).
LyapunovTerms lyapunov(const AlgoState& state, const Network& net, const Problem& prob, const HyperParams& hp,
                       double fstar);

enum class RateModel { inv_T, inv_sqrt_nT };

std::string_view to_string(RateModel model);

struct RateFit {
  double exponent = 0.0;  // least-squares slope of log(metric) against log(T)
  double intercept = 0.0;
  double r2 = 0.0;
  double expected = 0.0;  // -1 for inv_T, -1/2 for inv_sqrt_nT
};

// Needs at least three points with positive T and metric.
RateFit rate_fit(std::span<const std::pair<double, double>> points, RateModel model);

}  // namespace dsgpa
