#include "dsgpa/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

namespace dsgpa {

Vector agent_mean(const Matrix& x) { return x.colwise().mean().transpose(); }

double consensus_error(const Matrix& x) {
  if (x.rows() == 0) return 0.0;
  const Vector mean = agent_mean(x);
  double acc = 0.0;
  for (Index i = 0; i < x.rows(); ++i) acc += (x.row(i).transpose() - mean).squaredNorm();
  return acc / static_cast<double>(x.rows());
}

TraceRecord measure(std::int64_t k, const Matrix& x, const Problem& prob, Gamma gamma) {
  TraceRecord rec;
  rec.k = k;
  rec.consensus_err = consensus_error(x);
  const Vector xbar = agent_mean(x);
  const Vector g = prob.grad(xbar);
  rec.grad_norm_2 = g.squaredNorm();
  rec.grad_norm_pg = pnorm_squared(g, 1.0 + gamma.value());
  rec.fbar = prob.value(xbar);
  return rec;
}

LyapunovMonitor::LyapunovMonitor(const Network& net) {
  const Index n = net.size();
  q_ = Eigen::MatrixXd::Zero(n, n);
  const auto& lambda = net.eigenvalues();
  const auto& u = net.eigenvectors();
  for (Index l = 0; l < n; ++l)
    if (lambda(l) > 0.0) q_.noalias() += (1.0 / lambda(l)) * u.col(l) * u.col(l).transpose();
}

LyapunovTerms LyapunovMonitor::evaluate(const AlgoState& state, const Problem& prob, double beta, double kappa1,
                                        double fstar) const {
  if (beta == 0.0) throw std::invalid_argument("lyapunov: beta must be nonzero");
  if (!std::isfinite(fstar)) throw std::invalid_argument("lyapunov: f* must be finite");
  const Index n = state.x.rows();
  if (n != q_.rows() || state.v.rows() != n || state.v.cols() != state.x.cols())
    throw std::invalid_argument("lyapunov: state does not match the network");

  const Vector xbar = agent_mean(state.x);
  Matrix z = state.v;
  for (Index i = 0; i < n; ++i) z.row(i) += prob.local_grad(i, xbar).transpose() / beta;

  // K M subtracts the agent mean from each column.
  auto centered = [](const Matrix& m) {
    Matrix c = m;
    c.rowwise() -= m.colwise().mean();
    return c;
  };
  const Matrix kx = centered(state.x);
  const Matrix kz = centered(z);

  LyapunovTerms t;
  t.w1 = 0.5 * kx.squaredNorm();
  const Matrix qz = q_ * z;
  t.w2 = 0.5 * (z.cwiseProduct(qz).sum() + kappa1 * kz.squaredNorm());
  t.w3 = kx.cwiseProduct(z).sum();
  t.w4 = static_cast<double>(n) * (prob.value(xbar) - fstar);
  t.total = t.w1 + t.w2 + t.w3 + t.w4;
  return t;
}

LyapunovTerms lyapunov(const AlgoState& state, const Network& net, const Problem& prob, const HyperParams& hp,
                       double fstar) {
  const StepSizes s = hp.at(state.k);
  if (s.beta == 0.0) throw std::invalid_argument("lyapunov: beta must be nonzero");
  return LyapunovMonitor(net).evaluate(state, prob, s.beta, s.alpha / s.beta, fstar);
}

std::string_view to_string(RateModel model) { return model == RateModel::inv_T ? "inv_T" : "inv_sqrt_nT"; }

RateFit rate_fit(std::span<const std::pair<double, double>> points, RateModel model) {
  if (points.size() < 3) throw std::invalid_argument("rate_fit needs at least three points");
  const double m = static_cast<double>(points.size());
  double sx = 0, sy = 0;
  for (auto [t, metric] : points) {
    if (!(t > 0.0)) throw std::invalid_argument(fmt::format("rate_fit: horizon must be positive, got {}", t));
    if (!(metric > 0.0)) throw std::invalid_argument(fmt::format("rate_fit: metric must be positive, got {}", metric));
    sx += std::log(t);
    sy += std::log(metric);
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (auto [t, metric] : points) {
    const double dx = std::log(t) - mx, dy = std::log(metric) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("rate_fit: horizons must not all coincide");

  RateFit fit;
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  fit.expected = model == RateModel::inv_T ? -1.0 : -0.5;
  return fit;
}

}  // namespace dsgpa
