#include "dsgpa/algorithms.hpp"

#include <chrono>
#include <iostream>
#include <random>
#include <string>

#include <fmt/core.h>

#include "dsgpa/random.hpp"

namespace dsgpa {

std::string_view to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::dsgpa_f_pb: return "dsgpa_f_pb";
    case Algorithm::dsgpa_f: return "dsgpa_f";
    case Algorithm::dsgpa_t: return "dsgpa_t";
    case Algorithm::d_sgd: return "d_sgd";
    case Algorithm::d_sgt: return "d_sgt";
    case Algorithm::dm_sgd: return "dm_sgd";
    case Algorithm::c_sgd: return "c_sgd";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view text) {
  for (Algorithm a : kAllAlgorithms)
    if (to_string(a) == text) return a;
  throw std::invalid_argument(fmt::format("unknown algorithm '{}'", text));
}

bool uses_powerball(Algorithm algo) { return algo == Algorithm::dsgpa_f_pb; }

DivergenceError::DivergenceError(std::int64_t iteration, const std::string& what)
    : std::runtime_error(what), iteration_(iteration) {}

std::uint64_t oracle_seed(std::uint64_t run_seed) { return derive_seed(run_seed, {1}); }
std::uint64_t init_seed(std::uint64_t run_seed) { return derive_seed(run_seed, {2}); }

AlgoState initial_state(Index n, Index p, std::uint64_t seed) {
  AlgoState s;
  s.x.resize(n, p);
  SplitMix64 rng(seed);
  std::normal_distribution<double> normal;
  for (Index i = 0; i < n; ++i)
    for (Index l = 0; l < p; ++l) s.x(i, l) = normal(rng);
  s.v = Matrix::Zero(n, p);
  return s;
}

namespace {

void check_dims(const AlgoState& state, const Network& net, const Problem& prob) {
  if (prob.agents() != net.size())
    throw std::invalid_argument(fmt::format("problem has {} agents but network has {}", prob.agents(), net.size()));
  if (state.x.rows() != net.size() || state.x.cols() != prob.dim() || state.v.rows() != state.x.rows() ||
      state.v.cols() != state.x.cols())
    throw std::invalid_argument(fmt::format("state is {}x{} (dual {}x{}), expected {}x{}", state.x.rows(),
                                            state.x.cols(), state.v.rows(), state.v.cols(), net.size(), prob.dim()));
}

// Row i: local gradient at x_i plus the mini-batch noise for (i, k).
Matrix oracle_rows(const Matrix& x, const Problem& prob, std::int64_t k, int batch, std::uint64_t seed) {
  Matrix g(x.rows(), x.cols());
  Vector gi;
  for (Index i = 0; i < x.rows(); ++i) {
    gi = prob.local_grad(i, x.row(i).transpose());
    add_oracle_noise(gi, prob.noise_sigma(), i, k, batch, seed);
    g.row(i) = gi.transpose();
  }
  return g;
}

void require_finite(const Matrix& m, std::int64_t iteration, std::string_view what) {
  if (!m.allFinite())
    throw DivergenceError(iteration, fmt::format("non-finite {} at iteration {}", what, iteration));
}

// Mixing W = I - L / (rho(L) + 1): symmetric, doubly stochastic, positive
// diagonal.
Matrix mix(const Network& net, const Matrix& x) { return x - net.laplacian_apply(x) / (net.rho() + 1.0); }

}  // namespace

AlgoState dsgpa_pb_step(const AlgoState& state, const Network& net, const Problem& prob, const HyperParams& hp,
                        std::uint64_t seed) {
  check_dims(state, net, prob);
  const StepSizes s = hp.at(state.k);
  const Matrix lx = net.laplacian_apply(state.x);
  Matrix g = oracle_rows(state.x, prob, state.k, hp.batch, seed);
  for (Index i = 0; i < g.rows(); ++i) {
    auto row = g.row(i).transpose();
    powerball_inplace(row, hp.gamma);
  }

  AlgoState next;
  next.k = state.k + 1;
  next.x = state.x - s.eta * (s.alpha * lx + s.beta * state.v + g);
  next.v = state.v + (s.eta * s.beta) * lx;
  require_finite(next.x, next.k, "primal state");
  require_finite(next.v, next.k, "dual state");
  return next;
}

namespace {

// Algorithm-specific round driver; owns any auxiliary state.
class Stepper {
 public:
  Stepper(Algorithm algo, const Network& net, const Problem& prob, const HyperParams& hp, std::uint64_t seed)
      : algo_(algo), net_(net), prob_(prob), hp_(hp), seed_(seed) {}

  void step(AlgoState& st) {
    switch (algo_) {
      case Algorithm::dsgpa_f_pb:
      case Algorithm::dsgpa_f:
      case Algorithm::dsgpa_t: st = dsgpa_pb_step(st, net_, prob_, hp_, seed_); return;
      case Algorithm::d_sgd: step_d_sgd(st); break;
      case Algorithm::d_sgt: step_d_sgt(st); break;
      case Algorithm::dm_sgd: step_dm_sgd(st); break;
      case Algorithm::c_sgd: step_c_sgd(st); break;
    }
    ++st.k;
    require_finite(st.x, st.k, "primal state");
  }

 private:
  Matrix gradients(const AlgoState& st) const { return oracle_rows(st.x, prob_, st.k, hp_.batch, seed_); }

  void step_d_sgd(AlgoState& st) {
    const double eta = hp_.at(st.k).eta;
    st.x = mix(net_, st.x) - eta * gradients(st);
  }

  // y_k = W y_{k-1} + g_k - g_{k-1} (y_0 = g_0); x_{k+1} = W x_k - eta y_k.
  void step_d_sgt(AlgoState& st) {
    const double eta = hp_.at(st.k).eta;
    Matrix g = gradients(st);
    if (!tracking_started_) {
      tracker_ = g;
      tracking_started_ = true;
    } else {
      tracker_ = mix(net_, tracker_) + g - prev_grad_;
    }
    prev_grad_ = std::move(g);
    st.x = mix(net_, st.x) - eta * tracker_;
  }

  void step_dm_sgd(AlgoState& st) {
    const double eta = hp_.at(st.k).eta;
    Matrix g = gradients(st);
    if (momentum_.size() == 0) momentum_ = Matrix::Zero(g.rows(), g.cols());
    momentum_ = hp_.momentum * momentum_ + g;
    st.x = mix(net_, st.x) - eta * momentum_;
  }

  // Every row holds the single centralized iterate.
  void step_c_sgd(AlgoState& st) {
    const double eta = hp_.at(st.k).eta;
    const Vector x = st.x.row(0).transpose();
    Vector g = Vector::Zero(x.size());
    Vector gi;
    for (Index i = 0; i < st.x.rows(); ++i) {
      gi = prob_.local_grad(i, x);
      add_oracle_noise(gi, prob_.noise_sigma(), i, st.k, hp_.batch, seed_);
      g += gi;
    }
    g /= static_cast<double>(st.x.rows());
    const Vector next = x - eta * g;
    st.x.rowwise() = next.transpose();
  }

  Algorithm algo_;
  const Network& net_;
  const Problem& prob_;
  HyperParams hp_;
  std::uint64_t seed_;

  bool tracking_started_ = false;
  Matrix tracker_;
  Matrix prev_grad_;
  Matrix momentum_;
};

HyperParams effective_params(Algorithm algo, const HyperParams& hp) {
  HyperParams out = hp;
  if (!uses_powerball(algo)) out.gamma = Gamma(1.0);
  if (algo == Algorithm::dsgpa_t) out.mode = ScheduleMode::time_varying;
  return out;
}

}  // namespace

RunResult run(Algorithm algo, const Network& net, const Problem& prob, const HyperParams& hp, const RunOptions& opts) {
  if (opts.iterations < 1) throw std::invalid_argument(fmt::format("run needs T >= 1, got {}", opts.iterations));
  if (opts.trace_every < 1) throw std::invalid_argument(fmt::format("trace_every must be >= 1, got {}", opts.trace_every));
  if (hp.batch < 1) throw std::invalid_argument(fmt::format("batch size must be >= 1, got {}", hp.batch));
  if (prob.agents() != net.size())
    throw std::invalid_argument(fmt::format("problem has {} agents but network has {}", prob.agents(), net.size()));

  const HyperParams params = effective_params(algo, hp);
  if (uses_powerball(algo) && !params.gamma.in_theory_range())
    std::cerr << fmt::format("warning: gamma={} is below the analysed range [0.5, 1]\n", params.gamma.value());

  RunResult result;
  AlgoState& state = result.final_state;
  if (opts.x0) {
    if (opts.x0->rows() != net.size() || opts.x0->cols() != prob.dim())
      throw std::invalid_argument(fmt::format("x0 is {}x{}, expected {}x{}", opts.x0->rows(), opts.x0->cols(),
                                              net.size(), prob.dim()));
    state.x = *opts.x0;
    state.v = Matrix::Zero(net.size(), prob.dim());
  } else {
    state = initial_state(net.size(), prob.dim(), init_seed(opts.seed));
  }
  if (algo == Algorithm::c_sgd) {
    const Vector mean = agent_mean(state.x);
    state.x.rowwise() = mean.transpose();
  }

  std::optional<LyapunovMonitor> monitor;
  if (opts.lyapunov_fstar) monitor.emplace(net);

  const auto start = std::chrono::steady_clock::now();
  auto record = [&](const TraceRecord* known) {
    TraceRecord rec = known ? *known : measure(state.k, state.x, prob, params.gamma);
    if (monitor) {
      const StepSizes s = params.at(state.k);
      rec.lyapunov = monitor->evaluate(state, prob, s.beta, s.alpha / s.beta, *opts.lyapunov_fstar);
    }
    if (opts.record_wall_time)
      rec.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count();
    result.trace.push_back(std::move(rec));
  };

  Stepper stepper(algo, net, prob, params, oracle_seed(opts.seed));
  TimeAverages& avg = result.averages;
  for (std::int64_t k = 0; k < opts.iterations; ++k) {
    std::optional<TraceRecord> current;
    if (opts.time_averages) {
      current = measure(state.k, state.x, prob, params.gamma);
      avg.consensus_err += current->consensus_err;
      avg.grad_norm_2 += current->grad_norm_2;
      avg.grad_norm_pg += current->grad_norm_pg;
      avg.fbar += current->fbar;
      ++avg.count;
    }
    if (k == 0) record(current ? &*current : nullptr);

    try {
      stepper.step(state);
    } catch (const DivergenceError& e) {
      result.diverged = true;
      result.diverged_at = e.iteration();
      break;
    }
    if (state.k % opts.trace_every == 0 || state.k == opts.iterations) record(nullptr);
  }

  if (avg.count > 0) {
    const double c = static_cast<double>(avg.count);
    avg.consensus_err /= c;
    avg.grad_norm_2 /= c;
    avg.grad_norm_pg /= c;
    avg.fbar /= c;
  }
  return result;
}

}  // namespace dsgpa
