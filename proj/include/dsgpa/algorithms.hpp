#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "dsgpa/diagnostics.hpp"
#include "dsgpa/hyperparams.hpp"
#include "dsgpa/netgraph.hpp"
#include "dsgpa/problems.hpp"

namespace dsgpa {

enum class Algorithm {
  dsgpa_f_pb,  // primal-dual with powerball gradient; honors hp.mode
  dsgpa_f,     // same recursion, gamma forced to 1
  dsgpa_t,     // gamma forced to 1, time-varying step sizes
  d_sgd,
  d_sgt,
  dm_sgd,
  c_sgd,
};

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::dsgpa_f_pb, Algorithm::dsgpa_f, Algorithm::dsgpa_t,
                                               Algorithm::d_sgd,      Algorithm::d_sgt,   Algorithm::dm_sgd,
                                               Algorithm::c_sgd};

std::string_view to_string(Algorithm algo);
Algorithm parse_algorithm(std::string_view text);
bool uses_powerball(Algorithm algo);

// Non-finite state produced at `iteration`.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::int64_t iteration, const std::string& what);
  std::int64_t iteration() const { return iteration_; }

 private:
  std::int64_t iteration_;
};

// x0 rows independent standard normal, v0 = 0, k = 0.
AlgoState initial_state(Index n, Index p, std::uint64_t seed);

// One synchronous round of the primal-dual recursion. With Lx computed from
// the pre-round snapshot and g_i the mini-batch oracle output at x_i:
//   x_i <- x_i - eta (alpha (Lx)_i + beta v_i + powerball(g_i, gamma))
//   v_i <- v_i + eta beta (Lx)_i
// Step sizes come from hp.at(state.k); `seed` keys the oracle stream.
AlgoState dsgpa_pb_step(const AlgoState& state, const Network& net, const Problem& prob, const HyperParams& hp,
                        std::uint64_t seed);

struct RunOptions {
  std::int64_t iterations = 1;
  std::uint64_t seed = 0;
  std::int64_t trace_every = 1;
  // Defaults to initial_state(...) drawn from the run seed.
  std::optional<Matrix> x0;
  // When set, every trace row carries the Lyapunov terms against this f*.
  std::optional<double> lyapunov_fstar;
  // Accumulate per-iteration means of the metrics over k = 0..T-1.
  bool time_averages = false;
  bool record_wall_time = false;
};

struct TimeAverages {
  std::int64_t count = 0;
  double consensus_err = 0.0;
  double grad_norm_2 = 0.0;
  double grad_norm_pg = 0.0;
  double fbar = 0.0;
};

struct RunResult {
  std::vector<TraceRecord> trace;
  AlgoState final_state;
  bool diverged = false;
  std::int64_t diverged_at = -1;
  TimeAverages averages;
};

// T synchronous rounds. Trace rows at k = 0, every trace_every rounds, and
// k = T. A non-finite state ends the run early with diverged set.
RunResult run(Algorithm algo, const Network& net, const Problem& prob, const HyperParams& hp, const RunOptions& opts);

// Seed streams derived from a run seed.
std::uint64_t oracle_seed(std::uint64_t run_seed);
std::uint64_t init_seed(std::uint64_t run_seed);

}  // namespace dsgpa
