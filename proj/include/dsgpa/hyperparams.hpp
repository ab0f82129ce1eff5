#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>

#include "dsgpa/netgraph.hpp"
#include "dsgpa/powerball.hpp"
#include "dsgpa/types.hpp"

namespace dsgpa {

enum class ScheduleMode { fixed, theorem1, time_varying };

std::string_view to_string(ScheduleMode mode);
ScheduleMode parse_schedule_mode(std::string_view text);

// Step sizes in effect at one iteration.
struct StepSizes {
  double eta = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

struct HyperParams {
  double alpha = 1.0;
  double beta = 1.0;
  double eta = 0.01;
  Gamma gamma{1.0};
  int batch = 1;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  ScheduleMode mode = ScheduleMode::fixed;
  // Exponent of the time-varying schedule: eta_k = eta / (k+1)^decay,
  // alpha_k = alpha (k+1)^decay, beta_k = beta (k+1)^decay.
  double decay = 1e-5;
  // Heavy-ball coefficient for dm_sgd.
  double momentum = 0.8;

  StepSizes at(std::int64_t k) const;
};

// Feasible region for the coupled schedule on a given network:
// kappa1 > kappa1_min, 0 < kappa2 < kappa2_max(kappa1).
struct Theorem1Bounds {
  double kappa1_min = 0.0;
  double kappa2_max = 0.0;
};

Theorem1Bounds theorem1_bounds(const Network& net, double kappa1);

class ScheduleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// beta = kappa2 sqrt(T / n), alpha = kappa1 beta, eta = kappa2 / beta.
// No feasibility checks.
HyperParams theorem1_params(Index n, std::int64_t horizon, double kappa1, double kappa2);

// As theorem1_params, after checking kappa1 and kappa2 against
// theorem1_bounds(net, kappa1). Warns on stderr when horizon <= n^3.
HyperParams theorem1_schedule(const Network& net, std::int64_t horizon, double kappa1, double kappa2);

// Per-agent primal rows x and dual rows v after k rounds.
struct AlgoState {
  Matrix x;
  Matrix v;
  std::int64_t k = 0;
};

}  // namespace dsgpa
