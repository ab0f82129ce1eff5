#include "dsgpa/hyperparams.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>

#include <fmt/core.h>

namespace dsgpa {

std::string_view to_string(ScheduleMode mode) {
  switch (mode) {
    case ScheduleMode::fixed: return "fixed";
    case ScheduleMode::theorem1: return "theorem1";
    case ScheduleMode::time_varying: return "time_varying";
  }
  return "fixed";
}

ScheduleMode parse_schedule_mode(std::string_view text) {
  if (text == "fixed") return ScheduleMode::fixed;
  if (text == "theorem1") return ScheduleMode::theorem1;
  if (text == "time_varying") return ScheduleMode::time_varying;
  throw std::invalid_argument(fmt::format("unknown schedule '{}' (expected fixed, theorem1 or time_varying)", text));
}

StepSizes HyperParams::at(std::int64_t k) const {
  if (mode != ScheduleMode::time_varying) return {eta, alpha, beta};
  const double growth = std::pow(static_cast<double>(k + 1), decay);
  return {eta / growth, alpha * growth, beta * growth};
}

Theorem1Bounds theorem1_bounds(const Network& net, double kappa1) {
  Theorem1Bounds b;
  b.kappa1_min = net.rho2() > 0.0 ? 1.0 / net.rho2() + 1.0 : INFINITY;
  const double num = (kappa1 - 1.0) * net.rho2() - 1.0;
  const double den = net.rho() + (2.0 * kappa1 * kappa1 + 1.0) * net.rho_sq() + 1.0;
  b.kappa2_max = std::min(num / den, 0.2);
  return b;
}

HyperParams theorem1_params(Index n, std::int64_t horizon, double kappa1, double kappa2) {
  if (n <= 0 || horizon <= 0) throw ScheduleError("theorem1 schedule needs n >= 1 and T >= 1");
  HyperParams hp;
  hp.mode = ScheduleMode::theorem1;
  hp.kappa1 = kappa1;
  hp.kappa2 = kappa2;
  hp.beta = kappa2 * std::sqrt(static_cast<double>(horizon)) / std::sqrt(static_cast<double>(n));
  hp.alpha = kappa1 * hp.beta;
  hp.eta = kappa2 / hp.beta;
  return hp;
}

HyperParams theorem1_schedule(const Network& net, std::int64_t horizon, double kappa1, double kappa2) {
  if (!net.spectrally_connected() || net.size() < 2)
    throw ScheduleError("theorem1 schedule needs a connected network with at least two agents");
  const Theorem1Bounds b = theorem1_bounds(net, kappa1);
  if (!(kappa1 > b.kappa1_min))
    throw ScheduleError(fmt::format("kappa1={} must exceed 1/rho2(L) + 1 = {}", kappa1, b.kappa1_min));
  if (!(kappa2 > 0.0 && kappa2 < b.kappa2_max))
    throw ScheduleError(fmt::format("kappa2={} must lie in the open interval (0, {})", kappa2, b.kappa2_max));
  const double n = static_cast<double>(net.size());
  if (static_cast<double>(horizon) <= n * n * n)
    std::cerr << fmt::format("warning: horizon T={} does not exceed n^3={}; rate guarantees assume T > n^3\n", horizon,
                             n * n * n);
  return theorem1_params(net.size(), horizon, kappa1, kappa2);
}

}  // namespace dsgpa
