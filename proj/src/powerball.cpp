#include "dsgpa/powerball.hpp"

#include <cmath>

#include <fmt/core.h>

namespace dsgpa {

Gamma::Gamma(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) throw std::invalid_argument(fmt::format("gamma must lie in [0, 1], got {}", value));
}

namespace {

inline double signed_power(double x, double gamma) {
  if (x == 0.0) return 0.0;
  const double mag = gamma == 0.0 ? 1.0 : std::pow(std::abs(x), gamma);
  return std::signbit(x) ? -mag : mag;
}

}  // namespace

void powerball_inplace(Eigen::Ref<Vector> v, Gamma gamma) {
  if (gamma.is_identity()) return;
  const double g = gamma.value();
  for (Index l = 0; l < v.size(); ++l) v(l) = signed_power(v(l), g);
}

Vector powerball(const Vector& v, Gamma gamma) {
  Vector out = v;
  powerball_inplace(out, gamma);
  return out;
}

double pnorm(const Vector& v, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument(fmt::format("p-norm needs p >= 1, got {}", p));
  if (p == 2.0) return v.norm();
  if (p == 1.0) return v.lpNorm<1>();
  const double scale = v.lpNorm<Eigen::Infinity>();
  if (scale == 0.0) return 0.0;
  double acc = 0.0;
  for (Index l = 0; l < v.size(); ++l) acc += std::pow(std::abs(v(l)) / scale, p);
  return scale * std::pow(acc, 1.0 / p);
}

double pnorm_squared(const Vector& v, double p) {
  if (p == 2.0) return v.squaredNorm();
  const double r = pnorm(v, p);
  return r * r;
}

double lemma1_gap(const Vector& v, Gamma gamma) {
  const double g = gamma.value();
  if (!(g >= 0.5 && g < 1.0)) throw std::invalid_argument(fmt::format("lemma1_gap needs gamma in [1/2, 1), got {}", g));
  return pnorm_squared(v, 1.0 + g) - powerball(v, gamma).squaredNorm();
}

double powerball_holder_bound(const Vector& v, Gamma gamma) {
  const double g = gamma.value();
  const double ones = std::pow(static_cast<double>(v.size()), (1.0 - g) / (1.0 + g));
  return ones * std::pow(pnorm(v, 1.0 + g), 2.0 * g);
}

}  // namespace dsgpa
