#pragma once

#include <stdexcept>

#include "dsgpa/types.hpp"

namespace dsgpa {

// Powerball exponent. Any value in [0, 1] is accepted; the convergence
// theory only covers [1/2, 1].
class Gamma {
 public:
  constexpr Gamma() = default;
  explicit Gamma(double value);

  double value() const { return value_; }
  bool in_theory_range() const { return value_ >= 0.5; }
  bool is_identity() const { return value_ == 1.0; }

  friend bool operator==(Gamma a, Gamma b) { return a.value_ == b.value_; }

 private:
  double value_ = 1.0;
};

// Elementwise sgn(v_l) |v_l|^gamma with sgn(0) 0^gamma = 0. gamma = 1 returns
// the input unchanged; gamma = 0 is the sign function.
Vector powerball(const Vector& v, Gamma gamma);
void powerball_inplace(Eigen::Ref<Vector> v, Gamma gamma);

// (sum_l |v_l|^p)^(1/p) for p >= 1.
double pnorm(const Vector& v, double p);

// ||v||_p^2. At p = 2 this is exactly v.squaredNorm().
double pnorm_squared(const Vector& v, double p);

// ||v||_{1+gamma}^2 - ||powerball(v, gamma)||^2 for gamma in [1/2, 1).
double lemma1_gap(const Vector& v, Gamma gamma);

// Hoelder bound on the powerball energy:
// ||powerball(v, gamma)||^2 <= dim^((1-gamma)/(1+gamma)) ||v||_{1+gamma}^(2 gamma).
double powerball_holder_bound(const Vector& v, Gamma gamma);

}  // namespace dsgpa
