#pragma once

#include "rng.hpp"

namespace prefts {

enum class LinkKind { kSigmoid, kScaledLinear };

// Monotone link from a reward gap to a preference probability. The sigmoid
// gives the Bradley-Terry-Luce model; the scaled-linear variant is
// Phi(x) = 1/2 + x/(2R) clipped to [0, 1]. Both are skew-symmetric
// (Phi(x) + Phi(-x) = 1), which the likelihood form relies on.
struct LinkFunction {
  LinkKind kind = LinkKind::kSigmoid;
  double range = 0.0;  // R, scaled-linear only

  static LinkFunction sigmoid() { return {LinkKind::kSigmoid, 0.0}; }
  static LinkFunction scaled_linear(double range);
};

// kappa^{-1} <= Phi'(x) <= kappa_bar^{-1} on [-H, H].
struct DerivativeBounds {
  double kappa = 0.0;
  double kappa_bar = 0.0;
};

double link_eval(const LinkFunction& link, double x);
double link_derivative(const LinkFunction& link, double x);

// Tightest (kappa, kappa_bar) over [-H, H]. For the sigmoid these are
// 1/(sigma(H)(1-sigma(H))) and 4; for scaled-linear with R >= H both equal
// 2R. A clipped region inside (-H, H) (R < H) makes the inverse bound
// undefined and raises ConfigError.
DerivativeBounds derivative_bounds(const LinkFunction& link, int horizon);

// P(o = 0) = Phi(r0 - r1); skew-symmetry gives P(o = 1) = Phi(r1 - r0).
double preference_prob(const LinkFunction& link, double r0, double r1);

// Bernoulli draw of the feedback bit for a trajectory pair with the given
// true rewards.
int sample_preference(const LinkFunction& link, double tau0_reward, double tau1_reward, Rng& rng);

}  // namespace prefts
