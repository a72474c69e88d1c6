#include "link.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace prefts {

LinkFunction LinkFunction::scaled_linear(double range) {
  if (!(range > 0.0)) throw ConfigError("scaled-linear link needs range > 0");
  return {LinkKind::kScaledLinear, range};
}

double link_eval(const LinkFunction& link, double x) {
  switch (link.kind) {
    case LinkKind::kSigmoid:
      return 1.0 / (1.0 + std::exp(-x));
    case LinkKind::kScaledLinear:
      return std::clamp(0.5 + x / (2.0 * link.range), 0.0, 1.0);
  }
  throw ConfigError("unknown link kind");
}

double link_derivative(const LinkFunction& link, double x) {
  switch (link.kind) {
    case LinkKind::kSigmoid: {
      double p = 1.0 / (1.0 + std::exp(-x));
      return p * (1.0 - p);
    }
    case LinkKind::kScaledLinear:
      return std::abs(x) < link.range ? 1.0 / (2.0 * link.range) : 0.0;
  }
  throw ConfigError("unknown link kind");
}

DerivativeBounds derivative_bounds(const LinkFunction& link, int horizon) {
  if (horizon < 1) throw ConfigError("derivative_bounds needs horizon >= 1");
  double hd = static_cast<double>(horizon);
  switch (link.kind) {
    case LinkKind::kSigmoid: {
      // Phi' decreases away from 0: min at the endpoints, max 1/4 at 0.
      double edge = link_derivative(link, hd);
      return {1.0 / edge, 4.0};
    }
    case LinkKind::kScaledLinear: {
      if (link.range < hd) {
        throw ConfigError("scaled-linear link has zero derivative inside [-H, H]");
      }
      return {2.0 * link.range, 2.0 * link.range};
    }
  }
  throw ConfigError("unknown link kind");
}

double preference_prob(const LinkFunction& link, double r0, double r1) {
  return link_eval(link, r0 - r1);
}

int sample_preference(const LinkFunction& link, double tau0_reward, double tau1_reward, Rng& rng) {
  double p0 = preference_prob(link, tau0_reward, tau1_reward);
  return rng.uniform01() < p0 ? 0 : 1;
}

}  // namespace prefts
