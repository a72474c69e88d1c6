#include "posterior.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

#include "errors.hpp"

namespace prefts {

TransitionEstimate::TransitionEstimate(const MdpShape& shape)
    : shape_(shape),
      counts_(shape.transition_size(), 0),
      probs_(shape.transition_size(), 0.0) {}

long long TransitionEstimate::row_total(int h, int s, int a) const {
  long long total = 0;
  for (int s2 = 0; s2 < shape_.num_states; ++s2) total += counts_[shape_.hsas(h, s, a, s2)];
  return total;
}

void TransitionEstimate::update(const Trajectory& tau) {
  if (tau.length() != shape_.horizon) throw ConfigError("trajectory length must equal horizon");
  for (int h = 0; h + 1 < shape_.horizon; ++h) {
    int s = tau.states[h], a = tau.actions[h], s2 = tau.states[h + 1];
    counts_[shape_.hsas(h, s, a, s2)] += 1;
    long long total = row_total(h, s, a);
    double denom = static_cast<double>(std::max<long long>(total, 1));
    for (int j = 0; j < shape_.num_states; ++j) {
      probs_[shape_.hsas(h, s, a, j)] = static_cast<double>(counts_[shape_.hsas(h, s, a, j)]) / denom;
    }
  }
}

double record_log_term(double r0, double r1, int o, const LinkFunction& link) {
  double term = o == 1 ? link_eval(link, r1 - r0) : link_eval(link, r0 - r1);
  return std::log(std::max(term, kLikelihoodFloor));
}

double log_likelihood_from_table(const PreferenceDataset& dataset, const MdpShape& shape,
                                 const std::vector<double>& reward_table,
                                 const LinkFunction& link) {
  auto score = [&](const Trajectory& tau) {
    double r = 0.0;
    for (int h = 0; h < shape.horizon; ++h) r += reward_table[shape.hsa(h, tau.states[h], tau.actions[h])];
    return r;
  };
  double total = 0.0;
  for (const auto& rec : dataset) {
    total += record_log_term(score(rec.tau0), score(rec.tau1), rec.o, link);
  }
  return total;
}

double log_likelihood(const PreferenceDataset& dataset, const QHypothesis& f,
                      const LinkFunction& link, const std::vector<double>& transitions) {
  if (dataset.empty()) return 0.0;
  std::vector<double> table = implied_reward_table(f, transitions);
  return log_likelihood_from_table(dataset, f.shape, table, link);
}

PosteriorWeights normalize_log_weights(std::vector<double> log_weights) {
  double m = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) m = std::max(m, lw);
  if (!std::isfinite(m)) throw ConfigError("degenerate posterior: all weights vanished");
  double total = 0.0;
  for (double& lw : log_weights) {
    lw = std::exp(lw - m);
    total += lw;
  }
  for (double& lw : log_weights) lw /= total;
  return PosteriorWeights{std::move(log_weights)};
}

PosteriorWeights posterior(const HypothesisClass& cls, const PreferenceDataset& dataset,
                           const LinkFunction& link, const std::vector<double>& transitions) {
  std::vector<double> lw(cls.size());
  for (int i = 0; i < cls.size(); ++i) {
    double lp = cls.prior[i] > 0.0 ? std::log(cls.prior[i]) : -std::numeric_limits<double>::infinity();
    lw[i] = lp + log_likelihood(dataset, cls.members[i], link, transitions);
  }
  return normalize_log_weights(std::move(lw));
}

int sample_hypothesis(const PosteriorWeights& weights, Rng& rng) {
  return rng.categorical(weights.weights);
}

std::string posterior_hash(const PosteriorWeights& weights) {
  std::uint64_t h = 1469598103934665603ull;
  for (double x : weights.weights) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &x, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ull;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

int mle(const HypothesisClass& cls, const PreferenceDataset& dataset, const LinkFunction& link,
        const std::vector<double>& transitions) {
  int best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < cls.size(); ++i) {
    double ll = log_likelihood(dataset, cls.members[i], link, transitions);
    if (ll > best_ll) {  // strict: ties stay on the lowest index
      best_ll = ll;
      best = i;
    }
  }
  return best;
}

double beta(int t, double kappa, double kappa_bar, int horizon, int bracket_n, double delta) {
  (void)t;
  (void)kappa_bar;
  if (t < 1) throw ConfigError("beta needs t >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("beta needs delta in (0, 1]");
  if (bracket_n < 1) throw ConfigError("beta needs bracket_n >= 1");
  return 98.0 * kappa * kappa * std::log(2.0 * horizon * bracket_n / delta);
}

}  // namespace prefts
