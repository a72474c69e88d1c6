#pragma once

#include <vector>

#include "hypothesis.hpp"
#include "link.hpp"
#include "mdp.hpp"
#include "rng.hpp"

namespace prefts {

// One comparison: a trajectory pair and the feedback bit (o = 0 means tau0
// preferred).
struct PreferenceRecord {
  Trajectory tau0;
  Trajectory tau1;
  int o = 0;
};

using PreferenceDataset = std::vector<PreferenceRecord>;

// Probability vector aligned with HypothesisClass::members.
struct PosteriorWeights {
  std::vector<double> weights;
};

// Count-based transition estimator P_hat = count / max(row total, 1).
// Unvisited rows stay identically zero.
class TransitionEstimate {
 public:
  explicit TransitionEstimate(const MdpShape& shape);

  void update(const Trajectory& tau);

  const MdpShape& shape() const { return shape_; }
  const std::vector<double>& probs() const { return probs_; }
  long long count(int h, int s, int a, int s2) const { return counts_[shape_.hsas(h, s, a, s2)]; }
  long long row_total(int h, int s, int a) const;

 private:
  MdpShape shape_;
  std::vector<long long> counts_;  // hsas
  std::vector<double> probs_;      // hsas
};

// Floor applied to each likelihood term before the log; keeps log-space
// arithmetic finite when a clipped link assigns probability 0.
inline constexpr double kLikelihoodFloor = 1e-300;

// sum_s log[ o_s Phi(r_f(tau1)-r_f(tau0)) + (1-o_s) Phi(r_f(tau0)-r_f(tau1)) ]
// with r_f the implied reward under `transitions`. Empty dataset gives 0.
double log_likelihood(const PreferenceDataset& dataset, const QHypothesis& f,
                      const LinkFunction& link, const std::vector<double>& transitions);

// Same, with the per-(h,s,a) implied-reward table precomputed (see
// implied_reward_table).
double log_likelihood_from_table(const PreferenceDataset& dataset, const MdpShape& shape,
                                 const std::vector<double>& reward_table,
                                 const LinkFunction& link);

// One record's log term from already-computed implied rewards.
double record_log_term(double r0, double r1, int o, const LinkFunction& link);

// Exact posterior over the finite class: weights proportional to
// prior * exp(log-likelihood), normalized stably (max subtraction, fixed
// summation order).
PosteriorWeights posterior(const HypothesisClass& cls, const PreferenceDataset& dataset,
                           const LinkFunction& link, const std::vector<double>& transitions);

// Normalization used by `posterior` and by incremental reweighting.
PosteriorWeights normalize_log_weights(std::vector<double> log_weights);

// Member index drawn with probability weights[i].
int sample_hypothesis(const PosteriorWeights& weights, Rng& rng);

// FNV-1a over the raw weight bytes, as a 16-hex-digit string. Used for
// posterior snapshots in run logs.
std::string posterior_hash(const PosteriorWeights& weights);

// argmax of log-likelihood over members; ties toward the lowest index.
int mle(const HypothesisClass& cls, const PreferenceDataset& dataset, const LinkFunction& link,
        const std::vector<double>& transitions);

// beta(t) = 98 kappa^2 log(2 H N / delta). For finite classes the bracket
// scale kappa_bar (2t)^{-1} is immaterial (N_[] equals |F| at every scale),
// so t and kappa_bar do not enter the value.
double beta(int t, double kappa, double kappa_bar, int horizon, int bracket_n, double delta);

}  // namespace prefts
