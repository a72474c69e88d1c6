#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eluder.hpp"
#include "hypothesis.hpp"
#include "link.hpp"
#include "mdp.hpp"
#include "posterior.hpp"

namespace prefts {

enum class TransitionMode { kTrueP, kEstimatedP };

struct RunConfig {
  int rounds = 1;  // T
  double delta = 0.1;
  TransitionMode transition_mode = TransitionMode::kTrueP;
  std::uint64_t seed = 0;
  int smoothing_window = 20;  // trailing window for emitted regret series
};

struct RoundRecord {
  int t = 0;  // 1-based round index
  int member = -1;
  TabularPolicy pi0;
  TabularPolicy pi1;
  Trajectory tau0;
  Trajectory tau1;
  int o = 0;
  std::string posterior_hash;
  double regret_increment = 0.0;
  double wall_time_sec = 0.0;  // in-memory only, never persisted
};

struct RunLog {
  RunConfig config;
  double optimal_value = 0.0;  // V*(s_1)
  std::vector<RoundRecord> rounds;
};

// The interaction loop: initialize the uniform policy and an empty dataset;
// each round compute the posterior, sample f^t, play its greedy policy
// against the previous round's, collect a preference sampled from the TRUE
// trajectory rewards, and append the comparison. In estimated-P mode the
// learner's implied rewards use the count-based estimator built from all
// trajectories seen so far. Deterministic given config.seed.
RunLog run_ts(const EpisodicMdp& mdp, const HypothesisClass& cls, const LinkFunction& link,
              const RunConfig& config);

// Prefix sums of the exact per-round increments 2V* - V^{pi0} - V^{pi1},
// recomputed from the logged policies by backward induction.
std::vector<double> cumulative_regret(const RunLog& log, const EpisodicMdp& mdp);

std::vector<double> per_round_regret(const RunLog& log, const EpisodicMdp& mdp);

struct BayesRegretResult {
  std::vector<double> mean_regret;    // per round, averaged over draws
  std::vector<double> stderr_regret;  // per round
  int num_draws = 0;
};

// Environment whose optimal action-value function is exactly `f`: rewards
// r_h = f_h - P_h E[max f_{h+1}] over the given transitions. Throws if any
// induced reward leaves [0, 1] by more than 1e-9 (tiny excursions clamp).
EpisodicMdp environment_from_hypothesis(const QHypothesis& f,
                                        const std::vector<double>& transitions,
                                        int initial_state);

// Bayesian regret: average cumulative regret over num_draws independent
// (f* ~ prior, run) pairs, each on the environment induced by the drawn
// member over the base MDP's transitions.
BayesRegretResult bayes_regret(const HypothesisClass& cls, const EpisodicMdp& base_mdp,
                               const LinkFunction& link, const RunConfig& config, int num_draws);

// E(f, pi, h) = E_{(s,a)~pi at step h}[(f_h - T_h f_{h+1})(s,a)], exact via
// occupancy measures.
double bellman_error(const QHypothesis& f, const TabularPolicy& policy, int h,
                     const EpisodicMdp& mdp);

// |max_a f_1(s_1,a) - V_1^{pi_f}(s_1) - sum_h E(f, pi_f, h)|. An exact
// telescoping identity; anything above roundoff signals a bug.
double loss_decomposition_check(const QHypothesis& f, const EpisodicMdp& mdp);

struct DiagnosticsEntry {
  int t = 0;                               // grid round; sums run over i < t
  std::vector<double> sq_deviation;        // per h: sum_i E[(f^t_h - f*_h)^2]
  std::vector<double> sq_bellman;          // per h: sum_i E[(f^t_h - T_h f^t_{h+1})^2]
  std::vector<double> dataset_sq_bellman;  // per h: sum over visited pairs
  double beta_value = 0.0;                 // beta_h(t), identical across h here
  bool coverage_ok = false;                // all h: sq_deviation <= 4 beta
  bool bellman_bound_ok = false;           // all h: sq_bellman <= 6 (beta_h + beta_{h+1})
};

struct DiagnosticsReport {
  double kappa = 0.0;
  double kappa_bar = 0.0;
  int bracket_n = 0;
  double delta = 0.0;
  std::vector<DiagnosticsEntry> entries;  // grid: powers of two plus the final round
};

// Concentration diagnostics with simulator privilege (f* = Q* known): exact
// population sums via occupancy measures on a logging grid of rounds, plus
// the dataset-sum analogue over visited state-action pairs. The link enters
// through the beta width.
DiagnosticsReport confidence_diagnostics(const RunLog& log, const HypothesisClass& cls,
                                         const EpisodicMdp& mdp, const LinkFunction& link,
                                         double delta);

struct PigeonholeReport {
  double c = 0.0;
  double omega = 0.0;
  std::vector<double> lhs;        // per h: sum_t |E(f^t, pi0^t, h)|
  std::vector<double> rhs;        // per h: c sqrt(dim beta t) + min(t,dim) C + t omega
  std::vector<int> dimensions;    // per h: certificate dimension of the induced residuals
  bool holds = false;
};

// Empirical check of the pigeonhole bound on the cumulative Bellman error,
// using the certificate dimension of the residual class induced by the
// sampled members over the played policies' occupancy family. The constant
// c is fixed by the caller; this records how the run compares against the
// bound's shape, not the theorem's constant.
PigeonholeReport pigeonhole_check(const RunLog& log, const HypothesisClass& cls,
                                  const EpisodicMdp& mdp, const LinkFunction& link, double delta,
                                  double c = 10.0, const EluderCaps& caps = {});

}  // namespace prefts
