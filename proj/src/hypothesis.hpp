#pragma once

#include <vector>

#include "mdp.hpp"

namespace prefts {

// One candidate action-value function f = (f_1, ..., f_H). Step-h entries lie
// in [0, H - h] (0-based h), mirroring the value range of an MDP with rewards
// in [0, 1]. f_{H+1} is identically zero by convention.
struct QHypothesis {
  MdpShape shape;
  std::vector<double> tables;  // hsa

  double at(int h, int s, int a) const { return tables[shape.hsa(h, s, a)]; }
  bool operator==(const QHypothesis&) const = default;
};

void validate_hypothesis(const QHypothesis& f);

// A finite ordered hypothesis class with a prior over members.
struct HypothesisClass {
  std::vector<QHypothesis> members;
  std::vector<double> prior;  // sums to 1

  int size() const { return static_cast<int>(members.size()); }
  const MdpShape& shape() const { return members.front().shape; }
};

HypothesisClass make_class(std::vector<QHypothesis> members, std::vector<double> prior = {});

struct RealizabilityReport {
  bool holds = false;
  double best_gap = 0.0;  // min over members of sup-norm distance to Q*
  int best_member = -1;
};

struct CompletenessReport {
  bool holds = false;
  double worst_gap = 0.0;  // max over (member, step) of min-member image distance
  int worst_member = -1;
  int worst_step = -1;
};

struct MixtureClosureReport {
  bool holds = false;
  double worst_distance = 0.0;
  std::vector<double> distances;  // one per weight vector
};

// Deterministic greedy policy of f; argmax ties break toward the lowest
// action index.
TabularPolicy greedy_policy(const QHypothesis& f);

// Does some member match Q* in sup-norm within tol?
RealizabilityReport check_realizability(const HypothesisClass& cls, const EpisodicMdp& mdp,
                                        double tol);

// For every member f and step h, distance from T_h f_{h+1} to the nearest
// member's step-h table; reports the worst case.
CompletenessReport check_completeness(const HypothesisClass& cls, const EpisodicMdp& mdp,
                                      double tol);

// r_f(tau) = sum_h [ f_h(s_h,a_h) - E_{s'~P_h}[max_a' f_{h+1}(s',a')] ];
// the step-H term is just f_H(s_H,a_H). `transitions` may be the true kernel
// or an estimate (rows of an estimate may be all-zero when unvisited).
double implied_reward(const QHypothesis& f, const std::vector<double>& transitions,
                      const Trajectory& tau);

// Per-(h,s,a) table g with g_h(s,a) = f_h(s,a) - E_{s'~P_h}[max f_{h+1}];
// implied_reward(tau) = sum_h g_h(s_h, a_h). Worth precomputing when many
// trajectories are scored against one f.
std::vector<double> implied_reward_table(const QHypothesis& f,
                                         const std::vector<double>& transitions);

// |F_h| bounds the bracketing number at every scale for a finite class;
// exact duplicates are counted once.
int bracketing_bound(const HypothesisClass& cls);

// Distance of each weighted mixture sum_i w_i f_i from the raw class; a
// diagnostic for how far posterior means fall outside it.
MixtureClosureReport mixture_closure_check(const HypothesisClass& cls,
                                           const std::vector<std::vector<double>>& weight_vectors,
                                           double tol);

}  // namespace prefts
