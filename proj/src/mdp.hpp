#pragma once

#include <utility>
#include <vector>

#include "rng.hpp"

namespace prefts {

// Shared shape descriptor for Q tables, policies and transition tables.
// Steps are 0-based in code: h in [0, H). The episode ends after step H-1;
// the absorbing terminal state is implicit and carries no reward.
struct MdpShape {
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;

  bool operator==(const MdpShape&) const = default;

  int sa_size() const { return num_states * num_actions; }
  int hsa_size() const { return horizon * sa_size(); }
  int sa(int s, int a) const { return s * num_actions + a; }
  int hsa(int h, int s, int a) const { return (h * num_states + s) * num_actions + a; }
  // Transition tables exist for h in [0, H-1).
  int hsas(int h, int s, int a, int s2) const { return hsa(h, s, a) * num_states + s2; }
  int transition_size() const { return (horizon - 1) * sa_size() * num_states; }
};

// Finite-horizon tabular MDP with a fixed initial state. Rewards lie in
// [0, 1]; every transition row is a probability vector. Immutable after
// construction (validation happens in the constructor).
class EpisodicMdp {
 public:
  EpisodicMdp(MdpShape shape, std::vector<double> rewards,
              std::vector<double> transitions, int initial_state);

  const MdpShape& shape() const { return shape_; }
  int horizon() const { return shape_.horizon; }
  int num_states() const { return shape_.num_states; }
  int num_actions() const { return shape_.num_actions; }
  int initial_state() const { return initial_state_; }

  double reward(int h, int s, int a) const { return rewards_[shape_.hsa(h, s, a)]; }
  double transition(int h, int s, int a, int s2) const {
    return transitions_[shape_.hsas(h, s, a, s2)];
  }
  const std::vector<double>& rewards() const { return rewards_; }
  const std::vector<double>& transitions() const { return transitions_; }

 private:
  MdpShape shape_;
  std::vector<double> rewards_;      // hsa
  std::vector<double> transitions_;  // hsas, h in [0, H-1)
  int initial_state_;
};

// Exactly H (state, action) pairs; the terminal state is not materialized.
struct Trajectory {
  std::vector<int> states;
  std::vector<int> actions;

  int length() const { return static_cast<int>(states.size()); }
  bool operator==(const Trajectory&) const = default;
};

// Stochastic tabular policy pi_h(a|s). Rows sum to 1.
struct TabularPolicy {
  MdpShape shape;
  std::vector<double> probs;  // hsa

  double prob(int h, int s, int a) const { return probs[shape.hsa(h, s, a)]; }
  bool operator==(const TabularPolicy&) const = default;
};

struct ValueTables {
  std::vector<double> v;  // [h][s]
  std::vector<double> q;  // hsa
};

TabularPolicy uniform_policy(const MdpShape& shape);
TabularPolicy deterministic_policy(const MdpShape& shape, const std::vector<int>& action_per_hs);

void validate_policy(const EpisodicMdp& mdp, const TabularPolicy& policy);
void validate_trajectory(const EpisodicMdp& mdp, const Trajectory& tau);

// One seeded rollout: the step-h action from pi_h(.|s_h), the successor from
// P_h(.|s_h, a_h).
Trajectory sample_trajectory(const EpisodicMdp& mdp, const TabularPolicy& policy, Rng& rng);

// Backward-induction policy evaluation. V_1 is exact to roundoff.
ValueTables exact_policy_value(const EpisodicMdp& mdp, const TabularPolicy& policy);

// Backward induction with max; greedy ties break toward the lowest action
// index. Returned tables are Q* and V*.
std::pair<TabularPolicy, ValueTables> optimal_policy(const EpisodicMdp& mdp);

// (T_h f_{h+1})(s,a) = r_h(s,a) + E_{s'~P_h}[max_a' f_{h+1}(s',a')] over the
// given transition table. At the terminal step the expectation term is zero.
// f_next has sa_size entries (ignored when h == H-1).
std::vector<double> bellman_apply(const EpisodicMdp& mdp, const std::vector<double>& f_next,
                                  int h);
// Same operator against an arbitrary transition table (true P or an estimate).
std::vector<double> bellman_apply_with(const MdpShape& shape, const std::vector<double>& rewards,
                                       const std::vector<double>& transitions,
                                       const std::vector<double>& f_next, int h);

// Sum of r_h(s_h, a_h) along the trajectory.
double trajectory_reward(const EpisodicMdp& mdp, const Trajectory& tau);

// Occupancy measures d_h(s,a) = P[s_h = s, a_h = a] under the policy,
// computed by forward DP. Result indexed hsa.
std::vector<double> occupancy_measures(const EpisodicMdp& mdp, const TabularPolicy& policy);

}  // namespace prefts
