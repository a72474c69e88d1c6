#include "mdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "errors.hpp"

namespace prefts {

namespace {
constexpr double kRowSumTol = 1e-12;

void check_shape(const MdpShape& shape) {
  if (shape.horizon < 1 || shape.num_states < 1 || shape.num_actions < 1) {
    throw ConfigError("mdp shape must have horizon, num_states, num_actions >= 1");
  }
}
}  // namespace

EpisodicMdp::EpisodicMdp(MdpShape shape, std::vector<double> rewards,
                         std::vector<double> transitions, int initial_state)
    : shape_(shape),
      rewards_(std::move(rewards)),
      transitions_(std::move(transitions)),
      initial_state_(initial_state) {
  check_shape(shape_);
  if (initial_state_ < 0 || initial_state_ >= shape_.num_states) {
    throw ConfigError("initial state out of range");
  }
  if (static_cast<int>(rewards_.size()) != shape_.hsa_size()) {
    throw ConfigError("reward table size mismatch");
  }
  for (double r : rewards_) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("rewards must lie in [0, 1]");
  }
  if (static_cast<int>(transitions_.size()) != shape_.transition_size()) {
    throw ConfigError("transition table size mismatch");
  }
  for (int h = 0; h + 1 < shape_.horizon; ++h) {
    for (int s = 0; s < shape_.num_states; ++s) {
      for (int a = 0; a < shape_.num_actions; ++a) {
        double row = 0.0;
        for (int s2 = 0; s2 < shape_.num_states; ++s2) {
          double p = transitions_[shape_.hsas(h, s, a, s2)];
          if (p < 0.0) throw ConfigError("negative transition probability");
          row += p;
        }
        if (std::abs(row - 1.0) > kRowSumTol) {
          throw ConfigError("transition row does not sum to 1");
        }
      }
    }
  }
}

TabularPolicy uniform_policy(const MdpShape& shape) {
  TabularPolicy pi{shape, std::vector<double>(shape.hsa_size(), 1.0 / shape.num_actions)};
  return pi;
}

TabularPolicy deterministic_policy(const MdpShape& shape, const std::vector<int>& action_per_hs) {
  TabularPolicy pi{shape, std::vector<double>(shape.hsa_size(), 0.0)};
  for (int h = 0; h < shape.horizon; ++h) {
    for (int s = 0; s < shape.num_states; ++s) {
      int a = action_per_hs[h * shape.num_states + s];
      pi.probs[shape.hsa(h, s, a)] = 1.0;
    }
  }
  return pi;
}

void validate_policy(const EpisodicMdp& mdp, const TabularPolicy& policy) {
  if (policy.shape != mdp.shape() ||
      static_cast<int>(policy.probs.size()) != mdp.shape().hsa_size()) {
    throw ConfigError("policy shape does not match mdp");
  }
  for (int h = 0; h < mdp.horizon(); ++h) {
    for (int s = 0; s < mdp.num_states(); ++s) {
      double row = 0.0;
      for (int a = 0; a < mdp.num_actions(); ++a) {
        double p = policy.prob(h, s, a);
        if (p < 0.0) throw ConfigError("negative policy probability");
        row += p;
      }
      if (std::abs(row - 1.0) > kRowSumTol) throw ConfigError("policy row does not sum to 1");
    }
  }
}

void validate_trajectory(const EpisodicMdp& mdp, const Trajectory& tau) {
  if (tau.states.size() != tau.actions.size() ||
      tau.length() != mdp.horizon()) {
    throw ConfigError("trajectory length must equal the horizon");
  }
  for (int h = 0; h < tau.length(); ++h) {
    if (tau.states[h] < 0 || tau.states[h] >= mdp.num_states() || tau.actions[h] < 0 ||
        tau.actions[h] >= mdp.num_actions()) {
      throw ConfigError("trajectory index out of range");
    }
  }
}

Trajectory sample_trajectory(const EpisodicMdp& mdp, const TabularPolicy& policy, Rng& rng) {
  if (policy.shape != mdp.shape()) throw ConfigError("policy shape does not match mdp");
  const MdpShape& sh = mdp.shape();
  Trajectory tau;
  tau.states.reserve(sh.horizon);
  tau.actions.reserve(sh.horizon);
  int s = mdp.initial_state();
  for (int h = 0; h < sh.horizon; ++h) {
    std::span<const double> row(policy.probs.data() + sh.hsa(h, s, 0),
                                static_cast<std::size_t>(sh.num_actions));
    int a = rng.categorical(row);
    tau.states.push_back(s);
    tau.actions.push_back(a);
    if (h + 1 < sh.horizon) {
      std::span<const double> trow(mdp.transitions().data() + sh.hsas(h, s, a, 0),
                                   static_cast<std::size_t>(sh.num_states));
      s = rng.categorical(trow);
    }
  }
  return tau;
}

ValueTables exact_policy_value(const EpisodicMdp& mdp, const TabularPolicy& policy) {
  validate_policy(mdp, policy);
  const MdpShape& sh = mdp.shape();
  ValueTables vt;
  vt.v.assign(static_cast<std::size_t>(sh.horizon) * sh.num_states, 0.0);
  vt.q.assign(sh.hsa_size(), 0.0);
  for (int h = sh.horizon - 1; h >= 0; --h) {
    for (int s = 0; s < sh.num_states; ++s) {
      double vs = 0.0;
      for (int a = 0; a < sh.num_actions; ++a) {
        double q = mdp.reward(h, s, a);
        if (h + 1 < sh.horizon) {
          for (int s2 = 0; s2 < sh.num_states; ++s2) {
            q += mdp.transition(h, s, a, s2) * vt.v[(h + 1) * sh.num_states + s2];
          }
        }
        vt.q[sh.hsa(h, s, a)] = q;
        vs += policy.prob(h, s, a) * q;
      }
      vt.v[h * sh.num_states + s] = vs;
    }
  }
  return vt;
}

std::pair<TabularPolicy, ValueTables> optimal_policy(const EpisodicMdp& mdp) {
  const MdpShape& sh = mdp.shape();
  ValueTables vt;
  vt.v.assign(static_cast<std::size_t>(sh.horizon) * sh.num_states, 0.0);
  vt.q.assign(sh.hsa_size(), 0.0);
  std::vector<int> greedy(static_cast<std::size_t>(sh.horizon) * sh.num_states, 0);
  for (int h = sh.horizon - 1; h >= 0; --h) {
    for (int s = 0; s < sh.num_states; ++s) {
      double best = -1.0;
      int best_a = 0;
      for (int a = 0; a < sh.num_actions; ++a) {
        double q = mdp.reward(h, s, a);
        if (h + 1 < sh.horizon) {
          for (int s2 = 0; s2 < sh.num_states; ++s2) {
            q += mdp.transition(h, s, a, s2) * vt.v[(h + 1) * sh.num_states + s2];
          }
        }
        vt.q[sh.hsa(h, s, a)] = q;
        if (q > best) {  // strict: ties stay on the lowest action index
          best = q;
          best_a = a;
        }
      }
      vt.v[h * sh.num_states + s] = best;
      greedy[h * sh.num_states + s] = best_a;
    }
  }
  return {deterministic_policy(sh, greedy), std::move(vt)};
}

std::vector<double> bellman_apply_with(const MdpShape& shape, const std::vector<double>& rewards,
                                       const std::vector<double>& transitions,
                                       const std::vector<double>& f_next, int h) {
  if (h < 0 || h >= shape.horizon) throw ConfigError("bellman_apply: step out of range");
  std::vector<double> out(shape.sa_size());
  // Precompute max_a' f_next(s', a') per successor state.
  std::vector<double> vmax;
  if (h + 1 < shape.horizon) {
    vmax.assign(shape.num_states, 0.0);
    for (int s2 = 0; s2 < shape.num_states; ++s2) {
      double m = f_next[shape.sa(s2, 0)];
      for (int a2 = 1; a2 < shape.num_actions; ++a2) {
        m = std::max(m, f_next[shape.sa(s2, a2)]);
      }
      vmax[s2] = m;
    }
  }
  for (int s = 0; s < shape.num_states; ++s) {
    for (int a = 0; a < shape.num_actions; ++a) {
      double q = rewards[shape.hsa(h, s, a)];
      if (h + 1 < shape.horizon) {
        for (int s2 = 0; s2 < shape.num_states; ++s2) {
          q += transitions[shape.hsas(h, s, a, s2)] * vmax[s2];
        }
      }
      out[shape.sa(s, a)] = q;
    }
  }
  return out;
}

std::vector<double> bellman_apply(const EpisodicMdp& mdp, const std::vector<double>& f_next,
                                  int h) {
  return bellman_apply_with(mdp.shape(), mdp.rewards(), mdp.transitions(), f_next, h);
}

double trajectory_reward(const EpisodicMdp& mdp, const Trajectory& tau) {
  validate_trajectory(mdp, tau);
  double total = 0.0;
  for (int h = 0; h < tau.length(); ++h) {
    total += mdp.reward(h, tau.states[h], tau.actions[h]);
  }
  return total;
}

std::vector<double> occupancy_measures(const EpisodicMdp& mdp, const TabularPolicy& policy) {
  validate_policy(mdp, policy);
  const MdpShape& sh = mdp.shape();
  std::vector<double> d(sh.hsa_size(), 0.0);
  std::vector<double> state_dist(sh.num_states, 0.0);
  state_dist[mdp.initial_state()] = 1.0;
  for (int h = 0; h < sh.horizon; ++h) {
    for (int s = 0; s < sh.num_states; ++s) {
      for (int a = 0; a < sh.num_actions; ++a) {
        d[sh.hsa(h, s, a)] = state_dist[s] * policy.prob(h, s, a);
      }
    }
    if (h + 1 < sh.horizon) {
      std::vector<double> next(sh.num_states, 0.0);
      for (int s = 0; s < sh.num_states; ++s) {
        for (int a = 0; a < sh.num_actions; ++a) {
          double mass = d[sh.hsa(h, s, a)];
          if (mass == 0.0) continue;
          for (int s2 = 0; s2 < sh.num_states; ++s2) {
            next[s2] += mass * mdp.transition(h, s, a, s2);
          }
        }
      }
      state_dist = std::move(next);
    }
  }
  return d;
}

}  // namespace prefts
