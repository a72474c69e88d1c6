#include "hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "errors.hpp"

namespace prefts {

void validate_hypothesis(const QHypothesis& f) {
  if (static_cast<int>(f.tables.size()) != f.shape.hsa_size()) {
    throw ConfigError("hypothesis table size mismatch");
  }
  for (int h = 0; h < f.shape.horizon; ++h) {
    double ub = static_cast<double>(f.shape.horizon - h);
    for (int s = 0; s < f.shape.num_states; ++s) {
      for (int a = 0; a < f.shape.num_actions; ++a) {
        double v = f.at(h, s, a);
        if (!(v >= 0.0 && v <= ub)) {
          throw ConfigError("hypothesis entry outside [0, H-h+1] at step " + std::to_string(h + 1));
        }
      }
    }
  }
}

HypothesisClass make_class(std::vector<QHypothesis> members, std::vector<double> prior) {
  if (members.empty()) throw ConfigError("hypothesis class must be nonempty");
  const MdpShape& shape = members.front().shape;
  for (const auto& m : members) {
    if (m.shape != shape) throw ConfigError("hypothesis class members must share shape");
    validate_hypothesis(m);
  }
  if (prior.empty()) {
    prior.assign(members.size(), 1.0 / static_cast<double>(members.size()));
  }
  if (prior.size() != members.size()) throw ConfigError("prior length must match class size");
  double total = 0.0;
  for (double p : prior) {
    if (p < 0.0) throw ConfigError("prior must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("prior must sum to 1");
  return HypothesisClass{std::move(members), std::move(prior)};
}

TabularPolicy greedy_policy(const QHypothesis& f) {
  const MdpShape& sh = f.shape;
  std::vector<int> best(static_cast<std::size_t>(sh.horizon) * sh.num_states, 0);
  for (int h = 0; h < sh.horizon; ++h) {
    for (int s = 0; s < sh.num_states; ++s) {
      double m = f.at(h, s, 0);
      int arg = 0;
      for (int a = 1; a < sh.num_actions; ++a) {
        if (f.at(h, s, a) > m) {
          m = f.at(h, s, a);
          arg = a;
        }
      }
      best[h * sh.num_states + s] = arg;
    }
  }
  return deterministic_policy(sh, best);
}

namespace {
double sup_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}
}  // namespace

RealizabilityReport check_realizability(const HypothesisClass& cls, const EpisodicMdp& mdp,
                                        double tol) {
  if (cls.shape() != mdp.shape()) throw ConfigError("class shape does not match mdp");
  auto [pi_star, vt] = optimal_policy(mdp);
  RealizabilityReport rep;
  rep.best_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cls.size(); ++i) {
    double gap = sup_distance(cls.members[i].tables, vt.q);
    if (gap < rep.best_gap) {
      rep.best_gap = gap;
      rep.best_member = i;
    }
  }
  rep.holds = rep.best_gap <= tol;
  return rep;
}

CompletenessReport check_completeness(const HypothesisClass& cls, const EpisodicMdp& mdp,
                                      double tol) {
  if (cls.shape() != mdp.shape()) throw ConfigError("class shape does not match mdp");
  const MdpShape& sh = mdp.shape();
  CompletenessReport rep;
  rep.worst_gap = 0.0;
  for (int i = 0; i < cls.size(); ++i) {
    const QHypothesis& f = cls.members[i];
    for (int h = 0; h < sh.horizon; ++h) {
      std::vector<double> f_next(sh.sa_size(), 0.0);
      if (h + 1 < sh.horizon) {
        std::copy_n(f.tables.begin() + sh.hsa(h + 1, 0, 0), sh.sa_size(), f_next.begin());
      }
      std::vector<double> image = bellman_apply(mdp, f_next, h);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& g : cls.members) {
        double d = 0.0;
        for (int j = 0; j < sh.sa_size(); ++j) {
          d = std::max(d, std::abs(image[j] - g.tables[sh.hsa(h, 0, 0) + j]));
        }
        best = std::min(best, d);
      }
      if (best > rep.worst_gap) {
        rep.worst_gap = best;
        rep.worst_member = i;
        rep.worst_step = h;
      }
    }
  }
  rep.holds = rep.worst_gap <= tol;
  return rep;
}

std::vector<double> implied_reward_table(const QHypothesis& f,
                                         const std::vector<double>& transitions) {
  const MdpShape& sh = f.shape;
  if (static_cast<int>(transitions.size()) != sh.transition_size()) {
    throw ConfigError("transition table size mismatch");
  }
  std::vector<double> g(f.tables);
  for (int h = 0; h + 1 < sh.horizon; ++h) {
    // max_a' f_{h+1}(s', a') per successor.
    std::vector<double> vmax(sh.num_states);
    for (int s2 = 0; s2 < sh.num_states; ++s2) {
      double m = f.at(h + 1, s2, 0);
      for (int a2 = 1; a2 < sh.num_actions; ++a2) m = std::max(m, f.at(h + 1, s2, a2));
      vmax[s2] = m;
    }
    for (int s = 0; s < sh.num_states; ++s) {
      for (int a = 0; a < sh.num_actions; ++a) {
        double e = 0.0;
        for (int s2 = 0; s2 < sh.num_states; ++s2) {
          e += transitions[sh.hsas(h, s, a, s2)] * vmax[s2];
        }
        g[sh.hsa(h, s, a)] -= e;
      }
    }
  }
  return g;
}

double implied_reward(const QHypothesis& f, const std::vector<double>& transitions,
                      const Trajectory& tau) {
  const MdpShape& sh = f.shape;
  if (tau.length() != sh.horizon) throw ConfigError("trajectory length must equal the horizon");
  if (static_cast<int>(transitions.size()) != sh.transition_size()) {
    throw ConfigError("transition table size mismatch");
  }
  double total = 0.0;
  for (int h = 0; h < sh.horizon; ++h) {
    total += f.at(h, tau.states[h], tau.actions[h]);
    if (h + 1 < sh.horizon) {
      int s = tau.states[h], a = tau.actions[h];
      for (int s2 = 0; s2 < sh.num_states; ++s2) {
        double m = f.at(h + 1, s2, 0);
        for (int a2 = 1; a2 < sh.num_actions; ++a2) m = std::max(m, f.at(h + 1, s2, a2));
        total -= transitions[sh.hsas(h, s, a, s2)] * m;
      }
    }
  }
  return total;
}

int bracketing_bound(const HypothesisClass& cls) {
  std::set<std::vector<double>> distinct;
  for (const auto& m : cls.members) distinct.insert(m.tables);
  return static_cast<int>(distinct.size());
}

MixtureClosureReport mixture_closure_check(const HypothesisClass& cls,
                                           const std::vector<std::vector<double>>& weight_vectors,
                                           double tol) {
  MixtureClosureReport rep;
  for (const auto& w : weight_vectors) {
    if (static_cast<int>(w.size()) != cls.size()) {
      throw ConfigError("weight vector length must match class size");
    }
    std::vector<double> mix(cls.shape().hsa_size(), 0.0);
    for (int i = 0; i < cls.size(); ++i) {
      for (std::size_t j = 0; j < mix.size(); ++j) mix[j] += w[i] * cls.members[i].tables[j];
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& m : cls.members) best = std::min(best, sup_distance(mix, m.tables));
    rep.distances.push_back(best);
    rep.worst_distance = std::max(rep.worst_distance, best);
  }
  rep.holds = rep.worst_distance <= tol;
  return rep;
}

}  // namespace prefts
