#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"
#include "experiment.hpp"
#include "hypothesis.hpp"
#include "serialize.hpp"
#include "test_util.hpp"

using namespace prefts;
using namespace testutil;

namespace {

QHypothesis q_star_of(const EpisodicMdp& mdp) {
  auto [pi, vt] = optimal_policy(mdp);
  return QHypothesis{mdp.shape(), vt.q};
}

}  // namespace

TEST_CASE("greedy_policy picks dominant actions and breaks ties low") {
  MdpShape sh{2, 2, 3};
  QHypothesis f{sh, std::vector<double>(sh.hsa_size(), 0.0)};
  f.tables[sh.hsa(0, 0, 2)] = 1.0;
  f.tables[sh.hsa(0, 1, 1)] = 0.5;
  TabularPolicy pi = greedy_policy(f);
  CHECK(pi.prob(0, 0, 2) == 1.0);
  CHECK(pi.prob(0, 1, 1) == 1.0);
  // All-constant rows: action 0 by the tie rule.
  CHECK(pi.prob(1, 0, 0) == 1.0);
  CHECK(pi.prob(1, 1, 0) == 1.0);
}

TEST_CASE("greedy of Q* attains V*") {
  EpisodicMdp mdp = random_mdp(31, 4, 3, 3);
  QHypothesis qs = q_star_of(mdp);
  auto [pi, vt] = optimal_policy(mdp);
  double via_greedy = exact_policy_value(mdp, greedy_policy(qs)).v[mdp.initial_state()];
  CHECK(std::abs(via_greedy - vt.v[mdp.initial_state()]) < 1e-10);
}

TEST_CASE("check_realizability") {
  EpisodicMdp mdp = random_mdp(8, 3, 2, 2);
  QHypothesis qs = q_star_of(mdp);

  HypothesisClass with_qstar = make_class({qs, QHypothesis{qs.shape, std::vector<double>(qs.tables.size(), 0.0)}});
  RealizabilityReport r1 = check_realizability(with_qstar, mdp, 0.0);
  CHECK(r1.holds);
  CHECK(r1.best_gap == 0.0);
  CHECK(r1.best_member == 0);

  // Shifted copy: fails a tight tolerance, and the reported gap matches a
  // direct sup-norm computation.
  QHypothesis shifted = qs;
  double expected_gap = 0.0;
  for (int h = 0; h < qs.shape.horizon; ++h) {
    double ub = static_cast<double>(qs.shape.horizon - h);
    for (int j = 0; j < qs.shape.sa_size(); ++j) {
      double& v = shifted.tables[qs.shape.hsa(h, 0, 0) + j];
      double moved = std::min(v + 0.5, ub);
      expected_gap = std::max(expected_gap, std::abs(moved - v));
      v = moved;
    }
  }
  HypothesisClass off = make_class({shifted});
  RealizabilityReport r2 = check_realizability(off, mdp, 0.1);
  CHECK_FALSE(r2.holds);
  CHECK(r2.best_gap == doctest::Approx(expected_gap).epsilon(1e-12));

  // Infinite tolerance always holds.
  CHECK(check_realizability(off, mdp, std::numeric_limits<double>::infinity()).holds);
}

TEST_CASE("check_completeness on grid and singleton classes") {
  // 1-state/1-action: the Bellman image of any f is a scalar per step; a
  // grid containing those scalars has zero completeness gap.
  MdpShape sh{2, 1, 1};
  EpisodicMdp mdp(sh, {0.25, 0.5}, {1.0}, 0);
  std::vector<QHypothesis> grid;
  for (int i = 0; i <= 8; ++i) {
    for (int j = 0; j <= 4; ++j) {
      grid.push_back(QHypothesis{sh, {i * 0.25, j * 0.25}});
    }
  }
  CHECK(check_completeness(make_class(grid), mdp, 1e-12).worst_gap == doctest::Approx(0.0));

  // Singleton {Q*} is a Bellman fixed point.
  EpisodicMdp rnd = random_mdp(55, 3, 2, 3);
  CHECK(check_completeness(make_class({q_star_of(rnd)}), rnd, 1e-10).holds);

  // Perturbing only step 1 of Q* breaks closedness: T_1 f_2 still equals
  // Q*_1, which is no longer in the class.
  QHypothesis bumped = q_star_of(rnd);
  int idx = bumped.shape.hsa(0, 0, 0);
  bumped.tables[idx] = std::min(bumped.tables[idx] + 0.25, 3.0);
  CompletenessReport rep = check_completeness(make_class({bumped}), rnd, 1e-12);
  CHECK_FALSE(rep.holds);
  CHECK(rep.worst_gap > 0.0);
}

TEST_CASE("implied_reward recovers the truth at Q*") {
  EpisodicMdp mdp = random_mdp(4711, 4, 2, 3);
  QHypothesis qs = q_star_of(mdp);
  Rng rng(2);
  TabularPolicy pi = random_stochastic_policy(mdp.shape(), rng);
  for (int i = 0; i < 1000; ++i) {
    Trajectory tau = sample_trajectory(mdp, pi, rng);
    CHECK(std::abs(implied_reward(qs, mdp.transitions(), tau) - trajectory_reward(mdp, tau)) <
          1e-10);
  }
}

TEST_CASE("implied_reward special cases") {
  EpisodicMdp mdp = random_mdp(12, 3, 2, 3);
  QHypothesis zero{mdp.shape(), std::vector<double>(mdp.shape().hsa_size(), 0.0)};
  Rng rng(3);
  Trajectory tau = sample_trajectory(mdp, uniform_policy(mdp.shape()), rng);
  CHECK(implied_reward(zero, mdp.transitions(), tau) == 0.0);

  // One-step: no transition term at all.
  MdpShape sh1{1, 2, 2};
  QHypothesis f1{sh1, {0.3, 0.9, 0.1, 0.6}};
  Trajectory t1{{1}, {0}};
  CHECK(implied_reward(f1, {}, t1) == doctest::Approx(0.1));
}

TEST_CASE("implied_reward_table matches the per-trajectory path") {
  EpisodicMdp mdp = random_mdp(88, 3, 3, 3);
  Rng rng(5);
  QHypothesis f = random_hypothesis(mdp.shape(), rng);
  std::vector<double> table = implied_reward_table(f, mdp.transitions());
  const MdpShape& sh = mdp.shape();
  TabularPolicy pi = uniform_policy(sh);
  for (int i = 0; i < 50; ++i) {
    Trajectory tau = sample_trajectory(mdp, pi, rng);
    double via_table = 0.0;
    for (int h = 0; h < sh.horizon; ++h) {
      via_table += table[sh.hsa(h, tau.states[h], tau.actions[h])];
    }
    CHECK(implied_reward(f, mdp.transitions(), tau) ==
          doctest::Approx(via_table).epsilon(1e-12));
  }
}

TEST_CASE("bracketing_bound counts distinct members") {
  MdpShape sh{1, 1, 1};
  QHypothesis a{sh, {0.5}};
  QHypothesis b{sh, {0.75}};
  CHECK(bracketing_bound(make_class({a})) == 1);
  CHECK(bracketing_bound(make_class({a, b, a})) == 2);

  std::vector<QHypothesis> many;
  for (int i = 0; i < 37; ++i) many.push_back(QHypothesis{sh, {i / 37.0}});
  HypothesisClass cls = make_class(many);
  CHECK(bracketing_bound(cls) == 37);
  // Invariant under member reordering.
  std::reverse(cls.members.begin(), cls.members.end());
  CHECK(bracketing_bound(cls) == 37);
}

TEST_CASE("mixture_closure_check") {
  MdpShape sh{1, 1, 2};
  QHypothesis lo{sh, {0.0, 0.0}};
  QHypothesis hi{sh, {1.0, 0.5}};
  HypothesisClass cls = make_class({lo, hi});

  MixtureClosureReport point = mixture_closure_check(cls, {{1.0, 0.0}, {0.0, 1.0}}, 1e-12);
  CHECK(point.holds);
  CHECK(point.worst_distance == 0.0);

  // Midpoint of two distinct members, class without it: distance is half the
  // largest member gap.
  MixtureClosureReport mid = mixture_closure_check(cls, {{0.5, 0.5}}, 1e-12);
  CHECK_FALSE(mid.holds);
  CHECK(mid.distances[0] == doctest::Approx(0.5).epsilon(1e-12));

  HypothesisClass twins = make_class({lo, lo});
  CHECK(mixture_closure_check(twins, {{0.3, 0.7}}, 0.0).worst_distance == 0.0);

  CHECK_THROWS_AS(mixture_closure_check(cls, {{1.0}}, 0.1), ConfigError);
}

TEST_CASE("adding a member never hurts realizability or completeness") {
  EpisodicMdp mdp = random_mdp(3141, 3, 2, 2);
  Rng rng(7);
  std::vector<QHypothesis> members = {random_hypothesis(mdp.shape(), rng),
                                      random_hypothesis(mdp.shape(), rng)};
  HypothesisClass small = make_class(members);
  members.push_back(random_hypothesis(mdp.shape(), rng));
  HypothesisClass big = make_class(members);

  CHECK(check_realizability(big, mdp, 0.0).best_gap <=
        check_realizability(small, mdp, 0.0).best_gap + 1e-15);

  // For the images present in both classes, the nearest-member distance can
  // only shrink when a member is added.
  const MdpShape& sh = mdp.shape();
  for (int i = 0; i < small.size(); ++i) {
    for (int h = 0; h < sh.horizon; ++h) {
      std::vector<double> f_next(sh.sa_size(), 0.0);
      if (h + 1 < sh.horizon) {
        std::copy_n(small.members[i].tables.begin() + sh.hsa(h + 1, 0, 0), sh.sa_size(),
                    f_next.begin());
      }
      std::vector<double> image = bellman_apply(mdp, f_next, h);
      auto nearest = [&](const HypothesisClass& cls) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& g : cls.members) {
          double d = 0.0;
          for (int j = 0; j < sh.sa_size(); ++j) {
            d = std::max(d, std::abs(image[j] - g.tables[sh.hsa(h, 0, 0) + j]));
          }
          best = std::min(best, d);
        }
        return best;
      };
      CHECK(nearest(big) <= nearest(small) + 1e-15);
    }
  }
}

TEST_CASE("class json round-trip and validation") {
  EpisodicMdp mdp = random_mdp(64, 2, 2, 2);
  HypothesisClass cls = generate_class(mdp, 5, 0.3, 9);
  std::string text = class_to_json(cls).dump();
  HypothesisClass back = class_from_json(json::parse(text));
  REQUIRE(back.size() == cls.size());
  for (int i = 0; i < cls.size(); ++i) CHECK(back.members[i].tables == cls.members[i].tables);
  CHECK(back.prior == cls.prior);

  QHypothesis bad{mdp.shape(), std::vector<double>(mdp.shape().hsa_size(), 5.0)};
  CHECK_THROWS_AS(make_class({bad}), ConfigError);
  CHECK_THROWS_AS(make_class({}), ConfigError);
}
