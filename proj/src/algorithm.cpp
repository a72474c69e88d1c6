#include "algorithm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <set>

#include "errors.hpp"

namespace prefts {

namespace {

double initial_state_value(const EpisodicMdp& mdp, const ValueTables& vt) {
  return vt.v[mdp.initial_state()];
}

}  // namespace

RunLog run_ts(const EpisodicMdp& mdp, const HypothesisClass& cls, const LinkFunction& link,
              const RunConfig& config) {
  if (cls.shape() != mdp.shape()) throw ConfigError("class shape does not match mdp");
  if (config.rounds < 1) throw ConfigError("run needs at least one round");
  if (!(config.delta > 0.0 && config.delta <= 1.0)) throw ConfigError("delta must be in (0, 1]");

  Rng alg_rng = substream(config.seed, "algorithm");
  Rng pref_rng = substream(config.seed, "preference");

  auto [pi_star, star_tables] = optimal_policy(mdp);
  double v_star = initial_state_value(mdp, star_tables);

  // Per-member greedy policies and their exact values; pi0 is always one of
  // these, so regret increments come from a lookup.
  std::vector<TabularPolicy> member_policy;
  std::vector<double> member_value;
  member_policy.reserve(cls.size());
  for (const auto& f : cls.members) {
    member_policy.push_back(greedy_policy(f));
    member_value.push_back(initial_state_value(mdp, exact_policy_value(mdp, member_policy.back())));
  }

  const bool use_estimate = config.transition_mode == TransitionMode::kEstimatedP;
  TransitionEstimate estimate(mdp.shape());
  PreferenceDataset dataset;

  // True-P mode: the implied-reward tables are fixed, so the log-likelihood
  // accumulates one term per round. Estimated-P mode rebuilds everything
  // from the current estimate each round.
  std::vector<std::vector<double>> reward_tables;
  std::vector<double> cum_ll(cls.size(), 0.0);
  if (!use_estimate) {
    for (const auto& f : cls.members) {
      reward_tables.push_back(implied_reward_table(f, mdp.transitions()));
    }
  }

  RunLog log;
  log.config = config;
  log.optimal_value = v_star;
  log.rounds.reserve(config.rounds);

  TabularPolicy prev_pi0 = uniform_policy(mdp.shape());
  double prev_value = initial_state_value(mdp, exact_policy_value(mdp, prev_pi0));

  for (int t = 1; t <= config.rounds; ++t) {
    auto started = std::chrono::steady_clock::now();

    PosteriorWeights weights;
    if (use_estimate) {
      weights = posterior(cls, dataset, link, estimate.probs());
    } else {
      std::vector<double> lw(cls.size());
      for (int i = 0; i < cls.size(); ++i) lw[i] = std::log(cls.prior[i]) + cum_ll[i];
      weights = normalize_log_weights(std::move(lw));
    }

    RoundRecord rec;
    rec.t = t;
    rec.posterior_hash = posterior_hash(weights);
    rec.member = sample_hypothesis(weights, alg_rng);
    rec.pi0 = member_policy[rec.member];
    rec.pi1 = prev_pi0;
    rec.tau0 = sample_trajectory(mdp, rec.pi0, alg_rng);
    rec.tau1 = sample_trajectory(mdp, rec.pi1, alg_rng);
    // Feedback comes from the environment's true rewards (the learner never
    // sees them directly).
    rec.o = sample_preference(link, trajectory_reward(mdp, rec.tau0),
                              trajectory_reward(mdp, rec.tau1), pref_rng);
    rec.regret_increment = 2.0 * v_star - member_value[rec.member] - prev_value;

    if (use_estimate) {
      estimate.update(rec.tau0);
      estimate.update(rec.tau1);
      dataset.push_back(PreferenceRecord{rec.tau0, rec.tau1, rec.o});
    } else {
      const MdpShape& sh = mdp.shape();
      for (int i = 0; i < cls.size(); ++i) {
        double r0 = 0.0, r1 = 0.0;
        for (int h = 0; h < sh.horizon; ++h) {
          r0 += reward_tables[i][sh.hsa(h, rec.tau0.states[h], rec.tau0.actions[h])];
          r1 += reward_tables[i][sh.hsa(h, rec.tau1.states[h], rec.tau1.actions[h])];
        }
        cum_ll[i] += record_log_term(r0, r1, rec.o, link);
      }
    }

    prev_pi0 = rec.pi0;
    prev_value = member_value[rec.member];
    rec.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    log.rounds.push_back(std::move(rec));
  }
  return log;
}

std::vector<double> per_round_regret(const RunLog& log, const EpisodicMdp& mdp) {
  auto [pi_star, star_tables] = optimal_policy(mdp);
  double v_star = initial_state_value(mdp, star_tables);
  std::vector<double> out;
  out.reserve(log.rounds.size());
  for (const auto& rec : log.rounds) {
    double v0 = initial_state_value(mdp, exact_policy_value(mdp, rec.pi0));
    double v1 = initial_state_value(mdp, exact_policy_value(mdp, rec.pi1));
    out.push_back(2.0 * v_star - v0 - v1);
  }
  return out;
}

std::vector<double> cumulative_regret(const RunLog& log, const EpisodicMdp& mdp) {
  std::vector<double> out = per_round_regret(log, mdp);
  for (std::size_t i = 1; i < out.size(); ++i) out[i] += out[i - 1];
  return out;
}

EpisodicMdp environment_from_hypothesis(const QHypothesis& f,
                                        const std::vector<double>& transitions,
                                        int initial_state) {
  std::vector<double> rewards = implied_reward_table(f, transitions);
  for (double& r : rewards) {
    if (r < -1e-9 || r > 1.0 + 1e-9) {
      throw ConfigError("hypothesis does not induce rewards in [0, 1]");
    }
    r = std::clamp(r, 0.0, 1.0);
  }
  return EpisodicMdp(f.shape, std::move(rewards), transitions, initial_state);
}

BayesRegretResult bayes_regret(const HypothesisClass& cls, const EpisodicMdp& base_mdp,
                               const LinkFunction& link, const RunConfig& config, int num_draws) {
  if (num_draws < 1) throw ConfigError("bayes_regret needs at least one draw");
  BayesRegretResult result;
  result.num_draws = num_draws;
  std::vector<double> sum(config.rounds, 0.0), sum_sq(config.rounds, 0.0);
  for (int d = 0; d < num_draws; ++d) {
    Rng draw_rng = substream(config.seed, "bayes-draw-" + std::to_string(d));
    int star = draw_rng.categorical(cls.prior);
    EpisodicMdp env = environment_from_hypothesis(cls.members[star], base_mdp.transitions(),
                                                  base_mdp.initial_state());
    RunConfig rc = config;
    rc.seed = substream_seed(config.seed, "bayes-run-" + std::to_string(d));
    RunLog log = run_ts(env, cls, link, rc);
    std::vector<double> series = cumulative_regret(log, env);
    for (int t = 0; t < config.rounds; ++t) {
      sum[t] += series[t];
      sum_sq[t] += series[t] * series[t];
    }
  }
  result.mean_regret.resize(config.rounds);
  result.stderr_regret.resize(config.rounds);
  for (int t = 0; t < config.rounds; ++t) {
    double mean = sum[t] / num_draws;
    result.mean_regret[t] = mean;
    double var = num_draws > 1 ? std::max(0.0, (sum_sq[t] - num_draws * mean * mean) / (num_draws - 1))
                               : 0.0;
    result.stderr_regret[t] = std::sqrt(var / num_draws);
  }
  return result;
}

namespace {

// Residual table f_h - T_h f_{h+1} over the true kernel, sa-indexed.
std::vector<double> bellman_residual(const QHypothesis& f, const EpisodicMdp& mdp, int h) {
  const MdpShape& sh = mdp.shape();
  std::vector<double> f_next(sh.sa_size(), 0.0);
  if (h + 1 < sh.horizon) {
    std::copy_n(f.tables.begin() + sh.hsa(h + 1, 0, 0), sh.sa_size(), f_next.begin());
  }
  std::vector<double> image = bellman_apply(mdp, f_next, h);
  std::vector<double> resid(sh.sa_size());
  for (int j = 0; j < sh.sa_size(); ++j) resid[j] = f.tables[sh.hsa(h, 0, 0) + j] - image[j];
  return resid;
}

}  // namespace

double bellman_error(const QHypothesis& f, const TabularPolicy& policy, int h,
                     const EpisodicMdp& mdp) {
  if (f.shape != mdp.shape()) throw ConfigError("hypothesis shape does not match mdp");
  if (h < 0 || h >= mdp.horizon()) throw ConfigError("bellman_error: step out of range");
  std::vector<double> occ = occupancy_measures(mdp, policy);
  std::vector<double> resid = bellman_residual(f, mdp, h);
  const MdpShape& sh = mdp.shape();
  double e = 0.0;
  for (int j = 0; j < sh.sa_size(); ++j) e += occ[sh.hsa(h, 0, 0) + j] * resid[j];
  return e;
}

double loss_decomposition_check(const QHypothesis& f, const EpisodicMdp& mdp) {
  TabularPolicy pi_f = greedy_policy(f);
  const MdpShape& sh = mdp.shape();
  double v_f = f.at(0, mdp.initial_state(), 0);
  for (int a = 1; a < sh.num_actions; ++a) {
    v_f = std::max(v_f, f.at(0, mdp.initial_state(), a));
  }
  double v_true = exact_policy_value(mdp, pi_f).v[mdp.initial_state()];
  double total = 0.0;
  for (int h = 0; h < sh.horizon; ++h) total += bellman_error(f, pi_f, h, mdp);
  return std::abs(v_f - v_true - total);
}

DiagnosticsReport confidence_diagnostics(const RunLog& log, const HypothesisClass& cls,
                                         const EpisodicMdp& mdp, const LinkFunction& link,
                                         double delta) {
  const MdpShape& sh = mdp.shape();
  DiagnosticsReport report;
  DerivativeBounds bounds = derivative_bounds(link, sh.horizon);
  report.kappa = bounds.kappa;
  report.kappa_bar = bounds.kappa_bar;
  report.bracket_n = bracketing_bound(cls);
  report.delta = delta;

  auto [pi_star, star_tables] = optimal_policy(mdp);
  const std::vector<double>& q_star = star_tables.q;

  // Logging grid: powers of two plus the final round.
  std::set<int> grid;
  int total_rounds = static_cast<int>(log.rounds.size());
  for (long long g = 1; g <= total_rounds; g *= 2) grid.insert(static_cast<int>(g));
  grid.insert(total_rounds);

  std::map<int, std::vector<double>> occ_by_member;
  std::vector<double> cum_occ(sh.hsa_size(), 0.0);     // sum of pi0^i occupancies, i < t
  std::vector<long long> visits(sh.hsa_size(), 0);     // visited pairs from both trajectories

  for (int t = 1; t <= total_rounds; ++t) {
    const RoundRecord& rec = log.rounds[t - 1];
    if (grid.count(t)) {
      const QHypothesis& f = cls.members[rec.member];
      DiagnosticsEntry entry;
      entry.t = t;
      entry.beta_value = beta(t, bounds.kappa, bounds.kappa_bar, sh.horizon, report.bracket_n, delta);
      entry.coverage_ok = true;
      entry.bellman_bound_ok = true;
      for (int h = 0; h < sh.horizon; ++h) {
        std::vector<double> resid = bellman_residual(f, mdp, h);
        double dev = 0.0, bell = 0.0, data = 0.0;
        for (int j = 0; j < sh.sa_size(); ++j) {
          int idx = sh.hsa(h, 0, 0) + j;
          double diff = f.tables[idx] - q_star[idx];
          dev += cum_occ[idx] * diff * diff;
          bell += cum_occ[idx] * resid[j] * resid[j];
          data += static_cast<double>(visits[idx]) * resid[j] * resid[j];
        }
        entry.sq_deviation.push_back(dev);
        entry.sq_bellman.push_back(bell);
        entry.dataset_sq_bellman.push_back(data);
        if (dev > 4.0 * entry.beta_value) entry.coverage_ok = false;
        if (bell > 6.0 * (entry.beta_value + entry.beta_value)) entry.bellman_bound_ok = false;
      }
      report.entries.push_back(std::move(entry));
    }
    auto it = occ_by_member.find(rec.member);
    if (it == occ_by_member.end()) {
      it = occ_by_member.emplace(rec.member, occupancy_measures(mdp, rec.pi0)).first;
    }
    for (int j = 0; j < sh.hsa_size(); ++j) cum_occ[j] += it->second[j];
    for (int h = 0; h < sh.horizon; ++h) {
      visits[sh.hsa(h, rec.tau0.states[h], rec.tau0.actions[h])] += 1;
      visits[sh.hsa(h, rec.tau1.states[h], rec.tau1.actions[h])] += 1;
    }
  }
  return report;
}

PigeonholeReport pigeonhole_check(const RunLog& log, const HypothesisClass& cls,
                                  const EpisodicMdp& mdp, const LinkFunction& link, double delta,
                                  double c, const EluderCaps& caps) {
  const MdpShape& sh = mdp.shape();
  int total_rounds = static_cast<int>(log.rounds.size());
  PigeonholeReport report;
  report.c = c;
  report.omega = std::sqrt(1.0 / total_rounds);
  DerivativeBounds bounds = derivative_bounds(link, sh.horizon);
  int bracket_n = bracketing_bound(cls);
  double beta_value =
      beta(total_rounds, bounds.kappa, bounds.kappa_bar, sh.horizon, bracket_n, delta);
  double lemma_beta = 6.0 * (beta_value + beta_value);

  std::map<int, std::vector<double>> occ_by_member;
  for (const auto& rec : log.rounds) {
    if (!occ_by_member.count(rec.member)) {
      occ_by_member.emplace(rec.member, occupancy_measures(mdp, rec.pi0));
    }
  }

  report.holds = true;
  for (int h = 0; h < sh.horizon; ++h) {
    std::set<std::vector<double>> residual_set;
    std::set<std::vector<double>> family_set;
    double lhs = 0.0;
    double bound_c = 0.0;
    for (const auto& rec : log.rounds) {
      std::vector<double> resid = bellman_residual(cls.members[rec.member], mdp, h);
      const std::vector<double>& occ = occ_by_member.at(rec.member);
      double e = 0.0;
      for (int j = 0; j < sh.sa_size(); ++j) e += occ[sh.hsa(h, 0, 0) + j] * resid[j];
      lhs += std::abs(e);
      for (double r : resid) bound_c = std::max(bound_c, std::abs(r));
      residual_set.insert(std::move(resid));
      family_set.insert(std::vector<double>(occ.begin() + sh.hsa(h, 0, 0),
                                            occ.begin() + sh.hsa(h, 0, 0) + sh.sa_size()));
    }
    ScalarFunctionClass scls;
    scls.members.assign(residual_set.begin(), residual_set.end());
    std::vector<FiniteDistribution> family;
    for (const auto& p : family_set) family.push_back(FiniteDistribution{p});
    EluderCertificate cert = de_dimension(scls, family, report.omega, caps);

    double rhs = c * std::sqrt(cert.dimension * lemma_beta * total_rounds) +
                 std::min<double>(total_rounds, cert.dimension) * bound_c +
                 total_rounds * report.omega;
    report.lhs.push_back(lhs);
    report.rhs.push_back(rhs);
    report.dimensions.push_back(cert.dimension);
    if (lhs > rhs) report.holds = false;
  }
  return report;
}

}  // namespace prefts
