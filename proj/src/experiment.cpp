#include "experiment.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "errors.hpp"
#include "posterior.hpp"
#include "serialize.hpp"

namespace prefts {

namespace fs = std::filesystem;
using nlohmann::json;

EpisodicMdp random_mdp(std::uint64_t seed, int num_states, int num_actions, int horizon) {
  if (num_states < 1 || num_actions < 1 || horizon < 1) {
    throw ConfigError("random_mdp needs S, A, H >= 1");
  }
  MdpShape sh{horizon, num_states, num_actions};
  Rng rng(seed);
  std::vector<double> rewards(sh.hsa_size());
  for (double& r : rewards) r = rng.uniform01();
  std::vector<double> transitions(sh.transition_size());
  for (int h = 0; h + 1 < horizon; ++h) {
    for (int s = 0; s < num_states; ++s) {
      for (int a = 0; a < num_actions; ++a) {
        std::vector<double> row = rng.dirichlet_flat(num_states);
        std::copy(row.begin(), row.end(), transitions.begin() + sh.hsas(h, s, a, 0));
      }
    }
  }
  return EpisodicMdp(sh, std::move(rewards), std::move(transitions), 0);
}

HypothesisClass generate_class(const EpisodicMdp& mdp, int count, double noise,
                               std::uint64_t seed) {
  if (count < 1) throw ConfigError("class generator needs count >= 1");
  const MdpShape& sh = mdp.shape();
  auto [pi_star, vt] = optimal_policy(mdp);
  Rng rng(seed);
  std::vector<QHypothesis> members;
  members.push_back(QHypothesis{sh, vt.q});
  for (int i = 1; i < count; ++i) {
    QHypothesis f{sh, vt.q};
    for (int h = 0; h < sh.horizon; ++h) {
      double ub = static_cast<double>(sh.horizon - h);
      for (int j = 0; j < sh.sa_size(); ++j) {
        double& v = f.tables[sh.hsa(h, 0, 0) + j];
        v = std::clamp(v + noise * rng.gaussian(), 0.0, ub);
      }
    }
    members.push_back(std::move(f));
  }
  return make_class(std::move(members));
}

HypothesisClass generate_reward_perturbed_class(const EpisodicMdp& mdp, int count, double noise,
                                                std::uint64_t seed) {
  if (count < 1) throw ConfigError("class generator needs count >= 1");
  const MdpShape& sh = mdp.shape();
  Rng rng(seed);
  std::vector<QHypothesis> members;
  auto [pi_star, vt] = optimal_policy(mdp);
  members.push_back(QHypothesis{sh, vt.q});
  for (int i = 1; i < count; ++i) {
    std::vector<double> rewards(mdp.rewards());
    for (double& r : rewards) r = std::clamp(r + noise * rng.gaussian(), 0.0, 1.0);
    EpisodicMdp perturbed(sh, std::move(rewards), mdp.transitions(), mdp.initial_state());
    auto [pi_i, vt_i] = optimal_policy(perturbed);
    members.push_back(QHypothesis{sh, vt_i.q});
  }
  return make_class(std::move(members));
}

namespace {

TransitionMode transition_mode_from_string(const std::string& name) {
  if (name == "true_p") return TransitionMode::kTrueP;
  if (name == "estimated_p") return TransitionMode::kEstimatedP;
  throw ConfigError("unknown transition_mode: " + name);
}

std::string transition_mode_to_string(TransitionMode mode) {
  return mode == TransitionMode::kTrueP ? "true_p" : "estimated_p";
}

const std::vector<std::string> kModes = {"single_run", "bayes_regret", "eluder_report", "elbo_run",
                                         "diagnostics"};

}  // namespace

ExperimentSpec spec_from_json(const json& j) {
  ExperimentSpec spec;
  spec.mode = j.at("mode").get<std::string>();
  if (std::find(kModes.begin(), kModes.end(), spec.mode) == kModes.end()) {
    throw ConfigError("unknown mode: " + spec.mode);
  }
  spec.seed = j.value("seed", 0ull);
  spec.rounds = j.value("rounds", 1);
  spec.delta = j.value("delta", 0.1);
  spec.transition_mode = transition_mode_from_string(j.value("transition_mode", "true_p"));
  spec.smoothing_window = j.value("smoothing_window", 20);
  spec.link = j.value("link", json{{"kind", "sigmoid"}});
  if (j.contains("mdp")) spec.mdp = j.at("mdp");
  if (j.contains("class")) spec.hypothesis_class = j.at("class");
  spec.num_seeds = j.value("num_seeds", 1);

  if (j.contains("eluder")) {
    const json& je = j.at("eluder");
    spec.eluder_family = je.value("family", "delta");
    spec.eluder_eps = je.value("eps", 0.1);
    spec.eluder_caps.max_family = je.value("max_family", spec.eluder_caps.max_family);
    spec.eluder_caps.max_members = je.value("max_members", spec.eluder_caps.max_members);
  }
  if (j.contains("elbo")) {
    const json& je = j.at("elbo");
    spec.elbo.batch_size = je.value("batch_size", spec.elbo.batch_size);
    spec.elbo.samples_per_iter = je.value("samples_per_iter", spec.elbo.samples_per_iter);
    spec.elbo.reuse_window = je.value("reuse_window", spec.elbo.reuse_window);
    spec.elbo.step_size = je.value("step_size", spec.elbo.step_size);
    spec.elbo.iterations = je.value("iterations", spec.elbo.iterations);
    spec.elbo.smoothing = je.value("smoothing", spec.elbo.smoothing);
    spec.elbo_stationary = je.value("stationary", false);
    spec.elbo_prior_mean = je.value("prior_mean", 0.0);
    spec.elbo_prior_std = je.value("prior_std", 10.0);
  }
  spec.run_dir = j.value("run_dir", std::string());

  if (spec.rounds < 1) throw ConfigError("rounds must be >= 1");
  if (!(spec.delta > 0.0 && spec.delta <= 1.0)) throw ConfigError("delta must be in (0, 1]");
  if (spec.mdp.is_null()) throw ConfigError("mode " + spec.mode + " needs an mdp spec");
  if (spec.mode != "elbo_run" && spec.hypothesis_class.is_null()) {
    throw ConfigError("mode " + spec.mode + " needs a class spec");
  }
  if (spec.mode == "diagnostics" && spec.run_dir.empty()) {
    throw ConfigError("diagnostics mode needs run_dir");
  }
  if (spec.num_seeds < 1) throw ConfigError("num_seeds must be >= 1");
  return spec;
}

json spec_to_json(const ExperimentSpec& spec) {
  json j{{"mode", spec.mode},
         {"seed", spec.seed},
         {"rounds", spec.rounds},
         {"delta", spec.delta},
         {"transition_mode", transition_mode_to_string(spec.transition_mode)},
         {"smoothing_window", spec.smoothing_window},
         {"link", spec.link},
         {"num_seeds", spec.num_seeds}};
  if (!spec.mdp.is_null()) j["mdp"] = spec.mdp;
  if (!spec.hypothesis_class.is_null()) j["class"] = spec.hypothesis_class;
  if (spec.mode == "eluder_report") {
    j["eluder"] = json{{"family", spec.eluder_family},
                       {"eps", spec.eluder_eps},
                       {"max_family", spec.eluder_caps.max_family},
                       {"max_members", spec.eluder_caps.max_members}};
  }
  if (spec.mode == "elbo_run") {
    j["elbo"] = json{{"batch_size", spec.elbo.batch_size},
                     {"samples_per_iter", spec.elbo.samples_per_iter},
                     {"reuse_window", spec.elbo.reuse_window},
                     {"step_size", spec.elbo.step_size},
                     {"iterations", spec.elbo.iterations},
                     {"smoothing", spec.elbo.smoothing},
                     {"stationary", spec.elbo_stationary},
                     {"prior_mean", spec.elbo_prior_mean},
                     {"prior_std", spec.elbo_prior_std}};
  }
  if (!spec.run_dir.empty()) j["run_dir"] = spec.run_dir;
  return j;
}

EpisodicMdp build_mdp(const ExperimentSpec& spec) {
  const json& jm = spec.mdp;
  if (jm.is_null()) throw ConfigError("missing mdp spec");
  std::string kind = jm.value("kind", "explicit");
  if (kind == "random") {
    std::uint64_t seed = jm.contains("seed") ? jm.at("seed").get<std::uint64_t>()
                                             : substream_seed(spec.seed, "mdp");
    return random_mdp(seed, jm.at("num_states").get<int>(), jm.at("num_actions").get<int>(),
                      jm.at("horizon").get<int>());
  }
  if (kind == "explicit") return mdp_from_json(jm);
  throw ConfigError("unknown mdp kind: " + kind);
}

HypothesisClass build_class(const ExperimentSpec& spec, const EpisodicMdp& mdp) {
  const json& jc = spec.hypothesis_class;
  if (jc.is_null()) throw ConfigError("missing class spec");
  std::string kind = jc.value("kind", "explicit");
  if (kind == "perturbed_qstar" || kind == "perturbed_rewards") {
    std::uint64_t seed = jc.contains("seed") ? jc.at("seed").get<std::uint64_t>()
                                             : substream_seed(spec.seed, "class");
    int count = jc.at("count").get<int>();
    double noise = jc.at("noise").get<double>();
    return kind == "perturbed_qstar" ? generate_class(mdp, count, noise, seed)
                                     : generate_reward_perturbed_class(mdp, count, noise, seed);
  }
  if (kind == "explicit") return class_from_json(jc);
  throw ConfigError("unknown class kind: " + kind);
}

LinkFunction build_link(const ExperimentSpec& spec) { return link_from_json(spec.link); }

namespace {

RunConfig run_config_of(const ExperimentSpec& spec) {
  RunConfig rc;
  rc.rounds = spec.rounds;
  rc.delta = spec.delta;
  rc.transition_mode = spec.transition_mode;
  rc.seed = spec.seed;
  rc.smoothing_window = spec.smoothing_window;
  return rc;
}

void write_config_echo(const ExperimentSpec& spec, const fs::path& out_dir) {
  write_text_file(out_dir / "config_echo.json", spec_to_json(spec).dump(2) + "\n");
}

void run_single(const ExperimentSpec& spec, const fs::path& out_dir) {
  EpisodicMdp mdp = build_mdp(spec);
  HypothesisClass cls = build_class(spec, mdp);
  LinkFunction link = build_link(spec);
  RunLog log = run_ts(mdp, cls, link, run_config_of(spec));

  write_text_file(out_dir / "mdp.json", mdp_to_json(mdp).dump(2) + "\n");
  write_text_file(out_dir / "class.json", class_to_json(cls).dump() + "\n");
  write_runlog(out_dir / "runlog.jsonl", log);
  write_dataset(out_dir / "dataset.jsonl", log);
  std::vector<double> per_round = per_round_regret(log, mdp);
  write_regret_csv(out_dir / "regret.csv", per_round, spec.smoothing_window);

  double total = 0.0;
  for (double r : per_round) total += r;
  json summary{{"mode", spec.mode},
               {"rounds", spec.rounds},
               {"optimal_value", log.optimal_value},
               {"final_regret", total},
               {"final_posterior_hash", log.rounds.back().posterior_hash}};
  write_text_file(out_dir / "summary.json", summary.dump(2) + "\n");
}

void run_bayes(const ExperimentSpec& spec, const fs::path& out_dir) {
  EpisodicMdp base = build_mdp(spec);
  HypothesisClass cls = build_class(spec, base);
  LinkFunction link = build_link(spec);
  RunConfig rc = run_config_of(spec);

  std::vector<std::vector<double>> series(spec.num_seeds);
  for (int d = 0; d < spec.num_seeds; ++d) {
    Rng draw_rng = substream(spec.seed, "bayes-draw-" + std::to_string(d));
    int star = draw_rng.categorical(cls.prior);
    EpisodicMdp env =
        environment_from_hypothesis(cls.members[star], base.transitions(), base.initial_state());
    RunConfig seed_rc = rc;
    seed_rc.seed = substream_seed(spec.seed, "bayes-run-" + std::to_string(d));
    RunLog log = run_ts(env, cls, link, seed_rc);

    fs::path seed_dir = out_dir / ("seed_" + std::to_string(d));
    fs::create_directories(seed_dir);
    write_runlog(seed_dir / "runlog.jsonl", log);
    std::vector<double> per_round = per_round_regret(log, env);
    write_regret_csv(seed_dir / "regret.csv", per_round, spec.smoothing_window);
    series[d] = cumulative_regret(log, env);
  }

  std::ostringstream agg;
  agg << "t,mean_regret,stderr_regret\n";
  for (int t = 0; t < spec.rounds; ++t) {
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& s : series) {
      sum += s[t];
      sum_sq += s[t] * s[t];
    }
    double mean = sum / spec.num_seeds;
    double var =
        spec.num_seeds > 1
            ? std::max(0.0, (sum_sq - spec.num_seeds * mean * mean) / (spec.num_seeds - 1))
            : 0.0;
    agg << (t + 1) << "," << format_double(mean) << ","
        << format_double(std::sqrt(var / spec.num_seeds)) << "\n";
  }
  write_text_file(out_dir / "aggregate.csv", agg.str());
}

void run_eluder(const ExperimentSpec& spec, const fs::path& out_dir) {
  EpisodicMdp mdp = build_mdp(spec);
  HypothesisClass cls = build_class(spec, mdp);
  DistributionFamily family = spec.eluder_family == "greedy" ? DistributionFamily::kGreedy
                                                             : DistributionFamily::kDelta;
  if (spec.eluder_family != "greedy" && spec.eluder_family != "delta") {
    throw ConfigError("unknown eluder family: " + spec.eluder_family);
  }
  BeDimensionResult result = be_dimension(cls, mdp, family, spec.eluder_eps, spec.eluder_caps);
  write_text_file(out_dir / "eluder.json", be_dimension_to_json(result).dump(2) + "\n");
}

void run_elbo(const ExperimentSpec& spec, const fs::path& out_dir) {
  EpisodicMdp mdp = build_mdp(spec);
  LinkFunction link = build_link(spec);
  const MdpShape& sh = mdp.shape();
  if (spec.elbo.iterations < 1) throw ConfigError("elbo_run needs elbo.iterations >= 1");

  Rng alg_rng = substream(spec.seed, "algorithm");
  Rng pref_rng = substream(spec.seed, "preference");
  GaussianQPosterior prior = GaussianQPosterior::isotropic(sh, spec.elbo_prior_mean,
                                                           spec.elbo_prior_std,
                                                           spec.elbo_stationary);
  GaussianQPosterior q = prior;

  auto [pi_star, star_tables] = optimal_policy(mdp);
  double v_star = star_tables.v[mdp.initial_state()];
  auto policy_value = [&](const TabularPolicy& pi) {
    return exact_policy_value(mdp, pi).v[mdp.initial_state()];
  };

  TabularPolicy prev = uniform_policy(sh);
  double prev_value = policy_value(prev);
  PreferenceDataset dataset;
  std::deque<QSample> fifo;
  ElboTrace trace;
  std::vector<double> regret_increments;

  for (int iter = 0; iter < spec.elbo.iterations; ++iter) {
    // Thompson-style behavior: greedy policy of one posterior sample.
    QHypothesis sampled = materialize(q, draw_sample(q, alg_rng));
    TabularPolicy pi0 = greedy_policy(sampled);
    for (int j = 0; j < spec.elbo.batch_size; ++j) {
      Trajectory tau0 = sample_trajectory(mdp, pi0, alg_rng);
      Trajectory tau1 = sample_trajectory(mdp, prev, alg_rng);
      int o = sample_preference(link, trajectory_reward(mdp, tau0), trajectory_reward(mdp, tau1),
                                pref_rng);
      dataset.push_back(PreferenceRecord{std::move(tau0), std::move(tau1), o});
    }
    regret_increments.push_back(2.0 * v_star - policy_value(pi0) - prev_value);

    for (int j = 0; j < spec.elbo.samples_per_iter; ++j) {
      fifo.push_back(draw_sample(q, alg_rng));
      if (static_cast<int>(fifo.size()) > spec.elbo.reuse_window) fifo.pop_front();
    }
    std::vector<QSample> samples(fifo.begin(), fifo.end());

    int dataset_size = static_cast<int>(dataset.size());
    int batch = std::min(spec.elbo.batch_size, dataset_size);
    PreferenceDataset minibatch;
    for (int j = 0; j < batch; ++j) {
      minibatch.push_back(dataset[(static_cast<long long>(iter) * batch + j) % dataset_size]);
    }
    // Ascend the full ELBO with a per-record step normalization: the
    // likelihood sum grows with the dataset, so a raw fixed step would blow
    // up as rounds accumulate. Same maximizer, stable steps.
    double scale = static_cast<double>(dataset_size) / batch;
    ElboGradient grad = elbo_gradient(q, minibatch, prior, link, mdp.transitions(), samples, scale);
    double step = spec.elbo.step_size / dataset_size;
    for (int i = 0; i < q.param_count(); ++i) {
      q.mean[i] += step * grad.mean[i];
      q.log_std[i] += step * grad.log_std[i];
    }
    for (double m : q.mean) {
      if (std::abs(m) > 1e3 * sh.horizon) throw DivergenceError("variational mean diverged");
    }

    // The dataset grows every iteration, so the raw ELBO drifts downward by
    // construction; the per-record value is the comparable trace.
    trace.elbo.push_back(elbo_estimate(q, dataset, prior, link, mdp.transitions(), samples) /
                         static_cast<double>(dataset.size()));
    QHypothesis mean_table{sh, std::vector<double>(sh.hsa_size())};
    for (int h = 0; h < sh.horizon; ++h) {
      for (int j = 0; j < sh.sa_size(); ++j) {
        mean_table.tables[sh.hsa(h, 0, 0) + j] = q.mean[q.param_index(h, j / sh.num_actions,
                                                                      j % sh.num_actions)];
      }
    }
    trace.value_of_mean_greedy.push_back(policy_value(greedy_policy(mean_table)));
    prev = pi0;
    prev_value = policy_value(pi0);
  }
  trace.smoothed = smooth(trace.elbo, spec.elbo.smoothing);

  write_elbo_csv(out_dir / "elbo_trace.csv", trace);
  write_regret_csv(out_dir / "regret.csv", regret_increments, spec.elbo.smoothing);
  json fitted{{"stationary", q.stationary}, {"mean", q.mean}, {"log_std", q.log_std}};
  write_text_file(out_dir / "fitted.json", fitted.dump() + "\n");
  json summary{{"mode", spec.mode},
               {"iterations", spec.elbo.iterations},
               {"optimal_value", v_star},
               {"final_elbo", trace.elbo.back()},
               {"final_value_of_mean_greedy", trace.value_of_mean_greedy.back()}};
  write_text_file(out_dir / "summary.json", summary.dump(2) + "\n");
}

void run_diagnostics(const ExperimentSpec& spec, const fs::path& out_dir) {
  EpisodicMdp mdp = build_mdp(spec);
  HypothesisClass cls = build_class(spec, mdp);
  LinkFunction link = build_link(spec);
  RunLog log = read_runlog(fs::path(spec.run_dir) / "runlog.jsonl", mdp.shape());
  DiagnosticsReport report = confidence_diagnostics(log, cls, mdp, link, spec.delta);
  write_text_file(out_dir / "diagnostics.json", diagnostics_to_json(report).dump(2) + "\n");
}

}  // namespace

void run_experiment(const ExperimentSpec& spec, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  write_config_echo(spec, out_dir);
  if (spec.mode == "single_run") {
    run_single(spec, out_dir);
  } else if (spec.mode == "bayes_regret") {
    run_bayes(spec, out_dir);
  } else if (spec.mode == "eluder_report") {
    run_eluder(spec, out_dir);
  } else if (spec.mode == "elbo_run") {
    run_elbo(spec, out_dir);
  } else if (spec.mode == "diagnostics") {
    run_diagnostics(spec, out_dir);
  } else {
    throw ConfigError("unknown mode: " + spec.mode);
  }
}

int run_experiment_json(const std::string& spec_text, const fs::path& out_dir,
                        std::optional<std::uint64_t> seed_override,
                        std::optional<int> rounds_override, std::string* error_message) {
  auto record_error = [&](const std::string& message, int code) {
    if (error_message) *error_message = message;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!ec) {
      json err{{"error", message}, {"exit_code", code}};
      try {
        write_text_file(out_dir / "error.json", err.dump(2) + "\n");
      } catch (...) {
      }
    }
    return code;
  };
  try {
    json j = json::parse(spec_text);
    ExperimentSpec spec = spec_from_json(j);
    if (seed_override) spec.seed = *seed_override;
    if (rounds_override) spec.rounds = *rounds_override;
    run_experiment(spec, out_dir);
    return 0;
  } catch (const DivergenceError& e) {
    return record_error(e.what(), 3);
  } catch (const ConfigError& e) {
    return record_error(e.what(), 2);
  } catch (const TooLargeError& e) {
    return record_error(e.what(), 2);
  } catch (const json::exception& e) {
    return record_error(std::string("spec parse error: ") + e.what(), 2);
  } catch (const std::exception& e) {
    return record_error(e.what(), 1);
  }
}

}  // namespace prefts
