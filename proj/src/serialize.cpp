#include "serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace prefts {

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

json mdp_to_json(const EpisodicMdp& mdp) {
  const MdpShape& sh = mdp.shape();
  json rewards = json::array();
  for (int h = 0; h < sh.horizon; ++h) {
    json per_s = json::array();
    for (int s = 0; s < sh.num_states; ++s) {
      json per_a = json::array();
      for (int a = 0; a < sh.num_actions; ++a) per_a.push_back(mdp.reward(h, s, a));
      per_s.push_back(std::move(per_a));
    }
    rewards.push_back(std::move(per_s));
  }
  json transitions = json::array();
  for (int h = 0; h + 1 < sh.horizon; ++h) {
    json per_s = json::array();
    for (int s = 0; s < sh.num_states; ++s) {
      json per_a = json::array();
      for (int a = 0; a < sh.num_actions; ++a) {
        json row = json::array();
        for (int s2 = 0; s2 < sh.num_states; ++s2) row.push_back(mdp.transition(h, s, a, s2));
        per_a.push_back(std::move(row));
      }
      per_s.push_back(std::move(per_a));
    }
    transitions.push_back(std::move(per_s));
  }
  return json{{"horizon", sh.horizon},
              {"num_states", sh.num_states},
              {"num_actions", sh.num_actions},
              {"rewards", std::move(rewards)},
              {"transitions", std::move(transitions)},
              {"initial_state", mdp.initial_state()}};
}

EpisodicMdp mdp_from_json(const json& j) {
  MdpShape sh{j.at("horizon").get<int>(), j.at("num_states").get<int>(),
              j.at("num_actions").get<int>()};
  std::vector<double> rewards(sh.hsa_size());
  const json& jr = j.at("rewards");
  for (int h = 0; h < sh.horizon; ++h) {
    for (int s = 0; s < sh.num_states; ++s) {
      for (int a = 0; a < sh.num_actions; ++a) {
        rewards[sh.hsa(h, s, a)] = jr.at(h).at(s).at(a).get<double>();
      }
    }
  }
  std::vector<double> transitions(sh.transition_size());
  const json& jt = j.at("transitions");
  for (int h = 0; h + 1 < sh.horizon; ++h) {
    for (int s = 0; s < sh.num_states; ++s) {
      for (int a = 0; a < sh.num_actions; ++a) {
        for (int s2 = 0; s2 < sh.num_states; ++s2) {
          transitions[sh.hsas(h, s, a, s2)] = jt.at(h).at(s).at(a).at(s2).get<double>();
        }
      }
    }
  }
  return EpisodicMdp(sh, std::move(rewards), std::move(transitions),
                     j.at("initial_state").get<int>());
}

json link_to_json(const LinkFunction& link) {
  if (link.kind == LinkKind::kSigmoid) return json{{"kind", "sigmoid"}};
  return json{{"kind", "scaled_linear"}, {"range", link.range}};
}

LinkFunction link_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "sigmoid") return LinkFunction::sigmoid();
  if (kind == "scaled_linear") return LinkFunction::scaled_linear(j.at("range").get<double>());
  throw ConfigError("unknown link kind: " + kind);
}

json trajectory_to_json(const Trajectory& tau) {
  return json{{"states", tau.states}, {"actions", tau.actions}};
}

Trajectory trajectory_from_json(const json& j) {
  Trajectory tau;
  tau.states = j.at("states").get<std::vector<int>>();
  tau.actions = j.at("actions").get<std::vector<int>>();
  if (tau.states.size() != tau.actions.size()) throw ConfigError("malformed trajectory");
  return tau;
}

json hypothesis_to_json(const QHypothesis& f) {
  const MdpShape& sh = f.shape;
  json tables = json::array();
  for (int h = 0; h < sh.horizon; ++h) {
    json per_s = json::array();
    for (int s = 0; s < sh.num_states; ++s) {
      json per_a = json::array();
      for (int a = 0; a < sh.num_actions; ++a) per_a.push_back(f.at(h, s, a));
      per_s.push_back(std::move(per_a));
    }
    tables.push_back(std::move(per_s));
  }
  return tables;
}

QHypothesis hypothesis_from_json(const json& j, const MdpShape& shape) {
  QHypothesis f;
  f.shape = shape;
  f.tables.resize(shape.hsa_size());
  for (int h = 0; h < shape.horizon; ++h) {
    for (int s = 0; s < shape.num_states; ++s) {
      for (int a = 0; a < shape.num_actions; ++a) {
        f.tables[shape.hsa(h, s, a)] = j.at(h).at(s).at(a).get<double>();
      }
    }
  }
  return f;
}

json class_to_json(const HypothesisClass& cls) {
  const MdpShape& sh = cls.shape();
  json members = json::array();
  for (const auto& m : cls.members) members.push_back(hypothesis_to_json(m));
  return json{{"horizon", sh.horizon},
              {"num_states", sh.num_states},
              {"num_actions", sh.num_actions},
              {"members", std::move(members)},
              {"prior", cls.prior}};
}

HypothesisClass class_from_json(const json& j) {
  MdpShape sh{j.at("horizon").get<int>(), j.at("num_states").get<int>(),
              j.at("num_actions").get<int>()};
  std::vector<QHypothesis> members;
  for (const auto& jm : j.at("members")) members.push_back(hypothesis_from_json(jm, sh));
  std::vector<double> prior;
  if (j.contains("prior")) prior = j.at("prior").get<std::vector<double>>();
  return make_class(std::move(members), std::move(prior));
}

json certificate_to_json(const EluderCertificate& cert) {
  return json{{"dimension", cert.dimension},
              {"sequence", cert.sequence},
              {"witnesses", cert.witnesses},
              {"eps", cert.eps},
              {"eps_prime", cert.eps_prime},
              {"dimension_without_repetition", cert.dimension_without_repetition}};
}

json be_dimension_to_json(const BeDimensionResult& result) {
  json steps = json::array();
  for (const auto& cert : result.per_step) steps.push_back(certificate_to_json(cert));
  return json{{"dimension", result.dimension}, {"per_step", std::move(steps)}};
}

json diagnostics_to_json(const DiagnosticsReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries) {
    entries.push_back(json{{"t", e.t},
                           {"sq_deviation", e.sq_deviation},
                           {"sq_bellman", e.sq_bellman},
                           {"dataset_sq_bellman", e.dataset_sq_bellman},
                           {"beta", e.beta_value},
                           {"coverage_ok", e.coverage_ok},
                           {"bellman_bound_ok", e.bellman_bound_ok}});
  }
  return json{{"kappa", report.kappa},
              {"kappa_bar", report.kappa_bar},
              {"bracket_n", report.bracket_n},
              {"delta", report.delta},
              {"entries", std::move(entries)}};
}

namespace {

json round_to_json(const RoundRecord& rec) {
  return json{{"t", rec.t},
              {"member", rec.member},
              {"pi0", rec.pi0.probs},
              {"pi1", rec.pi1.probs},
              {"tau0", trajectory_to_json(rec.tau0)},
              {"tau1", trajectory_to_json(rec.tau1)},
              {"o", rec.o},
              {"posterior_hash", rec.posterior_hash},
              {"regret_increment", rec.regret_increment}};
}

RoundRecord round_from_json(const json& j, const MdpShape& shape) {
  RoundRecord rec;
  rec.t = j.at("t").get<int>();
  rec.member = j.at("member").get<int>();
  rec.pi0 = TabularPolicy{shape, j.at("pi0").get<std::vector<double>>()};
  rec.pi1 = TabularPolicy{shape, j.at("pi1").get<std::vector<double>>()};
  rec.tau0 = trajectory_from_json(j.at("tau0"));
  rec.tau1 = trajectory_from_json(j.at("tau1"));
  rec.o = j.at("o").get<int>();
  rec.posterior_hash = j.at("posterior_hash").get<std::string>();
  rec.regret_increment = j.at("regret_increment").get<double>();
  return rec;
}

std::string transition_mode_name(TransitionMode mode) {
  return mode == TransitionMode::kTrueP ? "true_p" : "estimated_p";
}

TransitionMode transition_mode_from_name(const std::string& name) {
  if (name == "true_p") return TransitionMode::kTrueP;
  if (name == "estimated_p") return TransitionMode::kEstimatedP;
  throw ConfigError("unknown transition mode: " + name);
}

}  // namespace

void write_runlog(const std::filesystem::path& path, const RunLog& log) {
  std::ostringstream out;
  json header{{"rounds", log.config.rounds},
              {"delta", log.config.delta},
              {"transition_mode", transition_mode_name(log.config.transition_mode)},
              {"seed", log.config.seed},
              {"smoothing_window", log.config.smoothing_window},
              {"optimal_value", log.optimal_value}};
  out << header.dump() << "\n";
  for (const auto& rec : log.rounds) out << round_to_json(rec).dump() << "\n";
  write_text_file(path, out.str());
}

RunLog read_runlog(const std::filesystem::path& path, const MdpShape& shape) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open run log: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty run log: " + path.string());
  json header = json::parse(line);
  RunLog log;
  log.config.rounds = header.at("rounds").get<int>();
  log.config.delta = header.at("delta").get<double>();
  log.config.transition_mode =
      transition_mode_from_name(header.at("transition_mode").get<std::string>());
  log.config.seed = header.at("seed").get<std::uint64_t>();
  log.config.smoothing_window = header.at("smoothing_window").get<int>();
  log.optimal_value = header.at("optimal_value").get<double>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    log.rounds.push_back(round_from_json(json::parse(line), shape));
  }
  return log;
}

void write_dataset(const std::filesystem::path& path, const RunLog& log) {
  std::ostringstream out;
  for (const auto& rec : log.rounds) {
    out << json{{"t", rec.t},
                {"tau0", trajectory_to_json(rec.tau0)},
                {"tau1", trajectory_to_json(rec.tau1)},
                {"o", rec.o}}
               .dump()
        << "\n";
  }
  write_text_file(path, out.str());
}

PreferenceDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset: " + path.string());
  PreferenceDataset dataset;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    dataset.push_back(PreferenceRecord{trajectory_from_json(j.at("tau0")),
                                       trajectory_from_json(j.at("tau1")), j.at("o").get<int>()});
  }
  return dataset;
}

void write_regret_csv(const std::filesystem::path& path, const std::vector<double>& per_round,
                      int smoothing_window) {
  std::vector<double> smoothed = smooth(per_round, smoothing_window);
  std::ostringstream out;
  out << "t,regret,per_step_regret,smoothed\n";
  double cum = 0.0;
  for (std::size_t i = 0; i < per_round.size(); ++i) {
    cum += per_round[i];
    out << (i + 1) << "," << format_double(cum) << "," << format_double(per_round[i]) << ","
        << format_double(smoothed[i]) << "\n";
  }
  write_text_file(path, out.str());
}

void write_elbo_csv(const std::filesystem::path& path, const ElboTrace& trace) {
  std::ostringstream out;
  out << "iter,elbo,smoothed_elbo,value_of_mean_greedy\n";
  for (std::size_t i = 0; i < trace.elbo.size(); ++i) {
    out << (i + 1) << "," << format_double(trace.elbo[i]) << "," << format_double(trace.smoothed[i])
        << ",";
    if (i < trace.value_of_mean_greedy.size()) out << format_double(trace.value_of_mean_greedy[i]);
    out << "\n";
  }
  write_text_file(path, out.str());
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path.string());
  out << content;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace prefts
