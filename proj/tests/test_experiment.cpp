#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "errors.hpp"
#include "experiment.hpp"
#include "serialize.hpp"
#include "test_util.hpp"

using namespace prefts;
using namespace testutil;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::path("/tmp/prefts_tests") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Parses one numeric CSV column (0-based), skipping the header.
std::vector<double> csv_column(const fs::path& path, int column) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    for (int c = 0; c <= column; ++c) std::getline(row, cell, ',');
    out.push_back(std::stod(cell));
  }
  return out;
}

json base_single_spec() {
  return json{{"mode", "single_run"},
              {"seed", 7},
              {"rounds", 12},
              {"delta", 0.1},
              {"link", {{"kind", "sigmoid"}}},
              {"mdp", {{"kind", "random"}, {"num_states", 2}, {"num_actions", 2}, {"horizon", 2}}},
              {"class", {{"kind", "perturbed_qstar"}, {"count", 4}, {"noise", 0.3}}}};
}

}  // namespace

TEST_CASE("random_mdp is reproducible and well-formed") {
  EpisodicMdp a = random_mdp(5, 3, 2, 3);
  EpisodicMdp b = random_mdp(5, 3, 2, 3);
  CHECK(mdp_to_json(a).dump() == mdp_to_json(b).dump());

  EpisodicMdp tiny = random_mdp(8, 1, 1, 3);
  CHECK(tiny.num_states() == 1);
  CHECK(tiny.transition(0, 0, 0, 0) == 1.0);

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    EpisodicMdp m = random_mdp(seed, 3, 2, 2);
    for (int s = 0; s < 3; ++s) {
      for (int a2 = 0; a2 < 2; ++a2) {
        double row = 0.0;
        for (int s2 = 0; s2 < 3; ++s2) row += m.transition(0, s, a2, s2);
        CHECK(std::abs(row - 1.0) <= 1e-12);
      }
    }
  }
}

TEST_CASE("generate_class construction") {
  EpisodicMdp mdp = random_mdp(3, 3, 2, 2);
  auto [pi, vt] = optimal_policy(mdp);

  HypothesisClass single = generate_class(mdp, 1, 0.5, 2);
  CHECK(single.size() == 1);
  CHECK(single.members[0].tables == vt.q);

  HypothesisClass cls = generate_class(mdp, 6, 0.4, 2);
  RealizabilityReport rep = check_realizability(cls, mdp, 0.0);
  CHECK(rep.holds);
  CHECK(rep.best_gap == 0.0);
  for (double p : cls.prior) CHECK(p == doctest::Approx(1.0 / 6.0));

  HypothesisClass flat = generate_class(mdp, 4, 0.0, 9);
  for (const auto& m : flat.members) CHECK(m.tables == vt.q);
}

TEST_CASE("reward-perturbed classes induce valid environments") {
  EpisodicMdp mdp = random_mdp(11, 3, 2, 3);
  HypothesisClass cls = generate_reward_perturbed_class(mdp, 8, 0.3, 4);
  for (const auto& m : cls.members) {
    EpisodicMdp env = environment_from_hypothesis(m, mdp.transitions(), mdp.initial_state());
    // The member is exactly the optimal action-value function of its own
    // environment.
    auto [pi_env, vt_env] = optimal_policy(env);
    for (std::size_t i = 0; i < m.tables.size(); ++i) {
      CHECK(m.tables[i] == doctest::Approx(vt_env.q[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("spec parsing validates and echoes") {
  json j = base_single_spec();
  ExperimentSpec spec = spec_from_json(j);
  CHECK(spec.mode == "single_run");
  CHECK(spec.rounds == 12);

  // Echo round-trip: parsing the echo reproduces the normalized form.
  json echo = spec_to_json(spec);
  ExperimentSpec back = spec_from_json(echo);
  CHECK(spec_to_json(back) == echo);

  json bad = j;
  bad["mode"] = "nonsense";
  CHECK_THROWS_AS(spec_from_json(bad), ConfigError);
  json no_class = j;
  no_class.erase("class");
  CHECK_THROWS_AS(spec_from_json(no_class), ConfigError);
  json bad_delta = j;
  bad_delta["delta"] = 1.5;
  CHECK_THROWS_AS(spec_from_json(bad_delta), ConfigError);
}

TEST_CASE("single_run writes consistent artifacts") {
  fs::path dir = fresh_dir("single");
  ExperimentSpec spec = spec_from_json(base_single_spec());
  run_experiment(spec, dir);

  for (const char* name : {"config_echo.json", "mdp.json", "class.json", "runlog.jsonl",
                           "dataset.jsonl", "regret.csv", "summary.json"}) {
    CHECK(fs::exists(dir / name));
  }
  std::vector<double> cum = csv_column(dir / "regret.csv", 1);
  REQUIRE(static_cast<int>(cum.size()) == spec.rounds);

  // Replaying the persisted mdp and log reproduces the regret column.
  EpisodicMdp mdp = mdp_from_json(json::parse(read_text_file(dir / "mdp.json")));
  RunLog log = read_runlog(dir / "runlog.jsonl", mdp.shape());
  std::vector<double> recomputed = cumulative_regret(log, mdp);
  for (int t = 0; t < spec.rounds; ++t) {
    CHECK(cum[t] == doctest::Approx(recomputed[t]).epsilon(1e-12));
  }

  PreferenceDataset dataset = read_dataset(dir / "dataset.jsonl");
  CHECK(static_cast<int>(dataset.size()) == spec.rounds);
}

TEST_CASE("single_run with a singleton class flattens after round 1") {
  fs::path dir = fresh_dir("single_singleton");
  json j = base_single_spec();
  j["rounds"] = 10;
  j["class"] = json{{"kind", "perturbed_qstar"}, {"count", 1}, {"noise", 0.0}};
  run_experiment(spec_from_json(j), dir);
  std::vector<double> per_step = csv_column(dir / "regret.csv", 2);
  REQUIRE(per_step.size() == 10);
  for (std::size_t t = 1; t < per_step.size(); ++t) {
    CHECK(per_step[t] == doctest::Approx(per_step[1]).epsilon(1e-12));
  }
}

TEST_CASE("identical specs produce byte-identical artifacts") {
  fs::path dir_a = fresh_dir("det_a");
  fs::path dir_b = fresh_dir("det_b");
  ExperimentSpec spec = spec_from_json(base_single_spec());
  run_experiment(spec, dir_a);
  run_experiment(spec, dir_b);
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(dir_a)) {
    fs::path other = dir_b / entry.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(read_text_file(entry.path()) == read_text_file(other));
    ++compared;
  }
  CHECK(compared >= 7);
}

TEST_CASE("seed and rounds overrides change the run") {
  fs::path dir = fresh_dir("override");
  std::string text = base_single_spec().dump();
  std::string err;
  CHECK(run_experiment_json(text, dir, 99, 5, &err) == 0);
  CHECK(csv_column(dir / "regret.csv", 0).size() == 5);
  json echo = json::parse(read_text_file(dir / "config_echo.json"));
  CHECK(echo.at("seed").get<std::uint64_t>() == 99);
}

TEST_CASE("bayes mode aggregates the per-seed series") {
  fs::path dir = fresh_dir("bayes");
  json j = base_single_spec();
  j["mode"] = "bayes_regret";
  j["rounds"] = 15;
  j["num_seeds"] = 4;
  j["class"] = json{{"kind", "perturbed_rewards"}, {"count", 5}, {"noise", 0.2}};
  ExperimentSpec spec = spec_from_json(j);
  run_experiment(spec, dir);

  std::vector<std::vector<double>> seeds;
  for (int d = 0; d < 4; ++d) {
    fs::path seed_dir = dir / ("seed_" + std::to_string(d));
    REQUIRE(fs::exists(seed_dir / "runlog.jsonl"));
    seeds.push_back(csv_column(seed_dir / "regret.csv", 1));
  }
  std::vector<double> mean_col = csv_column(dir / "aggregate.csv", 1);
  REQUIRE(mean_col.size() == 15);
  for (int t = 0; t < 15; ++t) {
    double m = (seeds[0][t] + seeds[1][t] + seeds[2][t] + seeds[3][t]) / 4.0;
    CHECK(mean_col[t] == doctest::Approx(m).epsilon(1e-12));
  }

  // Matches the core bayes_regret op with the same stream layout.
  EpisodicMdp mdp = build_mdp(spec);
  HypothesisClass cls = build_class(spec, mdp);
  RunConfig rc;
  rc.rounds = 15;
  rc.delta = spec.delta;
  rc.seed = spec.seed;
  BayesRegretResult res = bayes_regret(cls, mdp, build_link(spec), rc, 4);
  for (int t = 0; t < 15; ++t) {
    CHECK(mean_col[t] == doctest::Approx(res.mean_regret[t]).epsilon(1e-12));
  }
}

TEST_CASE("eluder mode writes a certificate") {
  fs::path dir = fresh_dir("eluder");
  json j = base_single_spec();
  j["mode"] = "eluder_report";
  j["class"] = json{{"kind", "perturbed_qstar"}, {"count", 1}, {"noise", 0.0}};
  j["eluder"] = json{{"family", "delta"}, {"eps", 0.1}};
  run_experiment(spec_from_json(j), dir);
  json report = json::parse(read_text_file(dir / "eluder.json"));
  CHECK(report.at("dimension").get<int>() == 0);
  REQUIRE(report.at("per_step").size() == 2);
}

TEST_CASE("diagnostics mode is idempotent over a finished run") {
  fs::path run_dir = fresh_dir("diag_run");
  json j = base_single_spec();
  j["rounds"] = 16;
  run_experiment(spec_from_json(j), run_dir);

  json dj = j;
  dj["mode"] = "diagnostics";
  dj["run_dir"] = run_dir.string();
  fs::path out1 = fresh_dir("diag_out1");
  fs::path out2 = fresh_dir("diag_out2");
  run_experiment(spec_from_json(dj), out1);
  run_experiment(spec_from_json(dj), out2);
  std::string a = read_text_file(out1 / "diagnostics.json");
  CHECK(a == read_text_file(out2 / "diagnostics.json"));
  json report = json::parse(a);
  CHECK(report.at("entries").back().at("t").get<int>() == 16);
}

TEST_CASE("appendix-style elbo run learns: elbo up, per-step regret down") {
  fs::path dir = fresh_dir("elbo_appendix");
  json j{{"mode", "elbo_run"},
         {"seed", 3},
         {"link", {{"kind", "sigmoid"}}},
         {"mdp", {{"kind", "random"}, {"num_states", 5}, {"num_actions", 3}, {"horizon", 2}}},
         {"elbo",
          {{"iterations", 400},
           {"batch_size", 5},
           {"samples_per_iter", 20},
           {"reuse_window", 50},
           {"step_size", 0.2},
           {"smoothing", 20},
           {"prior_std", 10.0}}}};
  run_experiment(spec_from_json(j), dir);

  std::vector<double> elbo_smoothed = csv_column(dir / "elbo_trace.csv", 2);
  std::vector<double> regret_smoothed = csv_column(dir / "regret.csv", 3);
  auto quarter_avg = [](const std::vector<double>& v, bool first) {
    int q = static_cast<int>(v.size()) / 4;
    int start = first ? 0 : static_cast<int>(v.size()) - q;
    double s = 0.0;
    for (int i = start; i < start + q; ++i) s += v[i];
    return s / q;
  };
  CHECK(quarter_avg(elbo_smoothed, false) > quarter_avg(elbo_smoothed, true) + 1.0);
  CHECK(quarter_avg(regret_smoothed, false) < 0.7 * quarter_avg(regret_smoothed, true));
}

TEST_CASE("elbo mode runs and writes traces") {
  fs::path dir = fresh_dir("elbo");
  json j{{"mode", "elbo_run"},
         {"seed", 3},
         {"link", {{"kind", "sigmoid"}}},
         {"mdp", {{"kind", "random"}, {"num_states", 2}, {"num_actions", 2}, {"horizon", 2}}},
         {"elbo",
          {{"iterations", 30},
           {"batch_size", 4},
           {"samples_per_iter", 8},
           {"reuse_window", 20},
           {"step_size", 0.05},
           {"smoothing", 5},
           {"prior_std", 2.0}}}};
  run_experiment(spec_from_json(j), dir);
  CHECK(csv_column(dir / "elbo_trace.csv", 0).size() == 30);
  CHECK(csv_column(dir / "regret.csv", 0).size() == 30);
  json fitted = json::parse(read_text_file(dir / "fitted.json"));
  CHECK(fitted.at("mean").size() == 2 * 2 * 2);
}

TEST_CASE("failure paths write a machine-readable error record") {
  fs::path dir = fresh_dir("errors");
  std::string err;

  json bad = base_single_spec();
  bad["mode"] = "nonsense";
  CHECK(run_experiment_json(bad.dump(), dir, std::nullopt, std::nullopt, &err) == 2);
  json record = json::parse(read_text_file(dir / "error.json"));
  CHECK(record.at("exit_code").get<int>() == 2);
  CHECK_FALSE(record.at("error").get<std::string>().empty());

  CHECK(run_experiment_json("{not json", dir, std::nullopt, std::nullopt, &err) == 2);

  // Divergent elbo run exits 3.
  json dv{{"mode", "elbo_run"},
          {"seed", 3},
          {"link", {{"kind", "sigmoid"}}},
          {"mdp", {{"kind", "random"}, {"num_states", 1}, {"num_actions", 2}, {"horizon", 1}}},
          {"elbo", {{"iterations", 400}, {"step_size", 1e8}}}};
  CHECK(run_experiment_json(dv.dump(), dir, std::nullopt, std::nullopt, &err) == 3);
}
