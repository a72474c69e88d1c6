#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "algorithm.hpp"
#include "eluder.hpp"
#include "hypothesis.hpp"
#include "link.hpp"
#include "mdp.hpp"
#include "variational.hpp"

namespace prefts {

// Rewards i.i.d. uniform on [0, 1], transition rows flat Dirichlet, initial
// state 0. Deterministic per seed.
EpisodicMdp random_mdp(std::uint64_t seed, int num_states, int num_actions, int horizon);

// Member 0 is Q* exactly; the rest are Q* plus iid Gaussian noise clipped to
// each step's [0, H-h+1] range. Uniform prior.
HypothesisClass generate_class(const EpisodicMdp& mdp, int count, double noise,
                               std::uint64_t seed);

// Members are the exact Q* of reward-perturbed copies of the MDP (same
// transitions, rewards clipped to [0, 1]), so every member induces a
// well-defined environment; see environment_from_hypothesis. Used for
// Bayesian-regret priors.
HypothesisClass generate_reward_perturbed_class(const EpisodicMdp& mdp, int count, double noise,
                                                std::uint64_t seed);

// One spec file governs every mode; flags only override seed and rounds.
struct ExperimentSpec {
  std::string mode;  // single_run | bayes_regret | eluder_report | elbo_run | diagnostics
  std::uint64_t seed = 0;
  int rounds = 1;
  double delta = 0.1;
  TransitionMode transition_mode = TransitionMode::kTrueP;
  int smoothing_window = 20;
  nlohmann::json link;
  nlohmann::json mdp;
  nlohmann::json hypothesis_class;

  int num_seeds = 1;  // bayes_regret draw count

  // eluder_report
  std::string eluder_family = "delta";
  double eluder_eps = 0.1;
  EluderCaps eluder_caps;

  // elbo_run
  ElboConfig elbo;
  bool elbo_stationary = false;
  double elbo_prior_mean = 0.0;
  double elbo_prior_std = 10.0;

  std::string run_dir;  // diagnostics input
};

ExperimentSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const ExperimentSpec& spec);

// Instance construction from the spec, honoring the root-seed split scheme
// (purpose streams "mdp" and "class") unless the sub-spec pins its own seed.
EpisodicMdp build_mdp(const ExperimentSpec& spec);
HypothesisClass build_class(const ExperimentSpec& spec, const EpisodicMdp& mdp);
LinkFunction build_link(const ExperimentSpec& spec);

// Executes the selected mode and writes all artifacts under out_dir
// (config_echo.json plus mode-specific files). Throws on failure.
void run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir);

// CLI-grade wrapper: parses the spec text, applies overrides, runs, and on
// failure writes error.json under out_dir. Returns the process exit code:
// 0 success, 2 invalid configuration, 3 divergence, 1 anything else.
int run_experiment_json(const std::string& spec_text, const std::filesystem::path& out_dir,
                        std::optional<std::uint64_t> seed_override,
                        std::optional<int> rounds_override,
                        std::string* error_message = nullptr);

}  // namespace prefts
