// Command-line front end. Everything goes through the shared library's C
// interface; exit codes follow the library's convention (0 ok, 2 bad config,
// 3 divergence).

#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "prefts/prefts.h"

int main(int argc, char** argv) {
  CLI::App app{"prefts: Thompson sampling for preference-feedback RL, desk scale"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string out_dir;
  std::int64_t seed_override = -1;
  std::int64_t rounds_override = 0;

  CLI::App* run = app.add_subcommand("run", "Execute an experiment spec");
  run->add_option("--spec", spec_path, "Path to the experiment spec (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory for artifacts")->required();
  run->add_option("--seed", seed_override, "Override the spec's root seed");
  run->add_option("--rounds", rounds_override, "Override the spec's round count");

  CLI::App* version = app.add_subcommand("version", "Print the library version");

  CLI11_PARSE(app, argc, argv);

  if (version->parsed()) {
    std::printf("prefts %s\n", prefts_version());
    return 0;
  }

  prefts_status status =
      prefts_run_spec_file(spec_path.c_str(), out_dir.c_str(), seed_override, rounds_override);
  if (status == PREFTS_OK) return 0;

  std::fprintf(stderr, "error: %s\n", prefts_last_error());
  switch (status) {
    case PREFTS_ERR_CONFIG:
    case PREFTS_ERR_TOO_LARGE:
      return 2;
    case PREFTS_ERR_DIVERGENCE:
      return 3;
    default:
      return 1;
  }
}
