#include "prefts/prefts.h"

#include <cstring>
#include <new>
#include <optional>
#include <string>

#include "errors.hpp"
#include "experiment.hpp"
#include "mdp.hpp"
#include "serialize.hpp"

namespace {

thread_local std::string tl_last_error;

void set_error(const std::string& message) { tl_last_error = message; }

// Runs the body, translating exceptions into status codes.
template <typename Fn>
prefts_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const prefts::DivergenceError& e) {
    set_error(e.what());
    return PREFTS_ERR_DIVERGENCE;
  } catch (const prefts::TooLargeError& e) {
    set_error(e.what());
    return PREFTS_ERR_TOO_LARGE;
  } catch (const prefts::ConfigError& e) {
    set_error(e.what());
    return PREFTS_ERR_CONFIG;
  } catch (const nlohmann::json::exception& e) {
    set_error(std::string("json error: ") + e.what());
    return PREFTS_ERR_CONFIG;
  } catch (const std::bad_alloc&) {
    set_error("out of memory");
    return PREFTS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    set_error(e.what());
    return PREFTS_ERR_INTERNAL;
  }
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

}  // namespace

struct prefts_mdp {
  prefts::EpisodicMdp rep;
};

extern "C" {

const char* prefts_version(void) { return "0.1.0"; }

const char* prefts_last_error(void) { return tl_last_error.c_str(); }

void prefts_string_free(char* s) { delete[] s; }

prefts_status prefts_run_spec_json(const char* spec_json, const char* out_dir,
                                   int64_t seed_override, int64_t rounds_override) {
  if (!spec_json || !out_dir) {
    set_error("null argument");
    return PREFTS_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    std::optional<std::uint64_t> seed;
    if (seed_override >= 0) seed = static_cast<std::uint64_t>(seed_override);
    std::optional<int> rounds;
    if (rounds_override > 0) rounds = static_cast<int>(rounds_override);
    std::string message;
    int code = prefts::run_experiment_json(spec_json, out_dir, seed, rounds, &message);
    if (code == 0) return PREFTS_OK;
    set_error(message);
    if (code == 3) return PREFTS_ERR_DIVERGENCE;
    if (code == 2) return PREFTS_ERR_CONFIG;
    return PREFTS_ERR_INTERNAL;
  });
}

prefts_status prefts_run_spec_file(const char* spec_path, const char* out_dir,
                                   int64_t seed_override, int64_t rounds_override) {
  if (!spec_path || !out_dir) {
    set_error("null argument");
    return PREFTS_ERR_INVALID_ARGUMENT;
  }
  std::string text;
  try {
    text = prefts::read_text_file(spec_path);
  } catch (const std::exception& e) {
    set_error(e.what());
    return PREFTS_ERR_IO;
  }
  return prefts_run_spec_json(text.c_str(), out_dir, seed_override, rounds_override);
}

prefts_status prefts_mdp_create_random(uint64_t seed, int32_t num_states, int32_t num_actions,
                                       int32_t horizon, prefts_mdp** out) {
  if (!out) {
    set_error("null out pointer");
    return PREFTS_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    *out = new prefts_mdp{prefts::random_mdp(seed, num_states, num_actions, horizon)};
    return PREFTS_OK;
  });
}

prefts_status prefts_mdp_from_json(const char* json_text, prefts_mdp** out) {
  if (!json_text || !out) {
    set_error("null argument");
    return PREFTS_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    *out = new prefts_mdp{prefts::mdp_from_json(nlohmann::json::parse(json_text))};
    return PREFTS_OK;
  });
}

prefts_status prefts_mdp_to_json(const prefts_mdp* mdp, char** out_json) {
  if (!mdp || !out_json) {
    set_error("null argument");
    return PREFTS_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    *out_json = copy_string(prefts::mdp_to_json(mdp->rep).dump());
    return PREFTS_OK;
  });
}

prefts_status prefts_mdp_optimal_value(const prefts_mdp* mdp, double* out_value) {
  if (!mdp || !out_value) {
    set_error("null argument");
    return PREFTS_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    auto [policy, tables] = prefts::optimal_policy(mdp->rep);
    *out_value = tables.v[mdp->rep.initial_state()];
    return PREFTS_OK;
  });
}

void prefts_mdp_destroy(prefts_mdp* mdp) { delete mdp; }

}  // extern "C"
