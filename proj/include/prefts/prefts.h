/* prefts: preference-feedback Thompson sampling laboratory.
 *
 * C interface to the shared library. All functions return a prefts_status;
 * anything other than PREFTS_OK leaves a human-readable message retrievable
 * via prefts_last_error() (thread-local). Objects are opaque handles owned
 * by the library; every *_create has a matching *_destroy, and strings
 * returned through out-parameters are released with prefts_string_free.
 */
#ifndef PREFTS_PREFTS_H_
#define PREFTS_PREFTS_H_

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum prefts_status {
  PREFTS_OK = 0,
  PREFTS_ERR_INVALID_ARGUMENT = 1,
  PREFTS_ERR_CONFIG = 2,      /* malformed spec, shape mismatch, bad parameter */
  PREFTS_ERR_DIVERGENCE = 3,  /* variational ascent left the sane region */
  PREFTS_ERR_TOO_LARGE = 4,   /* eluder search caps exceeded */
  PREFTS_ERR_IO = 5,
  PREFTS_ERR_INTERNAL = 6
} prefts_status;

const char* prefts_version(void);

/* Message for the most recent failure on this thread; empty string if none. */
const char* prefts_last_error(void);

void prefts_string_free(char* s);

/* ---- Experiments -------------------------------------------------------
 * Runs one experiment spec (see the repository README for the schema) and
 * writes all artifacts under out_dir. seed_override < 0 and
 * rounds_override <= 0 mean "use the spec's value".
 */
prefts_status prefts_run_spec_json(const char* spec_json, const char* out_dir,
                                   int64_t seed_override, int64_t rounds_override);
prefts_status prefts_run_spec_file(const char* spec_path, const char* out_dir,
                                   int64_t seed_override, int64_t rounds_override);

/* ---- MDP handles ------------------------------------------------------- */
typedef struct prefts_mdp prefts_mdp;

prefts_status prefts_mdp_create_random(uint64_t seed, int32_t num_states, int32_t num_actions,
                                       int32_t horizon, prefts_mdp** out);
prefts_status prefts_mdp_from_json(const char* json_text, prefts_mdp** out);
/* Serializes with full double precision; round-trips bit-exactly. */
prefts_status prefts_mdp_to_json(const prefts_mdp* mdp, char** out_json);
prefts_status prefts_mdp_optimal_value(const prefts_mdp* mdp, double* out_value);
void prefts_mdp_destroy(prefts_mdp* mdp);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PREFTS_PREFTS_H_ */
