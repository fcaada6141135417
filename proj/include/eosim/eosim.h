#ifndef EOSIM_H
#define EOSIM_H

/* C interface to the constellation co-simulator. Every function returns an
 * eosim_status; on failure eosim_last_error() describes the problem for the
 * calling thread. Strings handed out through char** must be released with
 * eosim_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define EOSIM_API __declspec(dllexport)
#else
#define EOSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum eosim_status {
  EOSIM_OK = 0,
  EOSIM_ERR_INVALID_ARGUMENT = 1,
  EOSIM_ERR_IO = 2,
  EOSIM_ERR_PARSE = 3,
  EOSIM_ERR_CONFIG = 4,
  EOSIM_ERR_RANGE = 5,
  EOSIM_ERR_MISMATCH = 6,
  EOSIM_ERR_UNSUPPORTED = 7,
  EOSIM_ERR_INTERNAL = 8
} eosim_status;

typedef struct eosim_scenario eosim_scenario;
typedef struct eosim_result eosim_result;

EOSIM_API const char* eosim_version(void);
EOSIM_API const char* eosim_status_name(eosim_status status);
/* Message of the last failure on this thread, "" if none. */
EOSIM_API const char* eosim_last_error(void);
EOSIM_API void eosim_string_free(char* s);

/* Default configuration as JSON text. */
EOSIM_API eosim_status eosim_default_config_json(char** out);

/* config_json may be NULL for the built-in defaults. */
EOSIM_API eosim_status eosim_scenario_create(const char* config_json,
                                             eosim_scenario** out);
EOSIM_API eosim_status eosim_scenario_load(const char* path,
                                           eosim_scenario** out);
/* Rebuilds the scenario under a new master seed. */
EOSIM_API eosim_status eosim_scenario_set_seed(eosim_scenario* s,
                                               uint64_t seed);
EOSIM_API void eosim_scenario_destroy(eosim_scenario* s);

EOSIM_API eosim_status eosim_scenario_config_json(const eosim_scenario* s,
                                                  char** out);
EOSIM_API eosim_status eosim_scenario_fingerprint(const eosim_scenario* s,
                                                  char** out);
EOSIM_API eosim_status eosim_scenario_counts(const eosim_scenario* s,
                                             int* n_sats, int* n_gp,
                                             size_t* n_contacts);
EOSIM_API eosim_status eosim_scenario_write_contact_plan(
    const eosim_scenario* s, const char* path);
/* Resolved configuration; loading it back reproduces the scenario. */
EOSIM_API eosim_status eosim_scenario_write_config(const eosim_scenario* s,
                                                   const char* path);

/* mode: "decentralized", "centralized" or "nonagile". */
EOSIM_API eosim_status eosim_run(const eosim_scenario* s, const char* mode,
                                 eosim_result** out);
EOSIM_API void eosim_result_destroy(eosim_result* r);

/* Scalar metric by its key in the metrics document, e.g.
 * "cumulative_recorded_value", "pct_gp_observed",
 * "assumed_vs_recorded_divergence_pct", "n_observations",
 * "bundles.generated", "scheduler.nodes_expanded", "timing.total_s". */
EOSIM_API eosim_status eosim_result_metric(const eosim_result* r,
                                           const char* name, double* out);
EOSIM_API eosim_status eosim_result_metrics_json(const eosim_result* r,
                                                 char** out);
/* Writes metrics_<mode>.json, timing_<mode>.json, schedule_<mode>.csv,
 * deliveries_<mode>.csv and latency_<mode>.json into dir (created if
 * missing). */
EOSIM_API eosim_status eosim_result_write(const eosim_result* r,
                                          const char* dir);

/* Ratio/difference report of two metrics files from the same scenario and
 * seed. */
EOSIM_API eosim_status eosim_compare_files(const char* metrics_a,
                                           const char* metrics_b, char** out);

/* Standalone bundle simulation: traffic and contact plan files in,
 * delivery records and per-priority latency summary out. */
EOSIM_API eosim_status eosim_dtn_simulate_files(const char* traffic_path,
                                                const char* plan_path,
                                                const char* records_path,
                                                const char* summary_path);

#ifdef __cplusplus
}
#endif

#endif
