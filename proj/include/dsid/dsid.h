/*
 * C interface of the distributed binary-sensor identification library.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every fallible call returns a dsid_status; on
 * failure dsid_last_error() describes the problem (per thread). Strings
 * returned through char** are heap-allocated and released with
 * dsid_string_free.
 *
 * Agent indices and coordinates crossing this boundary are 1-based.
 */
#ifndef DSID_DSID_H_
#define DSID_DSID_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(DSID_BUILDING_LIBRARY)
#    define DSID_API __declspec(dllexport)
#  else
#    define DSID_API __declspec(dllimport)
#  endif
#else
#  define DSID_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dsid_status {
  DSID_OK = 0,
  DSID_ERR_INVALID_ARGUMENT = 1,
  DSID_ERR_DIMENSION = 2,
  DSID_ERR_CONFIG = 3,
  DSID_ERR_PREFLIGHT = 4,
  DSID_ERR_IO = 5,
  DSID_ERR_NUMERIC = 6,
  DSID_ERR_INTERNAL = 99
} dsid_status;

typedef struct dsid_config dsid_config;
typedef struct dsid_result dsid_result;

typedef void (*dsid_warning_fn)(const char* message, void* user_data);

DSID_API const char* dsid_version(void);
DSID_API const char* dsid_status_name(dsid_status status);
/* Message of the last failed call on this thread; "" if none. */
DSID_API const char* dsid_last_error(void);
/* NULL restores the default (stderr) handler. */
DSID_API void dsid_set_warning_callback(dsid_warning_fn fn, void* user_data);

/* --- configuration ---------------------------------------------------- */

DSID_API dsid_status dsid_config_load(const char* path, dsid_config** out);
DSID_API dsid_status dsid_config_parse(const char* text, dsid_config** out);
DSID_API dsid_status dsid_config_preset_v(uint64_t seed, dsid_config** out);
/* Same keys as the config file, e.g. ("seed", "7") or ("topology.weights", "degree"). */
DSID_API dsid_status dsid_config_set(dsid_config* config, const char* key, const char* value);
DSID_API void dsid_config_free(dsid_config* config);

/* --- experiments -------------------------------------------------------- */

/* Runs preflight and the experiment; writes trajectory.csv and summary.json
 * when output.dir is set. */
DSID_API dsid_status dsid_run(const dsid_config* config, dsid_result** out);
DSID_API dsid_status dsid_result_summary_json(const dsid_result* result, char** out);
/* Scalars: mean_error, relative_mean_error, max_agent_error,
 * relative_max_agent_error, consensus_gap_final, consensus_gap_peak,
 * truncation_events, sigma_max, final_k, wall_time_s. */
DSID_API dsid_status dsid_result_metric(const dsid_result* result, const char* name, double* out);
/* Copies min(capacity, l) components of the final network average. */
DSID_API dsid_status dsid_result_theta_bar(const dsid_result* result, double* out,
                                           size_t capacity, size_t* length);
DSID_API void dsid_result_free(dsid_result* result);

/* --- oracles and analysis ----------------------------------------------- */

/* Single-agent identifiability probe; writes one JSON line. */
DSID_API dsid_status dsid_probe(const dsid_config* config, size_t agent, uint64_t steps,
                                char** json_line);
/* f(theta) and Jacobian eigenvalues as a JSON document. */
DSID_API dsid_status dsid_analyze(const dsid_config* config, const double* theta, size_t length,
                                  char** json);
/* Writes the configured schedule in the plain-text topology format. */
DSID_API dsid_status dsid_write_topology(const dsid_config* config, const char* path,
                                         size_t steps);

DSID_API void dsid_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* DSID_DSID_H_ */
