/* C interface to the logz library. Every object is an opaque handle owned by
 * the caller and released with its _free function. Every fallible call
 * returns a logz_status; on failure logz_last_error() describes the problem
 * for the calling thread until its next failing call. Strings returned
 * through char** are released with logz_string_free. */
#ifndef LOGZ_LOGZ_H
#define LOGZ_LOGZ_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LOGZ_API __declspec(dllexport)
#else
#define LOGZ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum logz_status {
  LOGZ_OK = 0,
  LOGZ_ERR_CONFIG = 1,
  LOGZ_ERR_VALIDATION = 2,
  LOGZ_ERR_PARSE = 3,
  LOGZ_ERR_DOMAIN = 4,
  LOGZ_ERR_OPTIMIZATION = 5,
  LOGZ_ERR_DIVERGENCE = 6,
  LOGZ_ERR_ORACLE_UNAVAILABLE = 7,
  LOGZ_ERR_CONTRACT = 8,
  LOGZ_ERR_IO = 9,
  LOGZ_ERR_CLOSED_FORM = 10,
  LOGZ_ERR_INTERNAL = 99
} logz_status;

typedef enum logz_format { LOGZ_FORMAT_JSON = 0, LOGZ_FORMAT_CSV = 1 } logz_format;

typedef struct logz_config logz_config;
typedef struct logz_model logz_model;
typedef struct logz_schedule logz_schedule;
typedef struct logz_result logz_result;
typedef struct logz_replicate_table logz_replicate_table;

typedef double (*logz_energy_fn)(const double* x, int dim, void* user);
typedef void (*logz_gradient_fn)(const double* x, int dim, double* grad_out, void* user);

LOGZ_API const char* logz_version(void);
LOGZ_API const char* logz_last_error(void);
LOGZ_API void logz_string_free(char* s);

/* Config: a TOML file or text, then "table.key" overrides given as strings. */
LOGZ_API logz_status logz_config_load(const char* path, logz_config** out);
LOGZ_API logz_status logz_config_parse(const char* text, const char* base_dir, logz_config** out);
LOGZ_API logz_config* logz_config_default(void);
LOGZ_API logz_status logz_config_set(logz_config* cfg, const char* key, const char* value);
LOGZ_API logz_status logz_config_validate(const logz_config* cfg);
LOGZ_API logz_status logz_config_digest(const logz_config* cfg, char** hex_out);
LOGZ_API logz_status logz_config_output(const logz_config* cfg, char** path_out, logz_format* format_out);
LOGZ_API logz_status logz_config_replicates(const logz_config* cfg, int* out);
LOGZ_API logz_status logz_config_mu_tilde(const logz_config* cfg, double* out, int* present);
LOGZ_API void logz_config_free(logz_config* cfg);

/* Models: a built-in named by the config, or user callbacks on a centered
 * potential with declared constants (hessian_lipschitz < 0 means absent,
 * rho1 <= 0 means no growth bound). */
LOGZ_API logz_status logz_model_create(const logz_config* cfg, logz_model** out);
LOGZ_API logz_status logz_model_create_callback(int dim, logz_energy_fn energy, logz_gradient_fn gradient,
                                                void* user, double m, double L, double hessian_lipschitz,
                                                double rho1, double rho2, logz_model** out);
LOGZ_API logz_status logz_model_info(const logz_model* model, int* dim, double* m, double* L);
LOGZ_API void logz_model_free(logz_model* model);

LOGZ_API logz_status logz_schedule_build(const logz_config* cfg, const logz_model* model, logz_schedule** out);
LOGZ_API logz_status logz_schedule_phase_count(const logz_schedule* s, int* out);
LOGZ_API logz_status logz_schedule_cost(const logz_schedule* s, double* realized, double* bound);
LOGZ_API logz_status logz_schedule_violations(const logz_schedule* s, int* count);
LOGZ_API logz_status logz_schedule_render(const logz_schedule* s, logz_format format, char** out);
LOGZ_API void logz_schedule_free(logz_schedule* s);

/* Runs estimate, or the median estimate when run.mu_tilde is set. */
LOGZ_API logz_status logz_estimate(const logz_config* cfg, const logz_model* model, logz_result** out);
LOGZ_API logz_status logz_result_values(const logz_result* r, double* log_z_hat, double* log_evidence,
                                        uint64_t* cost);
LOGZ_API logz_status logz_result_replicate_count(const logz_result* r, int* out);
LOGZ_API logz_status logz_result_render(const logz_result* r, logz_format format, char** out);
LOGZ_API void logz_result_free(logz_result* r);

LOGZ_API logz_status logz_replicate(const logz_config* cfg, const logz_model* model, int replicates,
                                    logz_replicate_table** out);
LOGZ_API logz_status logz_replicate_rows(const logz_replicate_table* t, int* out);
LOGZ_API logz_status logz_replicate_render(const logz_replicate_table* t, logz_format format, char** out);
LOGZ_API void logz_replicate_free(logz_replicate_table* t);

/* Reference value for the model; method_out names the oracle used. */
LOGZ_API logz_status logz_oracle(const logz_model* model, double* log_z, double* log_evidence, char** method_out);

#ifdef __cplusplus
}
#endif

#endif
