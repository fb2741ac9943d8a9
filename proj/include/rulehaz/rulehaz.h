/* C interface to the rulehaz library.
 *
 * Every function returns a status code; on failure a message is available
 * from rulehaz_last_error() on the calling thread. Strings handed back to the
 * caller are heap-allocated and released with rulehaz_string_free. */
#ifndef RULEHAZ_H
#define RULEHAZ_H

#include <stddef.h>

#if defined(_WIN32)
#define RULEHAZ_API __declspec(dllexport)
#else
#define RULEHAZ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
    RULEHAZ_OK = 0,
    RULEHAZ_USAGE_ERROR = 2,     /* bad arguments or configuration */
    RULEHAZ_DATA_ERROR = 3,      /* malformed or unusable input data */
    RULEHAZ_NUMERICAL_ERROR = 4  /* non-finite values or solver failure */
} rulehaz_status;

typedef struct rulehaz_dataset rulehaz_dataset;
typedef struct rulehaz_model rulehaz_model;

RULEHAZ_API const char* rulehaz_version(void);
RULEHAZ_API const char* rulehaz_last_error(void);
RULEHAZ_API void rulehaz_string_free(char* s);

/* Caps worker threads for every parallel section; 0 restores the default
 * (RULEHAZ_THREADS, else the hardware concurrency). */
RULEHAZ_API int rulehaz_set_threads(size_t threads);

/* Datasets. Covariates are row-major n x p; names may be NULL (x1..xp). */
RULEHAZ_API int rulehaz_dataset_create(size_t n, size_t p, const double* times, const int* events,
                                       const int* treatments, const double* covariates,
                                       const char* const* names, rulehaz_dataset** out);
/* Columns time, event, treatment plus covariates. */
RULEHAZ_API int rulehaz_dataset_load_csv(const char* path, rulehaz_dataset** out);
RULEHAZ_API int rulehaz_dataset_save_csv(const rulehaz_dataset* data, const char* path);
RULEHAZ_API int rulehaz_dataset_shape(const rulehaz_dataset* data, size_t* rows, size_t* features);
RULEHAZ_API void rulehaz_dataset_free(rulehaz_dataset* data);

/* Fitting. config_json may be NULL for the defaults; see README for keys. */
RULEHAZ_API int rulehaz_fit(const rulehaz_dataset* data, const char* config_json, rulehaz_model** out);
RULEHAZ_API int rulehaz_model_save(const rulehaz_model* model, const char* path);
RULEHAZ_API int rulehaz_model_load(const char* path, rulehaz_model** out);
RULEHAZ_API int rulehaz_model_to_json(const rulehaz_model* model, char** out);
RULEHAZ_API int rulehaz_model_from_json(const char* json, rulehaz_model** out);
RULEHAZ_API int rulehaz_model_features(const rulehaz_model* model, size_t* features);
/* Horizon used when a caller passes t0 <= 0 to the CSV entry points: the
 * 90th percentile of the training times. */
RULEHAZ_API int rulehaz_model_default_t0(const rulehaz_model* model, double* t0);
RULEHAZ_API void rulehaz_model_free(rulehaz_model* model);

/* Prediction on row-major n x p covariates in the model's feature order.
 * Output arrays hold n entries; any of them may be NULL. */
RULEHAZ_API int rulehaz_predict(const rulehaz_model* model, size_t n, size_t p, const double* covariates,
                                double t0, double* survival_treated, double* survival_control, double* hte,
                                int* extrapolated);
/* Reads a covariate CSV matched to the model by column name and returns the
 * prediction table (id, S1, S0, hte, extrapolated, covariates). */
RULEHAZ_API int rulehaz_predict_csv(const rulehaz_model* model, const char* covariate_csv, double t0, char** out);

/* format: "text", "json", "rules_csv", "linear_csv" or "variables_csv". */
RULEHAZ_API int rulehaz_report(const rulehaz_model* model, const rulehaz_dataset* data, const char* format,
                               char** out);

/* Simulation. scenario_json holds {"scenario": "M1xT1", "n", "seed", "t0",
 * "null_effect", ...}; metadata receives the spec plus the censoring fraction. */
RULEHAZ_API int rulehaz_simulate(const char* scenario_json, rulehaz_dataset** out, char** metadata);
/* config_json: {"scenarios": [...] or "all", "replications", "seed", "n", "t0",
 * "oracle_draws", "null_effect", "fit": {...}}. */
RULEHAZ_API int rulehaz_benchmark(const char* config_json, char** csv, char** summary_json);
/* Oracle and closed-form HTE for each row of a covariate CSV with x1..x15. */
RULEHAZ_API int rulehaz_truth_csv(const char* scenario_json, const char* covariate_csv, char** out);

#ifdef __cplusplus
}
#endif

#endif
