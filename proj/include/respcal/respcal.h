/*
 * C interface to the respcal library.
 *
 * Every fallible call returns a respcal_status; on failure the message is
 * available from respcal_last_error() on the calling thread until the next
 * call on that thread. Handles are opaque and owned by the caller, who
 * releases them with the matching *_free function (NULL is accepted).
 */
#ifndef RESPCAL_H_
#define RESPCAL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RESPCAL_API __declspec(dllexport)
#else
#define RESPCAL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum respcal_status {
  RESPCAL_OK = 0,
  RESPCAL_INVALID_ARGUMENT = 1,
  RESPCAL_EMPTY_SAMPLES = 2,
  RESPCAL_MISSING_LABEL = 3,
  RESPCAL_ORACLE_UNAVAILABLE = 4,
  RESPCAL_MALFORMED_RESPONSE = 5,
  RESPCAL_INDEX_OUT_OF_RANGE = 6,
  RESPCAL_INFEASIBLE_RISK_LEVEL = 7,
  RESPCAL_UNBOUNDED_BUDGET = 8,
  RESPCAL_INSUFFICIENT_SAMPLES = 9,
  RESPCAL_EMPTY_COLLECTION = 10,
  RESPCAL_INVALID_SPEC = 11,
  RESPCAL_ENUMERATION_TOO_LARGE = 12,
  RESPCAL_PARSE_ERROR = 13,
  RESPCAL_DUPLICATE_ID = 14,
  RESPCAL_TOO_FEW_RECORDS = 15,
  RESPCAL_IO_ERROR = 16,
  RESPCAL_INTERNAL_ERROR = 99
} respcal_status;

typedef struct respcal_dataset respcal_dataset;
typedef struct respcal_oracle respcal_oracle;
typedef struct respcal_measure respcal_measure;
typedef struct respcal_calibration respcal_calibration;

RESPCAL_API const char* respcal_version(void);
RESPCAL_API const char* respcal_last_error(void);
RESPCAL_API const char* respcal_status_name(respcal_status status);

/* ---- datasets (line-delimited JSON) ---- */

RESPCAL_API respcal_status respcal_dataset_load(const char* path, respcal_dataset** out);
RESPCAL_API size_t respcal_dataset_size(const respcal_dataset* dataset);
RESPCAL_API void respcal_dataset_free(respcal_dataset* dataset);

/* ---- equivalence oracles ---- */

typedef struct respcal_remote_options {
  double timeout_seconds; /* default 10 */
  int retries;            /* default 2 */
  int max_in_flight;      /* default 8 */
} respcal_remote_options;

RESPCAL_API void respcal_remote_options_init(respcal_remote_options* options);

/* selector: "exact", "normalized" or "remote:<URL>"; remote may be NULL. */
RESPCAL_API respcal_status respcal_oracle_create(const char* selector,
                                                 const respcal_remote_options* remote,
                                                 respcal_oracle** out);
/* Wraps `base` with deterministic symmetric judgment flips. */
RESPCAL_API respcal_status respcal_oracle_create_noisy(const respcal_oracle* base,
                                                       double flip_prob, uint64_t seed,
                                                       respcal_oracle** out);
RESPCAL_API respcal_status respcal_oracle_equivalent(const respcal_oracle* oracle,
                                                     const char* question, const char* a,
                                                     const char* b, int* out);
RESPCAL_API void respcal_oracle_free(respcal_oracle* oracle);

/* selector: "frequency", "semantic-diversity", "semantic-diversity:lexical". */
RESPCAL_API respcal_status respcal_measure_create(const char* selector,
                                                  const respcal_oracle* oracle,
                                                  respcal_measure** out);
RESPCAL_API void respcal_measure_free(respcal_measure* measure);

/* ---- calibration ---- */

RESPCAL_API respcal_status respcal_quantile_rank(size_t n, double risk, size_t* out);

RESPCAL_API respcal_status respcal_calibrate(const respcal_dataset* calibration_set,
                                             double alpha, double beta,
                                             const respcal_oracle* oracle,
                                             const respcal_measure* measure,
                                             respcal_calibration** out);
RESPCAL_API respcal_status respcal_calibration_load(const char* path,
                                                    respcal_calibration** out);
RESPCAL_API respcal_status respcal_calibration_save(const respcal_calibration* calibration,
                                                    const char* path);
RESPCAL_API int64_t respcal_calibration_sample_budget(const respcal_calibration* calibration);
RESPCAL_API double respcal_calibration_threshold(const respcal_calibration* calibration);
RESPCAL_API double respcal_calibration_alpha(const respcal_calibration* calibration);
RESPCAL_API double respcal_calibration_beta(const respcal_calibration* calibration);
RESPCAL_API double respcal_calibration_epsilon(const respcal_calibration* calibration);
RESPCAL_API void respcal_calibration_free(respcal_calibration* calibration);

/* ---- prediction ---- */

/* Writes one JSON line per record to `out_path`. */
RESPCAL_API respcal_status respcal_predict(const respcal_dataset* dataset,
                                           const respcal_calibration* calibration,
                                           const respcal_oracle* oracle,
                                           const respcal_measure* measure,
                                           const char* out_path, size_t* n_written);

/* ---- evaluation ---- */

typedef struct respcal_trial_report {
  double stage1_eer;
  double stage2_eer;
  double apss_raw;
  double apss_dedup;
  double acc;
  size_t n_cal;
  size_t n_test;
  int64_t sample_budget;
  double threshold;
  double alpha;
  double epsilon;
} respcal_trial_report;

/* Seeded split, calibrate, evaluate. `out_path` (CSV + JSON sidecar) may be NULL.
 * `config_json` is a JSON object stored in the sidecar; may be NULL. */
RESPCAL_API respcal_status respcal_evaluate(const respcal_dataset* dataset, double alpha,
                                            double beta, double split_ratio, uint64_t seed,
                                            const respcal_oracle* oracle,
                                            const respcal_measure* measure,
                                            const char* out_path, const char* config_json,
                                            respcal_trial_report* out);

typedef struct respcal_sweep_options {
  const char* alpha_grid; /* "start:stop:step", a value, or a comma list */
  const char* beta_grid;
  double split_ratio;
  uint64_t seed;
  size_t trials;
  size_t workers;
} respcal_sweep_options;

typedef struct respcal_sweep_summary {
  size_t n_rows;
  size_t n_flagged; /* rows with an infeasible or unbounded calibration */
  size_t n_grid_points;
} respcal_sweep_summary;

/* Writes `out_path` (per-trial rows), "<stem>.agg.csv" and "<stem>.json". */
RESPCAL_API respcal_status respcal_sweep(const respcal_dataset* dataset,
                                         const respcal_oracle* oracle,
                                         const respcal_measure* measure,
                                         const respcal_sweep_options* options,
                                         const char* out_path, const char* config_json,
                                         respcal_sweep_summary* out);

/* One fixed split; one row per beta with raw and deduplicated APSS. */
RESPCAL_API respcal_status respcal_dedup_report(const respcal_dataset* dataset,
                                                const respcal_oracle* oracle,
                                                const respcal_measure* measure, double alpha,
                                                const char* beta_grid, double split_ratio,
                                                uint64_t seed, const char* out_path,
                                                const char* config_json, size_t* n_rows);

/* ---- simulation ---- */

typedef struct respcal_simulate_options {
  size_t n_questions;
  size_t max_samples;
  const char* probability_law; /* "fixed:P", "uniform:LO:HI", "twopoint:P1:P2:W" */
  size_t distractor_count;
  uint64_t seed;
  double alpha;
  double beta;
  double split_ratio;
  size_t trials;
  size_t workers;
} respcal_simulate_options;

RESPCAL_API void respcal_simulate_options_init(respcal_simulate_options* options);

typedef struct respcal_verdict {
  int pass;
  int stage1_pass;
  int stage2_pass;
  size_t n_trials;
  size_t n_ok;
  double alpha;
  double epsilon;
  double stage1_eer_mean;
  double stage1_eer_se;
  double stage2_eer_mean;
  double stage2_eer_se;
} respcal_verdict;

/* Fresh synthetic data per trial. `out_path` (CSV + sidecar) may be NULL. */
RESPCAL_API respcal_status respcal_simulate(const respcal_simulate_options* options,
                                            const respcal_oracle* oracle,
                                            const respcal_measure* measure,
                                            const char* out_path, const char* config_json,
                                            respcal_verdict* out);

/* Human-readable verdict; returns the full length (like snprintf). */
RESPCAL_API size_t respcal_verdict_format(const respcal_verdict* verdict, char* buffer,
                                          size_t capacity);

/* Exact coverage by enumerating each of the `count` scores as the test point.
 * Infinite scores are passed as +INFINITY. */
RESPCAL_API respcal_status respcal_exact_coverage(const double* scores, size_t count,
                                                  double risk, int64_t* numerator,
                                                  int64_t* denominator);

#ifdef __cplusplus
}
#endif

#endif /* RESPCAL_H_ */
