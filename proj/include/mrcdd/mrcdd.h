/* C interface to the mrcdd library.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Functions return an mrcdd_status; on failure, mrcdd_last_error() returns a
 * message for the calling thread. Matrices cross the boundary column-major.
 */
#ifndef MRCDD_H
#define MRCDD_H

#include <stddef.h>
#include <stdint.h>

#if defined(MRCDD_BUILDING_LIBRARY)
#define MRCDD_API __attribute__((visibility("default")))
#else
#define MRCDD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mrcdd_status {
  MRCDD_OK = 0,
  MRCDD_ERR_INVALID_ARGUMENT = 1,
  MRCDD_ERR_DIMENSION = 2,
  MRCDD_ERR_PARSE = 3,
  MRCDD_ERR_IO = 4,
  MRCDD_ERR_REGIME = 5,
  MRCDD_ERR_INPUT_MISMATCH = 6,
  MRCDD_ERR_SINGULAR = 7,
  MRCDD_ERR_INFEASIBLE = 8,
  MRCDD_ERR_SOLVER = 9,
  MRCDD_ERR_INTERNAL = 10
} mrcdd_status;

typedef struct mrcdd_matrix mrcdd_matrix;
typedef struct mrcdd_config mrcdd_config;
typedef struct mrcdd_dataset mrcdd_dataset;
typedef struct mrcdd_gains mrcdd_gains;
typedef struct mrcdd_campaign mrcdd_campaign;

MRCDD_API const char* mrcdd_version(void);
MRCDD_API const char* mrcdd_status_string(mrcdd_status status);
/* Message of the last failed call on this thread, "" if none. */
MRCDD_API const char* mrcdd_last_error(void);

/* ---- matrices ---- */

/* `data` may be NULL for a zero matrix. */
MRCDD_API mrcdd_status mrcdd_matrix_create(size_t rows, size_t cols, const double* data,
                                           mrcdd_matrix** out);
MRCDD_API void mrcdd_matrix_destroy(mrcdd_matrix* matrix);
MRCDD_API size_t mrcdd_matrix_rows(const mrcdd_matrix* matrix);
MRCDD_API size_t mrcdd_matrix_cols(const mrcdd_matrix* matrix);
MRCDD_API mrcdd_status mrcdd_matrix_get(const mrcdd_matrix* matrix, size_t row, size_t col,
                                        double* value);
/* Copies rows*cols values into `out`, which must hold `capacity` doubles. */
MRCDD_API mrcdd_status mrcdd_matrix_copy(const mrcdd_matrix* matrix, double* out,
                                         size_t capacity);
MRCDD_API mrcdd_status mrcdd_matrix_load(const char* path, mrcdd_matrix** out);
MRCDD_API mrcdd_status mrcdd_matrix_save(const mrcdd_matrix* matrix, const char* path);
/* Writes the matrix in the plain-text format to stdout. */
MRCDD_API mrcdd_status mrcdd_matrix_print(const mrcdd_matrix* matrix, const char* label);

/* ---- configuration ---- */

/* Benchmark defaults: three-state plant, A_M = 0.2 I, B_M = 0.8 I. */
MRCDD_API mrcdd_status mrcdd_config_default(mrcdd_config** out);
MRCDD_API mrcdd_status mrcdd_config_load(const char* path, mrcdd_config** out);
MRCDD_API mrcdd_status mrcdd_config_parse(const char* text, mrcdd_config** out);
/* `key` is "section.name", e.g. "experiment.mc_runs". */
MRCDD_API mrcdd_status mrcdd_config_set(mrcdd_config* config, const char* key,
                                        const char* value);
MRCDD_API void mrcdd_config_destroy(mrcdd_config* config);
MRCDD_API mrcdd_status mrcdd_config_model(const mrcdd_config* config, mrcdd_matrix** am,
                                          mrcdd_matrix** bm);

/* ---- datasets: one or more experiments ---- */

/* Simulates `count` experiments of length t_len on the configured plant. All
 * experiments share one input sequence; each gets its own noise realization. */
MRCDD_API mrcdd_status mrcdd_dataset_simulate(const mrcdd_config* config, uint64_t seed,
                                              size_t t_len, double variance, size_t count,
                                              mrcdd_dataset** out);
MRCDD_API mrcdd_status mrcdd_dataset_create(mrcdd_dataset** out);
/* Appends one experiment read from `dir` (inputs.txt, states.txt). If `dir`
 * holds exp_* subdirectories instead, all of them are appended in name order. */
MRCDD_API mrcdd_status mrcdd_dataset_add_dir(mrcdd_dataset* dataset, const char* dir);
/* Appends an experiment from inputs (m x T) and states (n x (T+1)). */
MRCDD_API mrcdd_status mrcdd_dataset_add(mrcdd_dataset* dataset, const mrcdd_matrix* inputs,
                                         const mrcdd_matrix* states);
/* Writes dir/exp_000, dir/exp_001, ... Clean states and noise are written as
 * well when the experiments were simulated. */
MRCDD_API mrcdd_status mrcdd_dataset_save(const mrcdd_dataset* dataset, const char* dir);
MRCDD_API size_t mrcdd_dataset_size(const mrcdd_dataset* dataset);
MRCDD_API void mrcdd_dataset_destroy(mrcdd_dataset* dataset);
/* Pooled variance estimate from the first two experiments. */
MRCDD_API mrcdd_status mrcdd_dataset_estimate_variance(const mrcdd_dataset* dataset,
                                                       double* variance);

/* ---- synthesis ---- */

typedef struct mrcdd_synth_options {
  /* Noise variance for bias correction; negative means estimate it from the
   * first two experiments. */
  double variance;
  double lambda;
  double epsilon;
  double scale_bound;
  double eq_tol;
  double psd_tol;
  double gap_tol;
  int max_iter;
} mrcdd_synth_options;

MRCDD_API void mrcdd_synth_options_default(mrcdd_synth_options* options);

/* `method` is one of exact, noisefree, raw, bc, iv, avg. exact, noisefree,
 * raw and bc use the first experiment, iv the first two, avg all of them. */
MRCDD_API mrcdd_status mrcdd_synthesize(const mrcdd_dataset* dataset, const mrcdd_matrix* am,
                                        const mrcdd_matrix* bm, const char* method,
                                        const mrcdd_synth_options* options, mrcdd_gains** out);
MRCDD_API void mrcdd_gains_destroy(mrcdd_gains* gains);
MRCDD_API mrcdd_status mrcdd_gains_kx(const mrcdd_gains* gains, mrcdd_matrix** out);
MRCDD_API mrcdd_status mrcdd_gains_kr(const mrcdd_gains* gains, mrcdd_matrix** out);

typedef struct mrcdd_gains_info {
  double matching_residual_a;
  double matching_residual_b;
  double spectral_radius_estimate;
  int solver_iterations;
  size_t t_len;
} mrcdd_gains_info;

MRCDD_API mrcdd_status mrcdd_gains_info_get(const mrcdd_gains* gains, mrcdd_gains_info* info);

typedef struct mrcdd_matching_errors {
  double err_a;
  double err_b;
  double spectral_radius;
  int stable;
} mrcdd_matching_errors;

/* Matching errors of `gains` on a known plant. */
MRCDD_API mrcdd_status mrcdd_verify_matching(const mrcdd_matrix* a, const mrcdd_matrix* b,
                                             const mrcdd_gains* gains, const mrcdd_matrix* am,
                                             const mrcdd_matrix* bm, mrcdd_matching_errors* out);

/* ---- Monte-Carlo campaigns ---- */

MRCDD_API mrcdd_status mrcdd_campaign_run(const mrcdd_config* config, mrcdd_campaign** out);
MRCDD_API void mrcdd_campaign_destroy(mrcdd_campaign* campaign);
MRCDD_API size_t mrcdd_campaign_size(const mrcdd_campaign* campaign);

typedef struct mrcdd_run_record {
  int run_index;
  uint64_t seed;
  const char* method; /* static string */
  size_t t_len;
  double variance;
  double snr_db;
  double err_kx;
  double err_kr;
  int stable;
  double spectral_radius;
  double solve_time_ms;
  const char* solver_status; /* valid while the campaign lives */
} mrcdd_run_record;

MRCDD_API mrcdd_status mrcdd_campaign_record(const mrcdd_campaign* campaign, size_t index,
                                             mrcdd_run_record* out);
MRCDD_API mrcdd_status mrcdd_campaign_write_records(const mrcdd_campaign* campaign,
                                                    const char* path);
MRCDD_API mrcdd_status mrcdd_campaign_write_summary(const mrcdd_campaign* campaign,
                                                    const char* path);
/* Closed-loop tracking of every successful run's gains. */
MRCDD_API mrcdd_status mrcdd_campaign_write_tracking(const mrcdd_campaign* campaign,
                                                     const char* path);

/* Runs the reduced property suite, printing one line per check to stdout.
 * `failures` receives the number of failed checks. */
MRCDD_API mrcdd_status mrcdd_selftest(int* failures);

#ifdef __cplusplus
}
#endif

#endif /* MRCDD_H */
