/* gcsim — trace-driven GPU cluster scheduling and energy-saving simulator.
 *
 * C API over the core library. All functions returning gcs_status set a
 * thread-local message readable through gcs_last_error() on failure. Strings
 * returned through char** out-parameters are heap-allocated; release them
 * with gcs_string_free(). Handles are opaque and single-owner; every
 * *_free() accepts NULL.
 *
 * Option strings are JSON objects; unknown keys are ignored. Keys:
 *
 *   simulate: policy ("fifo"|"sjf"|"srtf"|"qssf"), lambda, qssf_oracle,
 *             noise_sigma, noise_seed, include_cpu_jobs, queue_threshold,
 *             replay_from, replay_to, vc_snapshot_time
 *             (timestamps: epoch seconds or "YYYY-MM-DD[ HH:MM:SS]")
 *   train:    rounds, learning_rate, max_depth, min_samples_leaf, gamma,
 *             tau, default_prior, log_target, update_window, update_rounds
 *   forecaster: rounds, learning_rate, max_depth, min_samples_leaf,
 *             rolling_windows (minutes), lags (minutes), holidays (dates)
 *   ces:      sigma, xi_h, xi_p, check_period, history_window,
 *             forecast_horizon, boot_delay, enabled, vanilla, eval_from,
 *             idle_node_watts, cooling_multiplier
 */
#ifndef GCSIM_H
#define GCSIM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GCS_API __declspec(dllexport)
#else
#define GCS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gcs_status {
  GCS_OK = 0,
  GCS_ERR_INVALID_ARG = 1,
  GCS_ERR_PARSE = 2,
  GCS_ERR_IO = 3,
  GCS_ERR_STATE = 4,
  GCS_ERR_INTERNAL = 5
} gcs_status;

GCS_API const char* gcs_version(void);
GCS_API const char* gcs_status_name(gcs_status status);
GCS_API const char* gcs_last_error(void);
GCS_API void gcs_string_free(char* s);

typedef struct gcs_trace gcs_trace;
typedef struct gcs_cluster gcs_cluster;
typedef struct gcs_model gcs_model;
typedef struct gcs_forecaster gcs_forecaster;
typedef struct gcs_sim_result gcs_sim_result;
typedef struct gcs_ces_report gcs_ces_report;

/* ---- traces ---- */
/* format: "canonical" (default when NULL), "helios", "philly",
 * "philly-attempts" */
GCS_API gcs_status gcs_trace_open(const char* path, const char* format, gcs_trace** out);
GCS_API gcs_status gcs_trace_synth(const char* params_json, gcs_trace** out);
GCS_API gcs_status gcs_trace_save(const gcs_trace* trace, const char* path);
GCS_API size_t gcs_trace_job_count(const gcs_trace* trace);
GCS_API size_t gcs_trace_reject_count(const gcs_trace* trace);
GCS_API gcs_status gcs_trace_validate(const gcs_trace* trace, const gcs_cluster* cluster,
                                      char** report_json);
GCS_API void gcs_trace_free(gcs_trace* trace);

/* ---- clusters ---- */
GCS_API gcs_status gcs_cluster_open(const char* path, gcs_cluster** out);
GCS_API gcs_status gcs_cluster_parse(const char* json_text, gcs_cluster** out);
GCS_API void gcs_cluster_free(gcs_cluster* cluster);

/* ---- analytics ---- */
GCS_API gcs_status gcs_analyze(const gcs_trace* trace, const gcs_cluster* cluster,
                               const char* outdir, int svg, char** summary_json);

/* ---- duration predictor ---- */
GCS_API gcs_status gcs_train(const gcs_trace* trace, int64_t cutoff_epoch,
                             const char* options_json, gcs_model** out);
GCS_API gcs_status gcs_model_open(const char* path, gcs_model** out);
GCS_API gcs_status gcs_model_save(const gcs_model* model, const char* path);
/* RMSE/SMAPE report on jobs submitted after the model's training cutoff. */
GCS_API gcs_status gcs_model_validate(const gcs_model* model, const gcs_trace* trace,
                                      char** report_json);
/* Fine-tune: extra boosting rounds on jobs finished in the sliding window
 * ending at now_epoch. Empty windows are no-ops. */
GCS_API gcs_status gcs_model_update(gcs_model* model, const gcs_trace* completed,
                                    int64_t now_epoch);
GCS_API void gcs_model_free(gcs_model* model);

/* ---- simulation ---- */
GCS_API gcs_status gcs_simulate(const gcs_trace* trace, const gcs_cluster* cluster,
                                const gcs_model* model_or_null, const char* options_json,
                                gcs_sim_result** out);
GCS_API gcs_status gcs_sim_result_metrics(const gcs_sim_result* result, char** metrics_json);
/* writes jobs.csv, summary.json, utilization.csv */
GCS_API gcs_status gcs_sim_result_write(const gcs_sim_result* result, const char* outdir);
GCS_API void gcs_sim_result_free(gcs_sim_result* result);

/* ---- node series / forecasting / energy saving ---- */
/* in_format: "series" (minute,total,running) or "philly-export" */
GCS_API gcs_status gcs_node_series_convert(const char* path, const char* in_format,
                                           const char* out_csv_path);
GCS_API gcs_status gcs_node_series_from_trace(const gcs_trace* trace,
                                              const gcs_cluster* cluster,
                                              const char* out_csv_path);
GCS_API gcs_status gcs_forecaster_train(const char* series_csv_path, int64_t cutoff_epoch,
                                        const char* options_json, gcs_forecaster** out);
GCS_API gcs_status gcs_forecaster_open(const char* path, gcs_forecaster** out);
GCS_API gcs_status gcs_forecaster_save(const gcs_forecaster* forecaster, const char* path);
/* forecast from the end of the series; returns CSV minute,predicted_running */
GCS_API gcs_status gcs_forecast(const gcs_forecaster* forecaster, const char* series_csv_path,
                                int horizon_minutes, char** forecast_csv);
GCS_API void gcs_forecaster_free(gcs_forecaster* forecaster);

GCS_API gcs_status gcs_ces_run_trace(const gcs_trace* trace, const gcs_cluster* cluster,
                                     const gcs_forecaster* forecaster_or_null,
                                     const char* options_json, gcs_ces_report** out);
GCS_API gcs_status gcs_ces_run_series(const char* series_csv_path,
                                      const gcs_forecaster* forecaster_or_null,
                                      const char* options_json, gcs_ces_report** out);
GCS_API gcs_status gcs_ces_report_json(const gcs_ces_report* report, char** json_out);
/* writes report.json and timeline.csv */
GCS_API gcs_status gcs_ces_report_write(const gcs_ces_report* report, const char* outdir);
GCS_API void gcs_ces_report_free(gcs_ces_report* report);

/* ---- utilities ---- */
GCS_API gcs_status gcs_file_sha256(const char* path, char** hex_out);

#ifdef __cplusplus
}
#endif

#endif /* GCSIM_H */
