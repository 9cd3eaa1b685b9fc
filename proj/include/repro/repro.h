#ifndef REPRO_REPRO_H
#define REPRO_REPRO_H

/* C interface to the snippet reproducibility toolkit.
 *
 * Every function returns a repro_status. On failure the message is available
 * from repro_last_error() on the same thread until the next call.
 * Strings handed back through char** are heap-allocated and released with
 * repro_free_string. Handles are released with their *_free function; passing
 * NULL to any free function is a no-op.
 *
 * Structured arguments and results are UTF-8 JSON documents. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define REPRO_API __attribute__((visibility("default")))
#else
#define REPRO_API
#endif

typedef enum repro_status {
  REPRO_OK = 0,
  REPRO_E_INVALID_ARGUMENT = 1,
  REPRO_E_IO = 2,
  REPRO_E_PARSE = 3,
  REPRO_E_EMPTY_SNIPPET_SET = 4,
  REPRO_E_SINGLE_CLASS = 5,
  REPRO_E_TOO_FEW_MINORITY = 6,
  REPRO_E_CONFIGURATION = 7,
  REPRO_E_NOT_FOUND = 8,
  REPRO_E_INTERNAL = 9
} repro_status;

typedef struct repro_dataset repro_dataset;
typedef struct repro_bundle repro_bundle;
typedef struct repro_service repro_service;

REPRO_API const char* repro_version(void);
REPRO_API const char* repro_last_error(void);
REPRO_API const char* repro_status_name(repro_status status);
REPRO_API void repro_free_string(char* s);

/* Analyzer configuration, shared by several calls (all fields optional):
 * {"compiler": "javac -proc:none", "timeout_ms": 30000,
 *  "scratch_dir": "...", "jdk_index": "path/to/index.json"}
 * Without "compiler" the REPRO_JAVAC environment variable, then "javac", is
 * used. "none" disables compilation. */

/* ---- ingest ---- */
/* options: {"tag": "java", "keywords": [...], "filter": true,
 *           "buffer_size": 65536}. Writes questions JSONL to out_path; the
 * report holds parse counts and the keyword list. */
REPRO_API repro_status repro_ingest_dump(const char* dump_path, const char* out_path,
                                         const char* options_json, char** report_json);

/* ---- features ---- */
/* Nine-feature extraction for one snippet. Result: features, encoded row,
 * structural summary, import classification, compile outcome. */
REPRO_API repro_status repro_extract_features(const char* code, const char* question_text,
                                              const char* config_json, char** result_json);

/* Questions JSONL to a labeled dataset. options: analyzer config plus
 * {"combine": false, "jobs": 1}. Unlabeled questions are counted, not kept. */
REPRO_API repro_status repro_features_from_questions(const char* questions_path,
                                                     const char* options_json,
                                                     repro_dataset** out, char** report_json);

/* ---- datasets ---- */
REPRO_API repro_status repro_dataset_load(const char* path, repro_dataset** out);
REPRO_API repro_status repro_dataset_save(const repro_dataset* ds, const char* path);
REPRO_API repro_status repro_dataset_synth(size_t n_reproducible, size_t n_irreproducible,
                                           uint64_t seed, repro_dataset** out);
/* {"rows", "reproducible", "irreproducible", "synthetic", "fingerprint"} */
REPRO_API repro_status repro_dataset_info(const repro_dataset* ds, char** info_json);
REPRO_API repro_status repro_dataset_row(const repro_dataset* ds, size_t index, double* row9,
                                         int* label);
REPRO_API repro_status repro_dataset_smote(const repro_dataset* ds, int k, uint64_t seed,
                                           int round, repro_dataset** out);
REPRO_API void repro_dataset_free(repro_dataset* ds);

/* ---- models ---- */
/* spec: {"family": "rf", "seed": 0, "params": {...}}
 * cv:   {"k": 10, "seed": 0, "smote_mode": "in_fold"|"global", "smote_k": 5,
 *        "smote_round": false, "jobs": 1}
 * Result: metrics JSON with per-class precision/recall/F1, accuracy and the
 * pooled confusion matrix. */
REPRO_API repro_status repro_evaluate(const repro_dataset* ds, const char* spec_json,
                                      const char* cv_json, char** metrics_json);
/* Pooled metrics of several evaluations as a text table ("table") or CSV
 * ("csv"). entries_json: [{"name": ..., "metrics": <repro_evaluate output>}] */
REPRO_API repro_status repro_format_metrics(const char* entries_json, const char* format,
                                            char** out);

/* options: {"background_size": 100, "background_seed": 0, "smote": true,
 *           "smote_k": 5, "smote_round": false} */
REPRO_API repro_status repro_bundle_train(const repro_dataset* ds, const char* spec_json,
                                          const char* options_json, repro_bundle** out);
REPRO_API repro_status repro_bundle_load(const char* path, repro_bundle** out);
REPRO_API repro_status repro_bundle_save(const repro_bundle* bundle, const char* path);
/* Spec and training metadata, as served by GET /api/model. */
REPRO_API repro_status repro_bundle_info(const repro_bundle* bundle, char** info_json);
REPRO_API repro_status repro_bundle_predict(const repro_bundle* bundle, const double* row,
                                            size_t n, double* probability);
/* Feature extraction, prediction, Shapley values and hints for one snippet;
 * the same document POST /api/analyze returns. */
REPRO_API repro_status repro_bundle_analyze(const repro_bundle* bundle, const char* request_json,
                                            const char* config_json, char** response_json);
REPRO_API void repro_bundle_free(repro_bundle* bundle);

/* ---- explanations ---- */
/* Exact Shapley values against the bundle's background sample.
 * ds may be NULL, in which case rows come from the background sample.
 * instance < 0 explains every row. kind: "beeswarm", "waterfall" or
 * "force" (the last two need a single instance). Outputs not produced by the
 * chosen kind are set to NULL. */
REPRO_API repro_status repro_explain(const repro_bundle* bundle, const repro_dataset* ds,
                                     long long instance, const char* kind, char** plot_json,
                                     char** plot_csv, char** plot_svg);

/* ---- statistics ---- */
/* One chi-square test per feature over the real rows. format: "csv" | "json" */
REPRO_API repro_status repro_stats_report(const repro_dataset* ds, const char* format,
                                          char** out);
/* counts: row-major rows x cols. Result: {"chi2","df","p","yates"} */
REPRO_API repro_status repro_chi_square(const int64_t* counts, size_t rows, size_t cols,
                                        char** result_json);
REPRO_API repro_status repro_chi_square_sf(double x, int df, double* p);
/* rankings: [["A","B","C"], ...] or {"rankings": [...], "candidates": [...]}
 * Result: [{"candidate","score"}] by descending score. */
REPRO_API repro_status repro_borda(const char* rankings_json, char** result_json);

/* ---- service ---- */
/* config: analyzer config plus {"static_dir": "..."} */
REPRO_API repro_status repro_service_create(const repro_bundle* bundle, const char* config_json,
                                            repro_service** out);
/* Routes one HTTP request. The response body may hold binary data, hence the
 * explicit length. */
REPRO_API repro_status repro_service_handle(const repro_service* service, const char* method,
                                            const char* path, const char* body, size_t body_len,
                                            int* http_status, char** content_type,
                                            char** response_body, size_t* response_len);
REPRO_API void repro_service_free(repro_service* service);

#ifdef __cplusplus
}
#endif

#endif
