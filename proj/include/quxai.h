/*
 * quxai.h - C API for the QuXAI hybrid quantum-classical training and
 * explanation library.
 *
 * All functions returning quxai_status set a thread-local error message
 * retrievable via quxai_last_error() on failure. Objects returned through
 * out-parameters are owned by the caller and released with the matching
 * *_free function. Strings returned through char** out-parameters are
 * released with quxai_string_free.
 */
#ifndef QUXAI_H
#define QUXAI_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum quxai_status {
    QUXAI_OK = 0,
    QUXAI_ERROR_INVALID_ARGUMENT = 1, /* bad usage: unknown names, shape mismatches */
    QUXAI_ERROR_DATA = 2,             /* unreadable/inconsistent data or documents */
    QUXAI_ERROR_COMPUTE = 3,          /* training or explanation failed */
} quxai_status;

typedef struct quxai_table quxai_table;       /* raw feature table */
typedef struct quxai_prepared quxai_prepared; /* scaled, split dataset */
typedef struct quxai_model quxai_model;       /* trained hybrid model */
typedef struct quxai_report quxai_report;     /* feature importance report */
typedef struct quxai_eval quxai_eval;         /* ablation/benchmark grid */

/* ---- library ---- */

const char* quxai_version(void);

/* Message from the most recent failing call on this thread. */
const char* quxai_last_error(void);

void quxai_string_free(char* s);

/* Caps internal worker threads; 0 restores hardware concurrency. Outputs are
 * identical for every setting. */
void quxai_set_max_threads(int n);

/* ---- tables ---- */

quxai_status quxai_table_load_csv(const char* path, const char* target_column,
                                  quxai_table** out);

/* Appends seeded noise/redundant columns in place. */
quxai_status quxai_table_augment(quxai_table* table, int n_noise, int n_redundant,
                                 uint64_t seed);

/* Stratified row subsample in place (no-op when the table already fits). */
quxai_status quxai_table_subsample(quxai_table* table, int max_rows, uint64_t seed);

/* Replaces a numeric target column with "0"/"1" split at its median. */
quxai_status quxai_table_binarize_target(quxai_table* table);

int quxai_table_n_rows(const quxai_table* table);
int quxai_table_n_features(const quxai_table* table);
void quxai_table_free(quxai_table* table);

/* ---- prepared datasets ---- */

quxai_status quxai_prepare(const quxai_table* table, double test_fraction, uint64_t seed,
                           quxai_prepared** out);

int quxai_prepared_n_features(const quxai_prepared* prep);
int quxai_prepared_n_train(const quxai_prepared* prep);
int quxai_prepared_n_test(const quxai_prepared* prep);

/* Borrowed pointer, valid while prep lives. Null if index out of range. */
const char* quxai_prepared_feature_label(const quxai_prepared* prep, int index);

void quxai_prepared_free(quxai_prepared* prep);

/* ---- models ---- */

/* learner_kind accepts canonical names (decision_tree, ...) or compact
 * short names (QDT, QRF, ...); model_type is "amplitude" or "kernel". */
quxai_status quxai_train(const quxai_prepared* prep, const char* learner_kind,
                         const char* model_type, uint64_t seed, quxai_model** out);

quxai_status quxai_model_test_accuracy(const quxai_model* model, const quxai_prepared* prep,
                                       double* out);

/* Borrowed pointer, valid while the model lives. */
const char* quxai_model_descriptor(const quxai_model* model);

quxai_status quxai_model_to_json(const quxai_model* model, char** out);
quxai_status quxai_model_from_json(const char* json_text, quxai_model** out);
quxai_status quxai_model_save(const quxai_model* model, const char* path);
quxai_status quxai_model_load(const char* path, quxai_model** out);
void quxai_model_free(quxai_model* model);

/* ---- explanation ---- */

/* config_json (all keys optional):
 *   {"repeats":5, "seed":0, "adaptive_weighting":false, "interaction_pi":false,
 *    "interaction_partners_m":2, "neutral_value":0.0}
 * The explainer runs on the training split of prep as reference data. */
quxai_status quxai_explain(const quxai_model* model, const quxai_prepared* prep,
                           const char* config_json, quxai_report** out);

quxai_status quxai_report_to_json(const quxai_report* report, char** out);
quxai_status quxai_report_from_json(const char* json_text, quxai_report** out);

/* chart_json (all keys optional):
 *   {"title":"...", "width":800, "bar_height":24, "show_values":true,
 *    "rows":0, "cols":0} */
quxai_status quxai_report_render_svg(const quxai_report* report, const char* chart_json,
                                     char** out);
quxai_status quxai_report_render_text(const quxai_report* report, char** out);
quxai_status quxai_render_multipanel(const quxai_report* const* reports, int n_reports,
                                     const char* chart_json, char** out);
void quxai_report_free(quxai_report* report);

/* ---- evaluation harnesses ---- */

/* config_json:
 *   {"datasets":[{"name":"iris","path":"data/iris.csv","target":"target"}],
 *    "noise":2, "redundant":2, "seeds":[1,2,3],
 *    "test_fraction":0.3, "repeats":5,
 *    "models":["QDT","QRF"]}          // benchmark only
 * Augmentation is re-drawn per seed. Cell failures are recorded in the
 * result; the call fails only when every cell fails. */
quxai_status quxai_ablation_run(const char* config_json, quxai_eval** out);
quxai_status quxai_benchmark_run(const char* config_json, quxai_eval** out);

quxai_status quxai_eval_to_json(const quxai_eval* eval, char** out);
quxai_status quxai_eval_to_csv(const quxai_eval* eval, char** out);
quxai_status quxai_eval_format_table(const quxai_eval* eval, char** out);
double quxai_eval_runtime_seconds(const quxai_eval* eval);
void quxai_eval_free(quxai_eval* eval);

#ifdef __cplusplus
}
#endif

#endif /* QUXAI_H */
