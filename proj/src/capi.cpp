#include "quxai.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "quxai/datasets.hpp"
#include "quxai/evaluation.hpp"
#include "quxai/hqml.hpp"
#include "quxai/parallel.hpp"
#include "quxai/qmedley.hpp"
#include "quxai/version.hpp"
#include "quxai/viz.hpp"

#include "json.hpp"

using nlohmann::json;

struct quxai_table {
    quxai::RawTable table;
};
struct quxai_prepared {
    quxai::PreparedDataset dataset;
};
struct quxai_model {
    quxai::HQMLModel model;
    std::string descriptor;
};
struct quxai_report {
    quxai::ImportanceReport report;
};
struct quxai_eval {
    quxai::EvalResult result;
};

namespace {

thread_local std::string t_last_error;

quxai_status status_of(const quxai::Error& e) {
    switch (e.kind()) {
        case quxai::ErrorKind::invalid_argument: return QUXAI_ERROR_INVALID_ARGUMENT;
        case quxai::ErrorKind::data: return QUXAI_ERROR_DATA;
        case quxai::ErrorKind::compute: return QUXAI_ERROR_COMPUTE;
    }
    return QUXAI_ERROR_COMPUTE;
}

// Runs fn, translating exceptions into status codes + the thread-local
// message. fn returns the success status (normally QUXAI_OK).
template <typename Fn>
quxai_status guarded(Fn&& fn) {
    try {
        t_last_error.clear();
        return fn();
    } catch (const quxai::Error& e) {
        t_last_error = e.what();
        return status_of(e);
    } catch (const json::exception& e) {
        t_last_error = std::string("json: ") + e.what();
        return QUXAI_ERROR_DATA;
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return QUXAI_ERROR_COMPUTE;
    }
}

char* copy_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

quxai_status require(bool ok, const char* message) {
    if (!ok) {
        t_last_error = message;
        return QUXAI_ERROR_INVALID_ARGUMENT;
    }
    return QUXAI_OK;
}

json parse_json_or_empty(const char* text) {
    if (!text || !*text) return json::object();
    return json::parse(text);
}

quxai::ChartSpec chart_spec_from_json(const json& j) {
    quxai::ChartSpec spec;
    if (j.contains("title")) spec.title = j.at("title").get<std::string>();
    if (j.contains("width")) spec.width_px = j.at("width").get<int>();
    if (j.contains("bar_height")) spec.bar_height_px = j.at("bar_height").get<int>();
    if (j.contains("show_values")) spec.show_values = j.at("show_values").get<bool>();
    if (j.contains("rows")) spec.panel_rows = j.at("rows").get<int>();
    if (j.contains("cols")) spec.panel_cols = j.at("cols").get<int>();
    return spec;
}

struct EvalRunConfig {
    std::vector<quxai::NamedTable> datasets;
    std::vector<std::uint64_t> seeds;
    double test_fraction = 0.3;
    int repeats = 5;
    int noise = 0;
    int redundant = 0;
    int max_rows = 0; // 0 = no subsampling
    bool binarize_target = false;
    std::vector<quxai::LearnerKind> models;
};

// Loads every dataset named in the harness config. Augmentation is applied
// per seed inside the harness, so here only the raw tables are built; the
// per-seed augmented variants are materialized by expand_for_seed below.
EvalRunConfig parse_eval_config(const json& j) {
    EvalRunConfig cfg;
    if (!j.contains("datasets") || !j.at("datasets").is_array() || j.at("datasets").empty())
        quxai::fail_invalid("eval config: 'datasets' must be a nonempty array");
    for (const auto& jd : j.at("datasets")) {
        quxai::NamedTable named;
        named.name = jd.at("name").get<std::string>();
        named.table = quxai::load_csv(jd.at("path").get<std::string>(),
                                      jd.value("target", std::string("target")));
        cfg.datasets.push_back(std::move(named));
    }
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (cfg.seeds.empty()) cfg.seeds = {0};
    cfg.test_fraction = j.value("test_fraction", 0.3);
    cfg.repeats = j.value("repeats", 5);
    cfg.noise = j.value("noise", 0);
    cfg.redundant = j.value("redundant", 0);
    cfg.max_rows = j.value("max_rows", 0);
    cfg.binarize_target = j.value("binarize_target", false);
    if (j.contains("models")) {
        for (const auto& jm : j.at("models"))
            cfg.models.push_back(quxai::learner_kind_from_short_name(jm.get<std::string>()));
    }
    return cfg;
}

bool all_cells_failed(const quxai::EvalResult& result) {
    for (const auto& cell : result.cells)
        if (!cell.failed) return false;
    return !result.cells.empty();
}

// Binarize/subsample/augment each dataset once; the harness re-splits and
// refits per seed. The first seed roots the table-preparation streams.
std::vector<quxai::NamedTable> materialize_tables(const EvalRunConfig& cfg) {
    std::vector<quxai::NamedTable> tables;
    for (const auto& named : cfg.datasets) {
        quxai::NamedTable t = named;
        if (cfg.binarize_target) t.table = quxai::binarize_target_at_median(t.table);
        if (cfg.max_rows > 0)
            t.table = quxai::subsample_stratified(t.table, static_cast<std::size_t>(cfg.max_rows),
                                                  cfg.seeds[0]);
        if (cfg.noise > 0 || cfg.redundant > 0)
            t.table = quxai::augment_noisy(t.table, cfg.noise, cfg.redundant, cfg.seeds[0]);
        tables.push_back(std::move(t));
    }
    return tables;
}

} // namespace

extern "C" {

const char* quxai_version(void) { return quxai::kVersion; }

const char* quxai_last_error(void) { return t_last_error.c_str(); }

void quxai_string_free(char* s) { delete[] s; }

void quxai_set_max_threads(int n) { quxai::set_max_threads(n); }

quxai_status quxai_table_load_csv(const char* path, const char* target_column,
                                  quxai_table** out) {
    if (auto s = require(path && target_column && out, "null argument")) return s;
    return guarded([&] {
        auto handle = std::make_unique<quxai_table>();
        handle->table = quxai::load_csv(path, target_column);
        *out = handle.release();
        return QUXAI_OK;
    });
}

quxai_status quxai_table_augment(quxai_table* table, int n_noise, int n_redundant,
                                 uint64_t seed) {
    if (auto s = require(table != nullptr, "null table")) return s;
    return guarded([&] {
        table->table = quxai::augment_noisy(table->table, n_noise, n_redundant, seed);
        return QUXAI_OK;
    });
}

quxai_status quxai_table_subsample(quxai_table* table, int max_rows, uint64_t seed) {
    if (auto s = require(table != nullptr, "null table")) return s;
    return guarded([&] {
        if (max_rows < 1) quxai::fail_invalid("subsample: max_rows must be positive");
        table->table =
            quxai::subsample_stratified(table->table, static_cast<std::size_t>(max_rows), seed);
        return QUXAI_OK;
    });
}

quxai_status quxai_table_binarize_target(quxai_table* table) {
    if (auto s = require(table != nullptr, "null table")) return s;
    return guarded([&] {
        table->table = quxai::binarize_target_at_median(table->table);
        return QUXAI_OK;
    });
}

int quxai_table_n_rows(const quxai_table* table) {
    return table ? static_cast<int>(table->table.n_rows()) : 0;
}

int quxai_table_n_features(const quxai_table* table) {
    return table ? static_cast<int>(table->table.n_features()) : 0;
}

void quxai_table_free(quxai_table* table) { delete table; }

quxai_status quxai_prepare(const quxai_table* table, double test_fraction, uint64_t seed,
                           quxai_prepared** out) {
    if (auto s = require(table && out, "null argument")) return s;
    return guarded([&] {
        auto handle = std::make_unique<quxai_prepared>();
        handle->dataset = quxai::prepare_data(table->table, test_fraction, seed);
        *out = handle.release();
        return QUXAI_OK;
    });
}

int quxai_prepared_n_features(const quxai_prepared* prep) {
    return prep ? static_cast<int>(prep->dataset.x_train.cols()) : 0;
}
int quxai_prepared_n_train(const quxai_prepared* prep) {
    return prep ? static_cast<int>(prep->dataset.x_train.rows()) : 0;
}
int quxai_prepared_n_test(const quxai_prepared* prep) {
    return prep ? static_cast<int>(prep->dataset.x_test.rows()) : 0;
}

const char* quxai_prepared_feature_label(const quxai_prepared* prep, int index) {
    if (!prep || index < 0 ||
        static_cast<std::size_t>(index) >= prep->dataset.feature_labels.size())
        return nullptr;
    return prep->dataset.feature_labels[static_cast<std::size_t>(index)].c_str();
}

void quxai_prepared_free(quxai_prepared* prep) { delete prep; }

quxai_status quxai_train(const quxai_prepared* prep, const char* learner_kind,
                         const char* model_type, uint64_t seed, quxai_model** out) {
    if (auto s = require(prep && learner_kind && model_type && out, "null argument")) return s;
    return guarded([&] {
        const quxai::LearnerKind kind = quxai::learner_kind_from_short_name(learner_kind);
        const quxai::ModelType type = quxai::model_type_from_string(model_type);
        quxai::FeatureMapSpec map;
        map.n_qubits = static_cast<int>(prep->dataset.x_train.cols());
        quxai::Hyperparams hp;
        auto handle = std::make_unique<quxai_model>();
        handle->model = quxai::train_hqml(prep->dataset.x_train, prep->dataset.y_train, kind,
                                          type, map, hp, seed, prep->dataset.feature_labels);
        handle->descriptor = handle->model.descriptor();
        *out = handle.release();
        return QUXAI_OK;
    });
}

quxai_status quxai_model_test_accuracy(const quxai_model* model, const quxai_prepared* prep,
                                       double* out) {
    if (auto s = require(model && prep && out, "null argument")) return s;
    return guarded([&] {
        *out = quxai::score_accuracy(model->model, prep->dataset.x_test, prep->dataset.y_test);
        return QUXAI_OK;
    });
}

const char* quxai_model_descriptor(const quxai_model* model) {
    return model ? model->descriptor.c_str() : nullptr;
}

quxai_status quxai_model_to_json(const quxai_model* model, char** out) {
    if (auto s = require(model && out, "null argument")) return s;
    return guarded([&] {
        *out = copy_string(quxai::model_to_json(model->model).dump(2));
        return QUXAI_OK;
    });
}

quxai_status quxai_model_from_json(const char* json_text, quxai_model** out) {
    if (auto s = require(json_text && out, "null argument")) return s;
    return guarded([&] {
        auto handle = std::make_unique<quxai_model>();
        handle->model = quxai::model_from_json(json::parse(json_text));
        handle->descriptor = handle->model.descriptor();
        *out = handle.release();
        return QUXAI_OK;
    });
}

quxai_status quxai_model_save(const quxai_model* model, const char* path) {
    if (auto s = require(model && path, "null argument")) return s;
    return guarded([&] {
        std::ofstream outf(path);
        if (!outf) quxai::fail_data(std::string("cannot open '") + path + "' for writing");
        outf << quxai::model_to_json(model->model).dump(2) << '\n';
        return QUXAI_OK;
    });
}

quxai_status quxai_model_load(const char* path, quxai_model** out) {
    if (auto s = require(path && out, "null argument")) return s;
    return guarded([&] {
        std::ifstream inf(path);
        if (!inf) quxai::fail_data(std::string("cannot open model file '") + path + "'");
        std::stringstream buf;
        buf << inf.rdbuf();
        auto handle = std::make_unique<quxai_model>();
        handle->model = quxai::model_from_json(json::parse(buf.str()));
        handle->descriptor = handle->model.descriptor();
        *out = handle.release();
        return QUXAI_OK;
    });
}

void quxai_model_free(quxai_model* model) { delete model; }

quxai_status quxai_explain(const quxai_model* model, const quxai_prepared* prep,
                           const char* config_json, quxai_report** out) {
    if (auto s = require(model && prep && out, "null argument")) return s;
    return guarded([&] {
        const quxai::ExplainerConfig cfg =
            quxai::ExplainerConfig::from_json(parse_json_or_empty(config_json));
        auto handle = std::make_unique<quxai_report>();
        handle->report =
            quxai::explain(model->model, prep->dataset.x_train, prep->dataset.y_train, cfg);
        *out = handle.release();
        return QUXAI_OK;
    });
}

quxai_status quxai_report_to_json(const quxai_report* report, char** out) {
    if (auto s = require(report && out, "null argument")) return s;
    return guarded([&] {
        *out = copy_string(report->report.to_json().dump(2));
        return QUXAI_OK;
    });
}

quxai_status quxai_report_from_json(const char* json_text, quxai_report** out) {
    if (auto s = require(json_text && out, "null argument")) return s;
    return guarded([&] {
        auto handle = std::make_unique<quxai_report>();
        handle->report = quxai::ImportanceReport::from_json(json::parse(json_text));
        *out = handle.release();
        return QUXAI_OK;
    });
}

quxai_status quxai_report_render_svg(const quxai_report* report, const char* chart_json,
                                     char** out) {
    if (auto s = require(report && out, "null argument")) return s;
    return guarded([&] {
        const quxai::ChartSpec spec = chart_spec_from_json(parse_json_or_empty(chart_json));
        *out = copy_string(quxai::render_bar_chart(report->report, spec));
        return QUXAI_OK;
    });
}

quxai_status quxai_report_render_text(const quxai_report* report, char** out) {
    if (auto s = require(report && out, "null argument")) return s;
    return guarded([&] {
        *out = copy_string(quxai::render_text_chart(report->report));
        return QUXAI_OK;
    });
}

quxai_status quxai_render_multipanel(const quxai_report* const* reports, int n_reports,
                                     const char* chart_json, char** out) {
    if (auto s = require(reports && out && n_reports > 0, "need at least one report")) return s;
    return guarded([&] {
        std::vector<quxai::ImportanceReport> list;
        for (int i = 0; i < n_reports; ++i) {
            if (!reports[i]) quxai::fail_invalid("null report in multipanel list");
            list.push_back(reports[i]->report);
        }
        const quxai::ChartSpec spec = chart_spec_from_json(parse_json_or_empty(chart_json));
        *out = copy_string(quxai::render_multipanel(list, spec));
        return QUXAI_OK;
    });
}

void quxai_report_free(quxai_report* report) { delete report; }

quxai_status quxai_ablation_run(const char* config_json, quxai_eval** out) {
    if (auto s = require(config_json && out, "null argument")) return s;
    return guarded([&] {
        const EvalRunConfig cfg = parse_eval_config(json::parse(config_json));
        const std::vector<quxai::NamedTable> tables = materialize_tables(cfg);
        quxai::AblationOptions opt;
        opt.test_fraction = cfg.test_fraction;
        opt.repeats_k = cfg.repeats;
        auto handle = std::make_unique<quxai_eval>();
        handle->result = quxai::run_ablation(tables, cfg.seeds, opt);
        if (all_cells_failed(handle->result))
            quxai::fail_compute("ablation: every cell failed; first error: " +
                                handle->result.cells.front().error);
        *out = handle.release();
        return QUXAI_OK;
    });
}

quxai_status quxai_benchmark_run(const char* config_json, quxai_eval** out) {
    if (auto s = require(config_json && out, "null argument")) return s;
    return guarded([&] {
        const EvalRunConfig cfg = parse_eval_config(json::parse(config_json));
        const std::vector<quxai::NamedTable> tables = materialize_tables(cfg);
        std::vector<quxai::LearnerKind> kinds = cfg.models;
        if (kinds.empty()) {
            for (quxai::LearnerKind k : quxai::all_learner_kinds())
                if (k != quxai::LearnerKind::KnnPrecomputed) kinds.push_back(k);
        }
        quxai::BenchmarkOptions opt;
        opt.test_fraction = cfg.test_fraction;
        auto handle = std::make_unique<quxai_eval>();
        handle->result = quxai::run_benchmark(tables, kinds, cfg.seeds, opt);
        if (all_cells_failed(handle->result))
            quxai::fail_compute("benchmark: every cell failed; first error: " +
                                handle->result.cells.front().error);
        *out = handle.release();
        return QUXAI_OK;
    });
}

quxai_status quxai_eval_to_json(const quxai_eval* eval, char** out) {
    if (auto s = require(eval && out, "null argument")) return s;
    return guarded([&] {
        *out = copy_string(eval->result.to_json().dump(2));
        return QUXAI_OK;
    });
}

quxai_status quxai_eval_to_csv(const quxai_eval* eval, char** out) {
    if (auto s = require(eval && out, "null argument")) return s;
    return guarded([&] {
        *out = copy_string(eval->result.to_csv());
        return QUXAI_OK;
    });
}

quxai_status quxai_eval_format_table(const quxai_eval* eval, char** out) {
    if (auto s = require(eval && out, "null argument")) return s;
    return guarded([&] {
        *out = copy_string(eval->result.format_table());
        return QUXAI_OK;
    });
}

double quxai_eval_runtime_seconds(const quxai_eval* eval) {
    return eval ? eval->result.runtime_seconds : 0.0;
}

void quxai_eval_free(quxai_eval* eval) { delete eval; }

} // extern "C"
