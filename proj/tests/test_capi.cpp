// Exercises the shared-library surface the way an external client would:
// opaque handles, status codes, JSON strings.
#include "doctest.h"

#include <cstdio>
#include <string>

#include "json.hpp"
#include "quxai.h"

namespace {

const std::string kIrisPath = std::string(QUXAI_DATA_DIR) + "/iris.csv";

std::string take(char* s) {
    std::string out = s ? s : "";
    quxai_string_free(s);
    return out;
}

} // namespace

TEST_CASE("version and error strings are always available") {
    CHECK(std::string(quxai_version()) == "1.0.0");
    CHECK(quxai_last_error() != nullptr);
}

TEST_CASE("table lifecycle: load, augment, inspect") {
    quxai_table* table = nullptr;
    REQUIRE(quxai_table_load_csv(kIrisPath.c_str(), "target", &table) == QUXAI_OK);
    CHECK(quxai_table_n_rows(table) == 150);
    CHECK(quxai_table_n_features(table) == 4);

    REQUIRE(quxai_table_augment(table, 2, 2, 7) == QUXAI_OK);
    CHECK(quxai_table_n_features(table) == 8);
    quxai_table_free(table);
}

TEST_CASE("load failures produce a data status and a message") {
    quxai_table* table = nullptr;
    CHECK(quxai_table_load_csv("/no/such/file.csv", "target", &table) == QUXAI_ERROR_DATA);
    CHECK(std::string(quxai_last_error()).find("file") != std::string::npos);

    CHECK(quxai_table_load_csv(kIrisPath.c_str(), "missing_col", &table) == QUXAI_ERROR_DATA);
    CHECK(std::string(quxai_last_error()).find("missing_col") != std::string::npos);

    CHECK(quxai_table_load_csv(nullptr, "x", &table) == QUXAI_ERROR_INVALID_ARGUMENT);
}

TEST_CASE("end-to-end: prepare, train, score, explain, render") {
    quxai_table* table = nullptr;
    REQUIRE(quxai_table_load_csv(kIrisPath.c_str(), "target", &table) == QUXAI_OK);
    REQUIRE(quxai_table_augment(table, 2, 2, 7) == QUXAI_OK);

    quxai_prepared* prep = nullptr;
    REQUIRE(quxai_prepare(table, 0.3, 7, &prep) == QUXAI_OK);
    quxai_table_free(table);
    CHECK(quxai_prepared_n_features(prep) == 8);
    CHECK(quxai_prepared_n_train(prep) + quxai_prepared_n_test(prep) == 150);
    CHECK(std::string(quxai_prepared_feature_label(prep, 4)) == "noise_0");
    CHECK(quxai_prepared_feature_label(prep, 99) == nullptr);

    quxai_model* model = nullptr;
    REQUIRE(quxai_train(prep, "QDT", "amplitude", 7, &model) == QUXAI_OK);
    CHECK(std::string(quxai_model_descriptor(model)) == "QDT (amplitude)");

    double accuracy = 0.0;
    REQUIRE(quxai_model_test_accuracy(model, prep, &accuracy) == QUXAI_OK);
    CHECK(accuracy > 0.5);

    quxai_report* report = nullptr;
    REQUIRE(quxai_explain(model, prep, R"({"repeats":5,"seed":7})", &report) == QUXAI_OK);

    const std::string report_json = take([&] {
        char* s = nullptr;
        REQUIRE(quxai_report_to_json(report, &s) == QUXAI_OK);
        return s;
    }());
    const auto parsed = nlohmann::json::parse(report_json);
    CHECK(parsed.at("final").size() == 8);
    CHECK(parsed.at("baseline_accuracy").get<double>() == 1.0);

    const std::string svg = take([&] {
        char* s = nullptr;
        REQUIRE(quxai_report_render_svg(report, nullptr, &s) == QUXAI_OK);
        return s;
    }());
    CHECK(svg.rfind("<?xml", 0) == 0);

    const std::string text = take([&] {
        char* s = nullptr;
        REQUIRE(quxai_report_render_text(report, &s) == QUXAI_OK);
        return s;
    }());
    CHECK(text.find("noise_0") != std::string::npos);

    // report JSON round-trip through the C surface
    quxai_report* restored = nullptr;
    REQUIRE(quxai_report_from_json(report_json.c_str(), &restored) == QUXAI_OK);
    const std::string again = take([&] {
        char* s = nullptr;
        REQUIRE(quxai_report_to_json(restored, &s) == QUXAI_OK);
        return s;
    }());
    CHECK(again == report_json);

    quxai_report_free(restored);
    quxai_report_free(report);
    quxai_model_free(model);
    quxai_prepared_free(prep);
}

TEST_CASE("model persistence round-trips predictions through save/load") {
    quxai_table* table = nullptr;
    REQUIRE(quxai_table_load_csv(kIrisPath.c_str(), "target", &table) == QUXAI_OK);
    quxai_prepared* prep = nullptr;
    REQUIRE(quxai_prepare(table, 0.3, 3, &prep) == QUXAI_OK);
    quxai_table_free(table);

    quxai_model* model = nullptr;
    REQUIRE(quxai_train(prep, "QRF", "amplitude", 3, &model) == QUXAI_OK);
    double acc_before = 0.0;
    REQUIRE(quxai_model_test_accuracy(model, prep, &acc_before) == QUXAI_OK);

    const char* path = "/tmp/quxai_capi_model.json";
    REQUIRE(quxai_model_save(model, path) == QUXAI_OK);
    quxai_model* loaded = nullptr;
    REQUIRE(quxai_model_load(path, &loaded) == QUXAI_OK);
    double acc_after = 0.0;
    REQUIRE(quxai_model_test_accuracy(loaded, prep, &acc_after) == QUXAI_OK);
    CHECK(acc_before == acc_after);

    std::remove(path);
    quxai_model_free(loaded);
    quxai_model_free(model);
    quxai_prepared_free(prep);
}

TEST_CASE("train maps bad inputs to the right statuses") {
    quxai_table* table = nullptr;
    REQUIRE(quxai_table_load_csv(kIrisPath.c_str(), "target", &table) == QUXAI_OK);
    quxai_prepared* prep = nullptr;
    REQUIRE(quxai_prepare(table, 0.3, 1, &prep) == QUXAI_OK);
    quxai_table_free(table);

    quxai_model* model = nullptr;
    CHECK(quxai_train(prep, "QBogus", "amplitude", 1, &model) == QUXAI_ERROR_INVALID_ARGUMENT);
    CHECK(std::string(quxai_last_error()).find("valid kinds") != std::string::npos);
    CHECK(quxai_train(prep, "QDT", "nonsense", 1, &model) == QUXAI_ERROR_INVALID_ARGUMENT);
    quxai_prepared_free(prep);
}

TEST_CASE("qubit cap violation surfaces as a data error") {
    // Wine has 13 features; +4 synthetic exceeds the 16-qubit amplitude cap.
    const std::string wine = std::string(QUXAI_DATA_DIR) + "/wine.csv";
    quxai_table* table = nullptr;
    REQUIRE(quxai_table_load_csv(wine.c_str(), "target", &table) == QUXAI_OK);
    REQUIRE(quxai_table_augment(table, 2, 2, 1) == QUXAI_OK);
    quxai_prepared* prep = nullptr;
    REQUIRE(quxai_prepare(table, 0.3, 1, &prep) == QUXAI_OK);
    quxai_table_free(table);

    quxai_model* model = nullptr;
    CHECK(quxai_train(prep, "QDT", "amplitude", 1, &model) == QUXAI_ERROR_DATA);
    CHECK(std::string(quxai_last_error()).find("qubit cap") != std::string::npos);
    quxai_prepared_free(prep);
}

TEST_CASE("multipanel renders through the C surface") {
    quxai_table* table = nullptr;
    REQUIRE(quxai_table_load_csv(kIrisPath.c_str(), "target", &table) == QUXAI_OK);
    quxai_prepared* prep = nullptr;
    REQUIRE(quxai_prepare(table, 0.3, 2, &prep) == QUXAI_OK);
    quxai_table_free(table);

    quxai_model* m1 = nullptr;
    quxai_model* m2 = nullptr;
    REQUIRE(quxai_train(prep, "QDT", "amplitude", 2, &m1) == QUXAI_OK);
    REQUIRE(quxai_train(prep, "QNB", "amplitude", 2, &m2) == QUXAI_OK);
    quxai_report* r1 = nullptr;
    quxai_report* r2 = nullptr;
    REQUIRE(quxai_explain(m1, prep, nullptr, &r1) == QUXAI_OK);
    REQUIRE(quxai_explain(m2, prep, nullptr, &r2) == QUXAI_OK);

    const quxai_report* reports[] = {r1, r2};
    char* svg = nullptr;
    REQUIRE(quxai_render_multipanel(reports, 2, R"({"width":400})", &svg) == QUXAI_OK);
    const std::string doc = take(svg);
    CHECK(doc.find("QDT (amplitude)") != std::string::npos);
    CHECK(doc.find("QNB (amplitude)") != std::string::npos);

    quxai_report_free(r1);
    quxai_report_free(r2);
    quxai_model_free(m1);
    quxai_model_free(m2);
    quxai_prepared_free(prep);
}

TEST_CASE("kernel model trains and explains through the C surface") {
    quxai_table* table = nullptr;
    REQUIRE(quxai_table_load_csv(kIrisPath.c_str(), "target", &table) == QUXAI_OK);
    quxai_prepared* prep = nullptr;
    REQUIRE(quxai_prepare(table, 0.3, 5, &prep) == QUXAI_OK);
    quxai_table_free(table);

    quxai_model* model = nullptr;
    REQUIRE(quxai_train(prep, "knn_precomputed", "kernel", 5, &model) == QUXAI_OK);
    double accuracy = 0.0;
    REQUIRE(quxai_model_test_accuracy(model, prep, &accuracy) == QUXAI_OK);
    CHECK(accuracy > 0.5);

    quxai_report* report = nullptr;
    REQUIRE(quxai_explain(model, prep, R"({"repeats":3,"seed":5})", &report) == QUXAI_OK);
    quxai_report_free(report);
    quxai_model_free(model);
    quxai_prepared_free(prep);
}

TEST_CASE("benchmark harness runs from a JSON config") {
    nlohmann::json config{
        {"datasets",
         {{{"name", "iris"}, {"path", kIrisPath}, {"target", "target"}}}},
        {"noise", 2},
        {"redundant", 2},
        {"seeds", {1, 2}},
        {"models", {"QDT", "QNB"}},
    };
    quxai_eval* eval = nullptr;
    REQUIRE(quxai_benchmark_run(config.dump().c_str(), &eval) == QUXAI_OK);

    const std::string json_text = take([&] {
        char* s = nullptr;
        REQUIRE(quxai_eval_to_json(eval, &s) == QUXAI_OK);
        return s;
    }());
    const auto parsed = nlohmann::json::parse(json_text);
    CHECK(parsed.at("cells").size() == 2);
    CHECK(parsed.at("kind") == "benchmark");

    const std::string csv = take([&] {
        char* s = nullptr;
        REQUIRE(quxai_eval_to_csv(eval, &s) == QUXAI_OK);
        return s;
    }());
    CHECK(csv.rfind("dataset,model,config", 0) == 0);

    const std::string tbl = take([&] {
        char* s = nullptr;
        REQUIRE(quxai_eval_format_table(eval, &s) == QUXAI_OK);
        return s;
    }());
    CHECK(tbl.find("iris") != std::string::npos);
    CHECK(quxai_eval_runtime_seconds(eval) > 0.0);
    quxai_eval_free(eval);
}

TEST_CASE("ablation harness runs from a JSON config") {
    nlohmann::json config{
        {"datasets",
         {{{"name", "iris"}, {"path", kIrisPath}, {"target", "target"}}}},
        {"noise", 2},
        {"redundant", 2},
        {"seeds", {1}},
        {"repeats", 3},
    };
    quxai_eval* eval = nullptr;
    REQUIRE(quxai_ablation_run(config.dump().c_str(), &eval) == QUXAI_OK);
    const std::string json_text = take([&] {
        char* s = nullptr;
        REQUIRE(quxai_eval_to_json(eval, &s) == QUXAI_OK);
        return s;
    }());
    const auto parsed = nlohmann::json::parse(json_text);
    CHECK(parsed.at("cells").size() == 8); // 1 dataset x {DT,RF} x 4 configs
    quxai_eval_free(eval);

    CHECK(quxai_ablation_run("{\"datasets\":[]}", &eval) == QUXAI_ERROR_INVALID_ARGUMENT);
    CHECK(quxai_ablation_run("not json", &eval) == QUXAI_ERROR_DATA);
}

TEST_CASE("thread cap does not change results") {
    quxai_table* table = nullptr;
    REQUIRE(quxai_table_load_csv(kIrisPath.c_str(), "target", &table) == QUXAI_OK);
    quxai_prepared* prep = nullptr;
    REQUIRE(quxai_prepare(table, 0.3, 9, &prep) == QUXAI_OK);
    quxai_table_free(table);

    std::string reports[2];
    int idx = 0;
    for (int threads : {1, 4}) {
        quxai_set_max_threads(threads);
        quxai_model* model = nullptr;
        REQUIRE(quxai_train(prep, "QRF", "amplitude", 9, &model) == QUXAI_OK);
        quxai_report* report = nullptr;
        REQUIRE(quxai_explain(model, prep, R"({"repeats":5,"seed":9})", &report) == QUXAI_OK);
        char* s = nullptr;
        REQUIRE(quxai_report_to_json(report, &s) == QUXAI_OK);
        reports[idx++] = take(s);
        quxai_report_free(report);
        quxai_model_free(model);
    }
    quxai_set_max_threads(0);
    CHECK(reports[0] == reports[1]);
    quxai_prepared_free(prep);
}
