// quxai - train, explain, ablate, benchmark and plot hybrid quantum-classical
// models through the libquxai C API.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "quxai.h"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitCompute = 3;

int exit_code_of(quxai_status status) {
    switch (status) {
        case QUXAI_OK: return 0;
        case QUXAI_ERROR_INVALID_ARGUMENT: return kExitUsage;
        case QUXAI_ERROR_DATA: return kExitData;
        case QUXAI_ERROR_COMPUTE: return kExitCompute;
    }
    return kExitCompute;
}

[[noreturn]] void die(quxai_status status) {
    std::cerr << "error: " << quxai_last_error() << "\n";
    std::exit(exit_code_of(status));
}

void check(quxai_status status) {
    if (status != QUXAI_OK) die(status);
}

std::string take_string(char* s) {
    std::string out = s ? s : "";
    quxai_string_free(s);
    return out;
}

// RAII wrappers over the C handles.
template <typename T, void (*Free)(T*)>
struct Handle {
    T* ptr = nullptr;
    Handle() = default;
    explicit Handle(T* p) : ptr(p) {}
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    Handle(Handle&& other) noexcept : ptr(other.ptr) { other.ptr = nullptr; }
    ~Handle() {
        if (ptr) Free(ptr);
    }
    T** out() { return &ptr; }
    T* get() const { return ptr; }
};
using TableHandle = Handle<quxai_table, quxai_table_free>;
using PreparedHandle = Handle<quxai_prepared, quxai_prepared_free>;
using ModelHandle = Handle<quxai_model, quxai_model_free>;
using ReportHandle = Handle<quxai_report, quxai_report_free>;
using EvalHandle = Handle<quxai_eval, quxai_eval_free>;

// All run parameters after merging defaults < config file < flags.
struct RunConfig {
    std::vector<std::string> data;
    std::string target = "target";
    std::string model = "QDT";
    std::string model_type = "amplitude";
    std::string model_file;
    std::vector<std::string> report_files;
    int noise = 0;
    int redundant = 0;
    int max_rows = 0;
    bool binarize_target = false;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> seeds;
    int repeats = 5;
    bool adaptive = false;
    bool interaction_pi = false;
    bool no_chart = false;
    double test_fraction = 0.3;
    std::vector<std::string> models;
    std::string out_dir = ".";
    std::string title;
    int width = 800;
    int threads = 0;

    // The semantic configuration embedded in every output file. Excludes
    // --threads: it only caps workers and never changes results.
    json resolved(const std::string& command) const {
        json j{{"command", command},
               {"data", data},
               {"target", target},
               {"noise", noise},
               {"redundant", redundant},
               {"max_rows", max_rows},
               {"binarize_target", binarize_target},
               {"seed", seed},
               {"test_fraction", test_fraction},
               {"out", out_dir}};
        if (command == "train" || command == "explain") {
            j["model_type"] = model_type;
        }
        if (command == "train") j["model"] = model;
        if (command == "explain") {
            j["model_file"] = model_file;
            j["repeats"] = repeats;
            j["adaptive"] = adaptive;
            j["interaction_pi"] = interaction_pi;
            j["no_chart"] = no_chart;
        }
        if (command == "ablate" || command == "benchmark") {
            j["seeds"] = seeds.empty() ? std::vector<std::uint64_t>{seed} : seeds;
            j["repeats"] = repeats;
        }
        if (command == "benchmark") j["models"] = models;
        if (command == "plot") {
            j["report"] = report_files;
            j["title"] = title;
            j["width"] = width;
        }
        return j;
    }
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        seeds.push_back(std::stoull(item));
    }
    return seeds;
}

std::vector<std::string> parse_name_list(const std::string& text) {
    std::vector<std::string> names;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) names.push_back(item);
    }
    return names;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot write '" << path.string() << "'\n";
        std::exit(kExitData);
    }
    out << content;
}

std::string read_file(const fs::path& path, int exit_code) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot open '" << path.string() << "'\n";
        std::exit(exit_code);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Stamps {tool_version, resolved_config, seed} into a JSON document.
std::string with_provenance(const std::string& json_text, const RunConfig& cfg,
                            const std::string& command) {
    json doc = json::parse(json_text);
    doc["tool_version"] = quxai_version();
    doc["resolved_config"] = cfg.resolved(command);
    doc["seed"] = cfg.seed;
    return doc.dump(2) + "\n";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

// SVG provenance goes into a <desc> element right after the opening tag.
std::string svg_with_provenance(const std::string& svg, const RunConfig& cfg,
                                const std::string& command) {
    json meta{{"tool_version", quxai_version()},
              {"resolved_config", cfg.resolved(command)},
              {"seed", cfg.seed}};
    const std::string desc = "<desc>" + xml_escape(meta.dump()) + "</desc>\n";
    const std::size_t open = svg.find("<svg");
    if (open == std::string::npos) return svg;
    const std::size_t end = svg.find('>', open);
    if (end == std::string::npos) return svg;
    std::string out = svg;
    out.insert(end + 2, desc); // after "...>\n"
    return out;
}

// Datasets pipeline shared by train/explain: load, optional augment, prepare.
PreparedHandle load_and_prepare(const RunConfig& cfg) {
    if (cfg.data.empty()) {
        std::cerr << "error: --data is required\n";
        std::exit(kExitUsage);
    }
    TableHandle table;
    check(quxai_table_load_csv(cfg.data.front().c_str(), cfg.target.c_str(), table.out()));
    if (cfg.binarize_target) check(quxai_table_binarize_target(table.get()));
    if (cfg.max_rows > 0) check(quxai_table_subsample(table.get(), cfg.max_rows, cfg.seed));
    if (cfg.noise > 0 || cfg.redundant > 0)
        check(quxai_table_augment(table.get(), cfg.noise, cfg.redundant, cfg.seed));
    PreparedHandle prep;
    check(quxai_prepare(table.get(), cfg.test_fraction, cfg.seed, prep.out()));
    return prep;
}

json explain_config_json(const RunConfig& cfg) {
    return json{{"repeats", cfg.repeats},
                {"seed", cfg.seed},
                {"adaptive_weighting", cfg.adaptive},
                {"interaction_pi", cfg.interaction_pi}};
}

json eval_config_json(const RunConfig& cfg) {
    json datasets = json::array();
    for (const std::string& path : cfg.data) {
        datasets.push_back({{"name", fs::path(path).stem().string()},
                            {"path", path},
                            {"target", cfg.target}});
    }
    json j{{"datasets", datasets},
           {"noise", cfg.noise},
           {"redundant", cfg.redundant},
           {"max_rows", cfg.max_rows},
           {"binarize_target", cfg.binarize_target},
           {"seeds", cfg.seeds.empty() ? std::vector<std::uint64_t>{cfg.seed} : cfg.seeds},
           {"test_fraction", cfg.test_fraction},
           {"repeats", cfg.repeats}};
    if (!cfg.models.empty()) j["models"] = cfg.models;
    return j;
}

int cmd_train(const RunConfig& cfg) {
    PreparedHandle prep = load_and_prepare(cfg);
    ModelHandle model;
    check(quxai_train(prep.get(), cfg.model.c_str(), cfg.model_type.c_str(), cfg.seed,
                      model.out()));
    double accuracy = 0.0;
    check(quxai_model_test_accuracy(model.get(), prep.get(), &accuracy));
    std::printf("Accuracy for %s: %.4f\n", quxai_model_descriptor(model.get()), accuracy);

    fs::create_directories(cfg.out_dir);
    char* model_json = nullptr;
    check(quxai_model_to_json(model.get(), &model_json));
    const fs::path path = fs::path(cfg.out_dir) / "model.json";
    write_file(path, with_provenance(take_string(model_json), cfg, "train"));
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

int cmd_explain(const RunConfig& cfg) {
    if (cfg.model_file.empty()) {
        std::cerr << "error: --model-file is required\n";
        return kExitUsage;
    }
    ModelHandle model;
    check(quxai_model_load(cfg.model_file.c_str(), model.out()));
    PreparedHandle prep = load_and_prepare(cfg);

    ReportHandle report;
    check(quxai_explain(model.get(), prep.get(), explain_config_json(cfg).dump().c_str(),
                        report.out()));

    fs::create_directories(cfg.out_dir);
    char* report_json = nullptr;
    check(quxai_report_to_json(report.get(), &report_json));
    const fs::path report_path = fs::path(cfg.out_dir) / "report.json";
    write_file(report_path, with_provenance(take_string(report_json), cfg, "explain"));
    std::cout << "wrote " << report_path.string() << "\n";

    if (!cfg.no_chart) {
        json chart{{"width", cfg.width}};
        if (!cfg.title.empty()) chart["title"] = cfg.title;
        char* svg = nullptr;
        check(quxai_report_render_svg(report.get(), chart.dump().c_str(), &svg));
        const fs::path svg_path = fs::path(cfg.out_dir) / "chart.svg";
        write_file(svg_path, svg_with_provenance(take_string(svg), cfg, "explain"));
        std::cout << "wrote " << svg_path.string() << "\n";

        char* text = nullptr;
        check(quxai_report_render_text(report.get(), &text));
        std::cout << take_string(text);
    }
    return 0;
}

int run_eval(const RunConfig& cfg, const std::string& command) {
    EvalHandle eval;
    const std::string config = eval_config_json(cfg).dump();
    if (command == "ablate")
        check(quxai_ablation_run(config.c_str(), eval.out()));
    else
        check(quxai_benchmark_run(config.c_str(), eval.out()));

    fs::create_directories(cfg.out_dir);
    char* out_json = nullptr;
    check(quxai_eval_to_json(eval.get(), &out_json));
    const std::string base = command == "ablate" ? "ablation" : "benchmark";
    const fs::path json_path = fs::path(cfg.out_dir) / (base + ".json");
    write_file(json_path, with_provenance(take_string(out_json), cfg, command));

    char* out_csv = nullptr;
    check(quxai_eval_to_csv(eval.get(), &out_csv));
    const fs::path csv_path = fs::path(cfg.out_dir) / (base + ".csv");
    json meta{{"tool_version", quxai_version()},
              {"resolved_config", cfg.resolved(command)},
              {"seed", cfg.seed}};
    write_file(csv_path, "# " + meta.dump() + "\n" + take_string(out_csv));

    char* table = nullptr;
    check(quxai_eval_format_table(eval.get(), &table));
    std::cout << take_string(table);
    std::fprintf(stderr, "completed in %.2f s\n", quxai_eval_runtime_seconds(eval.get()));
    std::cout << "wrote " << json_path.string() << " and " << csv_path.string() << "\n";
    return 0;
}

int cmd_plot(const RunConfig& cfg) {
    if (cfg.report_files.empty()) {
        std::cerr << "error: --report is required\n";
        return kExitUsage;
    }
    std::vector<ReportHandle> reports;
    for (const std::string& path : cfg.report_files) {
        const std::string text = read_file(path, kExitData);
        ReportHandle r;
        check(quxai_report_from_json(text.c_str(), r.out()));
        reports.push_back(std::move(r));
    }

    fs::create_directories(cfg.out_dir);
    json chart{{"width", cfg.width}};
    if (!cfg.title.empty()) chart["title"] = cfg.title;

    if (reports.size() == 1) {
        char* svg = nullptr;
        check(quxai_report_render_svg(reports[0].get(), chart.dump().c_str(), &svg));
        const fs::path path = fs::path(cfg.out_dir) / "chart.svg";
        write_file(path, svg_with_provenance(take_string(svg), cfg, "plot"));
        char* text = nullptr;
        check(quxai_report_render_text(reports[0].get(), &text));
        std::cout << take_string(text);
        std::cout << "wrote " << path.string() << "\n";
    } else {
        std::vector<const quxai_report*> raw;
        for (const auto& r : reports) raw.push_back(r.get());
        char* svg = nullptr;
        check(quxai_render_multipanel(raw.data(), static_cast<int>(raw.size()),
                                      chart.dump().c_str(), &svg));
        const fs::path path = fs::path(cfg.out_dir) / "panels.svg";
        write_file(path, svg_with_provenance(take_string(svg), cfg, "plot"));
        std::cout << "wrote " << path.string() << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"QuXAI: train and explain hybrid quantum-classical classifiers"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(quxai_version()));

    RunConfig cfg;
    std::string seeds_text, models_text, config_path;

    auto add_shared = [&](CLI::App* sub) {
        sub->add_option("--data", cfg.data, "CSV dataset path (repeatable for grids)");
        sub->add_option("--target", cfg.target, "target column name");
        sub->add_option("--noise", cfg.noise, "synthetic noise columns to append");
        sub->add_option("--redundant", cfg.redundant, "redundant columns to append");
        sub->add_option("--max-rows", cfg.max_rows,
                        "stratified row subsample cap (0 = keep all rows)");
        sub->add_flag("--binarize-target", cfg.binarize_target,
                      "split a numeric target at its median");
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--test-fraction", cfg.test_fraction, "held-out fraction");
        sub->add_option("--out", cfg.out_dir, "output directory");
        sub->add_option("--config", config_path, "JSON config file (flags override)");
        sub->add_option("--threads", cfg.threads, "worker thread cap (0 = all cores)");
    };

    CLI::App* train = app.add_subcommand("train", "train a hybrid model and save it");
    add_shared(train);
    train->add_option("--model", cfg.model, "learner kind (QDT, QRF, ... or decision_tree, ...)");
    train->add_option("--model-type", cfg.model_type, "amplitude or kernel");

    CLI::App* explain = app.add_subcommand("explain", "run Q-MEDLEY on a saved model");
    add_shared(explain);
    explain->add_option("--model-file", cfg.model_file, "saved model JSON");
    explain->add_option("--repeats", cfg.repeats, "permutation repeats K");
    explain->add_flag("--adaptive", cfg.adaptive, "adaptive DCI/PI weighting");
    explain->add_flag("--interaction-pi", cfg.interaction_pi, "interaction-aware PI");
    explain->add_flag("--no-chart", cfg.no_chart, "write the report JSON only");
    explain->add_option("--title", cfg.title, "chart title");
    explain->add_option("--width", cfg.width, "chart width in px");

    CLI::App* ablate = app.add_subcommand("ablate", "explainer component ablation grid");
    add_shared(ablate);
    ablate->add_option("--seeds", seeds_text, "comma-separated seed list");
    ablate->add_option("--repeats", cfg.repeats, "permutation repeats K");

    CLI::App* benchmark = app.add_subcommand("benchmark", "classical vs hybrid model grid");
    add_shared(benchmark);
    benchmark->add_option("--seeds", seeds_text, "comma-separated seed list");
    benchmark->add_option("--models", models_text, "comma-separated model kinds");

    CLI::App* plot = app.add_subcommand("plot", "render saved reports as charts");
    add_shared(plot);
    plot->add_option("--report", cfg.report_files, "report JSON path (repeatable)");
    plot->add_option("--title", cfg.title, "chart title");
    plot->add_option("--width", cfg.width, "chart width in px");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();

    // Config file fills in anything not given on the command line.
    if (!config_path.empty()) {
        json file_cfg;
        try {
            file_cfg = json::parse(read_file(config_path, kExitUsage));
        } catch (const json::exception& e) {
            std::cerr << "error: config file: " << e.what() << "\n";
            return kExitUsage;
        }
        auto absent = [&](const std::string& flag) {
            return sub->count("--" + flag) == 0;
        };
        try {
            if (file_cfg.contains("data") && absent("data")) {
                if (file_cfg["data"].is_array())
                    cfg.data = file_cfg["data"].get<std::vector<std::string>>();
                else
                    cfg.data = {file_cfg["data"].get<std::string>()};
            }
            if (file_cfg.contains("target") && absent("target"))
                cfg.target = file_cfg["target"].get<std::string>();
            if (file_cfg.contains("model") && sub->get_option_no_throw("--model") && absent("model"))
                cfg.model = file_cfg["model"].get<std::string>();
            if (file_cfg.contains("model_type") && sub->get_option_no_throw("--model-type") &&
                sub->count("--model-type") == 0)
                cfg.model_type = file_cfg["model_type"].get<std::string>();
            if (file_cfg.contains("model_file") && sub->get_option_no_throw("--model-file") &&
                sub->count("--model-file") == 0)
                cfg.model_file = file_cfg["model_file"].get<std::string>();
            if (file_cfg.contains("noise") && absent("noise")) cfg.noise = file_cfg["noise"].get<int>();
            if (file_cfg.contains("redundant") && absent("redundant"))
                cfg.redundant = file_cfg["redundant"].get<int>();
            if (file_cfg.contains("max_rows") && absent("max-rows"))
                cfg.max_rows = file_cfg["max_rows"].get<int>();
            if (file_cfg.contains("binarize_target") && absent("binarize-target"))
                cfg.binarize_target = file_cfg["binarize_target"].get<bool>();
            if (file_cfg.contains("seed") && absent("seed"))
                cfg.seed = file_cfg["seed"].get<std::uint64_t>();
            if (file_cfg.contains("seeds") && sub->get_option_no_throw("--seeds") &&
                sub->count("--seeds") == 0)
                cfg.seeds = file_cfg["seeds"].get<std::vector<std::uint64_t>>();
            if (file_cfg.contains("repeats") && sub->get_option_no_throw("--repeats") &&
                sub->count("--repeats") == 0)
                cfg.repeats = file_cfg["repeats"].get<int>();
            if (file_cfg.contains("adaptive") && sub->get_option_no_throw("--adaptive") &&
                sub->count("--adaptive") == 0)
                cfg.adaptive = file_cfg["adaptive"].get<bool>();
            if (file_cfg.contains("interaction_pi") &&
                sub->get_option_no_throw("--interaction-pi") && sub->count("--interaction-pi") == 0)
                cfg.interaction_pi = file_cfg["interaction_pi"].get<bool>();
            if (file_cfg.contains("test_fraction") && absent("test-fraction"))
                cfg.test_fraction = file_cfg["test_fraction"].get<double>();
            if (file_cfg.contains("models") && sub->get_option_no_throw("--models") &&
                sub->count("--models") == 0)
                cfg.models = file_cfg["models"].get<std::vector<std::string>>();
            if (file_cfg.contains("out") && absent("out"))
                cfg.out_dir = file_cfg["out"].get<std::string>();
            if (file_cfg.contains("threads") && absent("threads"))
                cfg.threads = file_cfg["threads"].get<int>();
        } catch (const json::exception& e) {
            std::cerr << "error: config file: " << e.what() << "\n";
            return kExitUsage;
        }
    }
    if (!seeds_text.empty()) {
        try {
            cfg.seeds = parse_seed_list(seeds_text);
        } catch (const std::exception&) {
            std::cerr << "error: --seeds expects comma-separated integers\n";
            return kExitUsage;
        }
    }
    if (!models_text.empty()) cfg.models = parse_name_list(models_text);

    quxai_set_max_threads(cfg.threads);

    if (command == "train") return cmd_train(cfg);
    if (command == "explain") return cmd_explain(cfg);
    if (command == "ablate" || command == "benchmark") return run_eval(cfg, command);
    if (command == "plot") return cmd_plot(cfg);
    std::cerr << "error: unknown command\n";
    return kExitUsage;
}
