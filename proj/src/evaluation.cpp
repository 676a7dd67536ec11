#include "quxai/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "quxai/rng.hpp"

namespace quxai {

namespace {

std::vector<std::size_t> top_k_indices(const std::vector<double>& scores, int k) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    order.resize(static_cast<std::size_t>(k));
    return order;
}

std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        // 1-based ranks i+1..j+1 share the fractional average.
        const double avg = 0.5 * static_cast<double>(i + 1 + j + 1);
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
    double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    if (va <= 0.0 || vb <= 0.0) return 0.0;
    return cov / std::sqrt(va * vb);
}

} // namespace

double recall_at_k(const std::vector<double>& truth_scores,
                   const std::vector<double>& candidate_scores, int k) {
    if (truth_scores.size() != candidate_scores.size())
        fail_invalid("recall_at_k: score vectors differ in length");
    if (k < 1) fail_invalid("recall_at_k: k must be >= 1");
    if (static_cast<std::size_t>(k) > truth_scores.size())
        fail_invalid("recall_at_k: k exceeds the number of features");

    const auto truth_top = top_k_indices(truth_scores, k);
    const auto cand_top = top_k_indices(candidate_scores, k);
    const std::set<std::size_t> truth_set(truth_top.begin(), truth_top.end());
    std::size_t hits = 0;
    for (std::size_t idx : cand_top)
        if (truth_set.count(idx)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(k);
}

double spearman_rank_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) fail_invalid("spearman: vectors differ in length");
    if (a.size() < 2) fail_invalid("spearman: need at least 2 entries");
    return pearson(average_ranks(a), average_ranks(b));
}

ClassificationMetrics classification_metrics(const std::vector<int>& y_true,
                                             const std::vector<int>& y_pred) {
    if (y_true.empty()) fail_invalid("classification_metrics: empty input");
    if (y_true.size() != y_pred.size())
        fail_invalid("classification_metrics: length mismatch");

    const std::set<int> classes(y_true.begin(), y_true.end());
    ClassificationMetrics out;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i)
        if (y_true[i] == y_pred[i]) ++correct;
    out.accuracy = static_cast<double>(correct) / static_cast<double>(y_true.size());

    double precision_sum = 0.0, recall_sum = 0.0, f1_sum = 0.0;
    for (int c : classes) {
        double tp = 0.0, fp = 0.0, fn = 0.0;
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            if (y_pred[i] == c && y_true[i] == c) tp += 1.0;
            if (y_pred[i] == c && y_true[i] != c) fp += 1.0;
            if (y_pred[i] != c && y_true[i] == c) fn += 1.0;
        }
        const double precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
        const double recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
        const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall)
                                                   : 0.0;
        precision_sum += precision;
        recall_sum += recall;
        f1_sum += f1;
    }
    const double n_classes = static_cast<double>(classes.size());
    out.precision_macro = precision_sum / n_classes;
    out.recall_macro = recall_sum / n_classes;
    out.f1_macro = f1_sum / n_classes;
    return out;
}

namespace {

struct AblationConfigSpec {
    std::string name;
    bool adaptive = false;
    bool interaction = false;
};

const std::vector<AblationConfigSpec> kAblationConfigs = {
    {"baseline", false, false},
    {"adaptive", true, false},
    {"interaction", false, true},
    {"adaptive+interaction", true, true},
};

} // namespace

EvalResult run_ablation(const std::vector<NamedTable>& datasets,
                        const std::vector<std::uint64_t>& seeds, const AblationOptions& opt) {
    if (datasets.empty()) fail_invalid("run_ablation: no datasets");
    if (seeds.empty()) fail_invalid("run_ablation: no seeds");

    const auto t0 = std::chrono::steady_clock::now();
    EvalResult result;
    result.kind = "ablation";
    result.seeds = seeds;

    const std::vector<LearnerKind> truth_kinds = {LearnerKind::DecisionTree,
                                                  LearnerKind::RandomForest};
    for (const NamedTable& ds : datasets) {
        for (LearnerKind truth_kind : truth_kinds) {
            // recall per config per seed; one pass per seed covers all configs.
            std::vector<std::vector<double>> recalls(kAblationConfigs.size());
            std::string first_error;
            for (std::uint64_t seed : seeds) {
                try {
                    const PreparedDataset prep = prepare_data(ds.table, opt.test_fraction, seed);
                    if (prep.x_train.cols() < 4)
                        fail_data("ablation needs at least 4 features");
                    Hyperparams hp;
                    const TrainedLearner truth_model =
                        fit_learner(truth_kind, prep.x_train, prep.y_train, hp, seed);
                    const std::vector<double> truth = intrinsic_importances(truth_model);
                    const IdentityExplainable target(truth_model);
                    for (std::size_t ci = 0; ci < kAblationConfigs.size(); ++ci) {
                        ExplainerConfig cfg;
                        cfg.repeats_k = opt.repeats_k;
                        cfg.seed = seed;
                        cfg.adaptive_weighting = kAblationConfigs[ci].adaptive;
                        cfg.interaction_pi = kAblationConfigs[ci].interaction;
                        const ImportanceReport report =
                            explain(target, prep.x_train, prep.y_train, cfg);
                        recalls[ci].push_back(recall_at_k(truth, report.final_scores, 3));
                    }
                } catch (const std::exception& e) {
                    if (first_error.empty()) first_error = e.what();
                }
            }
            for (std::size_t ci = 0; ci < kAblationConfigs.size(); ++ci) {
                EvalCell cell;
                cell.dataset = ds.name;
                cell.model = truth_kind == LearnerKind::DecisionTree ? "DT" : "RF";
                cell.config = kAblationConfigs[ci].name;
                if (recalls[ci].empty()) {
                    cell.failed = true;
                    cell.error = first_error.empty() ? "no seed completed" : first_error;
                } else {
                    const double mean =
                        std::accumulate(recalls[ci].begin(), recalls[ci].end(), 0.0) /
                        static_cast<double>(recalls[ci].size());
                    cell.metrics["mean_recall_at_3"] = mean;
                    cell.per_seed["recall_at_3"] = recalls[ci];
                }
                result.cells.push_back(std::move(cell));
            }
        }
    }
    result.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

EvalResult run_benchmark(const std::vector<NamedTable>& datasets,
                         const std::vector<LearnerKind>& model_kinds,
                         const std::vector<std::uint64_t>& seeds, const BenchmarkOptions& opt) {
    if (datasets.empty()) fail_invalid("run_benchmark: no datasets");
    if (model_kinds.empty()) fail_invalid("run_benchmark: no model kinds");
    if (seeds.empty()) fail_invalid("run_benchmark: no seeds");

    const auto t0 = std::chrono::steady_clock::now();
    EvalResult result;
    result.kind = "benchmark";
    result.seeds = seeds;

    const std::vector<std::pair<std::string, double ClassificationMetrics::*>> metric_fields = {
        {"accuracy", &ClassificationMetrics::accuracy},
        {"f1_macro", &ClassificationMetrics::f1_macro},
        {"precision_macro", &ClassificationMetrics::precision_macro},
        {"recall_macro", &ClassificationMetrics::recall_macro},
    };

    for (const NamedTable& ds : datasets) {
        for (LearnerKind kind : model_kinds) {
            if (kind == LearnerKind::KnnPrecomputed) continue; // no amplitude twin
            EvalCell cell;
            cell.dataset = ds.name;
            cell.model = short_name(kind);
            cell.config = "classical_vs_quxai";
            std::map<std::string, std::vector<double>> per_seed;
            std::string first_error;
            for (std::uint64_t seed : seeds) {
                try {
                    const PreparedDataset prep = prepare_data(ds.table, opt.test_fraction, seed);
                    Hyperparams hp;
                    const TrainedLearner classical =
                        fit_learner(kind, prep.x_train, prep.y_train, hp, seed);
                    const ClassificationMetrics cm =
                        classification_metrics(prep.y_test, classical.predict(prep.x_test));

                    FeatureMapSpec map;
                    map.n_qubits = static_cast<int>(prep.x_train.cols());
                    const HQMLModel hybrid =
                        train_hqml(prep.x_train, prep.y_train, kind, ModelType::AmplitudeBased, map,
                                   hp, seed, prep.feature_labels);
                    const ClassificationMetrics qm =
                        classification_metrics(prep.y_test, predict_adapted(hybrid, prep.x_test));

                    for (const auto& [name, field] : metric_fields) {
                        per_seed["classical_" + name].push_back(cm.*field);
                        per_seed["quxai_" + name].push_back(qm.*field);
                    }
                } catch (const std::exception& e) {
                    if (first_error.empty()) first_error = e.what();
                }
            }
            if (per_seed.empty()) {
                cell.failed = true;
                cell.error = first_error.empty() ? "no seed completed" : first_error;
            } else {
                for (const auto& [name, values] : per_seed) {
                    cell.metrics[name] = std::accumulate(values.begin(), values.end(), 0.0) /
                                         static_cast<double>(values.size());
                }
                cell.per_seed = per_seed;
            }
            result.cells.push_back(std::move(cell));
        }
    }
    result.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

BaselineMethod baseline_method_from_string(const std::string& name) {
    if (name == "dci" || name == "dci_only") return BaselineMethod::DciOnly;
    if (name == "pi" || name == "pi_only") return BaselineMethod::PiOnly;
    if (name == "logreg_l1") return BaselineMethod::LogRegL1;
    fail_invalid("unknown baseline method '" + name + "'; expected dci, pi or logreg_l1");
}

std::vector<double> baseline_importances(BaselineMethod method, const Explainable& m,
                                         const Matrix& x_ref, const std::vector<int>& y_ref,
                                         const ExplainerConfig& cfg) {
    switch (method) {
        case BaselineMethod::DciOnly:
            return dci_scores(m, x_ref, y_ref, cfg);
        case BaselineMethod::PiOnly:
            return pi_scores(m, x_ref, y_ref, cfg);
        case BaselineMethod::LogRegL1:
            return baseline_importances_logreg_l1(x_ref, y_ref);
    }
    fail_invalid("unsupported baseline method");
}

std::vector<double> baseline_importances_logreg_l1(const Matrix& x, const std::vector<int>& y) {
    Hyperparams hp;
    hp.logreg_l1_mode = true;
    const TrainedLearner model = fit_learner(LearnerKind::LogisticRegression, x, y, hp, 0);
    const Matrix coef = logistic_coefficients(model);
    std::vector<double> out(x.cols(), 0.0);
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < coef.rows(); ++c) s += std::fabs(coef(c, j));
        out[j] = s / static_cast<double>(coef.rows());
    }
    return out;
}

ExternalScores import_external_scores(const nlohmann::json& j) {
    ExternalScores s;
    s.feature_labels = j.at("feature_labels").get<std::vector<std::string>>();
    s.scores = j.at("scores").get<std::vector<double>>();
    if (s.feature_labels.size() != s.scores.size())
        fail_data("external scores: labels and scores differ in length");
    return s;
}

nlohmann::json EvalResult::to_json() const {
    nlohmann::json jcells = nlohmann::json::array();
    for (const EvalCell& c : cells) {
        nlohmann::json jc{{"dataset", c.dataset},
                          {"model", c.model},
                          {"config", c.config},
                          {"failed", c.failed}};
        if (c.failed) {
            jc["error"] = c.error;
        } else {
            jc["metrics"] = c.metrics;
            jc["per_seed"] = c.per_seed;
        }
        jcells.push_back(std::move(jc));
    }
    return {{"kind", kind}, {"seeds", seeds}, {"cells", jcells}};
}

std::string EvalResult::to_csv() const {
    // Column union over all cells, sorted, for a stable schema.
    std::set<std::string> metric_names;
    for (const EvalCell& c : cells)
        for (const auto& [name, value] : c.metrics) metric_names.insert(name);

    std::ostringstream out;
    out << "dataset,model,config,failed,error";
    for (const std::string& name : metric_names) out << ',' << name;
    out << '\n';
    out.precision(17);
    for (const EvalCell& c : cells) {
        out << c.dataset << ',' << c.model << ',' << c.config << ',' << (c.failed ? 1 : 0) << ','
            << c.error;
        for (const std::string& name : metric_names) {
            out << ',';
            const auto it = c.metrics.find(name);
            if (it != c.metrics.end()) out << it->second;
        }
        out << '\n';
    }
    return out.str();
}

std::string EvalResult::format_table() const {
    std::set<std::string> metric_names;
    for (const EvalCell& c : cells)
        for (const auto& [name, value] : c.metrics) metric_names.insert(name);

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header = {"dataset", "model", "config"};
    for (const std::string& name : metric_names) header.push_back(name);
    rows.push_back(header);
    for (const EvalCell& c : cells) {
        std::vector<std::string> row = {c.dataset, c.model, c.config};
        for (const std::string& name : metric_names) {
            const auto it = c.metrics.find(name);
            if (c.failed) {
                row.push_back("FAILED");
            } else if (it == c.metrics.end()) {
                row.push_back("-");
            } else {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.4f", it->second);
                row.push_back(buf);
            }
        }
        rows.push_back(std::move(row));
    }

    std::vector<std::size_t> widths(rows[0].size(), 0);
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());

    std::ostringstream out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            out << rows[r][c];
            if (c + 1 < rows[r].size())
                out << std::string(widths[c] - rows[r][c].size() + 2, ' ');
        }
        out << '\n';
        if (r == 0) {
            std::size_t total = 0;
            for (std::size_t c = 0; c < widths.size(); ++c)
                total += widths[c] + (c + 1 < widths.size() ? 2 : 0);
            out << std::string(total, '-') << '\n';
        }
    }
    return out.str();
}

} // namespace quxai
