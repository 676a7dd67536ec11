#pragma once

#include <map>
#include <string>
#include <vector>

#include "quxai/datasets.hpp"
#include "quxai/qmedley.hpp"

#include "json.hpp"

namespace quxai {

/// |top-k(truth) ∩ top-k(candidate)| / k, top-k by descending score with
/// ties broken by ascending feature index.
double recall_at_k(const std::vector<double>& truth_scores,
                   const std::vector<double>& candidate_scores, int k);

/// Pearson correlation of average (tie-fractional) ranks. Returns 0 when
/// either vector is constant.
double spearman_rank_correlation(const std::vector<double>& a, const std::vector<double>& b);

struct ClassificationMetrics {
    double accuracy = 0.0;
    double f1_macro = 0.0;
    double precision_macro = 0.0;
    double recall_macro = 0.0;
};

/// Macro metrics average per-class scores over classes present in y_true;
/// 0/0 ratios count as 0.
ClassificationMetrics classification_metrics(const std::vector<int>& y_true,
                                             const std::vector<int>& y_pred);

/// One grid entry of an ablation or benchmark run. Cells that fail keep the
/// run alive and carry the reason instead of metrics.
struct EvalCell {
    std::string dataset;
    std::string model;
    std::string config;
    std::map<std::string, double> metrics;
    std::map<std::string, std::vector<double>> per_seed;
    bool failed = false;
    std::string error;
};

struct EvalResult {
    std::string kind; // "ablation" or "benchmark"
    std::vector<std::uint64_t> seeds;
    std::vector<EvalCell> cells;
    // Wall-clock seconds for the whole run. Reported on the console only;
    // serialized outputs stay byte-identical across reruns.
    double runtime_seconds = 0.0;

    nlohmann::json to_json() const;
    std::string to_csv() const;
    std::string format_table() const;
};

struct NamedTable {
    std::string name;
    RawTable table;
};

struct AblationOptions {
    double test_fraction = 0.3;
    int repeats_k = 5;
};

/// Ablation grid over datasets x {DT, RF} ground-truth models x the four
/// explainer configurations. Ground truth is the classical model's Gini
/// importances; the explainer runs through the identity encoding path on the
/// training split. Records mean Recall@3 over seeds.
EvalResult run_ablation(const std::vector<NamedTable>& datasets,
                        const std::vector<std::uint64_t>& seeds,
                        const AblationOptions& opt = {});

struct BenchmarkOptions {
    double test_fraction = 0.3;
};

/// Benchmark grid over datasets x learner kinds: the classical learner on
/// raw scaled features next to its amplitude-encoded hybrid twin, all four
/// metrics each, averaged over seeds.
EvalResult run_benchmark(const std::vector<NamedTable>& datasets,
                         const std::vector<LearnerKind>& model_kinds,
                         const std::vector<std::uint64_t>& seeds,
                         const BenchmarkOptions& opt = {});

enum class BaselineMethod { DciOnly, PiOnly, LogRegL1 };

BaselineMethod baseline_method_from_string(const std::string& name);

/// Single-method importance baselines. DCI-only and PI-only reuse the
/// explainer components; LogRegL1 is the mean absolute L1-logistic
/// coefficient per feature across classes, fit on the raw scaled features.
std::vector<double> baseline_importances(BaselineMethod method, const Explainable& m,
                                         const Matrix& x_ref, const std::vector<int>& y_ref,
                                         const ExplainerConfig& cfg);
std::vector<double> baseline_importances_logreg_l1(const Matrix& x, const std::vector<int>& y);

/// Scores produced by an external explainer, imported from JSON
/// ({feature_labels, scores[]}).
struct ExternalScores {
    std::vector<std::string> feature_labels;
    std::vector<double> scores;
};
ExternalScores import_external_scores(const nlohmann::json& j);

} // namespace quxai
