#pragma once

#include <cstdint>
#include <vector>

#include "quxai/matrix.hpp"
#include "quxai/rng.hpp"

#include "json.hpp"

namespace quxai::tree {

struct Node {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;      // classification leaf: class index
    double value = 0.0; // regression leaf: mean target
};

enum class Criterion { gini, mse };

struct TreeOptions {
    Criterion criterion = Criterion::gini;
    int max_depth = -1; // -1 = unbounded
    int min_samples_split = 2;
    // 0 = consider every feature; otherwise sample this many per node.
    int features_per_split = 0;
    // ExtraTrees-style uniform-random thresholds instead of exhaustive search.
    bool random_thresholds = false;
};

/// A single fitted CART tree. Classification trees predict class indices in
/// [0, n_classes); regression trees predict leaf means.
struct Tree {
    std::vector<Node> nodes;
    int n_features = 0;
    int n_classes = 0; // 0 for regression
    // Total weighted impurity decrease per feature (unnormalized).
    std::vector<double> importance;

    int predict_index(std::span<const double> row) const;
    double predict_value(std::span<const double> row) const;

    std::vector<int> features_used() const;

    nlohmann::json to_json() const;
    static Tree from_json(const nlohmann::json& j);
};

/// Fits a classification tree on class indices y in [0, n_classes) with
/// per-sample weights. Split ties resolve to the lowest feature index, then
/// the lowest threshold.
Tree fit_classification_tree(const Matrix& x, const std::vector<int>& y, int n_classes,
                             const std::vector<double>& weights, const TreeOptions& opt,
                             Rng& rng);

/// Fits a regression tree on real targets (variance-reduction splits).
Tree fit_regression_tree(const Matrix& x, const std::vector<double>& y,
                         const TreeOptions& opt, Rng& rng);

} // namespace quxai::tree
