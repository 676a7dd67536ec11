#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "quxai/matrix.hpp"

#include "json.hpp"

namespace quxai {

/// The ten classical model families plus the precomputed-distance kNN used
/// by the kernel path.
enum class LearnerKind {
    DecisionTree,
    RandomForest,
    ExtraTrees,
    GradientBoosting,
    AdaBoost,
    Lda,
    LogisticRegression,
    GaussianNb,
    Perceptron,
    RidgeClassifier,
    KnnPrecomputed,
};

std::string to_string(LearnerKind kind);
LearnerKind learner_kind_from_string(const std::string& name);
std::vector<LearnerKind> all_learner_kinds();

/// Compact display name (QDT, QRF, ...) used in descriptors and tables.
std::string short_name(LearnerKind kind);
LearnerKind learner_kind_from_short_name(const std::string& name);

/// Training knobs. Fields are grouped by the learners that read them; the
/// defaults are the documented reproducible configuration.
struct Hyperparams {
    // trees
    int max_depth = -1; // -1 = unbounded
    int min_samples_split = 2;
    // forests
    int n_trees = 50;
    int features_per_split = 0; // 0 -> floor(sqrt(p)), min 1
    bool bootstrap = true;      // ExtraTrees always fit without bootstrap
    // boosting (AdaBoost rounds an GradientBoosting rounds share the count)
    int boost_rounds = 50;
    double boost_learning_rate = 0.1;
    int gb_tree_depth = 3;
    // logistic regression (full-batch softmax gradient descent)
    double logreg_learning_rate = 0.1;
    int logreg_iterations = 500;
    double logreg_l2 = 1e-4;
    bool logreg_l1_mode = false; // proximal soft-threshold instead of L2
    double logreg_l1 = 0.01;
    // ridge classifier
    double ridge_lambda = 1.0;
    // lda
    double lda_epsilon = 1e-6;
    // perceptron
    int perceptron_epochs = 100;
    double perceptron_learning_rate = 1.0;
    // gaussian naive bayes
    double nb_variance_floor = 1e-9;
    // kNN on a precomputed distance matrix
    int knn_k = 5;

    void validate() const;
};

namespace detail {
class LearnerModel; // internal polymorphic implementation
}

/// A fitted classical learner. Value type with cheap copies; fitted state is
/// immutable, so concurrent prediction needs no coordination.
class TrainedLearner {
public:
    TrainedLearner() = default;

    LearnerKind kind() const;
    const std::vector<int>& classes() const;
    std::uint64_t seed() const;
    std::size_t n_features() const;

    std::vector<int> predict(const Matrix& x) const;

    nlohmann::json to_json() const;
    static TrainedLearner from_json(const nlohmann::json& j);

    explicit TrainedLearner(std::shared_ptr<const detail::LearnerModel> impl);
    const detail::LearnerModel& impl() const;

private:
    std::shared_ptr<const detail::LearnerModel> impl_;
};

/// Deterministic fit: identical (data, hyperparameters, seed) give identical
/// fitted parameters. For KnnPrecomputed, x is an n x n distance matrix.
TrainedLearner fit_learner(LearnerKind kind, const Matrix& x, const std::vector<int>& y,
                           const Hyperparams& hp, std::uint64_t seed);

std::vector<int> predict_labels(const TrainedLearner& m, const Matrix& x);

/// Normalized Gini (impurity-decrease) importances. Only tree models carry
/// them; a single-leaf tree yields the all-zero vector.
std::vector<double> intrinsic_importances(const TrainedLearner& m);

/// Coefficient matrix (classes x features) of a fitted LogisticRegression;
/// feeds the L1-logistic importance baseline.
Matrix logistic_coefficients(const TrainedLearner& m);

} // namespace quxai
