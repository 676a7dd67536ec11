#pragma once

#include <string>
#include <vector>

#include "quxai/encoding.hpp"
#include "quxai/learners.hpp"

#include "json.hpp"

namespace quxai {

enum class ModelType { AmplitudeBased, KernelBased };

std::string to_string(ModelType type);
ModelType model_type_from_string(const std::string& name);

/// A trained hybrid model: the quantum feature map stays attached to the
/// classical learner so perturbed inputs can be re-encoded at prediction
/// time. Immutable after training.
struct HQMLModel {
    TrainedLearner learner;
    FeatureMapSpec map;
    ModelType model_type = ModelType::AmplitudeBased;
    // Kernel path only: the original-scale reference rows and the cached
    // reference Gram matrix computed once at training.
    Matrix x_ref_train;
    Matrix k_ref;
    std::vector<std::string> feature_labels;

    std::string descriptor() const;
};

/// Trains an amplitude- or kernel-based hybrid model on scaled inputs.
/// Amplitude: learner fits the 2^D basis probabilities of every row.
/// Kernel: learner is kNN on sqrt(1 - K_ref) distances over the training rows.
HQMLModel train_hqml(const Matrix& x_train, const std::vector<int>& y_train, LearnerKind kind,
                     ModelType model_type, const FeatureMapSpec& map, const Hyperparams& hp,
                     std::uint64_t seed,
                     const std::vector<std::string>& feature_labels = {});

/// Predicts labels for rows in the original scaled feature space. The quantum
/// stage is always re-executed, so perturbed inputs flow through the feature
/// map before reaching the classical learner.
std::vector<int> predict_adapted(const HQMLModel& m, const Matrix& x_eval);

/// Fraction of rows where predict_adapted matches y.
double score_accuracy(const HQMLModel& m, const Matrix& x, const std::vector<int>& y);

/// Versioned JSON persistence; round-trips preserve predictions bit-exactly.
nlohmann::json model_to_json(const HQMLModel& m);
HQMLModel model_from_json(const nlohmann::json& j);

} // namespace quxai
