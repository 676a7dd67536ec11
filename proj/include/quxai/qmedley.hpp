#pragma once

#include <optional>
#include <string>
#include <vector>

#include "quxai/hqml.hpp"

#include "json.hpp"

namespace quxai {

/// How permutation repeats are drawn: K seeded random shuffles (the normal
/// mode) or every permutation of the reference rows (diagnostic mode for
/// tiny n, where the sampled estimate can be checked against the exact
/// expectation).
enum class PiMode { Sampled, Exhaustive };

struct ExplainerConfig {
    int repeats_k = 5;
    std::uint64_t seed = 0;
    bool adaptive_weighting = false;
    bool interaction_pi = false;
    int interaction_partners_m = 2;
    // Replacement used by drop-column neutralization, in scaled space.
    // 0.0 maps to RX(0)|0> = |0>, the unexcited qubit.
    double neutral_value = 0.0;
    PiMode pi_mode = PiMode::Sampled;

    void validate(std::size_t n_features) const;

    nlohmann::json to_json() const;
    static ExplainerConfig from_json(const nlohmann::json& j);
};

struct ImportanceReport {
    std::vector<std::string> feature_labels;
    double baseline_accuracy = 0.0;
    std::vector<double> dci;
    std::vector<double> pi;
    std::optional<std::vector<double>> interaction_pi;
    double weight_dci = 0.5;
    double weight_pi = 0.5;
    std::vector<double> final_scores;
    ExplainerConfig config;
    std::string model_descriptor;

    nlohmann::json to_json() const;
    static ImportanceReport from_json(const nlohmann::json& j);
};

/// Anything the explainer can interrogate: a label-prediction surface over
/// the original feature space. Hybrid models re-encode inside predict; the
/// identity adapter below serves classical validation settings.
class Explainable {
public:
    virtual ~Explainable() = default;
    virtual std::vector<int> predict(const Matrix& x) const = 0;
    virtual std::string descriptor() const = 0;
};

/// Wraps an HQMLModel; predictions run through predict_adapted so every
/// perturbation passes the quantum stage again.
class HqmlExplainable final : public Explainable {
public:
    explicit HqmlExplainable(const HQMLModel& model) : model_(&model) {}
    std::vector<int> predict(const Matrix& x) const override {
        return predict_adapted(*model_, x);
    }
    std::string descriptor() const override { return model_->descriptor(); }

private:
    const HQMLModel* model_;
};

/// Identity encoding: the learner consumes raw features directly.
class IdentityExplainable final : public Explainable {
public:
    explicit IdentityExplainable(TrainedLearner learner, std::string name = "")
        : learner_(std::move(learner)),
          name_(name.empty() ? short_name(learner_.kind()) : std::move(name)) {}
    std::vector<int> predict(const Matrix& x) const override { return learner_.predict(x); }
    std::string descriptor() const override { return name_; }

private:
    TrainedLearner learner_;
    std::string name_;
};

/// Drop-column importances: accuracy drop when a column is neutralized.
std::vector<double> dci_scores(const Explainable& m, const Matrix& x_ref,
                               const std::vector<int>& y_ref, const ExplainerConfig& cfg);

/// Permutation importances: mean accuracy drop over seeded column shuffles.
/// The (feature, repeat) pair determines each shuffle stream.
std::vector<double> pi_scores(const Explainable& m, const Matrix& x_ref,
                              const std::vector<int>& y_ref, const ExplainerConfig& cfg);

/// Interaction-aware PI: plain PI plus a nonnegative pairwise synergy term
/// from joint shuffles with the top-m correlation partners.
std::vector<double> interaction_pi_scores(const Explainable& m, const Matrix& x_ref,
                                          const std::vector<int>& y_ref,
                                          const ExplainerConfig& cfg);

struct AggregateResult {
    std::vector<double> final_scores;
    double weight_dci = 0.5;
    double weight_pi = 0.5;
};

/// Combines DCI and PI. Default is the plain average; adaptive weighting
/// sets w_DCI = s_D / (s_D + s_P) from the population dispersions, falling
/// back to (0.5, 0.5) when both vectors are flat.
AggregateResult aggregate_scores(const std::vector<double>& dci, const std::vector<double>& pi,
                                 const ExplainerConfig& cfg);

/// Full Q-MEDLEY pass: baseline accuracy once, then DCI, PI (or
/// interaction-aware PI), and the aggregate.
ImportanceReport explain(const Explainable& m, const Matrix& x_ref, const std::vector<int>& y_ref,
                         const ExplainerConfig& cfg);

/// Convenience overloads for hybrid models.
std::vector<double> dci_scores(const HQMLModel& m, const Matrix& x_ref,
                               const std::vector<int>& y_ref, const ExplainerConfig& cfg);
std::vector<double> pi_scores(const HQMLModel& m, const Matrix& x_ref,
                              const std::vector<int>& y_ref, const ExplainerConfig& cfg);
std::vector<double> interaction_pi_scores(const HQMLModel& m, const Matrix& x_ref,
                                          const std::vector<int>& y_ref,
                                          const ExplainerConfig& cfg);
ImportanceReport explain(const HQMLModel& m, const Matrix& x_ref, const std::vector<int>& y_ref,
                         const ExplainerConfig& cfg);

} // namespace quxai
