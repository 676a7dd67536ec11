#include "quxai/hqml.hpp"

#include <cmath>

#include "quxai/version.hpp"

namespace quxai {

namespace {

constexpr std::size_t kEncodeBlockRows = 256;

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows(); ++i)
        rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : j) rows.push_back(r.get<std::vector<double>>());
    return Matrix::from_rows(rows);
}

} // namespace

std::string to_string(ModelType type) {
    return type == ModelType::AmplitudeBased ? "amplitude" : "kernel";
}

ModelType model_type_from_string(const std::string& name) {
    if (name == "amplitude") return ModelType::AmplitudeBased;
    if (name == "kernel") return ModelType::KernelBased;
    fail_invalid("unknown model type '" + name + "'; expected 'amplitude' or 'kernel'");
}

std::string HQMLModel::descriptor() const {
    return short_name(learner.kind()) + " (" + to_string(model_type) + ")";
}

HQMLModel train_hqml(const Matrix& x_train, const std::vector<int>& y_train, LearnerKind kind,
                     ModelType model_type, const FeatureMapSpec& map, const Hyperparams& hp,
                     std::uint64_t seed, const std::vector<std::string>& feature_labels) {
    map.validate();
    if (x_train.cols() != static_cast<std::size_t>(map.n_qubits))
        fail_invalid("train_hqml: data has " + std::to_string(x_train.cols()) +
                     " features but the map encodes " + std::to_string(map.n_qubits) + " qubits");
    if (model_type == ModelType::KernelBased && kind != LearnerKind::KnnPrecomputed)
        fail_invalid("train_hqml: kernel-based models require the knn_precomputed learner");
    if (model_type == ModelType::AmplitudeBased && kind == LearnerKind::KnnPrecomputed)
        fail_invalid("train_hqml: knn_precomputed needs a kernel-based model type");
    if (!feature_labels.empty() && feature_labels.size() != x_train.cols())
        fail_invalid("train_hqml: feature label count does not match data width");

    HQMLModel m;
    m.map = map;
    m.model_type = model_type;
    m.feature_labels = feature_labels;
    if (m.feature_labels.empty()) {
        for (std::size_t j = 0; j < x_train.cols(); ++j)
            m.feature_labels.push_back("feature_" + std::to_string(j));
    }

    if (model_type == ModelType::AmplitudeBased) {
        if (map.n_qubits > map.max_amplitude_qubits)
            fail_data("qubit cap exceeded: " + std::to_string(map.n_qubits) +
                      " qubits requested, cap is " + std::to_string(map.max_amplitude_qubits));
        const Matrix encoded = amplitude_feature_matrix(x_train, map, kEncodeBlockRows);
        m.learner = fit_learner(kind, encoded, y_train, hp, seed);
    } else {
        m.x_ref_train = x_train;
        m.k_ref = kernel_matrix(x_train, x_train); // computed once, kept with the model
        m.learner = fit_learner(kind, kernel_to_distance(m.k_ref), y_train, hp, seed);
    }
    return m;
}

std::vector<int> predict_adapted(const HQMLModel& m, const Matrix& x_eval) {
    if (x_eval.cols() != static_cast<std::size_t>(m.map.n_qubits))
        fail_invalid("predict_adapted: input width " + std::to_string(x_eval.cols()) +
                     " does not match the " + std::to_string(m.map.n_qubits) + "-qubit map");

    if (m.model_type == ModelType::AmplitudeBased) {
        std::vector<int> out(x_eval.rows());
        // Re-encode in row blocks to bound the 2^D working set.
        for (std::size_t lo = 0; lo < x_eval.rows(); lo += kEncodeBlockRows) {
            const std::size_t hi = std::min(x_eval.rows(), lo + kEncodeBlockRows);
            Matrix block(hi - lo, x_eval.cols());
            for (std::size_t i = lo; i < hi; ++i)
                for (std::size_t j = 0; j < x_eval.cols(); ++j) block(i - lo, j) = x_eval(i, j);
            const Matrix encoded = amplitude_feature_matrix(block, m.map, kEncodeBlockRows);
            const std::vector<int> labels = m.learner.predict(encoded);
            for (std::size_t i = lo; i < hi; ++i) out[i] = labels[i - lo];
        }
        return out;
    }

    // Kernel path: fresh cross-kernel against the stored reference rows.
    const Matrix cross = kernel_matrix(x_eval, m.x_ref_train);
    return m.learner.predict(kernel_to_distance(cross));
}

double score_accuracy(const HQMLModel& m, const Matrix& x, const std::vector<int>& y) {
    if (x.rows() == 0) fail_invalid("score_accuracy: empty input");
    if (x.rows() != y.size()) fail_invalid("score_accuracy: label count mismatch");
    const std::vector<int> pred = predict_adapted(m, x);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (pred[i] == y[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(y.size());
}

nlohmann::json model_to_json(const HQMLModel& m) {
    nlohmann::json j{{"format_version", kModelFormatVersion},
                     {"model_type", to_string(m.model_type)},
                     {"map",
                      {{"n_qubits", m.map.n_qubits},
                       {"rotation", "rx"},
                       {"angle_domain", {m.map.angle_min, m.map.angle_max}},
                       {"max_amplitude_qubits", m.map.max_amplitude_qubits}}},
                     {"learner", m.learner.to_json()},
                     {"feature_labels", m.feature_labels}};
    if (m.model_type == ModelType::KernelBased) {
        j["x_ref_train"] = matrix_to_json(m.x_ref_train);
        j["k_ref"] = matrix_to_json(m.k_ref);
    }
    return j;
}

HQMLModel model_from_json(const nlohmann::json& j) {
    if (!j.is_object()) fail_data("model document: expected a JSON object");
    if (!j.contains("format_version") || j.at("format_version").get<int>() != kModelFormatVersion)
        fail_data("model document: unsupported or missing format_version");

    HQMLModel m;
    m.model_type = model_type_from_string(j.at("model_type").get<std::string>());
    const auto& jm = j.at("map");
    m.map.n_qubits = jm.at("n_qubits").get<int>();
    if (jm.at("rotation").get<std::string>() != "rx")
        fail_data("model document: unsupported rotation");
    m.map.angle_min = jm.at("angle_domain")[0].get<double>();
    m.map.angle_max = jm.at("angle_domain")[1].get<double>();
    m.map.max_amplitude_qubits = jm.at("max_amplitude_qubits").get<int>();
    m.map.validate();
    m.learner = TrainedLearner::from_json(j.at("learner"));
    m.feature_labels = j.at("feature_labels").get<std::vector<std::string>>();

    if (m.model_type == ModelType::KernelBased) {
        m.x_ref_train = matrix_from_json(j.at("x_ref_train"));
        m.k_ref = matrix_from_json(j.at("k_ref"));
        const Matrix expected = kernel_matrix(m.x_ref_train, m.x_ref_train);
        if (expected.rows() != m.k_ref.rows() || expected.cols() != m.k_ref.cols())
            fail_data("model document: k_ref shape does not match x_ref_train");
        for (std::size_t i = 0; i < expected.rows(); ++i)
            for (std::size_t l = 0; l < expected.cols(); ++l)
                if (std::fabs(expected(i, l) - m.k_ref(i, l)) > 1e-12)
                    fail_data("model document: k_ref is inconsistent with x_ref_train");
    }
    return m;
}

} // namespace quxai
