#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "quxai/matrix.hpp"

namespace quxai {

enum class FeatureOrigin { Original, Noise, Redundant };

struct FeatureProvenance {
    FeatureOrigin origin = FeatureOrigin::Original;
    int source = -1; // Redundant: index of the source column
};

/// Raw rectangular table: numeric feature columns plus a text target column.
struct RawTable {
    std::vector<std::string> feature_names;
    Matrix features;
    std::vector<std::string> target; // one entry per row
    std::string target_name;
    std::vector<FeatureProvenance> provenance;
    // For planted tables: indices of the truly informative columns.
    std::vector<int> planted_informative;

    std::size_t n_rows() const { return features.rows(); }
    std::size_t n_features() const { return features.cols(); }
};

/// Scaled, split, label-encoded dataset ready for training and explanation.
struct PreparedDataset {
    Matrix x_train;
    Matrix x_test;
    std::vector<int> y_train;
    std::vector<int> y_test;
    std::vector<std::string> feature_labels;
    std::vector<std::string> class_labels;
    // Per-feature (min, max) fitted on the training split only.
    std::vector<std::pair<double, double>> scaler;
    std::vector<FeatureProvenance> provenance;
    std::vector<int> planted_informative;
    std::uint64_t seed = 0;
};

/// Parses a comma-separated file with a mandatory header row. Feature cells
/// must be finite numbers; the target column may hold any text.
RawTable load_csv(const std::string& path, const std::string& target_column);

/// Label-encodes the target (sorted distinct values), splits stratified
/// (default 70/30), then min-max scales to [0, pi] using train statistics
/// only. Constant columns map to 0; test values clamp into [0, pi].
PreparedDataset prepare_data(const RawTable& table, double test_fraction, std::uint64_t seed);

/// Appends n_noise standard-normal columns ("noise_i") and n_redundant
/// copies of randomly chosen original columns plus Gaussian noise with
/// sigma = 0.1 x source std ("redundant_i_of_<src>"). Original columns are
/// untouched.
RawTable augment_noisy(const RawTable& table, int n_noise, int n_redundant, std::uint64_t seed);

/// Class-stratified row subsample for large tables (keeps class shares
/// within one row); returns the table unchanged when it already fits.
RawTable subsample_stratified(const RawTable& table, std::size_t max_rows, std::uint64_t seed);

/// Replaces a numeric target with "0"/"1" split at its median (values above
/// the median map to "1"). For regression-style sources used as binary
/// classification tasks.
RawTable binarize_target_at_median(const RawTable& table);

enum class PlantedRule { Threshold, Linear, XorPair };

PlantedRule planted_rule_from_string(const std::string& name);

/// Synthetic table whose informative columns determine the label by the
/// named rule; noise columns are independent draws. The informative index
/// set is recorded so explainer output can be scored against exact truth.
RawTable make_planted(int n_rows, int n_informative, int n_noise, PlantedRule rule,
                      std::uint64_t seed);

} // namespace quxai
