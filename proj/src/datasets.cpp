#include "quxai/datasets.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "quxai/encoding.hpp"
#include "quxai/rng.hpp"

namespace quxai {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_feature_cell(const std::string& cell, std::size_t row, const std::string& column) {
    if (cell.empty())
        fail_data("csv: empty feature cell at row " + std::to_string(row) + ", column '" + column +
                  "'");
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size())
            fail_data("csv: non-numeric feature value '" + cell + "' at row " + std::to_string(row) +
                      ", column '" + column + "'");
        if (!std::isfinite(v))
            fail_data("csv: non-finite feature value '" + cell + "' at row " + std::to_string(row) +
                      ", column '" + column + "'");
        return v;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        fail_data("csv: non-numeric feature value '" + cell + "' at row " + std::to_string(row) +
                  ", column '" + column + "'");
    }
}

double column_mean(const Matrix& m, std::size_t j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, j);
    return s / static_cast<double>(m.rows());
}

double column_stddev(const Matrix& m, std::size_t j) {
    const double mean = column_mean(m, j);
    double ss = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double d = m(i, j) - mean;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(m.rows()));
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

RawTable load_csv(const std::string& path, const std::string& target_column) {
    std::ifstream in(path);
    if (!in) fail_data("csv: cannot open file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) fail_data("csv: file '" + path + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_line(line);
    if (header.empty()) fail_data("csv: header row is empty");

    std::size_t target_idx = header.size();
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == target_column) {
            target_idx = j;
            break;
        }
    }
    if (target_idx == header.size())
        fail_data("csv: target column '" + target_column + "' not found in header");

    RawTable t;
    t.target_name = target_column;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (j != target_idx) t.feature_names.push_back(header[j]);

    std::vector<std::vector<double>> rows;
    std::size_t row_index = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            fail_data("csv: row " + std::to_string(row_index) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
        std::vector<double> row;
        row.reserve(header.size() - 1);
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (j == target_idx) {
                t.target.push_back(cells[j]);
            } else {
                row.push_back(parse_feature_cell(cells[j], row_index, header[j]));
            }
        }
        rows.push_back(std::move(row));
        ++row_index;
    }
    if (rows.empty()) fail_data("csv: file '" + path + "' has no data rows");
    t.features = Matrix::from_rows(rows);
    t.provenance.assign(t.feature_names.size(), FeatureProvenance{});
    return t;
}

PreparedDataset prepare_data(const RawTable& table, double test_fraction, std::uint64_t seed) {
    if (table.n_rows() < 2) fail_data("prepare_data: need at least 2 rows");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        fail_invalid("prepare_data: test fraction must be in (0, 1)");

    // Encode labels by sorted distinct target value.
    std::set<std::string> distinct(table.target.begin(), table.target.end());
    if (distinct.size() < 2) fail_data("prepare_data: table has a single class");
    std::vector<std::string> class_labels(distinct.begin(), distinct.end());
    std::map<std::string, int> code;
    for (std::size_t c = 0; c < class_labels.size(); ++c)
        code[class_labels[c]] = static_cast<int>(c);

    std::vector<std::vector<std::size_t>> by_class(class_labels.size());
    for (std::size_t i = 0; i < table.n_rows(); ++i)
        by_class[static_cast<std::size_t>(code.at(table.target[i]))].push_back(i);
    for (std::size_t c = 0; c < by_class.size(); ++c)
        if (by_class[c].size() < 2)
            fail_data("prepare_data: class '" + class_labels[c] + "' has fewer than 2 rows");

    // Stratified split: per class, seeded shuffle then rounded test share
    // (clamped so every class keeps at least one training row).
    Rng rng(mix_seed(seed, 0x5350u)); // "SP"
    std::vector<std::size_t> train_idx, test_idx;
    for (auto& members : by_class) {
        rng.shuffle(members);
        std::size_t n_test = static_cast<std::size_t>(
            std::llround(test_fraction * static_cast<double>(members.size())));
        n_test = std::min(n_test, members.size() - 1);
        for (std::size_t k = 0; k < members.size(); ++k)
            (k < n_test ? test_idx : train_idx).push_back(members[k]);
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    PreparedDataset ds;
    ds.feature_labels = table.feature_names;
    ds.class_labels = class_labels;
    ds.provenance = table.provenance;
    ds.planted_informative = table.planted_informative;
    ds.seed = seed;

    const std::size_t p = table.n_features();
    ds.scaler.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        double lo = table.features(train_idx[0], j);
        double hi = lo;
        for (std::size_t i : train_idx) {
            lo = std::min(lo, table.features(i, j));
            hi = std::max(hi, table.features(i, j));
        }
        ds.scaler[j] = {lo, hi};
    }

    auto scale_rows = [&](const std::vector<std::size_t>& idx, Matrix& out,
                          std::vector<int>& labels) {
        out = Matrix(idx.size(), p);
        labels.resize(idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r) {
            labels[r] = code.at(table.target[idx[r]]);
            for (std::size_t j = 0; j < p; ++j) {
                const auto [lo, hi] = ds.scaler[j];
                double v;
                if (hi == lo) {
                    v = 0.0; // constant-on-train column
                } else {
                    v = (table.features(idx[r], j) - lo) / (hi - lo) * kPi;
                    v = std::clamp(v, 0.0, kPi);
                }
                out(r, j) = v;
            }
        }
    };
    scale_rows(train_idx, ds.x_train, ds.y_train);
    scale_rows(test_idx, ds.x_test, ds.y_test);
    return ds;
}

RawTable augment_noisy(const RawTable& table, int n_noise, int n_redundant, std::uint64_t seed) {
    if (n_noise < 0 || n_redundant < 0) fail_invalid("augment_noisy: counts must be >= 0");

    std::vector<std::size_t> original_cols;
    for (std::size_t j = 0; j < table.n_features(); ++j)
        if (table.provenance[j].origin == FeatureOrigin::Original) original_cols.push_back(j);
    if (n_redundant > 0 && original_cols.empty())
        fail_data("augment_noisy: no original feature columns to duplicate");

    const std::size_t n = table.n_rows();
    const std::size_t p = table.n_features();
    RawTable out = table;
    Matrix features(n, p + static_cast<std::size_t>(n_noise + n_redundant));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) features(i, j) = table.features(i, j);

    Rng rng(mix_seed(seed, 0x4155u)); // "AU"
    std::size_t col = p;
    for (int k = 0; k < n_noise; ++k, ++col) {
        for (std::size_t i = 0; i < n; ++i) features(i, col) = rng.normal();
        out.feature_names.push_back("noise_" + std::to_string(k));
        out.provenance.push_back({FeatureOrigin::Noise, -1});
    }
    for (int k = 0; k < n_redundant; ++k, ++col) {
        const std::size_t src =
            original_cols[static_cast<std::size_t>(rng.uniform_int(original_cols.size()))];
        const double sigma = 0.1 * column_stddev(table.features, src);
        for (std::size_t i = 0; i < n; ++i)
            features(i, col) = table.features(i, src) + rng.normal(0.0, sigma);
        out.feature_names.push_back("redundant_" + std::to_string(k) + "_of_" +
                                    table.feature_names[src]);
        out.provenance.push_back({FeatureOrigin::Redundant, static_cast<int>(src)});
    }
    out.features = std::move(features);
    return out;
}

RawTable subsample_stratified(const RawTable& table, std::size_t max_rows, std::uint64_t seed) {
    if (max_rows == 0) fail_invalid("subsample_stratified: max_rows must be positive");
    const std::size_t n = table.n_rows();
    if (n <= max_rows) return table;

    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[table.target[i]].push_back(i);

    Rng rng(mix_seed(seed, 0x5355u)); // "SU"
    std::vector<std::size_t> keep;
    const double share = static_cast<double>(max_rows) / static_cast<double>(n);
    for (auto& [label, members] : by_class) {
        rng.shuffle(members);
        std::size_t quota = static_cast<std::size_t>(
            std::llround(share * static_cast<double>(members.size())));
        quota = std::max<std::size_t>(1, std::min(quota, members.size()));
        keep.insert(keep.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(quota));
    }
    std::sort(keep.begin(), keep.end());

    RawTable out;
    out.feature_names = table.feature_names;
    out.target_name = table.target_name;
    out.provenance = table.provenance;
    out.planted_informative = table.planted_informative;
    out.features = Matrix(keep.size(), table.n_features());
    out.target.reserve(keep.size());
    for (std::size_t r = 0; r < keep.size(); ++r) {
        for (std::size_t j = 0; j < table.n_features(); ++j)
            out.features(r, j) = table.features(keep[r], j);
        out.target.push_back(table.target[keep[r]]);
    }
    return out;
}

RawTable binarize_target_at_median(const RawTable& table) {
    std::vector<double> values;
    values.reserve(table.n_rows());
    for (std::size_t i = 0; i < table.n_rows(); ++i) {
        try {
            std::size_t used = 0;
            const double v = std::stod(table.target[i], &used);
            if (used != table.target[i].size() || !std::isfinite(v))
                fail_data("binarize_target: non-numeric target '" + table.target[i] + "' at row " +
                          std::to_string(i));
            values.push_back(v);
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            fail_data("binarize_target: non-numeric target '" + table.target[i] + "' at row " +
                      std::to_string(i));
        }
    }
    const double med = median_of(values);
    RawTable out = table;
    for (std::size_t i = 0; i < out.n_rows(); ++i) out.target[i] = values[i] > med ? "1" : "0";
    return out;
}

PlantedRule planted_rule_from_string(const std::string& name) {
    if (name == "threshold") return PlantedRule::Threshold;
    if (name == "linear") return PlantedRule::Linear;
    if (name == "xor") return PlantedRule::XorPair;
    fail_invalid("unknown planted rule '" + name + "'; expected threshold, linear or xor");
}

RawTable make_planted(int n_rows, int n_informative, int n_noise, PlantedRule rule,
                      std::uint64_t seed) {
    if (n_informative < 1) fail_invalid("make_planted: need at least 1 informative feature");
    if (n_rows < 4) fail_invalid("make_planted: need at least 4 rows");
    if (n_noise < 0) fail_invalid("make_planted: noise count must be >= 0");
    if (rule == PlantedRule::XorPair && n_informative != 2)
        fail_invalid("make_planted: the xor rule uses exactly 2 informative features");

    const std::size_t n = static_cast<std::size_t>(n_rows);
    const std::size_t d = static_cast<std::size_t>(n_informative + n_noise);
    Rng rng(mix_seed(seed, 0x504cu)); // "PL"

    RawTable t;
    t.target_name = "target";
    t.features = Matrix(n, d);

    // Informative columns are bimodal (two uniform bands with a wide gap), so
    // the per-column indicator has a clean margin around the empirical median.
    // Noise columns are half-Cauchy: heavy-tailed and label-independent, and
    // after min-max scaling their bulk sits near angle 0, which keeps the
    // amplitude representation signal-dominated.
    for (int j = 0; j < n_informative; ++j) {
        t.feature_names.push_back("inf_" + std::to_string(j));
        t.provenance.push_back({FeatureOrigin::Original, -1});
        t.planted_informative.push_back(j);
        for (std::size_t i = 0; i < n; ++i) {
            const bool high = rng.uniform() < 0.5;
            t.features(i, static_cast<std::size_t>(j)) =
                high ? rng.uniform(0.80, 0.98) : rng.uniform(0.02, 0.20);
        }
    }
    for (int j = 0; j < n_noise; ++j) {
        t.feature_names.push_back("noise_" + std::to_string(j));
        t.provenance.push_back({FeatureOrigin::Noise, -1});
        for (std::size_t i = 0; i < n; ++i)
            t.features(i, static_cast<std::size_t>(n_informative + j)) =
                std::tan(0.5 * kPi * rng.uniform());
    }

    // Per-informative-column indicators relative to the empirical median.
    std::vector<std::vector<int>> indicator(static_cast<std::size_t>(n_informative));
    for (int j = 0; j < n_informative; ++j) {
        const double med = median_of(t.features.column(static_cast<std::size_t>(j)));
        indicator[static_cast<std::size_t>(j)].resize(n);
        for (std::size_t i = 0; i < n; ++i)
            indicator[static_cast<std::size_t>(j)][i] =
                t.features(i, static_cast<std::size_t>(j)) > med ? 1 : 0;
    }

    t.target.resize(n);
    switch (rule) {
        case PlantedRule::Threshold: {
            // Majority vote of the indicators (the single-column threshold
            // rule when n_informative == 1).
            for (std::size_t i = 0; i < n; ++i) {
                int votes = 0;
                for (int j = 0; j < n_informative; ++j) votes += indicator[static_cast<std::size_t>(j)][i];
                t.target[i] = 2 * votes > n_informative ? "1" : "0";
            }
            break;
        }
        case PlantedRule::Linear: {
            std::vector<double> score(n, 0.0);
            for (int j = 0; j < n_informative; ++j) {
                const double w = 1.0 / static_cast<double>(j + 1);
                for (std::size_t i = 0; i < n; ++i)
                    score[i] += w * t.features(i, static_cast<std::size_t>(j));
            }
            const double med = median_of(score);
            for (std::size_t i = 0; i < n; ++i) t.target[i] = score[i] > med ? "1" : "0";
            break;
        }
        case PlantedRule::XorPair: {
            for (std::size_t i = 0; i < n; ++i)
                t.target[i] = (indicator[0][i] ^ indicator[1][i]) != 0 ? "1" : "0";
            break;
        }
    }
    return t;
}

} // namespace quxai
