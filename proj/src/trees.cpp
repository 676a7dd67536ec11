#include "quxai/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace quxai::tree {

namespace {

constexpr double kMinGain = 1e-12;

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

double gini_impurity(const std::vector<double>& class_weights, double total) {
    if (total <= 0.0) return 0.0;
    double sum_sq = 0.0;
    for (double wc : class_weights) {
        const double p = wc / total;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

class Builder {
public:
    Builder(const Matrix& x, const std::vector<int>* y_cls, const std::vector<double>* y_reg,
            const std::vector<double>& weights, int n_classes, const TreeOptions& opt, Rng& rng)
        : x_(x), y_cls_(y_cls), y_reg_(y_reg), w_(weights), n_classes_(n_classes), opt_(opt),
          rng_(rng) {
        tree_.n_features = static_cast<int>(x.cols());
        tree_.n_classes = n_classes;
        tree_.importance.assign(x.cols(), 0.0);
        total_weight_ = std::accumulate(weights.begin(), weights.end(), 0.0);
    }

    Tree run() {
        std::vector<std::size_t> idx(x_.rows());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        build(idx, 0);
        return std::move(tree_);
    }

private:
    int make_leaf(const std::vector<std::size_t>& idx) {
        Node node;
        if (y_cls_) {
            std::vector<double> counts(static_cast<std::size_t>(n_classes_), 0.0);
            for (std::size_t i : idx) counts[static_cast<std::size_t>((*y_cls_)[i])] += w_[i];
            int best = 0;
            for (int c = 1; c < n_classes_; ++c)
                if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)])
                    best = c;
            node.label = best;
        } else {
            double sw = 0.0, sv = 0.0;
            for (std::size_t i : idx) {
                sw += w_[i];
                sv += w_[i] * (*y_reg_)[i];
            }
            node.value = sw > 0.0 ? sv / sw : 0.0;
        }
        tree_.nodes.push_back(node);
        return static_cast<int>(tree_.nodes.size()) - 1;
    }

    double node_impurity(const std::vector<std::size_t>& idx, double& weight_out) const {
        double total = 0.0;
        if (y_cls_) {
            std::vector<double> counts(static_cast<std::size_t>(n_classes_), 0.0);
            for (std::size_t i : idx) {
                counts[static_cast<std::size_t>((*y_cls_)[i])] += w_[i];
                total += w_[i];
            }
            weight_out = total;
            return gini_impurity(counts, total);
        }
        double sv = 0.0;
        for (std::size_t i : idx) {
            total += w_[i];
            sv += w_[i] * (*y_reg_)[i];
        }
        weight_out = total;
        if (total <= 0.0) return 0.0;
        const double mean = sv / total;
        double sse = 0.0;
        for (std::size_t i : idx) {
            const double d = (*y_reg_)[i] - mean;
            sse += w_[i] * d * d;
        }
        return sse / total;
    }

    std::vector<int> candidate_features() {
        const int p = tree_.n_features;
        std::vector<int> feats(static_cast<std::size_t>(p));
        std::iota(feats.begin(), feats.end(), 0);
        const int k = opt_.features_per_split;
        if (k <= 0 || k >= p) return feats;
        // Partial Fisher-Yates, then ascending order so tie-breaks stay by
        // lowest feature index.
        for (int i = 0; i < k; ++i) {
            const std::size_t j =
                static_cast<std::size_t>(i) +
                static_cast<std::size_t>(rng_.uniform_int(static_cast<std::uint64_t>(p - i)));
            std::swap(feats[static_cast<std::size_t>(i)], feats[j]);
        }
        feats.resize(static_cast<std::size_t>(k));
        std::sort(feats.begin(), feats.end());
        return feats;
    }

    // Impurity of a child given accumulated stats.
    double split_gain_cls(const std::vector<double>& left_counts, double left_weight,
                          const std::vector<double>& total_counts, double total_weight,
                          double parent_impurity) const {
        const double right_weight = total_weight - left_weight;
        if (left_weight <= 0.0 || right_weight <= 0.0) return -1.0;
        std::vector<double> right_counts(total_counts.size());
        for (std::size_t c = 0; c < total_counts.size(); ++c)
            right_counts[c] = total_counts[c] - left_counts[c];
        const double impurity_left = gini_impurity(left_counts, left_weight);
        const double impurity_right = gini_impurity(right_counts, right_weight);
        return parent_impurity - (left_weight / total_weight) * impurity_left -
               (right_weight / total_weight) * impurity_right;
    }

    SplitChoice best_split(const std::vector<std::size_t>& idx, double parent_impurity,
                           double node_weight) {
        SplitChoice best;
        const std::vector<int> feats = candidate_features();

        std::vector<std::pair<double, std::size_t>> order(idx.size());
        for (int f : feats) {
            for (std::size_t k = 0; k < idx.size(); ++k)
                order[k] = {x_(idx[k], static_cast<std::size_t>(f)), idx[k]};
            std::sort(order.begin(), order.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            const double lo = order.front().first;
            const double hi = order.back().first;
            if (lo == hi) continue;

            if (opt_.random_thresholds) {
                const double threshold = rng_.uniform(lo, hi);
                const double gain = gain_at_threshold(order, threshold, parent_impurity, node_weight);
                if (gain > best.gain && gain > kMinGain) {
                    best = {true, f, threshold, gain};
                }
                continue;
            }

            // Exhaustive scan over midpoints between distinct adjacent values.
            if (y_cls_) {
                std::vector<double> left_counts(static_cast<std::size_t>(n_classes_), 0.0);
                std::vector<double> total_counts(static_cast<std::size_t>(n_classes_), 0.0);
                for (std::size_t k = 0; k < order.size(); ++k)
                    total_counts[static_cast<std::size_t>((*y_cls_)[order[k].second])] +=
                        w_[order[k].second];
                double left_weight = 0.0;
                for (std::size_t k = 0; k + 1 < order.size(); ++k) {
                    const std::size_t i = order[k].second;
                    left_counts[static_cast<std::size_t>((*y_cls_)[i])] += w_[i];
                    left_weight += w_[i];
                    if (order[k].first == order[k + 1].first) continue;
                    const double gain = split_gain_cls(left_counts, left_weight, total_counts,
                                                       node_weight, parent_impurity);
                    if (gain > best.gain && gain > kMinGain) {
                        best = {true, f, 0.5 * (order[k].first + order[k + 1].first), gain};
                    }
                }
            } else {
                double total_w = 0.0, total_sum = 0.0, total_sq = 0.0;
                for (const auto& [value, i] : order) {
                    (void)value;
                    total_w += w_[i];
                    const double t = (*y_reg_)[i];
                    total_sum += w_[i] * t;
                    total_sq += w_[i] * t * t;
                }
                double lw = 0.0, lsum = 0.0, lsq = 0.0;
                for (std::size_t k = 0; k + 1 < order.size(); ++k) {
                    const std::size_t i = order[k].second;
                    const double t = (*y_reg_)[i];
                    lw += w_[i];
                    lsum += w_[i] * t;
                    lsq += w_[i] * t * t;
                    if (order[k].first == order[k + 1].first) continue;
                    const double rw = total_w - lw;
                    if (lw <= 0.0 || rw <= 0.0) continue;
                    const double lvar = std::max(0.0, lsq / lw - (lsum / lw) * (lsum / lw));
                    const double rsum = total_sum - lsum;
                    const double rsq = total_sq - lsq;
                    const double rvar = std::max(0.0, rsq / rw - (rsum / rw) * (rsum / rw));
                    const double gain =
                        parent_impurity - (lw / total_w) * lvar - (rw / total_w) * rvar;
                    if (gain > best.gain && gain > kMinGain) {
                        best = {true, f, 0.5 * (order[k].first + order[k + 1].first), gain};
                    }
                }
            }
        }
        return best;
    }

    double gain_at_threshold(const std::vector<std::pair<double, std::size_t>>& order,
                             double threshold, double parent_impurity, double node_weight) {
        if (y_cls_) {
            std::vector<double> left_counts(static_cast<std::size_t>(n_classes_), 0.0);
            std::vector<double> total_counts(static_cast<std::size_t>(n_classes_), 0.0);
            double left_weight = 0.0;
            for (const auto& [value, i] : order) {
                total_counts[static_cast<std::size_t>((*y_cls_)[i])] += w_[i];
                if (value <= threshold) {
                    left_counts[static_cast<std::size_t>((*y_cls_)[i])] += w_[i];
                    left_weight += w_[i];
                }
            }
            return split_gain_cls(left_counts, left_weight, total_counts, node_weight,
                                  parent_impurity);
        }
        double lw = 0.0, lsum = 0.0, lsq = 0.0, tw = 0.0, tsum = 0.0, tsq = 0.0;
        for (const auto& [value, i] : order) {
            const double t = (*y_reg_)[i];
            tw += w_[i];
            tsum += w_[i] * t;
            tsq += w_[i] * t * t;
            if (value <= threshold) {
                lw += w_[i];
                lsum += w_[i] * t;
                lsq += w_[i] * t * t;
            }
        }
        const double rw = tw - lw;
        if (lw <= 0.0 || rw <= 0.0) return -1.0;
        const double lvar = std::max(0.0, lsq / lw - (lsum / lw) * (lsum / lw));
        const double rsum = tsum - lsum;
        const double rsq = tsq - lsq;
        const double rvar = std::max(0.0, rsq / rw - (rsum / rw) * (rsum / rw));
        return parent_impurity - (lw / tw) * lvar - (rw / tw) * rvar;
    }

    int build(std::vector<std::size_t>& idx, int depth) {
        double node_weight = 0.0;
        const double impurity = node_impurity(idx, node_weight);
        const bool depth_capped = opt_.max_depth >= 0 && depth >= opt_.max_depth;
        if (depth_capped || idx.size() < static_cast<std::size_t>(opt_.min_samples_split) ||
            impurity <= kMinGain) {
            return make_leaf(idx);
        }

        const SplitChoice split = best_split(idx, impurity, node_weight);
        if (!split.found) return make_leaf(idx);

        std::vector<std::size_t> left_idx, right_idx;
        left_idx.reserve(idx.size());
        right_idx.reserve(idx.size());
        for (std::size_t i : idx) {
            if (x_(i, static_cast<std::size_t>(split.feature)) <= split.threshold)
                left_idx.push_back(i);
            else
                right_idx.push_back(i);
        }
        if (left_idx.empty() || right_idx.empty()) return make_leaf(idx);

        tree_.importance[static_cast<std::size_t>(split.feature)] +=
            (node_weight / total_weight_) * split.gain;

        const int node_pos = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        tree_.nodes[static_cast<std::size_t>(node_pos)].feature = split.feature;
        tree_.nodes[static_cast<std::size_t>(node_pos)].threshold = split.threshold;
        idx.clear();
        idx.shrink_to_fit();
        const int left = build(left_idx, depth + 1);
        const int right = build(right_idx, depth + 1);
        tree_.nodes[static_cast<std::size_t>(node_pos)].left = left;
        tree_.nodes[static_cast<std::size_t>(node_pos)].right = right;
        return node_pos;
    }

    const Matrix& x_;
    const std::vector<int>* y_cls_;
    const std::vector<double>* y_reg_;
    const std::vector<double>& w_;
    int n_classes_;
    TreeOptions opt_;
    Rng& rng_;
    Tree tree_;
    double total_weight_ = 0.0;
};

} // namespace

int Tree::predict_index(std::span<const double> row) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const Node& n = nodes[static_cast<std::size_t>(i)];
        i = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].label;
}

double Tree::predict_value(std::span<const double> row) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const Node& n = nodes[static_cast<std::size_t>(i)];
        i = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

std::vector<int> Tree::features_used() const {
    std::vector<bool> seen(static_cast<std::size_t>(n_features), false);
    for (const Node& n : nodes)
        if (n.feature >= 0) seen[static_cast<std::size_t>(n.feature)] = true;
    std::vector<int> out;
    for (int f = 0; f < n_features; ++f)
        if (seen[static_cast<std::size_t>(f)]) out.push_back(f);
    return out;
}

nlohmann::json Tree::to_json() const {
    nlohmann::json jnodes = nlohmann::json::array();
    for (const Node& n : nodes) {
        jnodes.push_back({{"f", n.feature},
                          {"t", n.threshold},
                          {"l", n.left},
                          {"r", n.right},
                          {"c", n.label},
                          {"v", n.value}});
    }
    return {{"nodes", jnodes},
            {"n_features", n_features},
            {"n_classes", n_classes},
            {"importance", importance}};
}

Tree Tree::from_json(const nlohmann::json& j) {
    Tree t;
    t.n_features = j.at("n_features").get<int>();
    t.n_classes = j.at("n_classes").get<int>();
    t.importance = j.at("importance").get<std::vector<double>>();
    for (const auto& jn : j.at("nodes")) {
        Node n;
        n.feature = jn.at("f").get<int>();
        n.threshold = jn.at("t").get<double>();
        n.left = jn.at("l").get<int>();
        n.right = jn.at("r").get<int>();
        n.label = jn.at("c").get<int>();
        n.value = jn.at("v").get<double>();
        t.nodes.push_back(n);
    }
    if (t.nodes.empty()) fail_data("tree document has no nodes");
    return t;
}

Tree fit_classification_tree(const Matrix& x, const std::vector<int>& y, int n_classes,
                             const std::vector<double>& weights, const TreeOptions& opt,
                             Rng& rng) {
    if (x.rows() == 0 || x.rows() != y.size() || x.rows() != weights.size())
        fail_invalid("fit_classification_tree: inconsistent inputs");
    Builder b(x, &y, nullptr, weights, n_classes, opt, rng);
    return b.run();
}

Tree fit_regression_tree(const Matrix& x, const std::vector<double>& y, const TreeOptions& opt,
                         Rng& rng) {
    if (x.rows() == 0 || x.rows() != y.size())
        fail_invalid("fit_regression_tree: inconsistent inputs");
    std::vector<double> weights(x.rows(), 1.0);
    Builder b(x, nullptr, &y, weights, 0, opt, rng);
    return b.run();
}

} // namespace quxai::tree
