#include "quxai/learners.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "quxai/parallel.hpp"
#include "quxai/rng.hpp"
#include "quxai/tree.hpp"

namespace quxai {

namespace {

const std::map<LearnerKind, std::pair<const char*, const char*>> kKindNames = {
    {LearnerKind::DecisionTree, {"decision_tree", "QDT"}},
    {LearnerKind::RandomForest, {"random_forest", "QRF"}},
    {LearnerKind::ExtraTrees, {"extra_trees", "QExtra"}},
    {LearnerKind::GradientBoosting, {"gradient_boosting", "QGB"}},
    {LearnerKind::AdaBoost, {"adaboost", "QAda"}},
    {LearnerKind::Lda, {"lda", "QLDA"}},
    {LearnerKind::LogisticRegression, {"logistic_regression", "QLogistic"}},
    {LearnerKind::GaussianNb, {"gaussian_nb", "QNB"}},
    {LearnerKind::Perceptron, {"perceptron", "QPerceptron"}},
    {LearnerKind::RidgeClassifier, {"ridge", "QRidge"}},
    {LearnerKind::KnnPrecomputed, {"knn_precomputed", "QKNN"}},
};

std::string known_kind_list() {
    std::string s;
    for (const auto& [kind, names] : kKindNames) {
        if (!s.empty()) s += ", ";
        s += names.first;
        s += " (";
        s += names.second;
        s += ")";
    }
    return s;
}

int argmax_lowest(std::span<const double> scores) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(scores.size()); ++c)
        if (scores[static_cast<std::size_t>(c)] > scores[static_cast<std::size_t>(best)]) best = c;
    return best;
}

void softmax_row(std::span<double> scores) {
    double mx = scores[0];
    for (double s : scores) mx = std::max(mx, s);
    double sum = 0.0;
    for (double& s : scores) {
        s = std::exp(s - mx);
        sum += s;
    }
    for (double& s : scores) s /= sum;
}

} // namespace

std::string to_string(LearnerKind kind) { return kKindNames.at(kind).first; }

std::string short_name(LearnerKind kind) { return kKindNames.at(kind).second; }

LearnerKind learner_kind_from_string(const std::string& name) {
    for (const auto& [kind, names] : kKindNames)
        if (name == names.first) return kind;
    fail_invalid("unknown learner kind '" + name + "'; valid kinds: " + known_kind_list());
}

LearnerKind learner_kind_from_short_name(const std::string& name) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (const auto& [kind, names] : kKindNames) {
        std::string cand = names.second;
        std::transform(cand.begin(), cand.end(), cand.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (lower == cand || lower == names.first) return kind;
    }
    fail_invalid("unknown model kind '" + name + "'; valid kinds: " + known_kind_list());
}

std::vector<LearnerKind> all_learner_kinds() {
    std::vector<LearnerKind> out;
    for (const auto& [kind, names] : kKindNames) out.push_back(kind);
    return out;
}

void Hyperparams::validate() const {
    if (min_samples_split < 2) fail_invalid("hyperparams: min_samples_split must be >= 2");
    if (n_trees < 1) fail_invalid("hyperparams: n_trees must be positive");
    if (boost_rounds < 1) fail_invalid("hyperparams: boost_rounds must be positive");
    if (gb_tree_depth < 1) fail_invalid("hyperparams: gb_tree_depth must be positive");
    if (!(boost_learning_rate > 0.0)) fail_invalid("hyperparams: boost_learning_rate must be > 0");
    if (!(logreg_learning_rate > 0.0)) fail_invalid("hyperparams: logreg_learning_rate must be > 0");
    if (logreg_iterations < 1) fail_invalid("hyperparams: logreg_iterations must be positive");
    if (logreg_l2 < 0.0 || logreg_l1 < 0.0) fail_invalid("hyperparams: penalties must be >= 0");
    if (!(ridge_lambda > 0.0)) fail_invalid("hyperparams: ridge_lambda must be > 0");
    if (!(lda_epsilon > 0.0)) fail_invalid("hyperparams: lda_epsilon must be > 0");
    if (perceptron_epochs < 1) fail_invalid("hyperparams: perceptron_epochs must be positive");
    if (!(perceptron_learning_rate > 0.0))
        fail_invalid("hyperparams: perceptron_learning_rate must be > 0");
    if (!(nb_variance_floor > 0.0)) fail_invalid("hyperparams: nb_variance_floor must be > 0");
    if (knn_k < 1) fail_invalid("hyperparams: knn_k must be positive");
}

namespace detail {

class LearnerModel {
public:
    virtual ~LearnerModel() = default;

    LearnerKind kind;
    std::vector<int> classes; // sorted ascending label values
    std::uint64_t seed = 0;
    std::size_t n_features = 0;

    virtual std::vector<int> predict_indices(const Matrix& x) const = 0;
    virtual nlohmann::json params_to_json() const = 0;

    virtual std::vector<double> importances() const {
        fail_invalid("intrinsic importances are only defined for tree models, not " +
                     to_string(kind));
    }
};

namespace {

std::vector<double> normalize_importance(std::vector<double> raw) {
    const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
    if (total <= 0.0) return raw; // all-zero stays unnormalized
    for (double& v : raw) v /= total;
    return raw;
}

struct DecisionTreeModel final : LearnerModel {
    tree::Tree tree;

    std::vector<int> predict_indices(const Matrix& x) const override {
        std::vector<int> out(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) out[i] = tree.predict_index(x.row(i));
        return out;
    }

    std::vector<double> importances() const override {
        return normalize_importance(tree.importance);
    }

    nlohmann::json params_to_json() const override { return {{"tree", tree.to_json()}}; }
};

struct ForestModel final : LearnerModel {
    std::vector<tree::Tree> trees;

    std::vector<int> predict_indices(const Matrix& x) const override {
        const int n_classes = static_cast<int>(classes.size());
        std::vector<int> out(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            std::vector<double> votes(static_cast<std::size_t>(n_classes), 0.0);
            for (const auto& t : trees)
                votes[static_cast<std::size_t>(t.predict_index(x.row(i)))] += 1.0;
            out[i] = argmax_lowest(votes);
        }
        return out;
    }

    std::vector<double> importances() const override {
        std::vector<double> total(n_features, 0.0);
        for (const auto& t : trees)
            for (std::size_t f = 0; f < n_features; ++f) total[f] += t.importance[f];
        return normalize_importance(std::move(total));
    }

    nlohmann::json params_to_json() const override {
        nlohmann::json jt = nlohmann::json::array();
        for (const auto& t : trees) jt.push_back(t.to_json());
        return {{"trees", jt}};
    }
};

struct AdaBoostModel final : LearnerModel {
    std::vector<tree::Tree> stumps;
    std::vector<double> alphas;

    std::vector<int> predict_indices(const Matrix& x) const override {
        const int n_classes = static_cast<int>(classes.size());
        std::vector<int> out(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            std::vector<double> score(static_cast<std::size_t>(n_classes), 0.0);
            for (std::size_t m = 0; m < stumps.size(); ++m)
                score[static_cast<std::size_t>(stumps[m].predict_index(x.row(i)))] += alphas[m];
            out[i] = argmax_lowest(score);
        }
        return out;
    }

    nlohmann::json params_to_json() const override {
        nlohmann::json js = nlohmann::json::array();
        for (const auto& t : stumps) js.push_back(t.to_json());
        return {{"stumps", js}, {"alphas", alphas}};
    }
};

struct GradientBoostingModel final : LearnerModel {
    // trees[round][class], applied with the shared learning rate.
    std::vector<std::vector<tree::Tree>> trees;
    double learning_rate = 0.1;

    std::vector<int> predict_indices(const Matrix& x) const override {
        const std::size_t n_classes = classes.size();
        std::vector<int> out(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            std::vector<double> score(n_classes, 0.0);
            for (const auto& round : trees)
                for (std::size_t c = 0; c < n_classes; ++c)
                    score[c] += learning_rate * round[c].predict_value(x.row(i));
            out[i] = argmax_lowest(score);
        }
        return out;
    }

    nlohmann::json params_to_json() const override {
        nlohmann::json jr = nlohmann::json::array();
        for (const auto& round : trees) {
            nlohmann::json jc = nlohmann::json::array();
            for (const auto& t : round) jc.push_back(t.to_json());
            jr.push_back(jc);
        }
        return {{"trees", jr}, {"learning_rate", learning_rate}};
    }
};

// LDA, logistic regression, ridge and perceptron all reduce to per-class
// linear scores with an argmax decode.
struct LinearModel final : LearnerModel {
    Matrix coef; // classes x features
    std::vector<double> intercept;

    std::vector<int> predict_indices(const Matrix& x) const override {
        std::vector<int> out(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            std::vector<double> score(classes.size());
            for (std::size_t c = 0; c < classes.size(); ++c) {
                double s = intercept[c];
                for (std::size_t j = 0; j < n_features; ++j) s += coef(c, j) * x(i, j);
                score[c] = s;
            }
            out[i] = argmax_lowest(score);
        }
        return out;
    }

    nlohmann::json params_to_json() const override {
        nlohmann::json jc = nlohmann::json::array();
        for (std::size_t c = 0; c < coef.rows(); ++c)
            jc.push_back(std::vector<double>(coef.row(c).begin(), coef.row(c).end()));
        return {{"coef", jc}, {"intercept", intercept}};
    }
};

struct GaussianNbModel final : LearnerModel {
    Matrix means; // classes x features
    Matrix vars;  // classes x features (floored)
    std::vector<double> log_priors;

    std::vector<int> predict_indices(const Matrix& x) const override {
        constexpr double kLog2Pi = 1.8378770664093453;
        std::vector<int> out(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            std::vector<double> score(classes.size());
            for (std::size_t c = 0; c < classes.size(); ++c) {
                double s = log_priors[c];
                for (std::size_t j = 0; j < n_features; ++j) {
                    const double d = x(i, j) - means(c, j);
                    s -= 0.5 * (kLog2Pi + std::log(vars(c, j)) + d * d / vars(c, j));
                }
                score[c] = s;
            }
            out[i] = argmax_lowest(score);
        }
        return out;
    }

    nlohmann::json params_to_json() const override {
        auto mat_rows = [](const Matrix& m) {
            nlohmann::json rows = nlohmann::json::array();
            for (std::size_t i = 0; i < m.rows(); ++i)
                rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
            return rows;
        };
        return {{"means", mat_rows(means)}, {"vars", mat_rows(vars)}, {"log_priors", log_priors}};
    }
};

struct KnnModel final : LearnerModel {
    int k = 5;
    std::vector<int> ref_label_indices; // class index per reference row

    std::vector<int> predict_indices(const Matrix& x) const override {
        const std::size_t n_ref = ref_label_indices.size();
        std::vector<int> out(x.rows());
        std::vector<std::size_t> order(n_ref);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            const auto row = x.row(i);
            const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), n_ref);
            std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kk),
                              order.end(), [&](std::size_t a, std::size_t b) {
                                  if (row[a] != row[b]) return row[a] < row[b];
                                  return a < b;
                              });
            std::vector<double> votes(classes.size(), 0.0);
            for (std::size_t r = 0; r < kk; ++r)
                votes[static_cast<std::size_t>(ref_label_indices[order[r]])] += 1.0;
            out[i] = argmax_lowest(votes);
        }
        return out;
    }

    nlohmann::json params_to_json() const override {
        return {{"k", k}, {"ref_label_indices", ref_label_indices}};
    }
};

} // namespace
} // namespace detail

namespace {

using detail::LearnerModel;

struct EncodedLabels {
    std::vector<int> classes;   // sorted distinct label values
    std::vector<int> indices;   // per-row class index
};

EncodedLabels encode_labels(const std::vector<int>& y) {
    EncodedLabels enc;
    std::set<int> distinct(y.begin(), y.end());
    enc.classes.assign(distinct.begin(), distinct.end());
    enc.indices.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto it = std::lower_bound(enc.classes.begin(), enc.classes.end(), y[i]);
        enc.indices[i] = static_cast<int>(it - enc.classes.begin());
    }
    return enc;
}

Matrix one_hot(const std::vector<int>& class_indices, std::size_t n_classes) {
    Matrix y(class_indices.size(), n_classes, 0.0);
    for (std::size_t i = 0; i < class_indices.size(); ++i)
        y(i, static_cast<std::size_t>(class_indices[i])) = 1.0;
    return y;
}

int effective_mtry(const Hyperparams& hp, std::size_t p) {
    if (hp.features_per_split > 0)
        return std::min(hp.features_per_split, static_cast<int>(p));
    return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(p)))));
}

std::shared_ptr<detail::DecisionTreeModel> fit_decision_tree(const Matrix& x,
                                                             const EncodedLabels& enc,
                                                             const Hyperparams& hp,
                                                             std::uint64_t seed) {
    tree::TreeOptions opt;
    opt.criterion = tree::Criterion::gini;
    opt.max_depth = hp.max_depth;
    opt.min_samples_split = hp.min_samples_split;
    Rng rng(mix_seed(seed, 0));
    std::vector<double> w(x.rows(), 1.0);
    auto model = std::make_shared<detail::DecisionTreeModel>();
    model->tree = tree::fit_classification_tree(x, enc.indices, static_cast<int>(enc.classes.size()),
                                                w, opt, rng);
    return model;
}

std::shared_ptr<detail::ForestModel> fit_forest(const Matrix& x, const EncodedLabels& enc,
                                                const Hyperparams& hp, std::uint64_t seed,
                                                bool extra_trees) {
    tree::TreeOptions opt;
    opt.criterion = tree::Criterion::gini;
    opt.max_depth = hp.max_depth;
    opt.min_samples_split = hp.min_samples_split;
    opt.features_per_split = effective_mtry(hp, x.cols());
    opt.random_thresholds = extra_trees;
    const bool bootstrap = extra_trees ? false : hp.bootstrap;

    auto model = std::make_shared<detail::ForestModel>();
    model->trees.resize(static_cast<std::size_t>(hp.n_trees));
    const int n_classes = static_cast<int>(enc.classes.size());
    parallel_for(static_cast<std::size_t>(hp.n_trees), [&](std::size_t t) {
        // Per-tree substream: reproducible under any tree scheduling.
        Rng rng(mix_seed(seed, t));
        if (bootstrap) {
            Matrix xb(x.rows(), x.cols());
            std::vector<int> yb(x.rows());
            for (std::size_t i = 0; i < x.rows(); ++i) {
                const std::size_t src = static_cast<std::size_t>(rng.uniform_int(x.rows()));
                for (std::size_t j = 0; j < x.cols(); ++j) xb(i, j) = x(src, j);
                yb[i] = enc.indices[src];
            }
            std::vector<double> w(x.rows(), 1.0);
            model->trees[t] = tree::fit_classification_tree(xb, yb, n_classes, w, opt, rng);
        } else {
            std::vector<double> w(x.rows(), 1.0);
            model->trees[t] =
                tree::fit_classification_tree(x, enc.indices, n_classes, w, opt, rng);
        }
    });
    return model;
}

std::shared_ptr<detail::AdaBoostModel> fit_adaboost(const Matrix& x, const EncodedLabels& enc,
                                                    const Hyperparams& hp, std::uint64_t seed) {
    const std::size_t n = x.rows();
    const int n_classes = static_cast<int>(enc.classes.size());
    std::vector<double> w(n, 1.0 / static_cast<double>(n));

    tree::TreeOptions opt;
    opt.criterion = tree::Criterion::gini;
    opt.max_depth = 1;
    opt.min_samples_split = 2;

    auto model = std::make_shared<detail::AdaBoostModel>();
    for (int round = 0; round < hp.boost_rounds; ++round) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(round)));
        tree::Tree stump = tree::fit_classification_tree(x, enc.indices, n_classes, w, opt, rng);
        double err = 0.0;
        std::vector<int> pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = stump.predict_index(x.row(i));
            if (pred[i] != enc.indices[i]) err += w[i];
        }
        if (err <= 0.0) {
            // Perfect stump: dominate the vote and stop.
            model->stumps.push_back(std::move(stump));
            model->alphas.push_back(std::log(1e10) + std::log(std::max(1.0, n_classes - 1.0)));
            break;
        }
        const double random_error = 1.0 - 1.0 / static_cast<double>(n_classes);
        if (err >= random_error) {
            if (model->stumps.empty()) {
                model->stumps.push_back(std::move(stump));
                model->alphas.push_back(1.0);
            }
            break;
        }
        // SAMME weight.
        const double alpha = std::log((1.0 - err) / err) + std::log(n_classes - 1.0);
        model->alphas.push_back(alpha);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (pred[i] != enc.indices[i]) w[i] *= std::exp(alpha);
            total += w[i];
        }
        for (double& wi : w) wi /= total;
        model->stumps.push_back(std::move(stump));
    }
    return model;
}

std::shared_ptr<detail::GradientBoostingModel> fit_gradient_boosting(const Matrix& x,
                                                                     const EncodedLabels& enc,
                                                                     const Hyperparams& hp,
                                                                     std::uint64_t seed) {
    const std::size_t n = x.rows();
    const std::size_t n_classes = enc.classes.size();
    auto model = std::make_shared<detail::GradientBoostingModel>();
    model->learning_rate = hp.boost_learning_rate;

    Matrix f(n, n_classes, 0.0);
    tree::TreeOptions opt;
    opt.criterion = tree::Criterion::mse;
    opt.max_depth = hp.gb_tree_depth;
    opt.min_samples_split = hp.min_samples_split;

    std::vector<double> residual(n);
    for (int round = 0; round < hp.boost_rounds; ++round) {
        Matrix probs = f;
        for (std::size_t i = 0; i < n; ++i) softmax_row(probs.row(i));
        std::vector<tree::Tree> round_trees;
        round_trees.reserve(n_classes);
        for (std::size_t c = 0; c < n_classes; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                const double target = enc.indices[i] == static_cast<int>(c) ? 1.0 : 0.0;
                residual[i] = target - probs(i, c);
            }
            Rng rng(mix_seed(seed, static_cast<std::uint64_t>(round), c));
            tree::Tree t = tree::fit_regression_tree(x, residual, opt, rng);
            for (std::size_t i = 0; i < n; ++i)
                f(i, c) += hp.boost_learning_rate * t.predict_value(x.row(i));
            round_trees.push_back(std::move(t));
        }
        model->trees.push_back(std::move(round_trees));
    }
    return model;
}

std::shared_ptr<detail::LinearModel> fit_logistic(const Matrix& x, const EncodedLabels& enc,
                                                  const Hyperparams& hp) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    const std::size_t n_classes = enc.classes.size();
    Matrix w(n_classes, p, 0.0);
    std::vector<double> b(n_classes, 0.0);
    const Matrix y = one_hot(enc.indices, n_classes);

    Matrix grad_w(n_classes, p);
    std::vector<double> grad_b(n_classes);
    std::vector<double> score(n_classes);
    for (int iter = 0; iter < hp.logreg_iterations; ++iter) {
        std::fill(grad_w.data().begin(), grad_w.data().end(), 0.0);
        std::fill(grad_b.begin(), grad_b.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < n_classes; ++c) {
                double s = b[c];
                for (std::size_t j = 0; j < p; ++j) s += w(c, j) * x(i, j);
                score[c] = s;
            }
            softmax_row(score);
            for (std::size_t c = 0; c < n_classes; ++c) {
                const double delta = score[c] - y(i, c);
                grad_b[c] += delta;
                for (std::size_t j = 0; j < p; ++j) grad_w(c, j) += delta * x(i, j);
            }
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        const double lr = hp.logreg_learning_rate;
        for (std::size_t c = 0; c < n_classes; ++c) {
            b[c] -= lr * grad_b[c] * inv_n;
            for (std::size_t j = 0; j < p; ++j) {
                if (hp.logreg_l1_mode) {
                    double next = w(c, j) - lr * grad_w(c, j) * inv_n;
                    // proximal soft-threshold step
                    const double shrink = lr * hp.logreg_l1;
                    if (next > shrink)
                        next -= shrink;
                    else if (next < -shrink)
                        next += shrink;
                    else
                        next = 0.0;
                    w(c, j) = next;
                } else {
                    w(c, j) -= lr * (grad_w(c, j) * inv_n + hp.logreg_l2 * w(c, j));
                }
            }
        }
    }

    auto model = std::make_shared<detail::LinearModel>();
    model->coef = std::move(w);
    model->intercept = std::move(b);
    return model;
}

std::shared_ptr<detail::LinearModel> fit_lda(const Matrix& x, const EncodedLabels& enc,
                                             const Hyperparams& hp) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    const std::size_t n_classes = enc.classes.size();

    Matrix means(n_classes, p, 0.0);
    std::vector<double> counts(n_classes, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(enc.indices[i]);
        counts[c] += 1.0;
        for (std::size_t j = 0; j < p; ++j) means(c, j) += x(i, j);
    }
    for (std::size_t c = 0; c < n_classes; ++c)
        for (std::size_t j = 0; j < p; ++j) means(c, j) /= counts[c];

    Matrix cov(p, p, 0.0);
    std::vector<double> centered(p);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(enc.indices[i]);
        for (std::size_t j = 0; j < p; ++j) centered[j] = x(i, j) - means(c, j);
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t bj = a; bj < p; ++bj) cov(a, bj) += centered[a] * centered[bj];
    }
    const double denom = std::max<double>(1.0, static_cast<double>(n) - static_cast<double>(n_classes));
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t bj = a; bj < p; ++bj) {
            cov(a, bj) /= denom;
            cov(bj, a) = cov(a, bj);
        }
        cov(a, a) += hp.lda_epsilon;
    }

    // Solve cov * W = means^T, one column per class.
    Matrix rhs(p, n_classes);
    for (std::size_t c = 0; c < n_classes; ++c)
        for (std::size_t j = 0; j < p; ++j) rhs(j, c) = means(c, j);
    const Matrix solved = solve_spd(std::move(cov), rhs);

    auto model = std::make_shared<detail::LinearModel>();
    model->coef = Matrix(n_classes, p);
    model->intercept.assign(n_classes, 0.0);
    for (std::size_t c = 0; c < n_classes; ++c) {
        double quad = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            model->coef(c, j) = solved(j, c);
            quad += means(c, j) * solved(j, c);
        }
        model->intercept[c] = -0.5 * quad + std::log(counts[c] / static_cast<double>(n));
    }
    return model;
}

std::shared_ptr<detail::LinearModel> fit_ridge(const Matrix& x, const EncodedLabels& enc,
                                               const Hyperparams& hp) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    const std::size_t n_classes = enc.classes.size();
    const std::size_t pa = p + 1; // intercept column appended, unpenalized

    Matrix a(pa, pa, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < p; ++r) {
            for (std::size_t c = r; c < p; ++c) a(r, c) += x(i, r) * x(i, c);
            a(r, p) += x(i, r);
        }
    }
    a(p, p) = static_cast<double>(n);
    for (std::size_t r = 0; r < pa; ++r)
        for (std::size_t c = 0; c < r; ++c) a(r, c) = a(c, r);
    for (std::size_t r = 0; r < p; ++r) a(r, r) += hp.ridge_lambda;

    // rhs = X~^T Y with Y one-hot: column c sums the rows of class c.
    Matrix rhs(pa, n_classes, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(enc.indices[i]);
        for (std::size_t j = 0; j < p; ++j) rhs(j, c) += x(i, j);
        rhs(p, c) += 1.0;
    }

    const Matrix solved = solve_spd(std::move(a), rhs);
    auto model = std::make_shared<detail::LinearModel>();
    model->coef = Matrix(n_classes, p);
    model->intercept.assign(n_classes, 0.0);
    for (std::size_t c = 0; c < n_classes; ++c) {
        for (std::size_t j = 0; j < p; ++j) model->coef(c, j) = solved(j, c);
        model->intercept[c] = solved(p, c);
    }
    return model;
}

std::shared_ptr<detail::LinearModel> fit_perceptron(const Matrix& x, const EncodedLabels& enc,
                                                    const Hyperparams& hp) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    const std::size_t n_classes = enc.classes.size();
    auto model = std::make_shared<detail::LinearModel>();
    model->coef = Matrix(n_classes, p, 0.0);
    model->intercept.assign(n_classes, 0.0);

    const double lr = hp.perceptron_learning_rate;
    for (std::size_t c = 0; c < n_classes; ++c) {
        for (int epoch = 0; epoch < hp.perceptron_epochs; ++epoch) {
            bool any_update = false;
            for (std::size_t i = 0; i < n; ++i) {
                const double target = enc.indices[i] == static_cast<int>(c) ? 1.0 : -1.0;
                double s = model->intercept[c];
                for (std::size_t j = 0; j < p; ++j) s += model->coef(c, j) * x(i, j);
                if (target * s <= 0.0) {
                    for (std::size_t j = 0; j < p; ++j) model->coef(c, j) += lr * target * x(i, j);
                    model->intercept[c] += lr * target;
                    any_update = true;
                }
            }
            if (!any_update) break;
        }
    }
    return model;
}

std::shared_ptr<detail::GaussianNbModel> fit_gaussian_nb(const Matrix& x, const EncodedLabels& enc,
                                                         const Hyperparams& hp) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    const std::size_t n_classes = enc.classes.size();
    auto model = std::make_shared<detail::GaussianNbModel>();
    model->means = Matrix(n_classes, p, 0.0);
    model->vars = Matrix(n_classes, p, 0.0);
    model->log_priors.assign(n_classes, 0.0);

    std::vector<double> counts(n_classes, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(enc.indices[i]);
        counts[c] += 1.0;
        for (std::size_t j = 0; j < p; ++j) model->means(c, j) += x(i, j);
    }
    for (std::size_t c = 0; c < n_classes; ++c)
        for (std::size_t j = 0; j < p; ++j) model->means(c, j) /= counts[c];
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(enc.indices[i]);
        for (std::size_t j = 0; j < p; ++j) {
            const double d = x(i, j) - model->means(c, j);
            model->vars(c, j) += d * d;
        }
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
        for (std::size_t j = 0; j < p; ++j)
            model->vars(c, j) = std::max(hp.nb_variance_floor, model->vars(c, j) / counts[c]);
        model->log_priors[c] = std::log(counts[c] / static_cast<double>(n));
    }
    return model;
}

std::shared_ptr<detail::KnnModel> fit_knn(const Matrix& x, const EncodedLabels& enc,
                                          const Hyperparams& hp) {
    if (x.rows() != x.cols())
        fail_invalid("knn_precomputed: expected a square distance matrix, got " +
                     std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
    auto model = std::make_shared<detail::KnnModel>();
    model->k = std::min<int>(hp.knn_k, static_cast<int>(x.rows()));
    model->ref_label_indices = enc.indices;
    return model;
}

void validate_fit_inputs(LearnerKind kind, const Matrix& x, const std::vector<int>& y) {
    if (x.rows() == 0 || x.cols() == 0) fail_invalid("fit_learner: empty data");
    if (x.rows() < 2) fail_invalid("fit_learner: need at least 2 rows");
    if (y.size() != x.rows()) fail_invalid("fit_learner: label count does not match rows");
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j)
            if (!std::isfinite(x(i, j)))
                fail_invalid("fit_learner: non-finite entry at row " + std::to_string(i) +
                             ", column " + std::to_string(j));
    const std::set<int> distinct(y.begin(), y.end());
    if (distinct.size() < 2) fail_compute("fit_learner: training data has a single class");
    (void)kind;
}

} // namespace

TrainedLearner::TrainedLearner(std::shared_ptr<const detail::LearnerModel> impl)
    : impl_(std::move(impl)) {}

const detail::LearnerModel& TrainedLearner::impl() const {
    if (!impl_) fail_invalid("TrainedLearner: not fitted");
    return *impl_;
}

LearnerKind TrainedLearner::kind() const { return impl().kind; }
const std::vector<int>& TrainedLearner::classes() const { return impl().classes; }
std::uint64_t TrainedLearner::seed() const { return impl().seed; }
std::size_t TrainedLearner::n_features() const { return impl().n_features; }

std::vector<int> TrainedLearner::predict(const Matrix& x) const {
    const auto& m = impl();
    if (x.cols() != m.n_features)
        fail_invalid("predict: expected " + std::to_string(m.n_features) + " columns, got " +
                     std::to_string(x.cols()));
    std::vector<int> idx = m.predict_indices(x);
    std::vector<int> labels(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        labels[i] = m.classes[static_cast<std::size_t>(idx[i])];
    return labels;
}

TrainedLearner fit_learner(LearnerKind kind, const Matrix& x, const std::vector<int>& y,
                           const Hyperparams& hp, std::uint64_t seed) {
    hp.validate();
    validate_fit_inputs(kind, x, y);
    const EncodedLabels enc = encode_labels(y);

    std::shared_ptr<detail::LearnerModel> model;
    switch (kind) {
        case LearnerKind::DecisionTree:
            model = fit_decision_tree(x, enc, hp, seed);
            break;
        case LearnerKind::RandomForest:
            model = fit_forest(x, enc, hp, seed, /*extra_trees=*/false);
            break;
        case LearnerKind::ExtraTrees:
            model = fit_forest(x, enc, hp, seed, /*extra_trees=*/true);
            break;
        case LearnerKind::GradientBoosting:
            model = fit_gradient_boosting(x, enc, hp, seed);
            break;
        case LearnerKind::AdaBoost:
            model = fit_adaboost(x, enc, hp, seed);
            break;
        case LearnerKind::Lda:
            model = fit_lda(x, enc, hp);
            break;
        case LearnerKind::LogisticRegression:
            model = fit_logistic(x, enc, hp);
            break;
        case LearnerKind::GaussianNb:
            model = fit_gaussian_nb(x, enc, hp);
            break;
        case LearnerKind::Perceptron:
            model = fit_perceptron(x, enc, hp);
            break;
        case LearnerKind::RidgeClassifier:
            model = fit_ridge(x, enc, hp);
            break;
        case LearnerKind::KnnPrecomputed:
            model = fit_knn(x, enc, hp);
            break;
    }
    model->kind = kind;
    model->classes = enc.classes;
    model->seed = seed;
    model->n_features = x.cols();
    return TrainedLearner(model);
}

std::vector<int> predict_labels(const TrainedLearner& m, const Matrix& x) {
    return m.predict(x);
}

std::vector<double> intrinsic_importances(const TrainedLearner& m) {
    return m.impl().importances();
}

Matrix logistic_coefficients(const TrainedLearner& m) {
    if (m.kind() != LearnerKind::LogisticRegression)
        fail_invalid("logistic_coefficients: model is " + to_string(m.kind()));
    const auto* linear = dynamic_cast<const detail::LinearModel*>(&m.impl());
    if (!linear) fail_compute("logistic_coefficients: unexpected model layout");
    return linear->coef;
}

nlohmann::json TrainedLearner::to_json() const {
    const auto& m = impl();
    return {{"kind", to_string(m.kind)},
            {"classes", m.classes},
            {"seed", m.seed},
            {"n_features", m.n_features},
            {"params", m.params_to_json()}};
}

namespace {

Matrix matrix_from_json_rows(const nlohmann::json& j) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : j) rows.push_back(r.get<std::vector<double>>());
    return Matrix::from_rows(rows);
}

} // namespace

TrainedLearner TrainedLearner::from_json(const nlohmann::json& j) {
    const LearnerKind kind = learner_kind_from_string(j.at("kind").get<std::string>());
    const auto& params = j.at("params");

    std::shared_ptr<detail::LearnerModel> model;
    switch (kind) {
        case LearnerKind::DecisionTree: {
            auto m = std::make_shared<detail::DecisionTreeModel>();
            m->tree = tree::Tree::from_json(params.at("tree"));
            model = m;
            break;
        }
        case LearnerKind::RandomForest:
        case LearnerKind::ExtraTrees: {
            auto m = std::make_shared<detail::ForestModel>();
            for (const auto& jt : params.at("trees")) m->trees.push_back(tree::Tree::from_json(jt));
            model = m;
            break;
        }
        case LearnerKind::GradientBoosting: {
            auto m = std::make_shared<detail::GradientBoostingModel>();
            m->learning_rate = params.at("learning_rate").get<double>();
            for (const auto& jr : params.at("trees")) {
                std::vector<tree::Tree> round;
                for (const auto& jt : jr) round.push_back(tree::Tree::from_json(jt));
                m->trees.push_back(std::move(round));
            }
            model = m;
            break;
        }
        case LearnerKind::AdaBoost: {
            auto m = std::make_shared<detail::AdaBoostModel>();
            for (const auto& jt : params.at("stumps")) m->stumps.push_back(tree::Tree::from_json(jt));
            m->alphas = params.at("alphas").get<std::vector<double>>();
            if (m->alphas.size() != m->stumps.size()) fail_data("adaboost document is inconsistent");
            model = m;
            break;
        }
        case LearnerKind::Lda:
        case LearnerKind::LogisticRegression:
        case LearnerKind::Perceptron:
        case LearnerKind::RidgeClassifier: {
            auto m = std::make_shared<detail::LinearModel>();
            m->coef = matrix_from_json_rows(params.at("coef"));
            m->intercept = params.at("intercept").get<std::vector<double>>();
            model = m;
            break;
        }
        case LearnerKind::GaussianNb: {
            auto m = std::make_shared<detail::GaussianNbModel>();
            m->means = matrix_from_json_rows(params.at("means"));
            m->vars = matrix_from_json_rows(params.at("vars"));
            m->log_priors = params.at("log_priors").get<std::vector<double>>();
            model = m;
            break;
        }
        case LearnerKind::KnnPrecomputed: {
            auto m = std::make_shared<detail::KnnModel>();
            m->k = params.at("k").get<int>();
            m->ref_label_indices = params.at("ref_label_indices").get<std::vector<int>>();
            model = m;
            break;
        }
    }
    model->kind = kind;
    model->classes = j.at("classes").get<std::vector<int>>();
    model->seed = j.at("seed").get<std::uint64_t>();
    model->n_features = j.at("n_features").get<std::size_t>();
    if (model->classes.size() < 2) fail_data("learner document has fewer than 2 classes");
    return TrainedLearner(model);
}

} // namespace quxai
