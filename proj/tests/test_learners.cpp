#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "quxai/learners.hpp"
#include "quxai/rng.hpp"

using namespace quxai;

namespace {

struct Dataset {
    Matrix x;
    std::vector<int> y;
};

// Two 1-D Gaussian clusters at mu0/mu1 with unit sigma.
Dataset gaussian_clusters(double mu0, double mu1, std::size_t per_class, std::uint64_t seed) {
    Dataset d;
    d.x = Matrix(2 * per_class, 1);
    d.y.resize(2 * per_class);
    Rng rng(seed);
    for (std::size_t i = 0; i < per_class; ++i) {
        d.x(i, 0) = rng.normal(mu0, 1.0);
        d.y[i] = 0;
        d.x(per_class + i, 0) = rng.normal(mu1, 1.0);
        d.y[per_class + i] = 1;
    }
    return d;
}

// Separable 2-D blobs for boosting monotonicity checks.
Dataset blobs_2d(std::uint64_t seed) {
    Dataset d;
    const std::size_t per_class = 40;
    d.x = Matrix(2 * per_class, 2);
    d.y.resize(2 * per_class);
    Rng rng(seed);
    for (std::size_t i = 0; i < per_class; ++i) {
        d.x(i, 0) = rng.normal(-2.0, 0.5);
        d.x(i, 1) = rng.normal(-1.0, 0.5);
        d.y[i] = 0;
        d.x(per_class + i, 0) = rng.normal(2.0, 0.5);
        d.x(per_class + i, 1) = rng.normal(1.5, 0.5);
        d.y[per_class + i] = 1;
    }
    return d;
}

double train_accuracy(const TrainedLearner& m, const Dataset& d) {
    const std::vector<int> pred = m.predict(d.x);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < d.y.size(); ++i)
        if (pred[i] == d.y[i]) ++ok;
    return static_cast<double>(ok) / static_cast<double>(d.y.size());
}

// Best single-threshold accuracy on a 1-D dataset, by enumeration.
double best_threshold_accuracy(const Dataset& d) {
    std::vector<double> cuts = d.x.column(0);
    std::sort(cuts.begin(), cuts.end());
    double best = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double t = 0.5 * (cuts[c] + cuts[c + 1]);
        for (int low_class : {0, 1}) {
            std::size_t ok = 0;
            for (std::size_t i = 0; i < d.y.size(); ++i) {
                const int pred = d.x(i, 0) <= t ? low_class : 1 - low_class;
                if (pred == d.y[i]) ++ok;
            }
            best = std::max(best, static_cast<double>(ok) / static_cast<double>(d.y.size()));
        }
    }
    return best;
}

Matrix random_grid(std::size_t n, std::uint64_t seed) {
    Matrix grid(n, 2);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        grid(i, 0) = rng.uniform(-4.0, 4.0);
        grid(i, 1) = rng.uniform(-4.0, 4.0);
    }
    return grid;
}

} // namespace

TEST_CASE("decision tree: one perfect split") {
    Dataset d;
    d.x = Matrix(20, 1);
    d.y.resize(20);
    for (std::size_t i = 0; i < 10; ++i) {
        d.x(2 * i, 0) = 0.0;
        d.y[2 * i] = 0;
        d.x(2 * i + 1, 0) = 1.0;
        d.y[2 * i + 1] = 1;
    }
    const TrainedLearner m = fit_learner(LearnerKind::DecisionTree, d.x, d.y, {}, 1);
    CHECK(train_accuracy(m, d) == 1.0);

    const auto imp = intrinsic_importances(m);
    REQUIRE(imp.size() == 1);
    CHECK(imp[0] == doctest::Approx(1.0));
}

TEST_CASE("decision tree: distinct rows reach pure leaves") {
    Rng rng(3);
    Matrix x(24, 3);
    std::vector<int> y(24);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < 3; ++j) x(i, j) = rng.uniform();
        y[i] = static_cast<int>(rng.uniform_int(3));
    }
    y[0] = 0;
    y[1] = 1;
    y[2] = 2;
    const TrainedLearner m = fit_learner(LearnerKind::DecisionTree, x, y, {}, 9);
    CHECK(m.predict(x) == y);
}

TEST_CASE("gaussian nb tracks the Bayes-optimal rule on separated clusters") {
    const Dataset train = gaussian_clusters(0.0, 10.0, 100, 21);
    const Dataset test = gaussian_clusters(0.0, 10.0, 100, 22);
    const TrainedLearner m = fit_learner(LearnerKind::GaussianNb, train.x, train.y, {}, 5);

    // Equal priors, equal sigma: the Bayes rule is the midpoint threshold.
    std::size_t ok_bayes = 0;
    for (std::size_t i = 0; i < test.y.size(); ++i)
        if ((test.x(i, 0) > 5.0 ? 1 : 0) == test.y[i]) ++ok_bayes;
    const double bayes_acc = static_cast<double>(ok_bayes) / static_cast<double>(test.y.size());

    CHECK(std::fabs(train_accuracy(m, test) - bayes_acc) <= 0.02);
}

TEST_CASE("logistic regression cannot beat the best 1-D threshold on alternating clusters") {
    // Four clusters at 0,1,2,3 with labels A,B,A,B: no threshold beats 0.75.
    Dataset d;
    const std::size_t per = 10;
    d.x = Matrix(4 * per, 1);
    d.y.resize(4 * per);
    Rng rng(17);
    for (std::size_t c = 0; c < 4; ++c) {
        for (std::size_t i = 0; i < per; ++i) {
            d.x(c * per + i, 0) = static_cast<double>(c) + 0.1 * rng.uniform();
            d.y[c * per + i] = static_cast<int>(c % 2);
        }
    }
    CHECK(best_threshold_accuracy(d) == doctest::Approx(0.75));
    const TrainedLearner m = fit_learner(LearnerKind::LogisticRegression, d.x, d.y, {}, 1);
    CHECK(train_accuracy(m, d) <= 0.75);
}

TEST_CASE("knn precomputed: zero self-distance wins at k=1") {
    Matrix dist(4, 4, 1.0);
    for (std::size_t i = 0; i < 4; ++i) dist(i, i) = 0.0;
    const std::vector<int> y{0, 1, 1, 0};
    Hyperparams hp;
    hp.knn_k = 1;
    const TrainedLearner m = fit_learner(LearnerKind::KnnPrecomputed, dist, y, hp, 0);
    CHECK(m.predict(dist) == y);
}

TEST_CASE("knn precomputed rejects non-square fit input") {
    CHECK_THROWS_AS((void)fit_learner(LearnerKind::KnnPrecomputed, Matrix(3, 2, 0.5),
                                      std::vector<int>{0, 1, 0}, {}, 0),
                    Error);
}

TEST_CASE("perceptron: all-zero weights and biases decode to the lowest class value") {
    // The decode contract on exact ties: build the all-zero model directly.
    const nlohmann::json doc{
        {"kind", "perceptron"},
        {"classes", {5, 6, 7, 8}},
        {"seed", 0},
        {"n_features", 2},
        {"params",
         {{"coef", {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}}},
          {"intercept", {0.0, 0.0, 0.0, 0.0}}}}};
    const TrainedLearner m = TrainedLearner::from_json(doc);
    Matrix probe(3, 2);
    probe(0, 0) = 0.0;
    probe(1, 0) = 1.5;
    probe(2, 1) = -2.0;
    for (int label : m.predict(probe)) CHECK(label == 5);
}

TEST_CASE("determinism: equal inputs and seed give identical fits") {
    const Dataset d = blobs_2d(77);
    const Matrix grid = random_grid(50, 99);
    for (LearnerKind kind : all_learner_kinds()) {
        if (kind == LearnerKind::KnnPrecomputed) continue;
        CAPTURE(to_string(kind));
        const TrainedLearner a = fit_learner(kind, d.x, d.y, {}, 1234);
        const TrainedLearner b = fit_learner(kind, d.x, d.y, {}, 1234);
        CHECK(a.predict(grid) == b.predict(grid));
        CHECK(a.to_json() == b.to_json());
    }
}

TEST_CASE("random forest with 1 tree, full features, no bootstrap equals the decision tree") {
    const Dataset d = blobs_2d(31);
    Hyperparams hp;
    hp.n_trees = 1;
    hp.features_per_split = 2;
    hp.bootstrap = false;
    const TrainedLearner forest = fit_learner(LearnerKind::RandomForest, d.x, d.y, hp, 5);
    const TrainedLearner tree = fit_learner(LearnerKind::DecisionTree, d.x, d.y, hp, 5);
    const Matrix grid = random_grid(60, 8);
    CHECK(forest.predict(grid) == tree.predict(grid));
}

TEST_CASE("boosting training error is non-increasing in rounds on separable data") {
    const Dataset d = blobs_2d(55);
    for (LearnerKind kind : {LearnerKind::AdaBoost, LearnerKind::GradientBoosting}) {
        CAPTURE(to_string(kind));
        double prev_error = 1.0;
        for (int rounds : {1, 5, 10, 25, 50}) {
            Hyperparams hp;
            hp.boost_rounds = rounds;
            const TrainedLearner m = fit_learner(kind, d.x, d.y, hp, 3);
            const double err = 1.0 - train_accuracy(m, d);
            CHECK(err <= prev_error + 1e-12);
            prev_error = err;
        }
    }
}

TEST_CASE("lda and ridge are invariant to shifting one feature") {
    const Dataset d = blobs_2d(91);
    Dataset shifted = d;
    for (std::size_t i = 0; i < shifted.x.rows(); ++i) shifted.x(i, 1) += 37.5;

    const Matrix grid = random_grid(40, 14);
    Matrix grid_shifted = grid;
    for (std::size_t i = 0; i < grid.rows(); ++i) grid_shifted(i, 1) += 37.5;

    for (LearnerKind kind : {LearnerKind::Lda, LearnerKind::RidgeClassifier}) {
        CAPTURE(to_string(kind));
        const TrainedLearner base = fit_learner(kind, d.x, d.y, {}, 2);
        const TrainedLearner moved = fit_learner(kind, shifted.x, shifted.y, {}, 2);
        CHECK(base.predict(grid) == moved.predict(grid_shifted));
    }
}

TEST_CASE("tree importances: nonnegative, normalized, informative feature dominates") {
    // Feature 1 alone determines y; feature 0 is independent noise.
    Rng rng(12);
    Matrix x(60, 2);
    std::vector<int> y(60);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        x(i, 0) = rng.uniform();
        x(i, 1) = rng.uniform();
        y[i] = x(i, 1) > 0.5 ? 1 : 0;
    }
    for (LearnerKind kind :
         {LearnerKind::DecisionTree, LearnerKind::RandomForest, LearnerKind::ExtraTrees}) {
        CAPTURE(to_string(kind));
        const TrainedLearner m = fit_learner(kind, x, y, {}, 4);
        const auto imp = intrinsic_importances(m);
        REQUIRE(imp.size() == 2);
        for (double v : imp) CHECK(v >= 0.0);
        CHECK(std::accumulate(imp.begin(), imp.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(imp[1] > imp[0]);
    }

    // Exhaustive split-gain oracle: the best Gini gain on feature 1 beats any
    // split on feature 0.
    auto best_gain = [&](std::size_t feature) {
        std::vector<std::pair<double, int>> vals(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) vals[i] = {x(i, feature), y[i]};
        std::sort(vals.begin(), vals.end());
        const double n = static_cast<double>(vals.size());
        double total_pos = 0;
        for (auto& [v, label] : vals) total_pos += label;
        const double p = total_pos / n;
        const double parent = 1.0 - p * p - (1.0 - p) * (1.0 - p);
        double best = 0.0, left_pos = 0.0;
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            left_pos += vals[i].second;
            if (vals[i].first == vals[i + 1].first) continue;
            const double nl = static_cast<double>(i + 1), nr = n - nl;
            const double pl = left_pos / nl, pr = (total_pos - left_pos) / nr;
            const double gini_l = 1.0 - pl * pl - (1.0 - pl) * (1.0 - pl);
            const double gini_r = 1.0 - pr * pr - (1.0 - pr) * (1.0 - pr);
            best = std::max(best, parent - (nl / n) * gini_l - (nr / n) * gini_r);
        }
        return best;
    };
    CHECK(best_gain(1) > best_gain(0));
}

TEST_CASE("intrinsic importances reject non-tree models") {
    const Dataset d = blobs_2d(44);
    const TrainedLearner m = fit_learner(LearnerKind::GaussianNb, d.x, d.y, {}, 0);
    CHECK_THROWS_AS((void)intrinsic_importances(m), Error);
}

TEST_CASE("fit validation: single class, empty data, non-finite entries") {
    Matrix x(4, 1, 0.5);
    CHECK_THROWS_AS((void)fit_learner(LearnerKind::DecisionTree, x, {0, 0, 0, 0}, {}, 0), Error);
    CHECK_THROWS_AS((void)fit_learner(LearnerKind::DecisionTree, Matrix(), {}, {}, 0), Error);
    Matrix bad(2, 1);
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS((void)fit_learner(LearnerKind::DecisionTree, bad, {0, 1}, {}, 0), Error);
}

TEST_CASE("predict validates the feature width") {
    const Dataset d = blobs_2d(1);
    const TrainedLearner m = fit_learner(LearnerKind::DecisionTree, d.x, d.y, {}, 0);
    CHECK_THROWS_AS((void)m.predict(Matrix(2, 3, 0.0)), Error);
}

TEST_CASE("learner JSON round-trip preserves predictions bit-exactly") {
    const Dataset d = blobs_2d(13);
    const Matrix grid = random_grid(30, 2);
    for (LearnerKind kind : all_learner_kinds()) {
        if (kind == LearnerKind::KnnPrecomputed) continue;
        CAPTURE(to_string(kind));
        const TrainedLearner m = fit_learner(kind, d.x, d.y, {}, 6);
        const std::string text = m.to_json().dump();
        const TrainedLearner restored = TrainedLearner::from_json(nlohmann::json::parse(text));
        CHECK(m.predict(grid) == restored.predict(grid));
    }
}

TEST_CASE("learner kind names round-trip; unknown names fail with the kind list") {
    for (LearnerKind kind : all_learner_kinds()) {
        CHECK(learner_kind_from_string(to_string(kind)) == kind);
        CHECK(learner_kind_from_short_name(short_name(kind)) == kind);
    }
    CHECK_THROWS_WITH_AS((void)learner_kind_from_short_name("QBogus"),
                         doctest::Contains("valid kinds"), Error);
}

TEST_CASE("hyperparameter validation") {
    Hyperparams hp;
    hp.n_trees = 0;
    CHECK_THROWS_AS(hp.validate(), Error);
    hp = {};
    hp.logreg_learning_rate = 0.0;
    CHECK_THROWS_AS(hp.validate(), Error);
    hp = {};
    hp.knn_k = 0;
    CHECK_THROWS_AS(hp.validate(), Error);
}
