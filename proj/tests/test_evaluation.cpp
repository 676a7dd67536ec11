#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "quxai/datasets.hpp"
#include "quxai/evaluation.hpp"
#include "quxai/rng.hpp"

using namespace quxai;

TEST_CASE("recall_at_k: pinned cases") {
    const std::vector<double> truth{0.9, 0.8, 0.7, 0.1, 0.0, 0.0};
    CHECK(recall_at_k(truth, truth, 3) == doctest::Approx(1.0));

    // candidate top-3 {0,1,5}, truth top-3 {0,1,2} -> 2/3
    const std::vector<double> cand{0.9, 0.8, 0.1, 0.0, 0.0, 0.7};
    CHECK(recall_at_k(truth, cand, 3) == doctest::Approx(2.0 / 3.0));

    // disjoint top-3 sets
    const std::vector<double> disjoint{0.0, 0.0, 0.0, 0.9, 0.8, 0.7};
    CHECK(recall_at_k(truth, disjoint, 3) == doctest::Approx(0.0));
}

TEST_CASE("recall_at_k: ties break by ascending index and errors are rejected") {
    // all-equal candidate scores: top-3 = {0,1,2} by the tie rule
    const std::vector<double> truth{1.0, 1.0, 1.0, 0.0};
    const std::vector<double> flat(4, 0.5);
    CHECK(recall_at_k(truth, flat, 3) == doctest::Approx(1.0));

    CHECK_THROWS_AS((void)recall_at_k({1.0, 0.0}, {1.0, 0.0}, 3), Error);
    CHECK_THROWS_AS((void)recall_at_k({1.0}, {1.0, 0.0}, 1), Error);
    CHECK_THROWS_AS((void)recall_at_k({1.0, 0.0}, {1.0, 0.0}, 0), Error);
}

TEST_CASE("recall_at_k is invariant under consistent feature relabeling") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> truth(8), cand(8);
        for (double& v : truth) v = rng.uniform();
        for (double& v : cand) v = rng.uniform();
        const double base = recall_at_k(truth, cand, 3);

        auto perm = rng.permutation(8);
        std::vector<double> truth_p(8), cand_p(8);
        for (std::size_t i = 0; i < 8; ++i) {
            truth_p[perm[i]] = truth[i];
            cand_p[perm[i]] = cand[i];
        }
        CHECK(recall_at_k(truth_p, cand_p, 3) == doctest::Approx(base));
    }
}

TEST_CASE("spearman: pinned cases") {
    CHECK(spearman_rank_correlation({1, 2, 3}, {1, 3, 2}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(spearman_rank_correlation({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(spearman_rank_correlation({1, 2, 3, 4}, {8, 6, 4, 2}) == doctest::Approx(-1.0));
    // constant vector convention
    CHECK(spearman_rank_correlation({1, 1, 1}, {1, 2, 3}) == 0.0);
    CHECK_THROWS_AS((void)spearman_rank_correlation({1.0}, {1.0}), Error);
    CHECK_THROWS_AS((void)spearman_rank_correlation({1.0, 2.0}, {1.0}), Error);
}

TEST_CASE("spearman: invariant under strictly increasing transforms") {
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(7), b(7);
        for (double& v : a) v = rng.uniform(-2.0, 2.0);
        for (double& v : b) v = rng.uniform(-2.0, 2.0);
        const double base = spearman_rank_correlation(a, b);
        std::vector<double> a_t(7), b_t(7);
        for (std::size_t i = 0; i < 7; ++i) {
            a_t[i] = std::exp(a[i]);           // strictly increasing
            b_t[i] = 3.0 * b[i] + 11.0;        // strictly increasing
        }
        CHECK(spearman_rank_correlation(a_t, b_t) == doctest::Approx(base).epsilon(1e-12));
        CHECK(spearman_rank_correlation(a, a) == doctest::Approx(1.0));
    }
}

TEST_CASE("classification metrics: pinned confusion-matrix cases") {
    // perfect
    auto m = classification_metrics({0, 1, 2, 1}, {0, 1, 2, 1});
    CHECK(m.accuracy == doctest::Approx(1.0));
    CHECK(m.f1_macro == doctest::Approx(1.0));
    CHECK(m.precision_macro == doctest::Approx(1.0));
    CHECK(m.recall_macro == doctest::Approx(1.0));

    // balanced binary truth, all predictions class 0
    m = classification_metrics({0, 0, 1, 1}, {0, 0, 0, 0});
    CHECK(m.accuracy == doctest::Approx(0.5));
    CHECK(m.recall_macro == doctest::Approx(0.5));
    CHECK(m.precision_macro == doctest::Approx(0.25));
    CHECK(m.f1_macro == doctest::Approx(1.0 / 3.0));

    // single-class truth predicted correctly
    m = classification_metrics({2, 2, 2}, {2, 2, 2});
    CHECK(m.accuracy == doctest::Approx(1.0));
    CHECK(m.f1_macro == doctest::Approx(1.0));

    CHECK_THROWS_AS((void)classification_metrics({}, {}), Error);
}

TEST_CASE("classification metrics: invariant under class renaming") {
    Rng rng(21);
    std::vector<int> y(40), p(40);
    for (std::size_t i = 0; i < 40; ++i) {
        y[i] = static_cast<int>(rng.uniform_int(3));
        p[i] = static_cast<int>(rng.uniform_int(3));
    }
    const auto base = classification_metrics(y, p);
    // rename 0->7, 1->3, 2->5
    auto rename = [](int c) { return c == 0 ? 7 : c == 1 ? 3 : 5; };
    std::vector<int> y2(40), p2(40);
    for (std::size_t i = 0; i < 40; ++i) {
        y2[i] = rename(y[i]);
        p2[i] = rename(p[i]);
    }
    const auto renamed = classification_metrics(y2, p2);
    CHECK(renamed.accuracy == doctest::Approx(base.accuracy));
    CHECK(renamed.f1_macro == doctest::Approx(base.f1_macro));
    CHECK(renamed.precision_macro == doctest::Approx(base.precision_macro));
    CHECK(renamed.recall_macro == doctest::Approx(base.recall_macro));
}

TEST_CASE("run_ablation: grid shape and reproducibility") {
    std::vector<NamedTable> datasets;
    datasets.push_back({"planted_a", make_planted(120, 3, 2, PlantedRule::Threshold, 1)});
    datasets.push_back({"planted_b", make_planted(120, 3, 2, PlantedRule::Linear, 2)});

    AblationOptions opt;
    opt.repeats_k = 3;
    const EvalResult result = run_ablation(datasets, {1, 2, 3}, opt);
    CHECK(result.cells.size() == 2 * 2 * 4);
    for (const auto& cell : result.cells) {
        REQUIRE(!cell.failed);
        const double recall = cell.metrics.at("mean_recall_at_3");
        CHECK(recall >= 0.0);
        CHECK(recall <= 1.0);
        CHECK(cell.per_seed.at("recall_at_3").size() == 3);
    }

    const EvalResult again = run_ablation(datasets, {1, 2, 3}, opt);
    CHECK(again.to_json() == result.to_json());
    CHECK(again.to_csv() == result.to_csv());
}

TEST_CASE("run_ablation: failing dataset is recorded without sinking the run") {
    std::vector<NamedTable> datasets;
    datasets.push_back({"ok", make_planted(120, 3, 2, PlantedRule::Threshold, 5)});
    // Too few features for the ablation precondition (needs >= 4).
    datasets.push_back({"narrow", make_planted(120, 1, 1, PlantedRule::Threshold, 5)});

    const EvalResult result = run_ablation(datasets, {1}, {});
    bool saw_failure = false, saw_success = false;
    for (const auto& cell : result.cells) {
        if (cell.failed) {
            saw_failure = true;
            CHECK(!cell.error.empty());
        } else {
            saw_success = true;
        }
    }
    CHECK(saw_failure);
    CHECK(saw_success);
}

TEST_CASE("run_benchmark: schema carries paired classical and quxai metrics") {
    std::vector<NamedTable> datasets;
    datasets.push_back({"planted", make_planted(120, 2, 2, PlantedRule::Threshold, 3)});

    const EvalResult result = run_benchmark(
        datasets, {LearnerKind::DecisionTree, LearnerKind::GaussianNb}, {1, 2}, {});
    CHECK(result.cells.size() == 2);
    for (const auto& cell : result.cells) {
        REQUIRE(!cell.failed);
        for (const char* name :
             {"accuracy", "f1_macro", "precision_macro", "recall_macro"}) {
            CHECK(cell.metrics.count(std::string("classical_") + name) == 1);
            CHECK(cell.metrics.count(std::string("quxai_") + name) == 1);
        }
        for (const auto& [name, value] : cell.metrics) {
            CHECK(value >= 0.0);
            CHECK(value <= 1.0);
        }
    }

    // CSV: header + one row per cell.
    const std::string csv = result.to_csv();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    // Reproducible bit-exactly for the same seed list.
    const EvalResult again = run_benchmark(
        datasets, {LearnerKind::DecisionTree, LearnerKind::GaussianNb}, {1, 2}, {});
    CHECK(again.to_json() == result.to_json());
}

TEST_CASE("baseline importances: delegation and planted argmax") {
    const RawTable t = make_planted(150, 1, 3, PlantedRule::Threshold, 7);
    const PreparedDataset prep = prepare_data(t, 0.3, 7);
    const TrainedLearner learner =
        fit_learner(LearnerKind::DecisionTree, prep.x_train, prep.y_train, {}, 7);
    const IdentityExplainable target(learner);
    ExplainerConfig cfg;
    cfg.seed = 7;

    CHECK(baseline_importances(BaselineMethod::DciOnly, target, prep.x_train, prep.y_train, cfg) ==
          dci_scores(target, prep.x_train, prep.y_train, cfg));
    CHECK(baseline_importances(BaselineMethod::PiOnly, target, prep.x_train, prep.y_train, cfg) ==
          pi_scores(target, prep.x_train, prep.y_train, cfg));

    const auto l1 = baseline_importances_logreg_l1(prep.x_train, prep.y_train);
    REQUIRE(l1.size() == prep.x_train.cols());
    CHECK(std::max_element(l1.begin(), l1.end()) == l1.begin());

    CHECK(baseline_method_from_string("dci") == BaselineMethod::DciOnly);
    CHECK_THROWS_AS((void)baseline_method_from_string("shap"), Error);
}

TEST_CASE("pi-only baseline on constant columns is the zero vector") {
    Matrix x(20, 3, 0.4);
    std::vector<int> y(20);
    for (std::size_t i = 0; i < 20; ++i) y[i] = static_cast<int>(i % 2);
    const TrainedLearner learner = fit_learner(LearnerKind::GaussianNb, x, y, {}, 1);
    const IdentityExplainable target(learner);
    ExplainerConfig cfg;
    const auto pi = baseline_importances(BaselineMethod::PiOnly, target, x, y, cfg);
    for (double v : pi) CHECK(v == 0.0);
}

TEST_CASE("external score import validates its schema") {
    nlohmann::json good{{"feature_labels", {"a", "b"}}, {"scores", {0.5, 0.25}}};
    const ExternalScores s = import_external_scores(good);
    CHECK(s.feature_labels.size() == 2);
    CHECK(s.scores[1] == 0.25);

    nlohmann::json bad{{"feature_labels", {"a"}}, {"scores", {0.5, 0.25}}};
    CHECK_THROWS_AS((void)import_external_scores(bad), Error);
}

TEST_CASE("eval serialization: runtime never reaches JSON or CSV") {
    std::vector<NamedTable> datasets;
    datasets.push_back({"planted", make_planted(100, 2, 2, PlantedRule::Threshold, 11)});
    EvalResult result = run_benchmark(datasets, {LearnerKind::GaussianNb}, {1}, {});
    CHECK(result.runtime_seconds > 0.0);
    result.runtime_seconds = 123.456;
    const std::string dumped = result.to_json().dump() + result.to_csv();
    CHECK(dumped.find("123.456") == std::string::npos);
    CHECK(dumped.find("runtime") == std::string::npos);
}
