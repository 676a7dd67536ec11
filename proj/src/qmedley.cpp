#include "quxai/qmedley.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "quxai/parallel.hpp"
#include "quxai/rng.hpp"

namespace quxai {

namespace {

// Stream tags keep the DCI/PI/joint shuffle substreams disjoint.
constexpr std::uint64_t kPiStream = 0x5049u;      // "PI"
constexpr std::uint64_t kJointStream = 0x4a4fu;   // "JO"

double accuracy_of(const std::vector<int>& pred, const std::vector<int>& y) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (pred[i] == y[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(y.size());
}

double baseline_accuracy(const Explainable& m, const Matrix& x_ref, const std::vector<int>& y_ref) {
    return accuracy_of(m.predict(x_ref), y_ref);
}

void check_reference(const Matrix& x_ref, const std::vector<int>& y_ref) {
    if (x_ref.rows() == 0 || x_ref.cols() == 0) fail_invalid("explainer: empty reference data");
    if (x_ref.rows() != y_ref.size())
        fail_invalid("explainer: reference labels do not match rows");
}

// Accuracy with column j replaced by a seeded shuffle of itself.
double permuted_accuracy(const Explainable& m, const Matrix& x_ref, const std::vector<int>& y_ref,
                         std::size_t j, Rng& rng) {
    const std::vector<std::size_t> perm = rng.permutation(x_ref.rows());
    Matrix x = x_ref;
    for (std::size_t i = 0; i < x.rows(); ++i) x(i, j) = x_ref(perm[i], j);
    return accuracy_of(m.predict(x), y_ref);
}

// Mean accuracy drop for feature j. Drops are averaged (rather than
// averaging accuracies first) so a constant column yields exactly zero.
double pi_drop_for_feature(const Explainable& m, const Matrix& x_ref,
                           const std::vector<int>& y_ref, std::size_t j, double a_base,
                           const ExplainerConfig& cfg) {
    if (cfg.pi_mode == PiMode::Exhaustive) {
        if (x_ref.rows() > 8)
            fail_invalid("explainer: exhaustive permutations need at most 8 reference rows");
        std::vector<std::size_t> perm(x_ref.rows());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        double sum = 0.0;
        std::size_t count = 0;
        Matrix x = x_ref;
        do {
            for (std::size_t i = 0; i < x.rows(); ++i) x(i, j) = x_ref(perm[i], j);
            sum += a_base - accuracy_of(m.predict(x), y_ref);
            ++count;
        } while (std::next_permutation(perm.begin(), perm.end()));
        return sum / static_cast<double>(count);
    }

    double sum = 0.0;
    for (int k = 0; k < cfg.repeats_k; ++k) {
        Rng rng(mix_seed(cfg.seed, kPiStream, j, static_cast<std::uint64_t>(k)));
        sum += a_base - permuted_accuracy(m, x_ref, y_ref, j, rng);
    }
    return sum / static_cast<double>(cfg.repeats_k);
}

// Accuracy drop under simultaneous independent shuffles of columns a and b.
// Seeds derive from the unordered pair, so joint(a, b) == joint(b, a).
double joint_drop_for_pair(const Explainable& m, const Matrix& x_ref,
                           const std::vector<int>& y_ref, std::size_t a, std::size_t b,
                           double a_base, const ExplainerConfig& cfg) {
    const std::size_t lo = std::min(a, b);
    const std::size_t hi = std::max(a, b);
    double sum = 0.0;
    for (int k = 0; k < cfg.repeats_k; ++k) {
        Rng rng_lo(mix_seed(cfg.seed, kJointStream, lo * 1000003 + hi,
                            static_cast<std::uint64_t>(2 * k)));
        Rng rng_hi(mix_seed(cfg.seed, kJointStream, lo * 1000003 + hi,
                            static_cast<std::uint64_t>(2 * k + 1)));
        const std::vector<std::size_t> perm_lo = rng_lo.permutation(x_ref.rows());
        const std::vector<std::size_t> perm_hi = rng_hi.permutation(x_ref.rows());
        Matrix x = x_ref;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            x(i, lo) = x_ref(perm_lo[i], lo);
            x(i, hi) = x_ref(perm_hi[i], hi);
        }
        sum += a_base - accuracy_of(m.predict(x), y_ref);
    }
    return sum / static_cast<double>(cfg.repeats_k);
}

double pearson_abs(const Matrix& x, std::size_t a, std::size_t b) {
    const std::size_t n = x.rows();
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += x(i, a);
        mean_b += x(i, b);
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = x(i, a) - mean_a;
        const double db = x(i, b) - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a <= 0.0 || var_b <= 0.0) return 0.0;
    return std::fabs(cov / std::sqrt(var_a * var_b));
}

double population_stddev(const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

std::vector<double> dci_scores_with_base(const Explainable& m, const Matrix& x_ref,
                                         const std::vector<int>& y_ref,
                                         const ExplainerConfig& cfg, double a_base) {
    const std::size_t d = x_ref.cols();
    std::vector<double> out(d, 0.0);
    parallel_for(d, [&](std::size_t j) {
        Matrix x = x_ref;
        for (std::size_t i = 0; i < x.rows(); ++i) x(i, j) = cfg.neutral_value;
        out[j] = a_base - accuracy_of(m.predict(x), y_ref);
    });
    return out;
}

std::vector<double> pi_scores_with_base(const Explainable& m, const Matrix& x_ref,
                                        const std::vector<int>& y_ref, const ExplainerConfig& cfg,
                                        double a_base) {
    const std::size_t d = x_ref.cols();
    std::vector<double> out(d, 0.0);
    parallel_for(d, [&](std::size_t j) {
        out[j] = pi_drop_for_feature(m, x_ref, y_ref, j, a_base, cfg);
    });
    return out;
}

std::vector<double> interaction_scores_with_base(const Explainable& m, const Matrix& x_ref,
                                                 const std::vector<int>& y_ref,
                                                 const ExplainerConfig& cfg, double a_base,
                                                 const std::vector<double>& pi) {
    const std::size_t d = x_ref.cols();

    // Top-m partners by |Pearson|, excluding self, ties to the lowest index.
    const std::size_t m_partners =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.interaction_partners_m), d - 1);
    std::vector<std::vector<std::size_t>> partners(d);
    for (std::size_t j = 0; j < d; ++j) {
        std::vector<std::pair<double, std::size_t>> ranked;
        for (std::size_t l = 0; l < d; ++l) {
            if (l == j) continue;
            ranked.emplace_back(pearson_abs(x_ref, j, l), l);
        }
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        for (std::size_t r = 0; r < m_partners; ++r) partners[j].push_back(ranked[r].second);
    }

    // Joint drops per unordered pair, computed once.
    std::map<std::pair<std::size_t, std::size_t>, double> joint;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t l : partners[j]) {
            const std::pair<std::size_t, std::size_t> key{std::min(j, l), std::max(j, l)};
            if (joint.emplace(key, 0.0).second) pairs.push_back(key);
        }
    std::vector<double> pair_drop(pairs.size(), 0.0);
    parallel_for(pairs.size(), [&](std::size_t idx) {
        pair_drop[idx] =
            joint_drop_for_pair(m, x_ref, y_ref, pairs[idx].first, pairs[idx].second, a_base, cfg);
    });
    for (std::size_t idx = 0; idx < pairs.size(); ++idx) joint[pairs[idx]] = pair_drop[idx];

    std::vector<double> out(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double synergy = 0.0;
        for (std::size_t l : partners[j]) {
            const double joint_jl = joint.at({std::min(j, l), std::max(j, l)});
            synergy += std::max(0.0, joint_jl - pi[j] - pi[l]) / 2.0;
        }
        out[j] = pi[j] + (partners[j].empty()
                              ? 0.0
                              : synergy / static_cast<double>(partners[j].size()));
    }
    return out;
}

} // namespace

void ExplainerConfig::validate(std::size_t n_features) const {
    if (repeats_k < 1) fail_invalid("explainer: repeats must be >= 1");
    if (interaction_pi) {
        if (n_features < 2) fail_invalid("explainer: interaction PI needs at least 2 features");
        if (interaction_partners_m < 1)
            fail_invalid("explainer: interaction partner count must be >= 1");
    }
    if (!std::isfinite(neutral_value)) fail_invalid("explainer: neutral value must be finite");
}

nlohmann::json ExplainerConfig::to_json() const {
    return {{"repeats", repeats_k},
            {"seed", seed},
            {"adaptive_weighting", adaptive_weighting},
            {"interaction_pi", interaction_pi},
            {"interaction_partners_m", interaction_partners_m},
            {"neutral_value", neutral_value},
            {"pi_mode", pi_mode == PiMode::Sampled ? "sampled" : "exhaustive"}};
}

ExplainerConfig ExplainerConfig::from_json(const nlohmann::json& j) {
    ExplainerConfig cfg;
    if (j.contains("repeats")) cfg.repeats_k = j.at("repeats").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("adaptive_weighting"))
        cfg.adaptive_weighting = j.at("adaptive_weighting").get<bool>();
    if (j.contains("interaction_pi")) cfg.interaction_pi = j.at("interaction_pi").get<bool>();
    if (j.contains("interaction_partners_m"))
        cfg.interaction_partners_m = j.at("interaction_partners_m").get<int>();
    if (j.contains("neutral_value")) cfg.neutral_value = j.at("neutral_value").get<double>();
    if (j.contains("pi_mode"))
        cfg.pi_mode = j.at("pi_mode").get<std::string>() == "exhaustive" ? PiMode::Exhaustive
                                                                         : PiMode::Sampled;
    return cfg;
}

std::vector<double> dci_scores(const Explainable& m, const Matrix& x_ref,
                               const std::vector<int>& y_ref, const ExplainerConfig& cfg) {
    check_reference(x_ref, y_ref);
    cfg.validate(x_ref.cols());
    return dci_scores_with_base(m, x_ref, y_ref, cfg, baseline_accuracy(m, x_ref, y_ref));
}

std::vector<double> pi_scores(const Explainable& m, const Matrix& x_ref,
                              const std::vector<int>& y_ref, const ExplainerConfig& cfg) {
    check_reference(x_ref, y_ref);
    cfg.validate(x_ref.cols());
    return pi_scores_with_base(m, x_ref, y_ref, cfg, baseline_accuracy(m, x_ref, y_ref));
}

std::vector<double> interaction_pi_scores(const Explainable& m, const Matrix& x_ref,
                                          const std::vector<int>& y_ref,
                                          const ExplainerConfig& cfg) {
    check_reference(x_ref, y_ref);
    if (x_ref.cols() < 2) fail_invalid("explainer: interaction PI needs at least 2 features");
    cfg.validate(x_ref.cols());
    const double a_base = baseline_accuracy(m, x_ref, y_ref);
    const std::vector<double> pi = pi_scores_with_base(m, x_ref, y_ref, cfg, a_base);
    return interaction_scores_with_base(m, x_ref, y_ref, cfg, a_base, pi);
}

AggregateResult aggregate_scores(const std::vector<double>& dci, const std::vector<double>& pi,
                                 const ExplainerConfig& cfg) {
    if (dci.size() != pi.size()) fail_invalid("aggregate_scores: length mismatch");
    if (dci.empty()) fail_invalid("aggregate_scores: empty score vectors");

    AggregateResult res;
    if (cfg.adaptive_weighting) {
        const double s_d = population_stddev(dci);
        const double s_p = population_stddev(pi);
        if (s_d + s_p < 1e-12) {
            res.weight_dci = 0.5;
        } else {
            res.weight_dci = s_d / (s_d + s_p);
        }
    } else {
        res.weight_dci = 0.5;
    }
    res.weight_pi = 1.0 - res.weight_dci;
    res.final_scores.resize(dci.size());
    for (std::size_t j = 0; j < dci.size(); ++j)
        res.final_scores[j] = res.weight_dci * dci[j] + res.weight_pi * pi[j];
    return res;
}

ImportanceReport explain(const Explainable& m, const Matrix& x_ref, const std::vector<int>& y_ref,
                         const ExplainerConfig& cfg) {
    check_reference(x_ref, y_ref);
    cfg.validate(x_ref.cols());

    ImportanceReport report;
    report.config = cfg;
    report.model_descriptor = m.descriptor();
    for (std::size_t j = 0; j < x_ref.cols(); ++j)
        report.feature_labels.push_back("feature_" + std::to_string(j));

    report.baseline_accuracy = baseline_accuracy(m, x_ref, y_ref);
    report.dci = dci_scores_with_base(m, x_ref, y_ref, cfg, report.baseline_accuracy);
    report.pi = pi_scores_with_base(m, x_ref, y_ref, cfg, report.baseline_accuracy);

    const std::vector<double>* pi_side = &report.pi;
    if (cfg.interaction_pi) {
        report.interaction_pi = interaction_scores_with_base(m, x_ref, y_ref, cfg,
                                                             report.baseline_accuracy, report.pi);
        pi_side = &*report.interaction_pi;
    }
    const AggregateResult agg = aggregate_scores(report.dci, *pi_side, cfg);
    report.weight_dci = agg.weight_dci;
    report.weight_pi = agg.weight_pi;
    report.final_scores = agg.final_scores;
    return report;
}

std::vector<double> dci_scores(const HQMLModel& m, const Matrix& x_ref,
                               const std::vector<int>& y_ref, const ExplainerConfig& cfg) {
    return dci_scores(HqmlExplainable(m), x_ref, y_ref, cfg);
}
std::vector<double> pi_scores(const HQMLModel& m, const Matrix& x_ref,
                              const std::vector<int>& y_ref, const ExplainerConfig& cfg) {
    return pi_scores(HqmlExplainable(m), x_ref, y_ref, cfg);
}
std::vector<double> interaction_pi_scores(const HQMLModel& m, const Matrix& x_ref,
                                          const std::vector<int>& y_ref,
                                          const ExplainerConfig& cfg) {
    return interaction_pi_scores(HqmlExplainable(m), x_ref, y_ref, cfg);
}
ImportanceReport explain(const HQMLModel& m, const Matrix& x_ref, const std::vector<int>& y_ref,
                         const ExplainerConfig& cfg) {
    HqmlExplainable view(m);
    ImportanceReport report = explain(static_cast<const Explainable&>(view), x_ref, y_ref, cfg);
    if (m.feature_labels.size() == report.feature_labels.size())
        report.feature_labels = m.feature_labels;
    return report;
}

nlohmann::json ImportanceReport::to_json() const {
    nlohmann::json j{{"feature_labels", feature_labels},
                     {"baseline_accuracy", baseline_accuracy},
                     {"dci", dci},
                     {"pi", pi},
                     {"weights", {{"dci", weight_dci}, {"pi", weight_pi}}},
                     {"final", final_scores},
                     {"config", config.to_json()},
                     {"model_descriptor", model_descriptor}};
    if (interaction_pi) j["interaction_pi"] = *interaction_pi;
    return j;
}

ImportanceReport ImportanceReport::from_json(const nlohmann::json& j) {
    ImportanceReport r;
    r.feature_labels = j.at("feature_labels").get<std::vector<std::string>>();
    r.baseline_accuracy = j.at("baseline_accuracy").get<double>();
    r.dci = j.at("dci").get<std::vector<double>>();
    r.pi = j.at("pi").get<std::vector<double>>();
    if (j.contains("interaction_pi"))
        r.interaction_pi = j.at("interaction_pi").get<std::vector<double>>();
    r.weight_dci = j.at("weights").at("dci").get<double>();
    r.weight_pi = j.at("weights").at("pi").get<double>();
    r.final_scores = j.at("final").get<std::vector<double>>();
    r.config = ExplainerConfig::from_json(j.at("config"));
    r.model_descriptor = j.at("model_descriptor").get<std::string>();
    const std::size_t d = r.feature_labels.size();
    if (r.dci.size() != d || r.pi.size() != d || r.final_scores.size() != d ||
        (r.interaction_pi && r.interaction_pi->size() != d))
        fail_data("importance report: inconsistent vector lengths");
    return r;
}

} // namespace quxai
