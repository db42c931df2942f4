#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "kanseq/metrics.hpp"
#include "kanseq/rng.hpp"

using namespace kanseq;

namespace {

// O(n_pos * n_neg) pair enumeration, the definitional form of the statistic.
double auc_brute_force(const std::vector<double>& scores, const std::vector<double>& labels) {
    double pairs = 0.0, wins = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1.0) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0.0) continue;
            pairs += 1.0;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / pairs;
}

}  // namespace

TEST_CASE("confusion counting applies the >= threshold rule", "[metrics]") {
    const ConfusionCounts c1 = confusion_at_threshold({0.9, 0.4}, {1.0, 0.0}, 0.5);
    REQUIRE(c1.tp == 1);
    REQUIRE(c1.tn == 1);
    REQUIRE(c1.fp == 0);
    REQUIRE(c1.fn == 0);

    const ConfusionCounts c2 = confusion_at_threshold({0.5}, {0.0}, 0.5);
    REQUIRE(c2.fp == 1);  // a score exactly at threshold predicts positive

    const ConfusionCounts c3 = confusion_at_threshold({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, 0.5);
    REQUIRE(c3.fn == 3);
    REQUIRE_THROWS_AS(confusion_at_threshold({}, {}, 0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(confusion_at_threshold({0.1}, {0.0, 1.0}, 0.5), std::invalid_argument);
}

TEST_CASE("compute_metrics reproduces the worked examples", "[metrics]") {
    BasicMetrics m = compute_metrics({2, 1, 6, 1});
    REQUIRE(m.accuracy == Catch::Approx(0.8));
    REQUIRE(m.precision == Catch::Approx(2.0 / 3.0));
    REQUIRE(m.recall == Catch::Approx(2.0 / 3.0));
    REQUIRE(m.f1 == Catch::Approx(2.0 / 3.0));
    REQUIRE(m.precision_defined);
    REQUIRE(m.recall_defined);

    m = compute_metrics({7, 0, 0, 0});
    REQUIRE(m.accuracy == 1.0);
    REQUIRE(m.precision == 1.0);
    REQUIRE(m.recall == 1.0);
    REQUIRE(m.f1 == 1.0);

    m = compute_metrics({0, 0, 5, 5});
    REQUIRE(m.accuracy == Catch::Approx(0.5));
    REQUIRE(m.precision == 0.0);
    REQUIRE_FALSE(m.precision_defined);
    REQUIRE(m.recall == 0.0);
    REQUIRE(m.recall_defined);  // tp+fn = 5, the ratio is a genuine 0
    REQUIRE(m.f1 == 0.0);
}

TEST_CASE("four metrics match direct formulas on random confusions", "[metrics]") {
    Rng rng(111);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 2 + rng.below(199);
        std::vector<double> scores(n), labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = rng.uniform();
            labels[i] = rng.below(2) ? 1.0 : 0.0;
        }
        const ConfusionCounts c = confusion_at_threshold(scores, labels, 0.5);
        std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool pred = scores[i] >= 0.5, pos = labels[i] == 1.0;
            tp += pred && pos;
            fp += pred && !pos;
            tn += !pred && !pos;
            fn += !pred && pos;
        }
        REQUIRE(c.tp == tp);
        REQUIRE(c.fp == fp);
        REQUIRE(c.tn == tn);
        REQUIRE(c.fn == fn);
        REQUIRE(c.tp + c.fp + c.tn + c.fn == n);

        const BasicMetrics m = compute_metrics(c);
        REQUIRE(m.accuracy == static_cast<double>(tp + tn) / static_cast<double>(n));
        if (tp + fp > 0)
            REQUIRE(m.precision == static_cast<double>(tp) / static_cast<double>(tp + fp));
        if (tp + fn > 0)
            REQUIRE(m.recall == static_cast<double>(tp) / static_cast<double>(tp + fn));
        if (m.precision + m.recall > 0.0)
            REQUIRE(m.f1 == Catch::Approx(2.0 * m.precision * m.recall /
                                          (m.precision + m.recall)).margin(1e-15));
    }
}

TEST_CASE("rank AUC equals brute-force pair enumeration", "[metrics]") {
    REQUIRE(auc({0.9, 0.8, 0.4, 0.3}, {1.0, 0.0, 1.0, 0.0}) == Catch::Approx(0.75));
    REQUIRE(auc({0.9, 0.8, 0.2, 0.1}, {1.0, 1.0, 0.0, 0.0}) == 1.0);
    REQUIRE(auc({0.3, 0.3, 0.3}, {1.0, 0.0, 1.0}) == Catch::Approx(0.5));

    Rng rng(112);
    for (int rep = 0; rep < 500; ++rep) {
        const std::size_t n = 2 + rng.below(199);
        std::vector<double> scores(n), labels(n);
        labels[0] = 1.0;
        labels[1] = 0.0;  // guarantee both classes
        for (std::size_t i = 0; i < n; ++i) {
            // coarse quantization forces plenty of ties
            scores[i] = rng.below(2) ? rng.uniform() : rng.below(10) / 10.0;
            if (i > 1) labels[i] = rng.below(2) ? 1.0 : 0.0;
        }
        REQUIRE(auc(scores, labels) ==
                Catch::Approx(auc_brute_force(scores, labels)).margin(1e-12));
    }
}

TEST_CASE("AUC is invariant under monotone transforms and flips with labels", "[metrics]") {
    Rng rng(113);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 20;
        std::vector<double> scores(n), labels(n), mono(n), flipped(n);
        labels[0] = 1.0;
        labels[1] = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = rng.below(20) / 20.0;
            if (i > 1) labels[i] = rng.below(2) ? 1.0 : 0.0;
            mono[i] = std::tanh(3.0 * scores[i] + 1.0);  // strictly increasing
            flipped[i] = 1.0 - labels[i];
        }
        const double base = auc(scores, labels);
        REQUIRE(auc(mono, labels) == base);
        REQUIRE(auc(scores, flipped) == Catch::Approx(1.0 - base).margin(1e-12));
    }
}

TEST_CASE("single-class AUC is an error", "[metrics]") {
    REQUIRE_THROWS_AS(auc({0.1, 0.9}, {1.0, 1.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(auc({0.1, 0.9}, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("evaluate_scores bundles the five metrics coherently", "[metrics]") {
    Rng rng(114);
    const std::size_t n = 64;
    std::vector<double> scores(n), labels(n);
    labels[0] = 1.0;
    labels[1] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 1) labels[i] = rng.below(2) ? 1.0 : 0.0;
        scores[i] = rng.uniform();
    }
    const MetricsReport r = evaluate_scores(scores, labels);
    REQUIRE(r.threshold == 0.5);
    REQUIRE(r.accuracy >= 0.0);
    REQUIRE(r.accuracy <= 1.0);
    REQUIRE(r.auc == Catch::Approx(auc_brute_force(scores, labels)).margin(1e-12));
    if (r.precision_defined && r.recall_defined && r.precision + r.recall > 0.0)
        REQUIRE(r.f1 == Catch::Approx(2.0 * r.precision * r.recall /
                                      (r.precision + r.recall)).margin(1e-15));
}
