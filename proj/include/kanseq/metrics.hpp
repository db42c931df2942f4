#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "kanseq/matrix.hpp"

namespace kanseq {

struct ConfusionCounts {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::size_t total() const { return tp + fp + tn + fn; }
};

/// Predicted positive iff score >= threshold (ties go to the positive side).
inline ConfusionCounts confusion_at_threshold(const std::vector<double>& scores,
                                              const std::vector<double>& labels,
                                              double threshold = 0.5) {
    require(!scores.empty(), "confusion_at_threshold: empty input");
    require(scores.size() == labels.size(), "confusion_at_threshold: length mismatch");
    ConfusionCounts c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        require(labels[i] == 0.0 || labels[i] == 1.0, "confusion_at_threshold: labels in {0,1}");
        const bool pred = scores[i] >= threshold;
        const bool pos = labels[i] == 1.0;
        if (pred && pos) ++c.tp;
        else if (pred && !pos) ++c.fp;
        else if (!pred && pos) ++c.fn;
        else ++c.tn;
    }
    return c;
}

struct BasicMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // Degenerate denominators (tp+fp=0 or tp+fn=0) report the metric as 0
    // with the flag set, so trial aggregation never sees NaN.
    bool precision_defined = true;
    bool recall_defined = true;
};

inline BasicMetrics compute_metrics(const ConfusionCounts& c) {
    require(c.total() > 0, "compute_metrics: empty counts");
    BasicMetrics m;
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    if (c.tp + c.fp == 0) {
        m.precision_defined = false;
    } else {
        m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    }
    if (c.tp + c.fn == 0) {
        m.recall_defined = false;
    } else {
        m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    }
    if (m.precision + m.recall > 0.0)
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

/// Mann-Whitney AUC: the fraction of (positive, negative) pairs ranked
/// correctly, ties counting one half. Computed with average ranks in
/// O(n log n).
inline double auc(const std::vector<double>& scores, const std::vector<double>& labels) {
    require(scores.size() == labels.size(), "auc: length mismatch");
    std::size_t n_pos = 0, n_neg = 0;
    for (double y : labels) {
        require(y == 0.0 || y == 1.0, "auc: labels in {0,1}");
        if (y == 1.0) ++n_pos;
        else ++n_neg;
    }
    require(n_pos > 0 && n_neg > 0, "auc: both classes required");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        // 1-based ranks i+1 .. j share the average rank
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1.0) rank_sum_pos += avg_rank;
        i = j;
    }
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

struct MetricsReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
    double threshold = 0.5;
    ConfusionCounts counts;
    bool precision_defined = true;
    bool recall_defined = true;
};

inline MetricsReport evaluate_scores(const std::vector<double>& scores,
                                     const std::vector<double>& labels,
                                     double threshold = 0.5) {
    MetricsReport r;
    r.threshold = threshold;
    r.counts = confusion_at_threshold(scores, labels, threshold);
    const BasicMetrics m = compute_metrics(r.counts);
    r.accuracy = m.accuracy;
    r.precision = m.precision;
    r.recall = m.recall;
    r.f1 = m.f1;
    r.precision_defined = m.precision_defined;
    r.recall_defined = m.recall_defined;
    r.auc = auc(scores, labels);
    return r;
}

}  // namespace kanseq
