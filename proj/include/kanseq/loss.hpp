#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "kanseq/matrix.hpp"

namespace kanseq {

constexpr double kProbClip = 1e-12;

struct LossValue {
    double mean_bce = 0.0;
    std::size_t sample_count = 0;
};

/// Mean binary cross-entropy. Probabilities are clipped to
/// [1e-12, 1 - 1e-12] before the logs.
inline LossValue bce_loss(const std::vector<double>& probs, const std::vector<double>& labels) {
    require(!probs.empty(), "bce_loss: empty input");
    require(probs.size() == labels.size(), "bce_loss: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        double p = probs[i];
        if (p < kProbClip) p = kProbClip;
        if (p > 1.0 - kProbClip) p = 1.0 - kProbClip;
        acc -= labels[i] * std::log(p) + (1.0 - labels[i]) * std::log(1.0 - p);
    }
    return {acc / static_cast<double>(probs.size()), probs.size()};
}

inline LossValue bce_loss(const Matrix& probs, const std::vector<double>& labels) {
    require(probs.cols == 1, "bce_loss: probs must be a column");
    return bce_loss(probs.data, labels);
}

}  // namespace kanseq
