#pragma once

#include <cmath>
#include <vector>

#include "kanseq/features.hpp"
#include "kanseq/rng.hpp"
#include "kanseq/windows.hpp"

namespace kanseq {

/// Keeps every default sample and draws an equal-sized subset of
/// non-defaults without replacement; the subset is the per-trial variance
/// source, so distinct seeds give distinct subsets.
inline Samples undersample(const Samples& samples, Rng& rng) {
    std::vector<std::size_t> defaults, non_defaults;
    for (std::size_t i = 0; i < samples.size(); ++i)
        (samples[i].label == 1 ? defaults : non_defaults).push_back(i);
    require(non_defaults.size() >= defaults.size(),
            "undersample: need at least as many non-defaults as defaults");
    require(!defaults.empty(), "undersample: no default samples");
    // partial Fisher-Yates: the first `defaults.size()` slots become the draw
    for (std::size_t i = 0; i < defaults.size(); ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(non_defaults.size() - i));
        std::swap(non_defaults[i], non_defaults[j]);
    }
    std::vector<std::size_t> chosen(non_defaults.begin(),
                                    non_defaults.begin() +
                                        static_cast<std::ptrdiff_t>(defaults.size()));
    std::sort(chosen.begin(), chosen.end());
    Samples out;
    out.reserve(2 * defaults.size());
    for (std::size_t i : defaults) out.push_back(samples[i]);
    for (std::size_t i : chosen) out.push_back(samples[i]);
    return out;
}

/// Per-feature affine transform fitted on train data only. One-hot columns
/// pass through; zero-variance continuous columns are centered, not scaled.
struct Standardizer {
    std::size_t continuous_start = 0;  // first non-one-hot column
    std::vector<double> mean;          // full feature_dim, 0 for one-hot
    std::vector<double> std_dev;       // full feature_dim, 1 for one-hot

    void fit(const Samples& train) {
        require(!train.empty(), "Standardizer: empty training set");
        const std::size_t dim = train.front().dim();
        mean.assign(dim, 0.0);
        std_dev.assign(dim, 1.0);
        std::size_t n = 0;
        for (const auto& s : train)
            for (std::size_t t = 0; t < s.time(); ++t) {
                if (!s.mask[t]) continue;
                ++n;
                for (std::size_t d = continuous_start; d < dim; ++d) mean[d] += s.features(t, d);
            }
        require(n > 0, "Standardizer: no unmasked rows");
        for (std::size_t d = continuous_start; d < dim; ++d) mean[d] /= static_cast<double>(n);
        std::vector<double> var(dim, 0.0);
        for (const auto& s : train)
            for (std::size_t t = 0; t < s.time(); ++t) {
                if (!s.mask[t]) continue;
                for (std::size_t d = continuous_start; d < dim; ++d) {
                    const double c = s.features(t, d) - mean[d];
                    var[d] += c * c;
                }
            }
        for (std::size_t d = continuous_start; d < dim; ++d) {
            const double sd = std::sqrt(var[d] / static_cast<double>(n));
            std_dev[d] = sd > 0.0 ? sd : 1.0;
        }
    }

    void transform(Samples& samples) const {
        for (auto& s : samples)
            for (std::size_t t = 0; t < s.time(); ++t) {
                if (!s.mask[t]) continue;
                for (std::size_t d = continuous_start; d < mean.size(); ++d)
                    s.features(t, d) = (s.features(t, d) - mean[d]) / std_dev[d];
            }
    }
};

struct DatasetSplit {
    Samples train;
    Samples test;
    Standardizer standardizer;
};

/// Fits the standardizer on the train split and transforms both splits.
inline void standardize(DatasetSplit& split) {
    split.standardizer.continuous_start = feature_schema().one_hot_count;
    split.standardizer.fit(split.train);
    split.standardizer.transform(split.train);
    split.standardizer.transform(split.test);
}

inline std::size_t count_defaults(const Samples& samples) {
    std::size_t n = 0;
    for (const auto& s : samples) n += s.label == 1 ? 1 : 0;
    return n;
}

}  // namespace kanseq
