#pragma once

#include <cstdint>
#include <vector>

#include "kanseq/matrix.hpp"

namespace kanseq {

/// batch x time x dim tensor, row-major with dim fastest.
struct Tensor3 {
    std::size_t batch = 0;
    std::size_t time = 0;
    std::size_t dim = 0;
    std::vector<double> data;

    Tensor3() = default;
    Tensor3(std::size_t b, std::size_t t, std::size_t d)
        : batch(b), time(t), dim(d), data(b * t * d, 0.0) {}

    double& at(std::size_t b, std::size_t t, std::size_t d) {
        return data[(b * time + t) * dim + d];
    }
    double at(std::size_t b, std::size_t t, std::size_t d) const {
        return data[(b * time + t) * dim + d];
    }
    double* row(std::size_t b, std::size_t t) { return data.data() + (b * time + t) * dim; }
    const double* row(std::size_t b, std::size_t t) const {
        return data.data() + (b * time + t) * dim;
    }
};

/// Padded batch of sequences. mask(b,t) is true on a prefix of real steps and
/// false on the padded suffix; padded feature rows are all zero.
struct MaskedBatch {
    Tensor3 features;
    std::vector<std::uint8_t> mask;  // batch * time

    MaskedBatch() = default;
    MaskedBatch(std::size_t b, std::size_t t, std::size_t d)
        : features(b, t, d), mask(b * t, 0) {}

    std::size_t batch() const { return features.batch; }
    std::size_t time() const { return features.time; }
    std::size_t dim() const { return features.dim; }

    bool is_real(std::size_t b, std::size_t t) const { return mask[b * features.time + t] != 0; }
    void set_real(std::size_t b, std::size_t t, bool real) {
        mask[b * features.time + t] = real ? 1 : 0;
    }

    std::size_t seq_len(std::size_t b) const {
        std::size_t n = 0;
        while (n < features.time && is_real(b, n)) ++n;
        return n;
    }

    /// Enforces the prefix-mask and zero-padding invariants.
    void validate() const {
        for (std::size_t b = 0; b < batch(); ++b) {
            bool seen_pad = false;
            for (std::size_t t = 0; t < time(); ++t) {
                if (!is_real(b, t)) {
                    seen_pad = true;
                    for (std::size_t d = 0; d < dim(); ++d)
                        require(features.at(b, t, d) == 0.0,
                                "MaskedBatch: padded feature entries must be 0.0");
                } else {
                    require(!seen_pad, "MaskedBatch: mask must be a prefix of real steps");
                }
            }
        }
    }

    /// Copy with `extra` all-padded steps appended to every sequence.
    MaskedBatch with_padding(std::size_t extra) const {
        MaskedBatch out(batch(), time() + extra, dim());
        for (std::size_t b = 0; b < batch(); ++b)
            for (std::size_t t = 0; t < time(); ++t) {
                out.set_real(b, t, is_real(b, t));
                for (std::size_t d = 0; d < dim(); ++d)
                    out.features.at(b, t, d) = features.at(b, t, d);
            }
        return out;
    }
};

}  // namespace kanseq
