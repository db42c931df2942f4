#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kanseq/features.hpp"
#include "kanseq/loan_records.hpp"
#include "kanseq/masked_batch.hpp"
#include "kanseq/matrix.hpp"

namespace kanseq {

/// Feature window of x months, a gap of g unused months, then a y-month
/// observation window that sets the label.
struct WindowSpec {
    std::size_t feature_len = 15;  // x
    std::size_t gap = 0;           // g
    std::size_t obs_len = 3;       // y

    std::size_t total() const { return feature_len + gap + obs_len; }

    void validate() const {
        require(feature_len >= 1, "WindowSpec: feature_len >= 1");
        require(obs_len >= 1, "WindowSpec: obs_len >= 1");
    }
};

struct Sample {
    Matrix features;  // time x feature_dim
    std::vector<std::uint8_t> mask;
    int label = 0;
    std::string loan_id;
    int cohort_year = 0;

    std::size_t time() const { return features.rows; }
    std::size_t dim() const { return features.cols; }
};

using Samples = std::vector<Sample>;

/// 1 iff any month of [obs_start, obs_start + y) is at least 3 months
/// delinquent or carries a non-numeric (post-default) status code.
inline int label_window(const LoanSequence& seq, std::size_t obs_start, std::size_t y) {
    require(obs_start + y <= seq.size(), "label_window: window out of range");
    for (std::size_t i = obs_start; i < obs_start + y; ++i)
        if (seq.months[i].clds >= 3 || seq.months[i].clds_flag) return 1;
    return 0;
}

struct WindowBuildReport {
    std::size_t sequences_in = 0;
    std::size_t too_short = 0;
    std::size_t flag_in_feature_window = 0;
    std::size_t windows_out = 0;
    std::size_t unseen_assistance_codes = 0;
};

/// Builds one sample per eligible sequence: sequences shorter than
/// x + g + y are dropped, longer ones keep their earliest x + g + y months.
/// Features come from months [0, x); the label from [x+g, x+g+y); the gap
/// months feed neither. Sequences whose feature window contains a
/// non-numeric delinquency code are dropped (the loan is already past
/// default, so nothing is left to predict).
inline Samples build_windows(const std::vector<LoanSequence>& seqs, const WindowSpec& spec,
                             std::size_t truncate_total, WindowBuildReport* report = nullptr) {
    spec.validate();
    require(truncate_total == spec.total(), "build_windows: truncate_total must equal x+g+y");
    WindowBuildReport local;
    WindowBuildReport& rep = report ? *report : local;
    Samples out;
    const std::size_t x = spec.feature_len;
    for (const auto& seq : seqs) {
        ++rep.sequences_in;
        if (seq.size() < truncate_total) {
            ++rep.too_short;
            continue;
        }
        LoanSequence trimmed;
        trimmed.loan_id = seq.loan_id;
        trimmed.months.assign(seq.months.begin(),
                              seq.months.begin() + static_cast<std::ptrdiff_t>(truncate_total));
        const auto flag = trimmed.first_flag_index();
        if (flag && *flag < x) {
            ++rep.flag_in_feature_window;
            continue;
        }
        Matrix all_rows = engineer_features(trimmed, &rep.unseen_assistance_codes);
        Sample s;
        s.features = Matrix(x, all_rows.cols);
        for (std::size_t t = 0; t < x; ++t)
            for (std::size_t d = 0; d < all_rows.cols; ++d) s.features(t, d) = all_rows(t, d);
        s.mask.assign(x, 1);
        s.label = label_window(trimmed, x + spec.gap, spec.obs_len);
        s.loan_id = trimmed.loan_id;
        s.cohort_year = trimmed.months.front().year();
        out.push_back(std::move(s));
        ++rep.windows_out;
    }
    return out;
}

/// Pads every sample with trailing zero rows (mask false) up to target_len.
inline void pad_and_mask(Samples& samples, std::size_t target_len) {
    for (auto& s : samples) {
        require(s.time() <= target_len, "pad_and_mask: sample longer than target");
        if (s.time() == target_len) continue;
        Matrix padded(target_len, s.dim());
        for (std::size_t t = 0; t < s.time(); ++t)
            for (std::size_t d = 0; d < s.dim(); ++d) padded(t, d) = s.features(t, d);
        s.features = std::move(padded);
        s.mask.resize(target_len, 0);
    }
}

/// Packs samples[indices] into a MaskedBatch plus the label column.
inline MaskedBatch make_batch(const Samples& samples, const std::vector<std::size_t>& indices,
                              std::vector<double>* labels = nullptr) {
    require(!indices.empty(), "make_batch: empty index set");
    const Sample& first = samples[indices.front()];
    MaskedBatch batch(indices.size(), first.time(), first.dim());
    if (labels) labels->resize(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const Sample& s = samples[indices[i]];
        require(s.time() == first.time() && s.dim() == first.dim(),
                "make_batch: inconsistent sample shapes (pad first)");
        for (std::size_t t = 0; t < s.time(); ++t) {
            batch.set_real(i, t, s.mask[t] != 0);
            for (std::size_t d = 0; d < s.dim(); ++d)
                batch.features.at(i, t, d) = s.features(t, d);
        }
        if (labels) (*labels)[i] = static_cast<double>(s.label);
    }
    return batch;
}

inline MaskedBatch make_batch(const Samples& samples, std::vector<double>* labels = nullptr) {
    std::vector<std::size_t> idx(samples.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return make_batch(samples, idx, labels);
}

}  // namespace kanseq
