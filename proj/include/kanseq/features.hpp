#pragma once

#include <string>
#include <vector>

#include "kanseq/loan_records.hpp"
#include "kanseq/matrix.hpp"

namespace kanseq {

/// Assistance-status one-hot vocabulary: "none" (missing/blank) plus the
/// published plan codes F (forbearance), R (repayment), T (trial period).
/// Unseen codes map to "none" and are counted, keeping feature_dim stable.
inline const std::vector<std::string>& assistance_vocab() {
    static const std::vector<std::string> vocab = {"none", "F", "R", "T"};
    return vocab;
}

struct FeatureSchema {
    std::vector<std::string> names;
    std::size_t one_hot_count = 0;

    std::size_t dim() const { return names.size(); }
};

inline FeatureSchema feature_schema() {
    FeatureSchema s;
    for (const auto& code : assistance_vocab()) s.names.push_back("assistance_" + code);
    s.one_hot_count = s.names.size();
    s.names.push_back("current_actual_upb");
    s.names.push_back("current_deferred_upb");
    s.names.push_back("current_interest_rate");
    s.names.push_back("estimated_ltv");
    s.names.push_back("ib_upb_delta");
    return s;
}

inline std::size_t assistance_index(const std::string& code, std::size_t* unseen_count = nullptr) {
    if (code.empty()) return 0;
    const auto& vocab = assistance_vocab();
    for (std::size_t i = 1; i < vocab.size(); ++i)
        if (code == vocab[i]) return i;
    if (unseen_count) ++*unseen_count;
    return 0;
}

/// Per-month feature rows: assistance one-hot, then the four continuous
/// Table-1 columns, then the interest-bearing-UPB first difference (which
/// replaces the raw interest-bearing UPB; delta at month 0 is 0).
inline Matrix engineer_features(const LoanSequence& seq, std::size_t* unseen_count = nullptr) {
    const FeatureSchema schema = feature_schema();
    const std::size_t oh = schema.one_hot_count;
    Matrix out(seq.size(), schema.dim());
    for (std::size_t t = 0; t < seq.size(); ++t) {
        const LoanMonthRecord& m = seq.months[t];
        double* row = out.row_ptr(t);
        row[assistance_index(m.assistance_status_code, unseen_count)] = 1.0;
        row[oh + 0] = m.current_actual_upb;
        row[oh + 1] = m.current_deferred_upb;
        row[oh + 2] = m.current_interest_rate;
        row[oh + 3] = m.estimated_ltv;
        row[oh + 4] = t == 0 ? 0.0
                             : m.interest_bearing_upb - seq.months[t - 1].interest_bearing_upb;
    }
    return out;
}

}  // namespace kanseq
