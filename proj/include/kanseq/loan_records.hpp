#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kanseq/matrix.hpp"

namespace kanseq {

/// One monthly performance row. `clds` holds the numeric delinquency status;
/// non-numeric status codes (post-default dispositions such as "RA") set
/// clds_flag instead and leave clds at 0.
struct LoanMonthRecord {
    std::string loan_id;
    int period = 0;  // YYYYMM
    int clds = 0;
    bool clds_flag = false;
    double current_actual_upb = 0.0;
    double current_deferred_upb = 0.0;
    double current_interest_rate = 0.0;
    double estimated_ltv = 0.0;
    double interest_bearing_upb = 0.0;
    std::string assistance_status_code;  // empty = none
    int remaining_months = 0;

    int year() const { return period / 100; }

    bool same_values(const LoanMonthRecord& o) const {
        return clds == o.clds && clds_flag == o.clds_flag &&
               current_actual_upb == o.current_actual_upb &&
               current_deferred_upb == o.current_deferred_upb &&
               current_interest_rate == o.current_interest_rate &&
               estimated_ltv == o.estimated_ltv &&
               interest_bearing_upb == o.interest_bearing_upb &&
               assistance_status_code == o.assistance_status_code &&
               remaining_months == o.remaining_months;
    }
};

struct LoanSequence {
    std::string loan_id;
    std::vector<LoanMonthRecord> months;  // strictly chronological

    std::size_t size() const { return months.size(); }

    /// Index of the first month carrying a non-numeric delinquency code, or
    /// nullopt. Months from this point on are unusable as features.
    std::optional<std::size_t> first_flag_index() const {
        for (std::size_t i = 0; i < months.size(); ++i)
            if (months[i].clds_flag) return i;
        return std::nullopt;
    }
};

/// 0-based field indices into a pipe-delimited performance row. Defaults
/// follow the published Freddie Mac single-family loan-level file layout;
/// every index is overridable from config because the layout has changed
/// across dataset releases.
struct ColumnMap {
    std::size_t loan_id = 0;
    std::size_t period = 1;
    std::size_t current_actual_upb = 2;
    std::size_t clds = 3;
    std::size_t remaining_months = 5;
    std::size_t current_interest_rate = 10;
    std::size_t current_deferred_upb = 11;
    std::size_t estimated_ltv = 25;
    std::size_t assistance_status_code = 29;
    std::size_t interest_bearing_upb = 31;

    std::size_t max_index() const {
        return std::max({loan_id, period, current_actual_upb, clds, remaining_months,
                         current_interest_rate, current_deferred_upb, estimated_ltv,
                         assistance_status_code, interest_bearing_upb});
    }
};

struct ParseReport {
    std::size_t lines_total = 0;
    std::size_t records_parsed = 0;
    std::size_t lines_skipped = 0;
};

namespace detail {

inline std::vector<std::string_view> split_pipe(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find('|', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view s, double& out, double missing = 0.0) {
    s = trim(s);
    if (s.empty()) {
        out = missing;
        return true;
    }
    std::size_t consumed = 0;
    try {
        out = std::stod(std::string(s), &consumed);
    } catch (...) {
        return false;
    }
    return consumed == s.size();
}

inline bool parse_period(std::string_view s, int& out) {
    s = trim(s);
    if (s.size() != 6) return false;
    int v = 0;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
        v = v * 10 + (c - '0');
    }
    const int month = v % 100;
    if (month < 1 || month > 12) return false;
    out = v;
    return true;
}

inline bool parse_clds(std::string_view s, int& clds, bool& flag) {
    s = trim(s);
    if (s.empty()) return false;
    bool numeric = true;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) numeric = false;
    if (numeric) {
        clds = 0;
        for (char c : s) clds = clds * 10 + (c - '0');
        flag = false;
    } else {
        clds = 0;
        flag = true;
    }
    return true;
}

inline bool parse_int(std::string_view s, int& out, int missing = 0) {
    s = trim(s);
    if (s.empty()) {
        out = missing;
        return true;
    }
    bool neg = false;
    std::size_t i = 0;
    if (s[0] == '-') {
        neg = true;
        i = 1;
    }
    if (i == s.size()) return false;
    int v = 0;
    for (; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        v = v * 10 + (s[i] - '0');
    }
    out = neg ? -v : v;
    return true;
}

inline bool parse_record_line(std::string_view line, const ColumnMap& cm, LoanMonthRecord& rec) {
    const auto fields = split_pipe(line);
    if (fields.size() <= cm.max_index()) return false;
    rec.loan_id = std::string(trim(fields[cm.loan_id]));
    if (rec.loan_id.empty()) return false;
    if (!parse_period(fields[cm.period], rec.period)) return false;
    if (!parse_clds(fields[cm.clds], rec.clds, rec.clds_flag)) return false;
    if (!parse_double(fields[cm.current_actual_upb], rec.current_actual_upb)) return false;
    if (!parse_double(fields[cm.current_deferred_upb], rec.current_deferred_upb)) return false;
    if (!parse_double(fields[cm.current_interest_rate], rec.current_interest_rate)) return false;
    if (!parse_double(fields[cm.estimated_ltv], rec.estimated_ltv)) return false;
    if (!parse_double(fields[cm.interest_bearing_upb], rec.interest_bearing_upb)) return false;
    if (!parse_int(fields[cm.remaining_months], rec.remaining_months)) return false;
    rec.assistance_status_code = std::string(trim(fields[cm.assistance_status_code]));
    return true;
}

}  // namespace detail

/// Streams a pipe-delimited performance file. Malformed lines are skipped
/// and counted. `max_records` = 0 means unlimited.
inline std::vector<LoanMonthRecord> parse_performance_file(const std::string& path,
                                                           const ColumnMap& cm,
                                                           ParseReport& report,
                                                           std::size_t max_records = 0) {
    std::ifstream in(path);
    require(in.good(), "parse_performance_file: cannot open " + path);
    std::vector<LoanMonthRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++report.lines_total;
        LoanMonthRecord rec;
        if (detail::parse_record_line(line, cm, rec)) {
            records.push_back(std::move(rec));
            ++report.records_parsed;
            if (max_records > 0 && report.records_parsed >= max_records) break;
        } else {
            ++report.lines_skipped;
        }
    }
    return records;
}

/// Groups records by loan_id and orders each loan chronologically: by
/// descending remaining months to maturity, ties broken by ascending period.
/// Exact duplicate rows collapse; duplicates that disagree are an error.
inline std::vector<LoanSequence> assemble_sequences(std::vector<LoanMonthRecord> records) {
    std::unordered_map<std::string, std::size_t> index;
    std::vector<LoanSequence> seqs;
    for (auto& rec : records) {
        auto [it, inserted] = index.try_emplace(rec.loan_id, seqs.size());
        if (inserted) seqs.push_back(LoanSequence{rec.loan_id, {}});
        seqs[it->second].months.push_back(std::move(rec));
    }
    for (auto& seq : seqs) {
        std::sort(seq.months.begin(), seq.months.end(),
                  [](const LoanMonthRecord& a, const LoanMonthRecord& b) {
                      if (a.remaining_months != b.remaining_months)
                          return a.remaining_months > b.remaining_months;
                      return a.period < b.period;
                  });
        std::vector<LoanMonthRecord> dedup;
        for (auto& m : seq.months) {
            if (!dedup.empty() && dedup.back().period == m.period) {
                require(dedup.back().same_values(m),
                        "assemble_sequences: conflicting duplicate records for loan " +
                            seq.loan_id);
                continue;
            }
            dedup.push_back(std::move(m));
        }
        seq.months = std::move(dedup);
    }
    return seqs;
}

/// YYYYMM arithmetic for generated sequences.
inline int add_months(int period, int delta) {
    int y = period / 100;
    int m = period % 100 - 1 + delta;
    y += m / 12;
    m %= 12;
    if (m < 0) {
        m += 12;
        y -= 1;
    }
    return y * 100 + m + 1;
}

}  // namespace kanseq
