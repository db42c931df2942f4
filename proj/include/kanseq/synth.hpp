#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kanseq/loan_records.hpp"
#include "kanseq/rng.hpp"

namespace kanseq {

/// Synthetic performance-data generator, a desk-scale surrogate for the real
/// servicing files. Two regimes:
///
/// Non-default loans amortize smoothly: the interest-bearing UPB falls by a
/// near-constant payment each month, rate and LTV stay stable, CLDS stays
/// below 3 (occasional 1-month transients), no assistance codes.
///
/// Default loans pick an event month m_d (CLDS first reaches 3) uniformly in
/// [event_min, event_max]; configure that range to cover the observation
/// window. Distress starts lead = 2..10 months earlier and ramps to full
/// strength over ~3 months: payments shrink toward zero (so the UPB delta
/// decays toward 0), missed principal accrues as deferred UPB, the estimated
/// LTV drifts upward, and assistance codes appear with probability
/// proportional to the ramp. CLDS ramps 1, 2, 3 over the last three months
/// into m_d and can turn into a non-numeric disposition code afterwards.
///
/// signal_strength scales every feature-visible distress effect; at 0 the
/// feature distributions of the two classes coincide (labels still differ,
/// CLDS is not a feature), so any classifier sits at AUC ~ 0.5. The lead
/// time is the interval-sweep mechanism: a longer gap hides more of the
/// distress window, degrading every signal at once.
struct SynthConfig {
    std::size_t num_loans = 1000;
    double default_rate = 0.5;
    std::size_t seq_len_min = 21;
    std::size_t seq_len_max = 28;
    double signal_strength = 1.0;
    std::size_t event_min = 15;  // inclusive month index of first CLDS >= 3
    std::size_t event_max = 20;  // inclusive
    int start_period = 201801;   // YYYYMM of every sequence's first month
    double drift = 0.0;          // cohort drift knob: shifts base distributions

    void validate() const {
        require(num_loans > 0, "SynthConfig: num_loans > 0");
        require(default_rate > 0.0 && default_rate < 1.0, "SynthConfig: default_rate in (0,1)");
        require(seq_len_min >= 2 && seq_len_max >= seq_len_min, "SynthConfig: bad length range");
        require(event_max >= event_min, "SynthConfig: bad event range");
        require(event_min >= 3, "SynthConfig: event_min >= 3 (CLDS ramp needs room)");
        require(event_max < seq_len_min, "SynthConfig: event range must fit every sequence");
        require(signal_strength >= 0.0 && signal_strength <= 1.0,
                "SynthConfig: signal_strength in [0,1]");
    }
};

inline std::vector<LoanSequence> synth_generate(const SynthConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(seed);
    std::vector<LoanSequence> seqs;
    seqs.reserve(cfg.num_loans);
    for (std::size_t n = 0; n < cfg.num_loans; ++n) {
        const bool is_default = rng.uniform() < cfg.default_rate;
        const std::size_t len =
            cfg.seq_len_min + rng.below(cfg.seq_len_max - cfg.seq_len_min + 1);
        const int term = 120 + static_cast<int>(rng.below(241));  // 10-30 years
        const double pay = rng.uniform(800.0, 1200.0) * (1.0 + 0.05 * cfg.drift);
        const double rate = rng.uniform(2.5, 7.0) + 0.3 * cfg.drift;
        double ib_upb = pay * static_cast<double>(term);
        double deferred = 0.0;
        double ltv = rng.uniform(55.0, 95.0) + 2.0 * cfg.drift;

        std::size_t m_d = 0, m_s = 0;
        if (is_default) {
            m_d = cfg.event_min + rng.below(cfg.event_max - cfg.event_min + 1);
            const std::size_t lead = 2 + rng.below(9);  // 2..10 months
            m_s = m_d > lead ? m_d - lead : 1;
        }

        LoanSequence seq;
        seq.loan_id = "S" + std::to_string(seed % 1000000) + "L" + std::to_string(n);
        bool flagged = false;  // post-default disposition reached
        int transient = 0;     // short sub-3 delinquency for non-defaults
        for (std::size_t t = 0; t < len; ++t) {
            // ramp in [0,1]: distress severity before feature scaling
            double rho = 0.0;
            if (is_default && t >= m_s)
                rho = std::min(1.0, static_cast<double>(t - m_s + 1) / 3.0);
            const double d = cfg.signal_strength * rho;

            const double paid = pay * (1.0 + rng.normal(0.0, 0.03)) * (1.0 - d);
            if (t > 0) ib_upb = std::max(0.0, ib_upb - paid);
            deferred += d * pay * rng.uniform(0.3, 0.7);
            ltv += -0.05 + d * rng.uniform(0.8, 1.5) + rng.normal(0.0, 0.1);

            LoanMonthRecord rec;
            rec.loan_id = seq.loan_id;
            rec.period = add_months(cfg.start_period, static_cast<int>(t));
            rec.interest_bearing_upb = ib_upb;
            rec.current_deferred_upb = deferred;
            rec.current_actual_upb = ib_upb + deferred;
            rec.current_interest_rate = rate + rng.normal(0.0, 0.01);
            rec.estimated_ltv = ltv;
            rec.remaining_months = term - static_cast<int>(t);
            if (d > 0.0 && rng.uniform() < 0.7 * d) {
                const double u = rng.uniform();
                rec.assistance_status_code = u < 0.6 ? "F" : (u < 0.85 ? "R" : "T");
            }

            if (is_default) {
                if (flagged) {
                    rec.clds_flag = true;
                } else if (t >= m_d) {
                    rec.clds = 3 + static_cast<int>(std::min<std::size_t>(t - m_d, 6));
                    if (t >= m_d + 2 && rng.uniform() < 0.15) {
                        rec.clds_flag = true;
                        rec.clds = 0;
                        flagged = true;
                    }
                } else if (t + 2 == m_d) {
                    rec.clds = 1;
                } else if (t + 1 == m_d) {
                    rec.clds = 2;
                }
            } else {
                if (transient > 0) {
                    rec.clds = transient;
                    transient = 0;
                } else if (rng.uniform() < 0.04) {
                    transient = rng.uniform() < 0.25 ? 2 : 1;
                }
            }
            seq.months.push_back(std::move(rec));
        }
        seqs.push_back(std::move(seq));
    }
    return seqs;
}

}  // namespace kanseq
