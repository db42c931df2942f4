#include <catch2/catch_amalgamated.hpp>

#include "kanseq/features.hpp"

using namespace kanseq;

namespace {

LoanSequence seq_with_ib_upb(const std::vector<double>& series) {
    LoanSequence seq;
    seq.loan_id = "F";
    for (double v : series) {
        LoanMonthRecord m;
        m.interest_bearing_upb = v;
        seq.months.push_back(m);
    }
    return seq;
}

}  // namespace

TEST_CASE("the feature schema is stable and names the delta column", "[features][data]") {
    const FeatureSchema s = feature_schema();
    REQUIRE(s.dim() == 9);
    REQUIRE(s.one_hot_count == 4);
    REQUIRE(s.names[0] == "assistance_none");
    REQUIRE(s.names.back() == "ib_upb_delta");
    // the raw interest-bearing UPB is replaced by its first difference
    for (const auto& n : s.names) REQUIRE(n != "interest_bearing_upb");
}

TEST_CASE("ib_upb first difference zeroes its first month", "[features][data]") {
    const Matrix f = engineer_features(seq_with_ib_upb({100.0, 98.0, 95.0}));
    const std::size_t delta = feature_schema().dim() - 1;
    REQUIRE(f(0, delta) == 0.0);
    REQUIRE(f(1, delta) == -2.0);
    REQUIRE(f(2, delta) == -3.0);

    const Matrix g = engineer_features(seq_with_ib_upb({50.0, 50.0, 50.0, 50.0}));
    for (std::size_t t = 0; t < 4; ++t) REQUIRE(g(t, delta) == 0.0);
}

TEST_CASE("assistance codes one-hot encode with a none category", "[features][data]") {
    LoanSequence seq = seq_with_ib_upb({1.0, 1.0, 1.0, 1.0});
    seq.months[1].assistance_status_code = "F";
    seq.months[2].assistance_status_code = "T";
    seq.months[3].assistance_status_code = "ZZ";  // unseen, maps to none
    std::size_t unseen = 0;
    const Matrix f = engineer_features(seq, &unseen);
    REQUIRE(unseen == 1);

    const auto one_hot = [&](std::size_t t) {
        std::vector<double> v;
        for (std::size_t j = 0; j < 4; ++j) v.push_back(f(t, j));
        return v;
    };
    REQUIRE(one_hot(0) == std::vector<double>{1, 0, 0, 0});
    REQUIRE(one_hot(1) == std::vector<double>{0, 1, 0, 0});
    REQUIRE(one_hot(2) == std::vector<double>{0, 0, 0, 1});
    REQUIRE(one_hot(3) == std::vector<double>{1, 0, 0, 0});
    for (std::size_t t = 0; t < 4; ++t) {
        double sum = 0.0;
        for (std::size_t j = 0; j < 4; ++j) sum += f(t, j);
        REQUIRE(sum == 1.0);
    }
}

TEST_CASE("continuous columns carry the raw record values", "[features][data]") {
    LoanSequence seq = seq_with_ib_upb({10.0, 9.0});
    seq.months[0].current_actual_upb = 123.0;
    seq.months[0].current_deferred_upb = 4.5;
    seq.months[0].current_interest_rate = 3.25;
    seq.months[0].estimated_ltv = 80.0;
    const Matrix f = engineer_features(seq);
    REQUIRE(f(0, 4) == 123.0);
    REQUIRE(f(0, 5) == 4.5);
    REQUIRE(f(0, 6) == 3.25);
    REQUIRE(f(0, 7) == 80.0);
}
