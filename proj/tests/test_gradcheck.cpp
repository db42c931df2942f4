#include <catch2/catch_amalgamated.hpp>

#include "kanseq/gradcheck.hpp"

using namespace kanseq;

TEST_CASE("relative error uses the documented floor", "[gradcheck][training]") {
    REQUIRE(relative_error(1.0, 1.0) == 0.0);
    REQUIRE(relative_error(2.0, 1.0) == Catch::Approx(0.5));
    REQUIRE(relative_error(0.0, 0.0) == 0.0);
    REQUIRE(relative_error(1e-12, 0.0) == Catch::Approx(1e-12 / 1e-6));
}

TEST_CASE("miniature GRU-KAN passes the finite-difference check", "[gradcheck][training]") {
    const GradCheckReport r = gradient_check(CellKind::Gru, GradCheckScale{}, 1);
    INFO("worst tensor " << r.worst_tensor << "[" << r.worst_index << "]");
    REQUIRE(r.params_checked > 0);
    REQUIRE(r.max_rel_err <= 1e-4);
}

TEST_CASE("miniature LSTM-KAN passes the finite-difference check", "[gradcheck][training]") {
    const GradCheckReport r = gradient_check(CellKind::Lstm, GradCheckScale{}, 2);
    INFO("worst tensor " << r.worst_tensor << "[" << r.worst_index << "]");
    REQUIRE(r.max_rel_err <= 1e-4);
}

TEST_CASE("plain GRU and LSTM (no KAN) also pass", "[gradcheck][training]") {
    REQUIRE(gradient_check(CellKind::Gru, GradCheckScale{}, 3, false).max_rel_err <= 1e-4);
    REQUIRE(gradient_check(CellKind::Lstm, GradCheckScale{}, 4, false).max_rel_err <= 1e-4);
}

TEST_CASE("dense+sigmoid head alone reaches 1e-6", "[gradcheck][training]") {
    const GradCheckReport r = gradient_check_dense_head(5);
    REQUIRE(r.max_rel_err <= 1e-6);
}
