#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "kanseq/dense.hpp"
#include "kanseq/gradcheck.hpp"
#include "test_util.hpp"

using namespace kanseq;
using testutil::fill_uniform;
using testutil::random_matrix;

TEST_CASE("dense_forward is act(x W^T + b), scalar checked", "[dense][layers]") {
    Rng rng(61);
    DenseParams p(3, 2, ActivationKind::Relu);
    fill_uniform(p.w, rng);
    fill_uniform(p.b, rng);
    const Matrix x = random_matrix(5, 3, rng);
    const Matrix y = dense_forward(p, x);
    for (std::size_t b = 0; b < 5; ++b)
        for (std::size_t q = 0; q < 2; ++q) {
            double a = p.b.data[q];
            for (std::size_t j = 0; j < 3; ++j) a += p.w(q, j) * x(b, j);
            REQUIRE(y(b, q) == Catch::Approx(std::max(a, 0.0)).margin(1e-12));
        }
}

TEST_CASE("dense backward matches finite differences", "[dense][layers][gradients]") {
    Rng rng(62);
    for (ActivationKind act : {ActivationKind::Linear, ActivationKind::Relu,
                               ActivationKind::Sigmoid, ActivationKind::Tanh}) {
        DenseParams p(4, 3, act);
        fill_uniform(p.w, rng);
        fill_uniform(p.b, rng);
        Matrix x = random_matrix(6, 4, rng);
        const Matrix wgt = random_matrix(6, 3, rng);

        auto loss_of = [&](const DenseParams& q, const Matrix& xin) {
            const Matrix y = dense_forward(q, xin);
            double L = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) L += wgt.data[i] * y.data[i];
            return L;
        };

        const Matrix y = dense_forward(p, x);
        DenseParams g(4, 3, act);
        const Matrix d_x = dense_backward(p, x, y, wgt, g);

        const double h = 1e-5;
        for (auto [mat, grad] : {std::pair{&p.w, &g.w}, std::pair{&p.b, &g.b}})
            for (std::size_t idx = 0; idx < mat->size(); ++idx) {
                const double saved = mat->data[idx];
                mat->data[idx] = saved + h;
                const double up = loss_of(p, x);
                mat->data[idx] = saved - h;
                const double dn = loss_of(p, x);
                mat->data[idx] = saved;
                REQUIRE(relative_error(grad->data[idx], (up - dn) / (2 * h)) < 1e-5);
            }
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double saved = x.data[i];
            x.data[i] = saved + h;
            const double up = loss_of(p, x);
            x.data[i] = saved - h;
            const double dn = loss_of(p, x);
            x.data[i] = saved;
            REQUIRE(relative_error(d_x.data[i], (up - dn) / (2 * h)) < 1e-5);
        }
    }
}

TEST_CASE("inverted dropout preserves expectation and zeroes exactly", "[dense][layers]") {
    Rng rng(63);
    const double rate = 0.3;
    Matrix x(1, 1);
    x.data[0] = 1.0;
    double sum = 0.0;
    const int n = 200000;
    int dropped = 0;
    for (int i = 0; i < n; ++i) {
        Matrix mult;
        const Matrix y = dropout_forward_train(x, rate, rng, mult);
        if (y.data[0] == 0.0) {
            ++dropped;
        } else {
            REQUIRE(y.data[0] == Catch::Approx(1.0 / (1.0 - rate)));
        }
        sum += y.data[0];
    }
    REQUIRE(sum / n == Catch::Approx(1.0).margin(0.02));
    REQUIRE(static_cast<double>(dropped) / n == Catch::Approx(rate).margin(0.01));
}

TEST_CASE("dropout rate 0 is the identity; backward reuses the mask", "[dense][layers]") {
    Rng rng(64);
    const Matrix x = random_matrix(4, 5, rng);
    Matrix mult;
    const Matrix y0 = dropout_forward_train(x, 0.0, rng, mult);
    for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(y0.data[i] == x.data[i]);

    Matrix mult2;
    dropout_forward_train(x, 0.5, rng, mult2);
    const Matrix d_out = random_matrix(4, 5, rng);
    const Matrix d_in = dropout_backward(d_out, mult2);
    for (std::size_t i = 0; i < x.size(); ++i)
        REQUIRE(d_in.data[i] == d_out.data[i] * mult2.data[i]);

    REQUIRE_THROWS_AS(dropout_forward_train(x, 1.0, rng, mult), std::invalid_argument);
}
