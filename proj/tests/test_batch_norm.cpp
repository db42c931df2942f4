#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "kanseq/batch_norm.hpp"
#include "kanseq/gradcheck.hpp"
#include "test_util.hpp"

using namespace kanseq;

namespace {

Tensor3 random_tensor(std::size_t b, std::size_t t, std::size_t d, Rng& rng, double lo = -1.0,
                      double hi = 1.0) {
    Tensor3 x(b, t, d);
    for (double& v : x.data) v = rng.uniform(lo, hi);
    return x;
}

std::vector<std::uint8_t> full_mask(std::size_t b, std::size_t t) {
    return std::vector<std::uint8_t>(b * t, 1);
}

}  // namespace

TEST_CASE("two-point batch normalizes to minus one and plus one", "[batch_norm][layers]") {
    BatchNormParams p(1, 0.0);
    Tensor3 x(2, 1, 1);
    x.at(0, 0, 0) = 1.0;
    x.at(1, 0, 0) = 3.0;
    const Tensor3 y = batch_norm_forward_train(p, x, full_mask(2, 1), nullptr, false);
    REQUIRE(y.at(0, 0, 0) == Catch::Approx(-1.0).margin(1e-12));
    REQUIRE(y.at(1, 0, 0) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("infer mode with gamma=sigma, beta=mu is the identity", "[batch_norm][layers]") {
    const double mu = 2.5, sigma = 1.7;
    BatchNormParams p(3, 0.0);
    for (std::size_t j = 0; j < 3; ++j) {
        p.running_mean.data[j] = mu;
        p.running_var.data[j] = sigma * sigma;
        p.gamma.data[j] = sigma;
        p.beta.data[j] = mu;
    }
    Rng rng(41);
    const Tensor3 x = random_tensor(4, 2, 3, rng, -5.0, 5.0);
    const Tensor3 y = batch_norm_forward_infer(p, x, full_mask(4, 2));
    for (std::size_t i = 0; i < x.data.size(); ++i)
        REQUIRE(y.data[i] == Catch::Approx(x.data[i]).margin(1e-12));
}

TEST_CASE("normalized output has mean 0 and variance 1 over unmasked positions",
          "[batch_norm][layers]") {
    Rng rng(42);
    BatchNormParams p(4, 1e-5);
    Tensor3 x(16, 6, 4);
    for (double& v : x.data) v = rng.normal(7.0, 50.0);
    std::vector<std::uint8_t> mask(16 * 6, 1);
    for (std::size_t i = 0; i < mask.size(); i += 5) mask[i] = 0;  // uneven masking
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (!mask[i])
            for (std::size_t j = 0; j < 4; ++j) x.data[i * 4 + j] = 1e9;  // must be ignored

    const Tensor3 y = batch_norm_forward_train(p, x, mask, nullptr, false);
    for (std::size_t j = 0; j < 4; ++j) {
        double sum = 0.0, sq = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (!mask[i]) {
                REQUIRE(y.data[i * 4 + j] == 0.0);
                continue;
            }
            ++n;
            sum += y.data[i * 4 + j];
            sq += y.data[i * 4 + j] * y.data[i * 4 + j];
        }
        const double mean = sum / n;
        REQUIRE(mean == Catch::Approx(0.0).margin(1e-9));
        REQUIRE(sq / n - mean * mean == Catch::Approx(1.0).margin(1e-6));
    }
}

TEST_CASE("running statistics move by the momentum rule", "[batch_norm][layers]") {
    Rng rng(43);
    BatchNormParams p(2);
    p.running_mean.data[0] = 1.0;
    p.running_var.data[0] = 4.0;
    const Tensor3 x = random_tensor(8, 3, 2, rng);
    const auto mask = full_mask(8, 3);

    // expected batch statistics, computed directly
    std::vector<double> mean(2, 0.0), var(2, 0.0);
    for (std::size_t i = 0; i < 24; ++i)
        for (std::size_t j = 0; j < 2; ++j) mean[j] += x.data[i * 2 + j];
    for (double& m : mean) m /= 24.0;
    for (std::size_t i = 0; i < 24; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            const double c = x.data[i * 2 + j] - mean[j];
            var[j] += c * c;
        }
    for (double& v : var) v /= 24.0;

    BatchNormParams frozen = p;
    batch_norm_forward_train(frozen, x, mask, nullptr, false);
    REQUIRE(frozen.running_mean.data[0] == 1.0);
    REQUIRE(frozen.running_var.data[0] == 4.0);

    batch_norm_forward_train(p, x, mask, nullptr, true);
    for (std::size_t j = 0; j < 2; ++j) {
        const double m0 = j == 0 ? 1.0 : 0.0;
        const double v0 = j == 0 ? 4.0 : 1.0;
        REQUIRE(p.running_mean.data[j] == Catch::Approx(0.9 * m0 + 0.1 * mean[j]));
        REQUIRE(p.running_var.data[j] == Catch::Approx(0.9 * v0 + 0.1 * var[j]));
    }
}

TEST_CASE("train mode needs at least two unmasked positions", "[batch_norm][layers]") {
    BatchNormParams p(2);
    Tensor3 x(1, 1, 2);
    REQUIRE_THROWS_AS(batch_norm_forward_train(p, x, full_mask(1, 1), nullptr, false),
                      std::invalid_argument);
    Tensor3 x2(2, 1, 2);
    REQUIRE_NOTHROW(batch_norm_forward_train(p, x2, full_mask(2, 1), nullptr, false));
}

TEST_CASE("batch_norm backward matches finite differences", "[batch_norm][layers][gradients]") {
    Rng rng(44);
    const std::size_t B = 4, T = 3, D = 3;
    BatchNormParams p(D);
    for (std::size_t j = 0; j < D; ++j) {
        p.gamma.data[j] = rng.uniform(0.5, 1.5);
        p.beta.data[j] = rng.uniform(-0.5, 0.5);
    }
    Tensor3 x = random_tensor(B, T, D, rng);
    std::vector<std::uint8_t> mask(B * T, 1);
    mask[5] = mask[9] = 0;
    Tensor3 wgt = random_tensor(B, T, D, rng);
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (!mask[i])
            for (std::size_t j = 0; j < D; ++j) wgt.data[i * D + j] = 0.0;

    auto loss_of = [&](BatchNormParams& q, const Tensor3& xin) {
        const Tensor3 y = batch_norm_forward_train(q, xin, mask, nullptr, false);
        double L = 0.0;
        for (std::size_t i = 0; i < y.data.size(); ++i) L += wgt.data[i] * y.data[i];
        return L;
    };

    BatchNormCache cache;
    batch_norm_forward_train(p, x, mask, &cache, false);
    Matrix d_gamma(1, D), d_beta(1, D);
    const Tensor3 d_x = batch_norm_backward(p, cache, wgt, mask, d_gamma, d_beta);

    const double h = 1e-5;
    for (Matrix* m : {&p.gamma, &p.beta}) {
        Matrix& grad = m == &p.gamma ? d_gamma : d_beta;
        for (std::size_t idx = 0; idx < m->size(); ++idx) {
            const double saved = m->data[idx];
            m->data[idx] = saved + h;
            const double up = loss_of(p, x);
            m->data[idx] = saved - h;
            const double dn = loss_of(p, x);
            m->data[idx] = saved;
            REQUIRE(relative_error(grad.data[idx], (up - dn) / (2 * h)) < 1e-6);
        }
    }
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        if (!mask[i / D]) {
            REQUIRE(d_x.data[i] == 0.0);
            continue;
        }
        const double saved = x.data[i];
        x.data[i] = saved + h;
        const double up = loss_of(p, x);
        x.data[i] = saved - h;
        const double dn = loss_of(p, x);
        x.data[i] = saved;
        REQUIRE(relative_error(d_x.data[i], (up - dn) / (2 * h)) < 1e-5);
    }
}
