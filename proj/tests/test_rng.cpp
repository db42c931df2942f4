#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numeric>
#include <set>

#include "kanseq/rng.hpp"

using namespace kanseq;

TEST_CASE("same seed reproduces the stream, different seeds diverge", "[rng][math]") {
    Rng a(123), b(123), c(124);
    bool any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t va = a.next_u64();
        REQUIRE(va == b.next_u64());
        any_diff = any_diff || va != c.next_u64();
    }
    REQUIRE(any_diff);
}

TEST_CASE("uniform stays in [0,1) and fills the range", "[rng][math]") {
    Rng rng(7);
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    REQUIRE(lo < 0.001);
    REQUIRE(hi > 0.999);
    REQUIRE(sum / n == Catch::Approx(0.5).margin(0.01));
}

TEST_CASE("below is bounded and roughly uniform", "[rng][math]") {
    Rng rng(8);
    std::vector<int> counts(10, 0);
    for (int i = 0; i < 50000; ++i) {
        const auto v = rng.below(10);
        REQUIRE(v < 10);
        ++counts[v];
    }
    for (int c : counts) REQUIRE(std::abs(c - 5000) < 400);
}

TEST_CASE("normal has the right first two moments", "[rng][math]") {
    Rng rng(9);
    const int n = 200000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    REQUIRE(mean == Catch::Approx(0.0).margin(0.02));
    REQUIRE(var == Catch::Approx(1.0).margin(0.02));
    REQUIRE(rng.normal(3.0, 0.0) == 3.0);
}

TEST_CASE("shuffle permutes and is seed-deterministic", "[rng][math]") {
    std::vector<int> base(20);
    std::iota(base.begin(), base.end(), 0);

    std::vector<int> a = base, b = base, c = base;
    Rng r1(42), r2(42), r3(43);
    r1.shuffle(a);
    r2.shuffle(b);
    r3.shuffle(c);
    REQUIRE(a == b);
    REQUIRE(a != c);

    std::vector<int> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(sorted == base);
}

TEST_CASE("mix_seed separates streams by tag and value", "[rng][math]") {
    const auto s1 = mix_seed(42, "init", 0);
    REQUIRE(s1 == mix_seed(42, "init", 0));
    std::set<std::uint64_t> seen{s1};
    REQUIRE(seen.insert(mix_seed(42, "init", 1)).second);
    REQUIRE(seen.insert(mix_seed(42, "data", 0)).second);
    REQUIRE(seen.insert(mix_seed(43, "init", 0)).second);
}
