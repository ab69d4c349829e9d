#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "depscore/confidence.hpp"
#include "depscore/random.hpp"
#include "support/oracles.hpp"

using namespace depscore;

TEST_SUITE("confidence") {

TEST_CASE("posterior parameters") {
    const auto p0 = posterior_params(0, 0);
    CHECK(p0.a == 1);
    CHECK(p0.b == 1);
    const auto p5 = posterior_params(5, 5);
    CHECK(p5.a == 6);
    CHECK(p5.b == 1);
    const auto p100 = posterior_params(100, 99);
    CHECK(p100.a == 100);
    CHECK(p100.b == 2);
    CHECK_THROWS_AS(posterior_params(3, 4), std::invalid_argument);
}

TEST_CASE("sigma and precision closed forms") {
    CHECK(score_sigma(posterior_params(0, 0)) == doctest::Approx(std::sqrt(1.0 / 12.0)).epsilon(1e-12));
    CHECK(score_sigma(posterior_params(5, 5)) == doctest::Approx(0.123718).epsilon(1e-5));
    CHECK(score_sigma(posterior_params(100, 99)) == doctest::Approx(0.013661).epsilon(1e-4));
    CHECK(ci_precision(posterior_params(5, 5)) == doctest::Approx(0.204135).epsilon(1e-5));
    CHECK(ci_precision(posterior_params(100, 99)) == doctest::Approx(0.022541).epsilon(1e-4));
    CHECK(ci_precision(posterior_params(0, 0)) == doctest::Approx(0.476314).epsilon(1e-5));
    CHECK(ci_precision(posterior_params(0, 0), 2.0) == doctest::Approx(2.0 * std::sqrt(1.0 / 12.0)));
}

TEST_CASE("sigma against Monte-Carlo beta draws") {
    for (auto [n, s] : {std::pair<std::uint64_t, std::uint64_t>{5, 5}, {100, 99}, {12, 6}, {3, 0}}) {
        const auto p = posterior_params(n, s);
        const double mc = oracle::monte_carlo_beta_sd(p.a, p.b, 100000, 1000 + n);
        CHECK(score_sigma(p) == doctest::Approx(mc).epsilon(0.02));
    }
}

TEST_CASE("interval examples") {
    const auto i5 = confidence_interval(5, 5);
    CHECK(i5.lo == doctest::Approx(0.79587).epsilon(1e-5));
    CHECK(i5.hi == 1.0);
    const auto i100 = confidence_interval(100, 99);
    CHECK(i100.lo == doctest::Approx(0.96746).epsilon(1e-5));
    CHECK(i100.hi == 1.0);
    const auto i1 = confidence_interval(1, 0);
    CHECK(i1.lo == 0.0);
    CHECK(i1.hi == doctest::Approx(1.65 * std::sqrt(2.0 / 36.0)).epsilon(1e-12));
    CHECK(i1.hi == doctest::Approx(0.38891).epsilon(1e-5));
    const auto i12 = confidence_interval(12, 11);
    CHECK(i12.lo == doctest::Approx(0.767588).epsilon(1e-5));
    CHECK(i12.hi == 1.0);
}

TEST_CASE("no candidates has no interval") {
    CHECK_THROWS(confidence_interval(0, 0));
}

TEST_CASE("bounds clamp and contain the score") {
    Rng rng(derive_seed(5, 5));
    for (int i = 0; i < 10000; ++i) {
        const auto n = 1 + uniform_index(rng, 2000);
        const auto s = uniform_index(rng, n + 1);
        const auto ci = confidence_interval(n, s);
        const double score = static_cast<double>(s) / static_cast<double>(n);
        CHECK(0.0 <= ci.lo);
        CHECK(ci.lo <= score);
        CHECK(score <= ci.hi);
        CHECK(ci.hi <= 1.0);
    }
}

TEST_CASE("precision shrinks along a ladder with fixed ratio") {
    double previous = 1.0;
    for (std::uint64_t n : {5, 10, 50, 100, 500}) {
        const double p = ci_precision(posterior_params(n, n * 4 / 5));
        CHECK(p < previous);
        previous = p;
    }
}

}
