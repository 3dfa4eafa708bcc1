#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "film/stats.hpp"

using namespace film;

TEST_CASE("ks statistic on crafted samples") {
    CHECK(stats::ks_statistic({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
    CHECK(stats::ks_statistic({0.0, 0.0}, {1.0, 1.0}) == doctest::Approx(1.0));
    CHECK(stats::ks_statistic({0.0, 1.0}, {0.5, 1.0}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(stats::ks_statistic({}, {1.0}), std::invalid_argument);
}

TEST_CASE("ks statistic is symmetric and invariant under monotone maps") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> a(40), b(60);
    for (auto& v : a) v = g(rng);
    for (auto& v : b) v = g(rng) + 0.4;
    const double d = stats::ks_statistic(a, b);
    CHECK(stats::ks_statistic(b, a) == doctest::Approx(d));

    auto ea = a, eb = b;
    for (auto& v : ea) v = std::exp(v);
    for (auto& v : eb) v = std::exp(v);
    CHECK(stats::ks_statistic(ea, eb) == doctest::Approx(d));
}

TEST_CASE("ks statistic handles ties across samples") {
    // identical multisets with repeats
    CHECK(stats::ks_statistic({1, 1, 2, 2}, {1, 1, 2, 2}) == 0.0);
    // one sample sits inside the other's plateau
    CHECK(stats::ks_statistic({0, 0, 1}, {0, 1, 1}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("ks threshold formula") {
    const double thr = stats::ks_threshold(0.01, 100, 100);
    CHECK(thr == doctest::Approx(0.2302).epsilon(5e-4));

    // decreases as samples grow
    CHECK(stats::ks_threshold(0.01, 1000, 1000) < thr);
    CHECK(stats::ks_threshold(0.01, 100, 200) < thr);

    // n = m reduces to c(alpha) sqrt(2/n)
    const double c = std::sqrt(-0.5 * std::log(0.025));
    CHECK(stats::ks_threshold(0.05, 50, 50) == doctest::Approx(c * std::sqrt(2.0 / 50.0)));

    CHECK_THROWS_AS(stats::ks_threshold(0.0, 10, 10), std::invalid_argument);
    CHECK_THROWS_AS(stats::ks_threshold(1.0, 10, 10), std::invalid_argument);
    CHECK_THROWS_AS(stats::ks_threshold(0.1, 0, 10), std::invalid_argument);
}

TEST_CASE("ks test decision wiring") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> same1(200), same2(200), shifted(200);
    for (auto& v : same1) v = g(rng);
    for (auto& v : same2) v = g(rng);
    for (auto& v : shifted) v = g(rng) + 3.0;

    const auto accept = stats::ks_test(same1, same2, 0.01);
    CHECK(accept.reject == (accept.statistic > accept.threshold));
    CHECK_FALSE(accept.reject);

    const auto reject = stats::ks_test(same1, shifted, 0.01);
    CHECK(reject.reject);
    CHECK(reject.n == 200);
    CHECK(reject.m == 200);
}
