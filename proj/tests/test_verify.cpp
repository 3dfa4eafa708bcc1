#include <doctest.h>

#include "film/verify.hpp"

using namespace film;

TEST_CASE("approximation-rate check passes on Lipschitz signals") {
    const auto rep = verify::approximation_rate({16, 32, 64, 128}, 1024, 3, 0);
    CHECK(rep.pass);
    CHECK(rep.measured <= -0.4);
    CHECK(rep.name == "legendre-rate");

    CHECK_THROWS_AS(verify::approximation_rate({16, 32}, 512, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(verify::approximation_rate({32, 16, 64}, 512, 1, 0), std::invalid_argument);
}

TEST_CASE("noise-accumulation slope sits near one half") {
    const auto rep = verify::noise_accumulation({16, 64, 256}, 80, 4, 0.1, 1);
    CHECK(rep.pass);
    CHECK(rep.measured == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("noise-accumulation degenerates gracefully at sigma zero") {
    const auto rep = verify::noise_accumulation({16, 64, 256}, 10, 4, 0.0, 1);
    CHECK(rep.pass);
    CHECK(rep.detail.find("degenerate") != std::string::npos);
}

TEST_CASE("projection bound holds on scaled-tail matrices") {
    const auto rep = verify::projection_bound(64, 64, 16, 1e-3, 1.0, 5, 3);
    CHECK(rep.pass);
    CHECK(rep.measured <= rep.expected);

    const auto zero = verify::projection_bound(32, 32, 8, 0.0, 1.0, 5, 3);
    CHECK(zero.pass);
    CHECK(zero.measured < 1e-12);
    CHECK(zero.expected == 0.0);
}

TEST_CASE("bundled suite runs every check") {
    const auto reports = verify::run_all(0);
    REQUIRE(reports.size() == 3);
    for (const auto& r : reports) {
        CHECK(r.pass);
        CHECK_FALSE(r.detail.empty());
    }
}
