#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "film/data.hpp"
#include "film/errors.hpp"
#include "film/legendre.hpp"

using namespace film;

TEST_CASE("transition matrices for small orders") {
    const auto t1 = legendre::build_transition(1);
    CHECK(t1.a(0, 0) == 1.0);
    CHECK(t1.b(0) == 1.0);

    const auto t2 = legendre::build_transition(2);
    CHECK(t2.a(0, 0) == 1.0);
    CHECK(t2.a(0, 1) == 1.0);
    CHECK(t2.a(1, 0) == -3.0);
    CHECK(t2.a(1, 1) == 3.0);
    CHECK(t2.b(0) == 1.0);
    CHECK(t2.b(1) == -3.0);

    const auto t3 = legendre::build_transition(3);
    CHECK(t3.a(2, 0) == 5.0);
    CHECK(t3.a(2, 1) == -5.0);
    CHECK(t3.a(2, 2) == 5.0);
    CHECK(t3.b(2) == 5.0);

    CHECK_THROWS_AS(legendre::build_transition(0), std::invalid_argument);
}

TEST_CASE("transition is reproducible from order alone") {
    const auto a = legendre::build_transition(7);
    const auto b = legendre::build_transition(7);
    CHECK(a.a == b.a);
    CHECK(a.b == b.b);
}

TEST_CASE("bilinear discretization, order 1, dt = 0.5") {
    const auto disc = legendre::discretize_bilinear(legendre::build_transition(1), 0.5);
    CHECK(disc.ad(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(disc.bd(0) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK_THROWS_AS(legendre::discretize_bilinear(legendre::build_transition(1), 0.0),
                    std::invalid_argument);
}

TEST_CASE("discretization is consistent with the continuous generator as dt -> 0") {
    for (Eigen::Index order : {1, 4}) {
        const auto trans = legendre::build_transition(order);
        const double dt = 1e-4;
        const auto disc = legendre::discretize_bilinear(trans, dt);
        const Eigen::MatrixXd ac = -trans.a;
        const Eigen::MatrixXd fd = (disc.ad - Eigen::MatrixXd::Identity(order, order)) / dt;
        CHECK((fd - ac).norm() / ac.norm() < 1e-3);
    }
}

TEST_CASE("recursion stays bounded on bounded input") {
    const auto disc = legendre::discretize_bilinear(legendre::build_transition(8), 1.0 / 64.0);
    Eigen::VectorXd state = Eigen::VectorXd::Zero(8);
    for (int t = 0; t < 5000; ++t) {
        state = disc.ad * state + disc.bd * 1.0;
        REQUIRE(state.allFinite());
    }
    CHECK(state.norm() < 1e3);
}

TEST_CASE("projection of a constant converges geometrically") {
    const auto disc = legendre::discretize_bilinear(legendre::build_transition(1), 0.5);
    const Eigen::VectorXd x = Eigen::VectorXd::Ones(3);
    const Eigen::MatrixXd c = legendre::project(x, disc);
    CHECK(c(0, 0) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(c(1, 0) == doctest::Approx(0.64).epsilon(1e-12));
    CHECK(c(2, 0) == doctest::Approx(0.784).epsilon(1e-12));
}

TEST_CASE("projection of zero signal is zero") {
    const auto disc = legendre::discretize_bilinear(legendre::build_transition(4), 0.1);
    const Eigen::MatrixXd c = legendre::project(Eigen::VectorXd::Zero(10), disc);
    CHECK(c.norm() == 0.0);
}

TEST_CASE("projection is causal: prefixes match") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::VectorXd x(20);
    for (Eigen::Index i = 0; i < 20; ++i) x(i) = uni(rng);
    const auto disc = legendre::discretize_bilinear(legendre::build_transition(5), 0.05);
    const Eigen::MatrixXd full = legendre::project(x, disc);
    const Eigen::MatrixXd prefix = legendre::project(x.head(7), disc);
    CHECK((full.topRows(7) - prefix).norm() == 0.0);
}

TEST_CASE("projection rejects non-finite samples with the index") {
    const auto disc = legendre::discretize_bilinear(legendre::build_transition(2), 0.1);
    Eigen::VectorXd x = Eigen::VectorXd::Ones(5);
    x(3) = std::nan("");
    CHECK_THROWS_WITH_AS(legendre::project(x, disc), doctest::Contains("index 3"), DataError);
}

TEST_CASE("projection is linear") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::VectorXd x(16), y(16);
    for (Eigen::Index i = 0; i < 16; ++i) {
        x(i) = uni(rng);
        y(i) = uni(rng);
    }
    const double a = 1.7, b = -0.3;
    const auto disc = legendre::discretize_bilinear(legendre::build_transition(6), 1.0 / 16.0);
    const Eigen::MatrixXd lhs = legendre::project((a * x + b * y).eval(), disc);
    const Eigen::MatrixXd rhs = a * legendre::project(x, disc) + b * legendre::project(y, disc);
    CHECK((lhs - rhs).norm() < 1e-12 * rhs.norm());
}

TEST_CASE("eval matrix columns and endpoints") {
    const Eigen::MatrixXd e = legendre::build_eval_matrix(2, 2);
    CHECK(e(0, 0) == 1.0);
    CHECK(e(0, 1) == doctest::Approx(0.0));
    CHECK(e(1, 0) == 1.0);
    CHECK(e(1, 1) == doctest::Approx(1.0));

    const Eigen::MatrixXd big = legendre::build_eval_matrix(33, 9);
    CHECK((big.col(0).array() == 1.0).all());
    CHECK((big.row(32).array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(legendre::build_eval_matrix(0, 3), std::invalid_argument);
}

TEST_CASE("reconstruct basics") {
    const Eigen::MatrixXd e = legendre::build_eval_matrix(8, 4);
    Eigen::VectorXd basis0 = Eigen::VectorXd::Zero(4);
    basis0(0) = 1.0;
    const Eigen::VectorXd ones = legendre::reconstruct(basis0, e, 8);
    CHECK((ones.array() - 1.0).abs().maxCoeff() < 1e-12);

    CHECK(legendre::reconstruct(Eigen::VectorXd::Zero(4), e, 5).norm() == 0.0);
    CHECK_THROWS_AS(legendre::reconstruct(basis0, e, 9), std::invalid_argument);
}

TEST_CASE("round-trip recovery of a smooth 1024-sample signal at order 128") {
    const Eigen::Index len = 1024, order = 128;
    Eigen::VectorXd x(len);
    for (Eigen::Index t = 0; t < len; ++t) {
        const double u =
            2.0 * std::numbers::pi * static_cast<double>(t + 1) / static_cast<double>(len);
        x(t) = std::sin(u) + 0.5 * std::cos(3.0 * u);
    }
    const auto disc = legendre::discretize_bilinear(legendre::build_transition(order),
                                                    1.0 / static_cast<double>(len));
    const Eigen::MatrixXd c = legendre::project(x, disc);
    const Eigen::MatrixXd e = legendre::build_eval_matrix(len, order);
    const Eigen::VectorXd rec = legendre::reconstruct(c.row(len - 1).transpose(), e, len);
    CHECK((rec - x).norm() / x.norm() < 0.05);
}

namespace {

double roundtrip_error(const Eigen::VectorXd& x, Eigen::Index order) {
    const Eigen::Index len = x.size();
    const auto disc = legendre::discretize_bilinear(legendre::build_transition(order),
                                                    1.0 / static_cast<double>(len));
    const Eigen::MatrixXd c = legendre::project(x, disc);
    const Eigen::MatrixXd e = legendre::build_eval_matrix(len, order);
    const Eigen::VectorXd rec = legendre::reconstruct(c.row(len - 1).transpose(), e, len);
    return (rec - x).norm() / x.norm();
}

} // namespace

TEST_CASE("approximation error decays with order on a Lipschitz signal") {
    const Eigen::VectorXd x = data::gen_lipschitz(1.0, 1024, 3);
    std::vector<double> lo, le;
    for (Eigen::Index n : {16, 32, 64, 128}) {
        lo.push_back(std::log(static_cast<double>(n)));
        le.push_back(std::log(roundtrip_error(x, n)));
    }
    const double n = 4.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        sx += lo[i];
        sy += le[i];
        sxx += lo[i] * lo[i];
        sxy += lo[i] * le[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope <= -0.4);
}

TEST_CASE("degree-5 polynomial reconstruction") {
    // Coefficients fitted through the eval grid recover the polynomial to
    // rounding: degree 5 lies in the span of the first 8 Legendre columns.
    const Eigen::Index len = 256, order = 8;
    Eigen::VectorXd poly(len);
    for (Eigen::Index i = 0; i < len; ++i) {
        const double s = static_cast<double>(i + 1) / static_cast<double>(len);
        poly(i) = 1.0 + 2.0 * s - 3.0 * s * s + 0.5 * std::pow(s, 3) + std::pow(s, 4) -
                  0.2 * std::pow(s, 5);
    }
    const Eigen::MatrixXd e = legendre::build_eval_matrix(len, order);
    const Eigen::VectorXd coeff = e.colPivHouseholderQr().solve(poly);
    Eigen::VectorXd memory(order);
    for (Eigen::Index n = 0; n < order; ++n) {
        memory(n) = (n % 2 == 0) ? coeff(n) : -coeff(n);
    }
    const Eigen::VectorXd rec = legendre::reconstruct(memory, e, len);
    CHECK((rec - poly).norm() / poly.norm() < 1e-10);

    // The online projection carries a warm-up transient at the oldest edge of
    // the window; the full-window figure sits at a few percent while the tail
    // that forecasting consumes is far tighter.
    const auto disc = legendre::discretize_bilinear(legendre::build_transition(order),
                                                    1.0 / static_cast<double>(len));
    const Eigen::MatrixXd c = legendre::project(poly, disc);
    const Eigen::VectorXd roundtrip = legendre::reconstruct(c.row(len - 1).transpose(), e, len);
    CHECK((roundtrip - poly).norm() / poly.norm() < 0.08);
    const Eigen::Index tail = len / 8;
    CHECK((roundtrip.tail(tail) - poly.tail(tail)).norm() / poly.tail(tail).norm() < 1e-2);
}
