#include <doctest.h>

#include <random>

#include "film/detail/engine.hpp"
#include "film/model.hpp"
#include "film/training.hpp"

using namespace film;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uni(rng);
    }
    return m;
}

model::FiLMConfig small_config() {
    model::FiLMConfig cfg;
    cfg.horizon = 6;
    cfg.multiscale_factors = {1, 2};
    cfg.legendre_order = 8;
    cfg.mode_count = 3;
    cfg.channels = 2;
    return cfg;
}

} // namespace

TEST_CASE("instance normalization formulas") {
    model::RevinState st;
    st.gamma = Eigen::VectorXd::Ones(1);
    st.beta = Eigen::VectorXd::Zero(1);

    Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(5, 1, 3.7);
    auto [normed, stats] = model::revin_normalize(constant, st, 1e-5);
    CHECK(normed.cwiseAbs().maxCoeff() < 1e-12);

    Eigen::MatrixXd two(2, 1);
    two << 0.0, 2.0;
    auto [n2, s2] = model::revin_normalize(two, st, 0.0);
    CHECK(n2(0, 0) == doctest::Approx(-1.0));
    CHECK(n2(1, 0) == doctest::Approx(1.0));
    CHECK(s2.mean(0) == doctest::Approx(1.0));

    model::RevinState beta_only;
    beta_only.gamma = Eigen::VectorXd::Zero(1);
    beta_only.beta = Eigen::VectorXd::Constant(1, 0.25);
    auto [nb, sb] = model::revin_normalize(two, beta_only, 1e-5);
    CHECK((nb.array() - 0.25).abs().maxCoeff() < 1e-12);
}

TEST_CASE("instance normalization round-trips") {
    model::RevinState st;
    st.gamma = Eigen::VectorXd::Constant(3, 1.3);
    st.beta = Eigen::VectorXd::Constant(3, -0.4);
    const Eigen::MatrixXd x = random_matrix(12, 3, 2);
    auto [normed, stats] = model::revin_normalize(x, st, 1e-5);
    const Eigen::MatrixXd back = model::revin_denormalize(normed, stats, st);
    CHECK((back - x).cwiseAbs().maxCoeff() < 1e-6);

    // y = beta restores the instance mean
    const Eigen::MatrixXd beta_rows =
        Eigen::MatrixXd::Ones(4, 3) * st.beta.asDiagonal();
    const Eigen::MatrixXd means = model::revin_denormalize(beta_rows, stats, st);
    for (Eigen::Index c = 0; c < 3; ++c) {
        CHECK(means(0, c) == doctest::Approx(stats.mean(c)));
    }

    // zero-variance instance: denormalizing beta still returns the mean
    Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(6, 3, 2.0);
    auto [nf, sf] = model::revin_normalize(flat, st, 1e-5);
    const Eigen::MatrixXd rf = model::revin_denormalize(
        (Eigen::MatrixXd::Ones(2, 3) * st.beta.asDiagonal()).eval(), sf, st);
    CHECK((rf.array() - 2.0).abs().maxCoeff() < 1e-9);
}

TEST_CASE("tiny gamma clamps instead of dividing by zero") {
    model::RevinState st;
    st.gamma = Eigen::VectorXd::Constant(1, 1e-12);
    st.beta = Eigen::VectorXd::Zero(1);
    const Eigen::MatrixXd x = random_matrix(8, 1, 3);
    auto [normed, stats] = model::revin_normalize(x, st, 1e-5);
    const Eigen::MatrixXd back = model::revin_denormalize(normed, stats, st);
    CHECK(back.allFinite());
}

TEST_CASE("expert forward is linear and vanishes on zero input") {
    const auto cfg = small_config();
    const auto ctx = model::build_context(cfg, 0);
    const auto& expert = ctx.experts[1];
    const auto weights = spectral::init_spectral_weights(cfg.legendre_order,
                                                         expert.modes.count(), 0, 5);
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(expert.length, cfg.channels);
    CHECK(model::expert_forward(zero, weights, expert, cfg.horizon).norm() == 0.0);

    const Eigen::MatrixXd x = random_matrix(expert.length, cfg.channels, 4);
    const Eigen::MatrixXd fx = model::expert_forward(x, weights, expert, cfg.horizon);
    const Eigen::MatrixXd f2x = model::expert_forward((2.0 * x).eval(), weights, expert,
                                                      cfg.horizon);
    CHECK((f2x - 2.0 * fx).norm() < 1e-12 * fx.norm());

    CHECK_THROWS_AS(model::expert_forward(x.topRows(3), weights, expert, cfg.horizon),
                    std::invalid_argument);
}

TEST_CASE("identity mixing forecasts a constant within round-trip tolerance") {
    model::FiLMConfig cfg;
    cfg.horizon = 48;
    cfg.multiscale_factors = {2};
    cfg.legendre_order = 32;
    cfg.mode_count = 49; // every bin of the 96-sample window
    cfg.channels = 1;
    const auto ctx = model::build_context(cfg, 0);
    const auto& expert = ctx.experts[0];
    const auto w = spectral::identity_spectral_weights(cfg.legendre_order, expert.modes.count());
    const Eigen::MatrixXd c = Eigen::MatrixXd::Constant(expert.length, 1, 1.8);
    const Eigen::MatrixXd fc = model::expert_forward(c, w, expert, cfg.horizon);
    CHECK((fc.array() - 1.8).abs().maxCoeff() / 1.8 < 0.05);
}

TEST_CASE("merged forecast respects merge weights") {
    auto cfg = small_config();
    cfg.multiscale_factors = {2, 2}; // identical experts
    const auto ctx = model::build_context(cfg, 0);
    auto params = model::init_params(cfg, ctx, 1);
    params.expert_weights[1] = params.expert_weights[0];
    const Eigen::MatrixXd x = random_matrix(cfg.input_length(), cfg.channels, 6);

    params.merge_weights << 0.5, 0.5;
    const Eigen::MatrixXd both = model::film_forward(x, params, ctx);
    params.merge_weights << 1.0, 0.0;
    const Eigen::MatrixXd first = model::film_forward(x, params, ctx);
    CHECK((both - first).norm() < 1e-12 * first.norm());

    const Eigen::MatrixXd direct = model::expert_forward(
        x.bottomRows(ctx.experts[0].length), params.expert_weights[0], ctx.experts[0],
        cfg.horizon);
    CHECK((first - direct).norm() < 1e-12 * direct.norm());
}

TEST_CASE("film forward validates history length and channel count") {
    const auto cfg = small_config();
    const auto ctx = model::build_context(cfg, 0);
    const auto params = model::init_params(cfg, ctx, 1);
    const Eigen::MatrixXd shorter = random_matrix(cfg.input_length() - 1, cfg.channels, 7);
    CHECK_THROWS_WITH_AS(model::film_forward(shorter, params, ctx), doctest::Contains("12"),
                         std::invalid_argument);
    const Eigen::MatrixXd wrong = random_matrix(cfg.input_length(), cfg.channels + 1, 7);
    CHECK_THROWS_AS(model::film_forward(wrong, params, ctx), std::invalid_argument);
}

TEST_CASE("forecast depends only on the trailing window") {
    const auto cfg = small_config();
    const auto ctx = model::build_context(cfg, 0);
    const auto params = model::init_params(cfg, ctx, 2);
    const Eigen::MatrixXd x = random_matrix(cfg.input_length(), cfg.channels, 8);
    Eigen::MatrixXd padded(cfg.input_length() + 9, cfg.channels);
    padded.topRows(9) = random_matrix(9, cfg.channels, 100);
    padded.bottomRows(cfg.input_length()) = x;
    const Eigen::MatrixXd a = model::film_forward(x, params, ctx);
    const Eigen::MatrixXd b = model::film_forward(padded, params, ctx);
    CHECK((a - b).norm() == 0.0);
}

TEST_CASE("forward is linear without normalization") {
    const auto cfg = small_config();
    const auto ctx = model::build_context(cfg, 0);
    const auto params = model::init_params(cfg, ctx, 3);
    const Eigen::MatrixXd x = random_matrix(cfg.input_length(), cfg.channels, 9);
    const Eigen::MatrixXd y = random_matrix(cfg.input_length(), cfg.channels, 10);
    const Eigen::MatrixXd lhs = model::film_forward((0.3 * x + 1.1 * y).eval(), params, ctx);
    const Eigen::MatrixXd rhs = 0.3 * model::film_forward(x, params, ctx) +
                                1.1 * model::film_forward(y, params, ctx);
    CHECK((lhs - rhs).norm() < 1e-8 * rhs.norm());
}

TEST_CASE("normalization makes the forecast shift-and-scale equivariant") {
    auto cfg = small_config();
    cfg.revin_enabled = true;
    const auto ctx = model::build_context(cfg, 0);
    const auto params = model::init_params(cfg, ctx, 4); // gamma = 1, beta = 0
    const Eigen::MatrixXd x = random_matrix(cfg.input_length(), cfg.channels, 11);
    const double a = 2.7, b = -1.9;
    const Eigen::MatrixXd base = model::film_forward(x, params, ctx);
    const Eigen::MatrixXd moved =
        model::film_forward((a * x.array() + b).matrix().eval(), params, ctx);
    CHECK((moved - (a * base.array() + b).matrix()).norm() < 1e-6 * moved.norm());
}

TEST_CASE("film forward is deterministic") {
    const auto cfg = small_config();
    const auto ctx = model::build_context(cfg, 0);
    const auto params = model::init_params(cfg, ctx, 5);
    const Eigen::MatrixXd x = random_matrix(cfg.input_length(), cfg.channels, 12);
    const Eigen::MatrixXd a = model::film_forward(x, params, ctx);
    const Eigen::MatrixXd b = model::film_forward(x, params, ctx);
    CHECK((a - b).norm() == 0.0);
}

TEST_CASE("batched engine agrees with the operator composition") {
    for (const bool revin : {false, true}) {
        for (const Eigen::Index rank : {Eigen::Index{0}, Eigen::Index{2}}) {
            auto cfg = small_config();
            cfg.revin_enabled = revin;
            cfg.rank = rank;
            const auto ctx = model::build_context(cfg, 0);
            const auto params = model::init_params(cfg, ctx, 6);
            const auto ops = engine::make_expert_ops(ctx);

            std::vector<train::Sample> batch;
            for (int i = 0; i < 3; ++i) {
                batch.push_back({random_matrix(cfg.input_length(), cfg.channels, 20 + i),
                                 random_matrix(cfg.horizon, cfg.channels, 30 + i)});
            }
            const double engine_loss = train::batch_loss(params, batch, ctx, ops);
            double composed = 0.0;
            for (const auto& s : batch) {
                composed += train::mse(model::film_forward(s.input, params, ctx), s.target);
            }
            composed /= static_cast<double>(batch.size());
            CHECK(engine_loss == doctest::Approx(composed).epsilon(1e-10));
        }
    }
}
