#include "film/model.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>

namespace film::model {

Eigen::Index FiLMConfig::max_factor() const {
    Eigen::Index m = 0;
    for (Eigen::Index f : multiscale_factors) m = std::max(m, f);
    return m;
}

void FiLMConfig::validate() const {
    if (horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
    if (multiscale_factors.empty()) throw std::invalid_argument("config: need at least one expert");
    for (Eigen::Index f : multiscale_factors) {
        if (f < 1) throw std::invalid_argument("config: multiscale factors must be >= 1");
    }
    if (legendre_order < 1) throw std::invalid_argument("config: legendre_order must be >= 1");
    if (mode_count < 1) throw std::invalid_argument("config: mode_count must be >= 1");
    if (rank < 0) throw std::invalid_argument("config: rank must be >= 0");
    if (!(epsilon_norm > 0.0)) throw std::invalid_argument("config: epsilon_norm must be > 0");
    if (channels < 1) throw std::invalid_argument("config: channels must be >= 1");
}

std::pair<Eigen::MatrixXd, RevinStats> revin_normalize(
    const Eigen::Ref<const Eigen::MatrixXd>& x, const RevinState& state, double eps) {
    const Eigen::Index rows = x.rows();
    const Eigen::Index cols = x.cols();
    if (rows < 1) throw std::invalid_argument("revin_normalize: empty input");
    if (state.gamma.size() != cols || state.beta.size() != cols) {
        throw std::invalid_argument("revin_normalize: affine vectors do not match channel count");
    }
    RevinStats stats;
    stats.mean.resize(cols);
    stats.scale.resize(cols);
    Eigen::MatrixXd out(rows, cols);
    const double n = static_cast<double>(rows);
    for (Eigen::Index c = 0; c < cols; ++c) {
        const double mean = x.col(c).sum() / n;
        const double var = (x.col(c).array() - mean).square().sum() / n; // population variance
        const double scale = std::sqrt(var + eps);
        stats.mean(c) = mean;
        stats.scale(c) = scale;
        out.col(c) = state.gamma(c) * (x.col(c).array() - mean) / scale + state.beta(c);
    }
    return {std::move(out), std::move(stats)};
}

namespace {

double clamped_gamma(double gamma) {
    if (std::abs(gamma) < 1e-8) {
        std::cerr << "revin_denormalize: gamma below 1e-8, clamping\n";
        return gamma < 0.0 ? -1e-8 : 1e-8;
    }
    return gamma;
}

} // namespace

Eigen::MatrixXd revin_denormalize(const Eigen::Ref<const Eigen::MatrixXd>& y_hat,
                                  const RevinStats& stats, const RevinState& state) {
    const Eigen::Index cols = y_hat.cols();
    if (stats.mean.size() != cols || state.gamma.size() != cols) {
        throw std::invalid_argument("revin_denormalize: channel mismatch");
    }
    Eigen::MatrixXd out(y_hat.rows(), cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        const double g = clamped_gamma(state.gamma(c));
        out.col(c) = (y_hat.col(c).array() - state.beta(c)) / g * stats.scale(c) + stats.mean(c);
    }
    return out;
}

ModelContext build_context(const FiLMConfig& config, std::uint64_t seed) {
    config.validate();
    ModelContext ctx;
    ctx.config = config;
    const legendre::LegendreTransition trans = legendre::build_transition(config.legendre_order);
    for (Eigen::Index f : config.multiscale_factors) {
        ExpertContext e;
        e.length = f * config.horizon;
        e.disc = legendre::discretize_bilinear(trans, 1.0 / static_cast<double>(e.length));
        e.modes = spectral::select_modes(config.mode_policy, config.mode_count,
                                         e.length / 2 + 1, seed);
        e.eval = legendre::build_eval_matrix(e.length, config.legendre_order);
        ctx.experts.push_back(std::move(e));
    }
    return ctx;
}

FiLMParams init_params(const FiLMConfig& config, const ModelContext& ctx, std::uint64_t seed) {
    FiLMParams p;
    const Eigen::Index experts = config.expert_count();
    for (Eigen::Index e = 0; e < experts; ++e) {
        const std::uint64_t expert_seed =
            seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(e + 1));
        p.expert_weights.push_back(spectral::init_spectral_weights(
            config.legendre_order, ctx.experts[static_cast<std::size_t>(e)].modes.count(),
            config.rank, expert_seed));
    }
    p.merge_weights = Eigen::VectorXd::Constant(experts, 1.0 / static_cast<double>(experts));
    p.revin.gamma = Eigen::VectorXd::Ones(config.channels);
    p.revin.beta = Eigen::VectorXd::Zero(config.channels);
    return p;
}

Eigen::MatrixXd expert_forward(const Eigen::Ref<const Eigen::MatrixXd>& x,
                               const spectral::SpectralWeights& weights,
                               const ExpertContext& expert, Eigen::Index horizon) {
    if (x.rows() != expert.length) {
        throw std::invalid_argument("expert_forward: expected input length " +
                                    std::to_string(expert.length) + ", got " +
                                    std::to_string(x.rows()));
    }
    Eigen::MatrixXd forecast(horizon, x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const Eigen::MatrixXd coeffs = legendre::project(x.col(c), expert.disc);
        const Eigen::MatrixXd mixed = spectral::fel_forward(coeffs, weights, expert.modes);
        forecast.col(c) =
            legendre::reconstruct(mixed.row(mixed.rows() - 1).transpose(), expert.eval, horizon);
    }
    return forecast;
}

Eigen::MatrixXd film_forward(const Eigen::Ref<const Eigen::MatrixXd>& x,
                             const FiLMParams& params, const ModelContext& ctx) {
    const FiLMConfig& cfg = ctx.config;
    const Eigen::Index need = cfg.input_length();
    if (x.rows() < need) {
        throw std::invalid_argument("film_forward: input holds " + std::to_string(x.rows()) +
                                    " samples but requires at least " + std::to_string(need));
    }
    if (x.cols() != cfg.channels) {
        throw std::invalid_argument("film_forward: expected " + std::to_string(cfg.channels) +
                                    " channels, got " + std::to_string(x.cols()));
    }
    Eigen::MatrixXd window = x.bottomRows(need);
    RevinStats stats;
    if (cfg.revin_enabled) {
        auto [normed, st] = revin_normalize(window, params.revin, cfg.epsilon_norm);
        window = std::move(normed);
        stats = std::move(st);
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(cfg.horizon, cfg.channels);
    for (Eigen::Index e = 0; e < cfg.expert_count(); ++e) {
        const ExpertContext& expert = ctx.experts[static_cast<std::size_t>(e)];
        out += params.merge_weights(e) *
               expert_forward(window.bottomRows(expert.length),
                              params.expert_weights[static_cast<std::size_t>(e)], expert,
                              cfg.horizon);
    }
    if (cfg.revin_enabled) {
        out = revin_denormalize(out, stats, params.revin);
    }
    return out;
}

} // namespace film::model
