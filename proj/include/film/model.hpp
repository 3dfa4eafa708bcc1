#ifndef FILM_MODEL_HPP
#define FILM_MODEL_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "film/legendre.hpp"
#include "film/spectral.hpp"

namespace film::model {

struct FiLMConfig {
    Eigen::Index horizon = 96;
    std::vector<Eigen::Index> multiscale_factors{1, 2, 4};
    Eigen::Index legendre_order = 256;
    Eigen::Index mode_count = 32;
    spectral::ModePolicy mode_policy = spectral::ModePolicy::lowest;
    Eigen::Index rank = 0; // 0 selects full spectral weights
    bool revin_enabled = false;
    double epsilon_norm = 1e-5;
    Eigen::Index channels = 1;

    Eigen::Index expert_count() const { return static_cast<Eigen::Index>(multiscale_factors.size()); }
    Eigen::Index max_factor() const;
    Eigen::Index input_length() const { return max_factor() * horizon; }
    void validate() const;
};

/// Learnable affine part of the reversible instance normalization.
struct RevinState {
    Eigen::VectorXd gamma; // per channel
    Eigen::VectorXd beta;
};

/// Per-call instance statistics; scale = sqrt(var + eps) so the inverse is
/// exact even for constant channels.
struct RevinStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;
};

std::pair<Eigen::MatrixXd, RevinStats> revin_normalize(
    const Eigen::Ref<const Eigen::MatrixXd>& x, const RevinState& state, double eps);

Eigen::MatrixXd revin_denormalize(const Eigen::Ref<const Eigen::MatrixXd>& y_hat,
                                  const RevinStats& stats, const RevinState& state);

/// Full trainable state of the forecaster.
struct FiLMParams {
    std::vector<spectral::SpectralWeights> expert_weights;
    Eigen::VectorXd merge_weights; // one scalar per expert, initialized 1/E
    RevinState revin;
};

/// Untrainable per-expert operators shared by every forward pass.
struct ExpertContext {
    Eigen::Index length = 0; // factor * horizon
    legendre::DiscretizedTransition disc;
    spectral::ModeSet modes;
    Eigen::MatrixXd eval; // length x order
};

struct ModelContext {
    FiLMConfig config;
    std::vector<ExpertContext> experts;
};

ModelContext build_context(const FiLMConfig& config, std::uint64_t seed);

FiLMParams init_params(const FiLMConfig& config, const ModelContext& ctx, std::uint64_t seed);

/// One expert: project each channel, mix the selected frequency modes of the
/// coefficient trajectory, reconstruct the final memory over the expert's
/// window and keep the last `horizon` samples.
Eigen::MatrixXd expert_forward(const Eigen::Ref<const Eigen::MatrixXd>& x,
                               const spectral::SpectralWeights& weights,
                               const ExpertContext& expert, Eigen::Index horizon);

/// End-to-end forecast X -> Y from the trailing input window. Pure function
/// of (x, params); throws invalid_argument naming the required length when
/// the history is too short.
Eigen::MatrixXd film_forward(const Eigen::Ref<const Eigen::MatrixXd>& x,
                             const FiLMParams& params, const ModelContext& ctx);

} // namespace film::model

#endif
