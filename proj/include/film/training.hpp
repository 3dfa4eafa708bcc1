#ifndef FILM_TRAINING_HPP
#define FILM_TRAINING_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "film/data.hpp"
#include "film/detail/engine.hpp"
#include "film/model.hpp"

namespace film::train {

struct TrainConfig {
    double learning_rate = 1e-4;
    int batch_size = 32;
    int epochs = 15; // fixed count, no early stopping
    std::uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t feature_cache_limit = std::size_t{3} << 30; // bytes

    void validate() const;
};

double mse(const Eigen::Ref<const Eigen::MatrixXd>& pred,
           const Eigen::Ref<const Eigen::MatrixXd>& truth);
double mae(const Eigen::Ref<const Eigen::MatrixXd>& pred,
           const Eigen::Ref<const Eigen::MatrixXd>& truth);

/// Count-weighted aggregation over batches.
struct LossReport {
    double mse = 0.0;
    double mae = 0.0;
    std::int64_t count = 0;

    void add(double batch_mse, double batch_mae, std::int64_t n);
};

struct Sample {
    Eigen::MatrixXd input;  // input_length x channels
    Eigen::MatrixXd target; // horizon x channels
};

/// Gradients of the batch-mean MSE, shaped like the parameters. Complex
/// tensors hold d/dRe + i d/dIm, so the descent step treats real and
/// imaginary parts as independent coordinates.
struct GradientSet {
    std::vector<spectral::SpectralWeights> expert_grads;
    Eigen::VectorXd merge_grad;
    Eigen::VectorXd gamma_grad;
    Eigen::VectorXd beta_grad;
};

GradientSet zero_gradients(const model::FiLMParams& params);

struct BackwardResult {
    GradientSet grads;
    double loss = 0.0;
};

/// Forward loss of one batch (no gradients).
double batch_loss(const model::FiLMParams& params, const std::vector<Sample>& batch,
                  const model::ModelContext& ctx, const std::vector<engine::ExpertOp>& ops);

/// Analytic reverse-mode gradients through the whole pipeline.
BackwardResult backward(const model::FiLMParams& params, const std::vector<Sample>& batch,
                        const model::ModelContext& ctx, const std::vector<engine::ExpertOp>& ops);

/// Central finite differences over every scalar parameter; the independent
/// oracle for backward().
GradientSet finite_diff_grad(const model::FiLMParams& params, const std::vector<Sample>& batch,
                             double h, const model::ModelContext& ctx,
                             const std::vector<engine::ExpertOp>& ops);

struct AdamState {
    std::vector<Eigen::ArrayXd> first_moment;  // one flat array per tensor
    std::vector<Eigen::ArrayXd> second_moment;
    long step_count = 0;
};

AdamState init_adam(const model::FiLMParams& params);

/// Standard bias-corrected update; complex parameters move component-wise.
void adam_step(AdamState& state, const GradientSet& grads, model::FiLMParams& params,
               const TrainConfig& cfg);

struct EpochStats {
    double train_mse = 0.0;
    double val_mse = 0.0;
    double val_mae = 0.0;
};

struct TrainResult {
    model::FiLMParams final_params;
    model::FiLMParams best_params; // lowest validation MSE
    std::vector<EpochStats> history;
    int best_epoch = 0;
};

/// Fixed-epoch loop over seeded shuffled mini-batches with per-epoch
/// validation. Window inputs are the trailing slices of each table.
TrainResult train(model::FiLMParams params, const data::TimeSeriesTable& train_table,
                  const data::WindowSet& train_windows, const data::TimeSeriesTable& val_table,
                  const data::WindowSet& val_windows, const model::ModelContext& ctx,
                  const TrainConfig& cfg);

/// Batched forward-only metrics over a window set.
LossReport evaluate(const model::FiLMParams& params, const data::TimeSeriesTable& table,
                    const data::WindowSet& windows, const model::ModelContext& ctx,
                    int batch_size = 32);

/// Forecasts for every window, horizon x (count * channels), column-major in
/// (window, channel) order.
Eigen::MatrixXd predict_windows(const model::FiLMParams& params,
                                const data::TimeSeriesTable& table,
                                const data::WindowSet& windows, const model::ModelContext& ctx,
                                int batch_size = 32);

} // namespace film::train

#endif
