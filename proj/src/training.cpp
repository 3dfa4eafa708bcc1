#include "film/training.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "film/errors.hpp"

namespace film::train {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("train config: learning_rate must be > 0");
    if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
    if (epochs < 1) throw std::invalid_argument("train config: epochs must be >= 1");
}

double mse(const Eigen::Ref<const Eigen::MatrixXd>& pred,
           const Eigen::Ref<const Eigen::MatrixXd>& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
        throw std::invalid_argument("mse: shape mismatch");
    }
    return (pred - truth).squaredNorm() / static_cast<double>(pred.size());
}

double mae(const Eigen::Ref<const Eigen::MatrixXd>& pred,
           const Eigen::Ref<const Eigen::MatrixXd>& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
        throw std::invalid_argument("mae: shape mismatch");
    }
    return (pred - truth).cwiseAbs().sum() / static_cast<double>(pred.size());
}

void LossReport::add(double batch_mse, double batch_mae, std::int64_t n) {
    const double total = static_cast<double>(count + n);
    mse = (mse * static_cast<double>(count) + batch_mse * static_cast<double>(n)) / total;
    mae = (mae * static_cast<double>(count) + batch_mae * static_cast<double>(n)) / total;
    count += n;
}

namespace {

spectral::SpectralWeights zero_like(const spectral::SpectralWeights& w) {
    spectral::SpectralWeights z = w;
    if (z.variant == spectral::SpectralWeights::Variant::full) {
        for (auto& m : z.full_w) m.setZero();
    } else {
        z.w0.setZero();
        for (auto& m : z.w1) m.setZero();
        z.w2.setZero();
    }
    return z;
}

// Flat real views over every tensor, in one canonical order shared by
// parameters, gradients and Adam moments.
struct Span {
    double* data;
    Eigen::Index size;
};

void collect_spans(std::vector<spectral::SpectralWeights>& weights, Eigen::VectorXd& merge,
                   Eigen::VectorXd& gamma, Eigen::VectorXd& beta, std::vector<Span>& out) {
    auto add_complex = [&](Eigen::MatrixXcd& m) {
        out.push_back({reinterpret_cast<double*>(m.data()), 2 * m.size()});
    };
    for (auto& w : weights) {
        if (w.variant == spectral::SpectralWeights::Variant::full) {
            for (auto& m : w.full_w) add_complex(m);
        } else {
            add_complex(w.w0);
            for (auto& m : w.w1) add_complex(m);
            add_complex(w.w2);
        }
    }
    out.push_back({merge.data(), merge.size()});
    out.push_back({gamma.data(), gamma.size()});
    out.push_back({beta.data(), beta.size()});
}

std::vector<Span> param_spans(model::FiLMParams& p) {
    std::vector<Span> out;
    collect_spans(p.expert_weights, p.merge_weights, p.revin.gamma, p.revin.beta, out);
    return out;
}

std::vector<Span> grad_spans(GradientSet& g) {
    std::vector<Span> out;
    collect_spans(g.expert_grads, g.merge_grad, g.gamma_grad, g.beta_grad, out);
    return out;
}

double clamp_gamma(double g) { return std::abs(g) < 1e-8 ? (g < 0.0 ? -1e-8 : 1e-8) : g; }

struct BatchAssembly {
    Eigen::MatrixXd inputs;  // input_length x (batch * channels)
    Eigen::MatrixXd targets; // horizon x (batch * channels)
};

BatchAssembly assemble(const std::vector<Sample>& batch, Eigen::Index input_length,
                       Eigen::Index horizon, Eigen::Index channels) {
    if (batch.empty()) throw std::invalid_argument("batch must be nonempty");
    const Eigen::Index s = static_cast<Eigen::Index>(batch.size()) * channels;
    BatchAssembly a;
    a.inputs.resize(input_length, s);
    a.targets.resize(horizon, s);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Sample& smp = batch[i];
        if (smp.input.rows() < input_length || smp.input.cols() != channels ||
            smp.target.rows() != horizon || smp.target.cols() != channels) {
            throw std::invalid_argument("batch sample " + std::to_string(i) + " has wrong shape");
        }
        for (Eigen::Index c = 0; c < channels; ++c) {
            a.inputs.col(static_cast<Eigen::Index>(i) * channels + c) =
                smp.input.col(c).tail(input_length);
            a.targets.col(static_cast<Eigen::Index>(i) * channels + c) = smp.target.col(c);
        }
    }
    return a;
}

struct RevinBatch {
    Eigen::MatrixXd z;     // (x - mean) / scale
    Eigen::VectorXd mean;  // per column
    Eigen::VectorXd scale; // sqrt(var + eps) per column
};

// Forward (and optionally backward) pass of one assembled batch through the
// batched engine. Returns the batch-mean MSE on the denormalized scale.
double run_core(const model::FiLMParams& params, const model::ModelContext& ctx,
                const std::vector<engine::ExpertOp>& ops,
                const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                const Eigen::Ref<const Eigen::MatrixXd>& targets, const std::string& label,
                GradientSet* grads, double* out_mae = nullptr,
                Eigen::MatrixXd* out_pred = nullptr) {
    const model::FiLMConfig& cfg = ctx.config;
    const Eigen::Index d = cfg.channels;
    const Eigen::Index s = inputs.cols();
    const Eigen::Index experts = cfg.expert_count();

    RevinBatch rv;
    Eigen::MatrixXd xhat;
    if (cfg.revin_enabled) {
        rv.z.resize(inputs.rows(), s);
        rv.mean.resize(s);
        rv.scale.resize(s);
        xhat.resize(inputs.rows(), s);
        const double n = static_cast<double>(inputs.rows());
        for (Eigen::Index col = 0; col < s; ++col) {
            const double mean = inputs.col(col).sum() / n;
            const double var = (inputs.col(col).array() - mean).square().sum() / n;
            const double scale = std::sqrt(var + cfg.epsilon_norm);
            rv.mean(col) = mean;
            rv.scale(col) = scale;
            rv.z.col(col) = (inputs.col(col).array() - mean) / scale;
            const Eigen::Index ch = col % d;
            xhat.col(col) = params.revin.gamma(ch) * rv.z.col(col).array() + params.revin.beta(ch);
        }
    }
    const Eigen::Ref<const Eigen::MatrixXd> model_in =
        cfg.revin_enabled ? Eigen::Ref<const Eigen::MatrixXd>(xhat)
                          : Eigen::Ref<const Eigen::MatrixXd>(inputs);

    std::vector<Eigen::MatrixXd> feats(static_cast<std::size_t>(experts));
    std::vector<Eigen::MatrixXd> fc(static_cast<std::size_t>(experts));
    Eigen::MatrixXd merged = Eigen::MatrixXd::Zero(cfg.horizon, s);
    for (Eigen::Index e = 0; e < experts; ++e) {
        const auto& op = ops[static_cast<std::size_t>(e)];
        feats[static_cast<std::size_t>(e)] =
            engine::compute_features(op, model_in.bottomRows(op.length));
        fc[static_cast<std::size_t>(e)] = engine::forward_from_features(
            op, params.expert_weights[static_cast<std::size_t>(e)], feats[static_cast<std::size_t>(e)]);
        merged += params.merge_weights(e) * fc[static_cast<std::size_t>(e)];
    }

    Eigen::MatrixXd yhat;
    if (cfg.revin_enabled) {
        yhat.resize(cfg.horizon, s);
        for (Eigen::Index col = 0; col < s; ++col) {
            const Eigen::Index ch = col % d;
            const double g = clamp_gamma(params.revin.gamma(ch));
            yhat.col(col) = (merged.col(col).array() - params.revin.beta(ch)) / g * rv.scale(col) +
                            rv.mean(col);
        }
    } else {
        yhat = merged;
    }

    const double count = static_cast<double>(yhat.size());
    const double loss = (yhat - targets).squaredNorm() / count;
    if (!std::isfinite(loss)) {
        throw TrainingError("non-finite loss in " + label);
    }
    if (out_mae != nullptr) {
        *out_mae = (yhat - targets).cwiseAbs().sum() / count;
    }
    if (out_pred != nullptr) {
        *out_pred = yhat;
    }
    if (grads == nullptr) return loss;

    Eigen::MatrixXd dy = 2.0 * (yhat - targets) / count;
    Eigen::MatrixXd du;
    if (cfg.revin_enabled) {
        du.resize(cfg.horizon, s);
        for (Eigen::Index col = 0; col < s; ++col) {
            const Eigen::Index ch = col % d;
            const double graw = params.revin.gamma(ch);
            const double g = clamp_gamma(graw);
            du.col(col) = dy.col(col) * (rv.scale(col) / g);
            grads->beta_grad(ch) -= dy.col(col).sum() * rv.scale(col) / g;
            if (std::abs(graw) >= 1e-8) {
                grads->gamma_grad(ch) -=
                    (dy.col(col).array() * (yhat.col(col).array() - rv.mean(col))).sum() / g;
            }
        }
    } else {
        du = dy;
    }

    Eigen::MatrixXd g_xhat;
    if (cfg.revin_enabled) {
        g_xhat = Eigen::MatrixXd::Zero(inputs.rows(), s);
    }
    for (Eigen::Index e = 0; e < experts; ++e) {
        const auto& op = ops[static_cast<std::size_t>(e)];
        grads->merge_grad(e) += (du.array() * fc[static_cast<std::size_t>(e)].array()).sum();
        const Eigen::MatrixXd g_fc = params.merge_weights(e) * du;
        Eigen::MatrixXd g_feat;
        engine::accumulate_weight_grad(op, params.expert_weights[static_cast<std::size_t>(e)],
                                       feats[static_cast<std::size_t>(e)], g_fc,
                                       grads->expert_grads[static_cast<std::size_t>(e)],
                                       cfg.revin_enabled ? &g_feat : nullptr);
        if (cfg.revin_enabled) {
            g_xhat.bottomRows(op.length) += engine::features_backward_to_input(op, g_feat);
        }
    }
    if (cfg.revin_enabled) {
        for (Eigen::Index col = 0; col < s; ++col) {
            const Eigen::Index ch = col % d;
            grads->gamma_grad(ch) += (g_xhat.col(col).array() * rv.z.col(col).array()).sum();
            grads->beta_grad(ch) += g_xhat.col(col).sum();
        }
    }
    return loss;
}

} // namespace

GradientSet zero_gradients(const model::FiLMParams& params) {
    GradientSet g;
    g.expert_grads.reserve(params.expert_weights.size());
    for (const auto& w : params.expert_weights) g.expert_grads.push_back(zero_like(w));
    g.merge_grad = Eigen::VectorXd::Zero(params.merge_weights.size());
    g.gamma_grad = Eigen::VectorXd::Zero(params.revin.gamma.size());
    g.beta_grad = Eigen::VectorXd::Zero(params.revin.beta.size());
    return g;
}

double batch_loss(const model::FiLMParams& params, const std::vector<Sample>& batch,
                  const model::ModelContext& ctx, const std::vector<engine::ExpertOp>& ops) {
    const auto a = assemble(batch, ctx.config.input_length(), ctx.config.horizon,
                            ctx.config.channels);
    return run_core(params, ctx, ops, a.inputs, a.targets, "batch_loss", nullptr);
}

BackwardResult backward(const model::FiLMParams& params, const std::vector<Sample>& batch,
                        const model::ModelContext& ctx, const std::vector<engine::ExpertOp>& ops) {
    const auto a = assemble(batch, ctx.config.input_length(), ctx.config.horizon,
                            ctx.config.channels);
    BackwardResult r;
    r.grads = zero_gradients(params);
    r.loss = run_core(params, ctx, ops, a.inputs, a.targets, "backward", &r.grads);
    return r;
}

GradientSet finite_diff_grad(const model::FiLMParams& params, const std::vector<Sample>& batch,
                             double h, const model::ModelContext& ctx,
                             const std::vector<engine::ExpertOp>& ops) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: h must be > 0");
    model::FiLMParams work = params;
    GradientSet out = zero_gradients(params);
    const auto pspans = param_spans(work);
    const auto gspans = grad_spans(out);
    for (std::size_t sp = 0; sp < pspans.size(); ++sp) {
        for (Eigen::Index i = 0; i < pspans[sp].size; ++i) {
            double& x = pspans[sp].data[i];
            const double saved = x;
            x = saved + h;
            const double up = batch_loss(work, batch, ctx, ops);
            x = saved - h;
            const double down = batch_loss(work, batch, ctx, ops);
            x = saved;
            gspans[sp].data[i] = (up - down) / (2.0 * h);
        }
    }
    return out;
}

AdamState init_adam(const model::FiLMParams& params) {
    model::FiLMParams shape = params;
    AdamState st;
    for (const auto& span : param_spans(shape)) {
        st.first_moment.emplace_back(Eigen::ArrayXd::Zero(span.size));
        st.second_moment.emplace_back(Eigen::ArrayXd::Zero(span.size));
    }
    return st;
}

void adam_step(AdamState& state, const GradientSet& grads, model::FiLMParams& params,
               const TrainConfig& cfg) {
    GradientSet& g = const_cast<GradientSet&>(grads);
    const auto pspans = param_spans(params);
    const auto gspans = grad_spans(g);
    if (pspans.size() != state.first_moment.size()) {
        throw std::invalid_argument("adam_step: state does not match parameter layout");
    }
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bias1 = 1.0 - std::pow(cfg.adam_beta1, t);
    const double bias2 = 1.0 - std::pow(cfg.adam_beta2, t);
    for (std::size_t sp = 0; sp < pspans.size(); ++sp) {
        auto gv = Eigen::Map<const Eigen::ArrayXd>(gspans[sp].data, gspans[sp].size);
        auto pv = Eigen::Map<Eigen::ArrayXd>(pspans[sp].data, pspans[sp].size);
        Eigen::ArrayXd& m = state.first_moment[sp];
        Eigen::ArrayXd& v = state.second_moment[sp];
        m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * gv;
        v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * gv.square();
        pv -= cfg.learning_rate * (m / bias1) / ((v / bias2).sqrt() + cfg.adam_eps);
    }
}

namespace {

std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, std::mt19937_64& rng) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (Eigen::Index i = n - 1; i > 0; --i) {
        const Eigen::Index j = static_cast<Eigen::Index>(
            rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    return idx;
}

// Cached stacked features for every window of a split, one block per expert.
struct FeatureCache {
    std::vector<Eigen::MatrixXd> per_expert; // feature_rows x (windows * channels)
};

FeatureCache build_cache(const data::TimeSeriesTable& table, const data::WindowSet& ws,
                         const std::vector<engine::ExpertOp>& ops, Eigen::Index channels,
                         Eigen::Index chunk) {
    FeatureCache cache;
    const Eigen::Index n = ws.count();
    for (const auto& op : ops) {
        cache.per_expert.emplace_back(engine::feature_rows(op), n * channels);
    }
    Eigen::MatrixXd raw;
    for (Eigen::Index start = 0; start < n; start += chunk) {
        const Eigen::Index take = std::min(chunk, n - start);
        for (std::size_t e = 0; e < ops.size(); ++e) {
            const auto& op = ops[e];
            raw.resize(op.length, take * channels);
            for (Eigen::Index i = 0; i < take; ++i) {
                const Eigen::Index origin = ws.origins[static_cast<std::size_t>(start + i)];
                raw.middleCols(i * channels, channels) =
                    table.values.middleRows(origin + ws.input_length - op.length, op.length);
            }
            cache.per_expert[e].middleCols(start * channels, take * channels) =
                engine::compute_features(op, raw);
        }
    }
    return cache;
}

void gather_targets(const data::TimeSeriesTable& table, const data::WindowSet& ws,
                    const std::vector<Eigen::Index>& picks, Eigen::Index channels,
                    Eigen::MatrixXd& targets) {
    const Eigen::Index b = static_cast<Eigen::Index>(picks.size());
    targets.resize(ws.horizon, b * channels);
    for (Eigen::Index i = 0; i < b; ++i) {
        const Eigen::Index origin = ws.origins[static_cast<std::size_t>(picks[static_cast<std::size_t>(i)])];
        targets.middleCols(i * channels, channels) =
            table.values.middleRows(origin + ws.input_length, ws.horizon);
    }
}

void gather_features(const FeatureCache& cache, const std::vector<Eigen::Index>& picks,
                     Eigen::Index channels, std::vector<Eigen::MatrixXd>& feats) {
    feats.resize(cache.per_expert.size());
    for (std::size_t e = 0; e < cache.per_expert.size(); ++e) {
        const Eigen::MatrixXd& src = cache.per_expert[e];
        Eigen::MatrixXd& dst = feats[e];
        dst.resize(src.rows(), static_cast<Eigen::Index>(picks.size()) * channels);
        for (std::size_t i = 0; i < picks.size(); ++i) {
            dst.middleCols(static_cast<Eigen::Index>(i) * channels, channels) =
                src.middleCols(picks[i] * channels, channels);
        }
    }
}

void gather_inputs(const data::TimeSeriesTable& table, const data::WindowSet& ws,
                   const std::vector<Eigen::Index>& picks, Eigen::Index channels,
                   Eigen::MatrixXd& inputs) {
    const Eigen::Index b = static_cast<Eigen::Index>(picks.size());
    inputs.resize(ws.input_length, b * channels);
    for (Eigen::Index i = 0; i < b; ++i) {
        const Eigen::Index origin = ws.origins[static_cast<std::size_t>(picks[static_cast<std::size_t>(i)])];
        inputs.middleCols(i * channels, channels) =
            table.values.middleRows(origin, ws.input_length);
    }
}

// Forward loss over cached features (revin-off fast path).
double features_loss(const model::FiLMParams& params, const model::ModelContext& ctx,
                     const std::vector<engine::ExpertOp>& ops,
                     const std::vector<Eigen::MatrixXd>& feats,
                     const Eigen::Ref<const Eigen::MatrixXd>& targets, const std::string& label,
                     GradientSet* grads, double* out_mae) {
    const Eigen::Index experts = ctx.config.expert_count();
    const Eigen::Index s = targets.cols();
    Eigen::MatrixXd merged = Eigen::MatrixXd::Zero(ctx.config.horizon, s);
    std::vector<Eigen::MatrixXd> fc(static_cast<std::size_t>(experts));
    for (Eigen::Index e = 0; e < experts; ++e) {
        fc[static_cast<std::size_t>(e)] = engine::forward_from_features(
            ops[static_cast<std::size_t>(e)], params.expert_weights[static_cast<std::size_t>(e)],
            feats[static_cast<std::size_t>(e)]);
        merged += params.merge_weights(e) * fc[static_cast<std::size_t>(e)];
    }
    const double count = static_cast<double>(merged.size());
    const double loss = (merged - targets).squaredNorm() / count;
    if (!std::isfinite(loss)) throw TrainingError("non-finite loss in " + label);
    if (out_mae != nullptr) *out_mae = (merged - targets).cwiseAbs().sum() / count;
    if (grads == nullptr) return loss;

    const Eigen::MatrixXd dy = 2.0 * (merged - targets) / count;
    for (Eigen::Index e = 0; e < experts; ++e) {
        grads->merge_grad(e) += (dy.array() * fc[static_cast<std::size_t>(e)].array()).sum();
        const Eigen::MatrixXd g_fc = params.merge_weights(e) * dy;
        engine::accumulate_weight_grad(ops[static_cast<std::size_t>(e)],
                                       params.expert_weights[static_cast<std::size_t>(e)],
                                       feats[static_cast<std::size_t>(e)], g_fc,
                                       grads->expert_grads[static_cast<std::size_t>(e)], nullptr);
    }
    return loss;
}

} // namespace

TrainResult train(model::FiLMParams params, const data::TimeSeriesTable& train_table,
                  const data::WindowSet& train_windows, const data::TimeSeriesTable& val_table,
                  const data::WindowSet& val_windows, const model::ModelContext& ctx,
                  const TrainConfig& cfg) {
    cfg.validate();
    const model::FiLMConfig& mc = ctx.config;
    if (train_windows.count() < 1 || val_windows.count() < 1) {
        throw std::invalid_argument("train: train and validation window sets must be nonempty");
    }
    if (train_windows.input_length != mc.input_length() ||
        val_windows.input_length != mc.input_length() || train_windows.horizon != mc.horizon ||
        val_windows.horizon != mc.horizon) {
        throw std::invalid_argument("train: window geometry does not match the model config");
    }
    if (train_table.channels() != mc.channels || val_table.channels() != mc.channels) {
        throw std::invalid_argument("train: table channels do not match the model config");
    }
    const std::vector<engine::ExpertOp> ops = engine::make_expert_ops(ctx);
    const Eigen::Index d = mc.channels;

    std::size_t cache_bytes = 0;
    for (const auto& op : ops) {
        cache_bytes += static_cast<std::size_t>(engine::feature_rows(op)) *
                       static_cast<std::size_t>((train_windows.count() + val_windows.count()) * d) *
                       sizeof(double);
    }
    const bool use_cache = !mc.revin_enabled && cache_bytes <= cfg.feature_cache_limit;

    FeatureCache train_cache, val_cache;
    if (use_cache) {
        train_cache = build_cache(train_table, train_windows, ops, d, 32);
        val_cache = build_cache(val_table, val_windows, ops, d, 32);
    }

    AdamState adam = init_adam(params);
    std::mt19937_64 rng(cfg.seed);
    TrainResult result;
    double best_val = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd targets, inputs;
    std::vector<Eigen::MatrixXd> feats;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<Eigen::Index> order = shuffled_indices(train_windows.count(), rng);
        LossReport train_report;
        Eigen::Index batch_index = 0;
        for (std::size_t pos = 0; pos < order.size(); pos += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t take = std::min(static_cast<std::size_t>(cfg.batch_size),
                                              order.size() - pos);
            const std::vector<Eigen::Index> picks(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                                  order.begin() + static_cast<std::ptrdiff_t>(pos + take));
            gather_targets(train_table, train_windows, picks, d, targets);
            GradientSet grads = zero_gradients(params);
            const std::string label = "epoch " + std::to_string(epoch) + " batch " +
                                      std::to_string(batch_index);
            double loss;
            if (use_cache) {
                gather_features(train_cache, picks, d, feats);
                loss = features_loss(params, ctx, ops, feats, targets, label, &grads, nullptr);
            } else {
                gather_inputs(train_table, train_windows, picks, d, inputs);
                loss = run_core(params, ctx, ops, inputs, targets, label, &grads);
            }
            adam_step(adam, grads, params, cfg);
            train_report.add(loss, 0.0, static_cast<std::int64_t>(take));
            ++batch_index;
        }

        LossReport val_report;
        for (Eigen::Index start = 0; start < val_windows.count();
             start += static_cast<Eigen::Index>(cfg.batch_size)) {
            const Eigen::Index take =
                std::min<Eigen::Index>(cfg.batch_size, val_windows.count() - start);
            std::vector<Eigen::Index> picks(static_cast<std::size_t>(take));
            for (Eigen::Index i = 0; i < take; ++i) picks[static_cast<std::size_t>(i)] = start + i;
            gather_targets(val_table, val_windows, picks, d, targets);
            double batch_mae = 0.0;
            double loss;
            if (use_cache) {
                gather_features(val_cache, picks, d, feats);
                loss = features_loss(params, ctx, ops, feats, targets, "validation", nullptr,
                                     &batch_mae);
            } else {
                gather_inputs(val_table, val_windows, picks, d, inputs);
                loss = run_core(params, ctx, ops, inputs, targets, "validation", nullptr,
                                &batch_mae);
            }
            val_report.add(loss, batch_mae, take);
        }

        result.history.push_back({train_report.mse, val_report.mse, val_report.mae});
        if (val_report.mse < best_val) {
            best_val = val_report.mse;
            result.best_params = params;
            result.best_epoch = epoch;
        }
    }
    result.final_params = std::move(params);
    return result;
}

LossReport evaluate(const model::FiLMParams& params, const data::TimeSeriesTable& table,
                    const data::WindowSet& windows, const model::ModelContext& ctx,
                    int batch_size) {
    if (windows.count() < 1) throw std::invalid_argument("evaluate: empty window set");
    const std::vector<engine::ExpertOp> ops = engine::make_expert_ops(ctx);
    const Eigen::Index d = ctx.config.channels;
    LossReport report;
    Eigen::MatrixXd inputs, targets;
    for (Eigen::Index start = 0; start < windows.count();
         start += static_cast<Eigen::Index>(batch_size)) {
        const Eigen::Index take = std::min<Eigen::Index>(batch_size, windows.count() - start);
        std::vector<Eigen::Index> picks(static_cast<std::size_t>(take));
        for (Eigen::Index i = 0; i < take; ++i) picks[static_cast<std::size_t>(i)] = start + i;
        gather_inputs(table, windows, picks, d, inputs);
        gather_targets(table, windows, picks, d, targets);
        double batch_mae = 0.0;
        const double loss =
            run_core(params, ctx, ops, inputs, targets, "evaluate", nullptr, &batch_mae);
        report.add(loss, batch_mae, take);
    }
    return report;
}

Eigen::MatrixXd predict_windows(const model::FiLMParams& params,
                                const data::TimeSeriesTable& table,
                                const data::WindowSet& windows, const model::ModelContext& ctx,
                                int batch_size) {
    if (windows.count() < 1) throw std::invalid_argument("predict_windows: empty window set");
    const std::vector<engine::ExpertOp> ops = engine::make_expert_ops(ctx);
    const Eigen::Index d = ctx.config.channels;
    Eigen::MatrixXd preds(ctx.config.horizon, windows.count() * d);
    Eigen::MatrixXd inputs, targets, batch_pred;
    for (Eigen::Index start = 0; start < windows.count();
         start += static_cast<Eigen::Index>(batch_size)) {
        const Eigen::Index take = std::min<Eigen::Index>(batch_size, windows.count() - start);
        std::vector<Eigen::Index> picks(static_cast<std::size_t>(take));
        for (Eigen::Index i = 0; i < take; ++i) picks[static_cast<std::size_t>(i)] = start + i;
        gather_inputs(table, windows, picks, d, inputs);
        gather_targets(table, windows, picks, d, targets);
        run_core(params, ctx, ops, inputs, targets, "predict", nullptr, nullptr, &batch_pred);
        preds.middleCols(start * d, take * d) = batch_pred;
    }
    return preds;
}

} // namespace film::train
