#include "film/detail/engine.hpp"

#include <cmath>
#include <numbers>

namespace film::engine {

ExpertOp make_expert_op(const model::ExpertContext& expert, Eigen::Index horizon) {
    ExpertOp op;
    op.length = expert.length;
    op.order = expert.eval.cols();
    op.horizon = horizon;
    op.disc = expert.disc;
    op.modes = expert.modes.indices;
    const Eigen::Index m = static_cast<Eigen::Index>(op.modes.size());
    const Eigen::Index len = op.length;
    op.alpha.resize(m);
    op.dft_cos.resize(m, len);
    op.dft_sin.resize(m, len);
    for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::Index k = op.modes[static_cast<std::size_t>(j)];
        const bool half_bin = (k == 0) || (len % 2 == 0 && k == len / 2);
        const double weight = half_bin ? 1.0 : 2.0;
        const double ang = 2.0 * std::numbers::pi * static_cast<double>((k * (len - 1)) % len) /
                           static_cast<double>(len);
        op.alpha(j) = weight / static_cast<double>(len) *
                      std::complex<double>(std::cos(ang), std::sin(ang));
        for (Eigen::Index t = 0; t < len; ++t) {
            const double a = 2.0 * std::numbers::pi * static_cast<double>((k * t) % len) /
                             static_cast<double>(len);
            op.dft_cos(j, t) = std::cos(a);
            op.dft_sin(j, t) = std::sin(a);
        }
    }
    op.etail.resize(horizon, op.order);
    for (Eigen::Index i = 0; i < horizon; ++i) {
        for (Eigen::Index n = 0; n < op.order; ++n) {
            const double parity = (n % 2 == 0) ? 1.0 : -1.0;
            op.etail(i, n) = expert.eval(len - horizon + i, n) * parity;
        }
    }
    return op;
}

std::vector<ExpertOp> make_expert_ops(const model::ModelContext& ctx) {
    std::vector<ExpertOp> ops;
    ops.reserve(ctx.experts.size());
    for (const auto& e : ctx.experts) ops.push_back(make_expert_op(e, ctx.config.horizon));
    return ops;
}

Eigen::MatrixXd compute_features(const ExpertOp& op,
                                 const Eigen::Ref<const Eigen::MatrixXd>& x) {
    const Eigen::Index len = op.length;
    const Eigen::Index n = op.order;
    const Eigen::Index s = x.cols();
    const Eigen::Index m = static_cast<Eigen::Index>(op.modes.size());

    // Trajectory laid out as one column per time step, states stacked.
    Eigen::MatrixXd traj(n * s, len);
    Eigen::MatrixXd state = Eigen::MatrixXd::Zero(n, s);
    Eigen::MatrixXd next(n, s);
    for (Eigen::Index t = 0; t < len; ++t) {
        next.noalias() = op.disc.ad * state;
        next.noalias() += op.disc.bd * x.row(t);
        state.swap(next);
        traj.col(t) = Eigen::Map<const Eigen::VectorXd>(state.data(), n * s);
    }

    Eigen::MatrixXd real_part(n * s, m);
    Eigen::MatrixXd imag_part(n * s, m);
    real_part.noalias() = traj * op.dft_cos.transpose();
    imag_part.noalias() = -(traj * op.dft_sin.transpose());

    Eigen::MatrixXd bstack(2 * m * n, s);
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index col = 0; col < s; ++col) {
            bstack.block(2 * j * n, col, n, 1) = real_part.block(col * n, j, n, 1);
            bstack.block(2 * j * n + n, col, n, 1) = imag_part.block(col * n, j, n, 1);
        }
    }
    return bstack;
}

namespace {

Eigen::MatrixXcd low_rank_mode_matrix(const spectral::SpectralWeights& w, Eigen::Index j) {
    return w.w2.transpose() * w.w1[static_cast<std::size_t>(j)] * w.w0.transpose();
}

// View one mode's complex bin block of the stacked features.
Eigen::MatrixXcd mode_bin(const Eigen::Ref<const Eigen::MatrixXd>& bstack, Eigen::Index j,
                          Eigen::Index n) {
    return bstack.middleRows(2 * j * n, n).cast<std::complex<double>>() +
           std::complex<double>(0.0, 1.0) * bstack.middleRows(2 * j * n + n, n);
}

} // namespace

Eigen::MatrixXd fold_weights(const ExpertOp& op, const spectral::SpectralWeights& w) {
    const Eigen::Index n = op.order;
    const Eigen::Index m = static_cast<Eigen::Index>(op.modes.size());
    Eigen::MatrixXd folded(n, 2 * m * n);
    for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::MatrixXcd p =
            op.alpha(j) * (w.variant == spectral::SpectralWeights::Variant::full
                               ? w.full_w[static_cast<std::size_t>(j)]
                               : low_rank_mode_matrix(w, j));
        folded.middleCols(2 * j * n, n) = p.real();
        folded.middleCols(2 * j * n + n, n) = -p.imag();
    }
    return folded;
}

Eigen::MatrixXd last_memory_row(const ExpertOp& op, const spectral::SpectralWeights& w,
                                const Eigen::Ref<const Eigen::MatrixXd>& bstack) {
    const Eigen::Index n = op.order;
    const Eigen::Index m = static_cast<Eigen::Index>(op.modes.size());
    if (w.variant == spectral::SpectralWeights::Variant::full) {
        Eigen::MatrixXd ylast(n, bstack.cols());
        ylast.noalias() = fold_weights(op, w) * bstack;
        return ylast;
    }
    Eigen::MatrixXd ylast = Eigen::MatrixXd::Zero(n, bstack.cols());
    for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::MatrixXcd b = mode_bin(bstack, j, n);
        const Eigen::MatrixXcd u = w.w0.transpose() * b;
        const Eigen::MatrixXcd v = w.w1[static_cast<std::size_t>(j)] * u;
        const Eigen::MatrixXcd out = w.w2.transpose() * v;
        ylast += (op.alpha(j) * out.array()).real().matrix();
    }
    return ylast;
}

Eigen::MatrixXd forward_from_features(const ExpertOp& op, const spectral::SpectralWeights& w,
                                      const Eigen::Ref<const Eigen::MatrixXd>& bstack) {
    return op.etail * last_memory_row(op, w, bstack);
}

void accumulate_weight_grad(const ExpertOp& op, const spectral::SpectralWeights& w,
                            const Eigen::Ref<const Eigen::MatrixXd>& bstack,
                            const Eigen::Ref<const Eigen::MatrixXd>& g_forecast,
                            spectral::SpectralWeights& grad, Eigen::MatrixXd* g_features) {
    const Eigen::Index n = op.order;
    const Eigen::Index m = static_cast<Eigen::Index>(op.modes.size());
    Eigen::MatrixXd g_ylast(n, g_forecast.cols());
    g_ylast.noalias() = op.etail.transpose() * g_forecast;

    if (w.variant == spectral::SpectralWeights::Variant::full) {
        Eigen::MatrixXd g_stack(n, 2 * m * n);
        g_stack.noalias() = g_ylast * bstack.transpose();
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto g_re = g_stack.middleCols(2 * j * n, n);
            const auto g_im = g_stack.middleCols(2 * j * n + n, n);
            // folded block holds [Re(alpha W) | -Im(alpha W)]
            const Eigen::MatrixXcd g_p =
                g_re.cast<std::complex<double>>() - std::complex<double>(0.0, 1.0) * g_im;
            grad.full_w[static_cast<std::size_t>(j)] += std::conj(op.alpha(j)) * g_p;
        }
        if (g_features != nullptr) {
            g_features->resize(2 * m * n, bstack.cols());
            g_features->noalias() = fold_weights(op, w).transpose() * g_ylast;
        }
        return;
    }

    if (g_features != nullptr) {
        g_features->resize(2 * m * n, bstack.cols());
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::MatrixXcd b = mode_bin(bstack, j, n);
        const Eigen::MatrixXcd u = w.w0.transpose() * b;
        const Eigen::MatrixXcd v = w.w1[static_cast<std::size_t>(j)] * u;
        const Eigen::MatrixXcd g_out = std::conj(op.alpha(j)) * g_ylast.cast<std::complex<double>>();
        grad.w2.noalias() += v.conjugate() * g_out.transpose();
        const Eigen::MatrixXcd g_v = w.w2.conjugate() * g_out;
        grad.w1[static_cast<std::size_t>(j)].noalias() += g_v * u.adjoint();
        const Eigen::MatrixXcd g_u = w.w1[static_cast<std::size_t>(j)].adjoint() * g_v;
        grad.w0.noalias() += b.conjugate() * g_u.transpose();
        if (g_features != nullptr) {
            const Eigen::MatrixXcd g_b = w.w0.conjugate() * g_u;
            g_features->middleRows(2 * j * n, n) = g_b.real();
            g_features->middleRows(2 * j * n + n, n) = g_b.imag();
        }
    }
}

Eigen::MatrixXd features_backward_to_input(const ExpertOp& op,
                                           const Eigen::Ref<const Eigen::MatrixXd>& g_features) {
    const Eigen::Index n = op.order;
    const Eigen::Index m = static_cast<Eigen::Index>(op.modes.size());
    const Eigen::Index s = g_features.cols();
    const Eigen::Index len = op.length;

    Eigen::MatrixXd g_re(n * s, m);
    Eigen::MatrixXd g_im(n * s, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index col = 0; col < s; ++col) {
            g_re.block(col * n, j, n, 1) = g_features.block(2 * j * n, col, n, 1);
            g_im.block(col * n, j, n, 1) = g_features.block(2 * j * n + n, col, n, 1);
        }
    }
    // Adjoint of bins = (cos - i sin) * traj for the packed gradient.
    Eigen::MatrixXd g_traj(n * s, len);
    g_traj.noalias() = g_re * op.dft_cos;
    g_traj.noalias() -= g_im * op.dft_sin;

    Eigen::MatrixXd g_x(len, s);
    Eigen::MatrixXd carry = Eigen::MatrixXd::Zero(n, s);
    Eigen::MatrixXd tmp(n, s);
    for (Eigen::Index t = len - 1; t >= 0; --t) {
        carry += Eigen::Map<const Eigen::MatrixXd>(g_traj.col(t).data(), n, s);
        g_x.row(t).noalias() = op.disc.bd.transpose() * carry;
        tmp.noalias() = op.disc.ad.transpose() * carry;
        carry.swap(tmp);
    }
    return g_x;
}

} // namespace film::engine
