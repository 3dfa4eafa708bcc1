#ifndef FILM_DETAIL_ENGINE_HPP
#define FILM_DETAIL_ENGINE_HPP

// Batched forward/backward kernels behind training and bulk evaluation.
// Everything here is algebraically identical to the composition of
// project / fel_forward / reconstruct in film::model; the unit tests pin
// the two routes against each other.

#include <vector>

#include <Eigen/Dense>

#include "film/model.hpp"

namespace film::engine {

/// Precomputed operator for one expert. Columns of every batch matrix are
/// (sample, channel) pairs, channel-major within a sample.
struct ExpertOp {
    Eigen::Index length = 0;  // L
    Eigen::Index order = 0;   // N
    Eigen::Index horizon = 0; // tau
    legendre::DiscretizedTransition disc;
    std::vector<Eigen::Index> modes;
    Eigen::VectorXcd alpha;  // per mode: c_k * e^{2 pi i k (L-1)/L} / L
    Eigen::MatrixXd dft_cos; // M x L; bins = (dft_cos - i dft_sin) * traj
    Eigen::MatrixXd dft_sin;
    Eigen::MatrixXd etail;   // tau x N reconstruction tail, parity folded
};

ExpertOp make_expert_op(const model::ExpertContext& expert, Eigen::Index horizon);

std::vector<ExpertOp> make_expert_ops(const model::ModelContext& ctx);

/// Rows of the stacked feature block for one mode j: Re parts at
/// [2jN, 2jN+N), Im parts at [2jN+N, 2jN+2N).
inline Eigen::Index feature_rows(const ExpertOp& op) {
    return 2 * static_cast<Eigen::Index>(op.modes.size()) * op.order;
}

/// Project a batch of raw windows (L x S) and evaluate the DFT of the
/// coefficient trajectory at the selected modes. Returns (2MN x S).
Eigen::MatrixXd compute_features(const ExpertOp& op,
                                 const Eigen::Ref<const Eigen::MatrixXd>& x);

/// Fold weights into the real stacked map used by the forward GEMM (N x 2MN).
Eigen::MatrixXd fold_weights(const ExpertOp& op, const spectral::SpectralWeights& w);

/// Final memory row of the mode-mixed trajectory for each column (N x S).
Eigen::MatrixXd last_memory_row(const ExpertOp& op, const spectral::SpectralWeights& w,
                                const Eigen::Ref<const Eigen::MatrixXd>& bstack);

/// Expert forecast (tau x S) from stacked features.
Eigen::MatrixXd forward_from_features(const ExpertOp& op, const spectral::SpectralWeights& w,
                                      const Eigen::Ref<const Eigen::MatrixXd>& bstack);

/// Accumulate spectral-weight gradients for one expert. g_forecast is the
/// upstream gradient at this expert's forecast (tau x S). When g_features is
/// non-null, also emits the packed gradient with respect to the stacked
/// features (2MN x S) for chaining into the instance-normalization affine.
void accumulate_weight_grad(const ExpertOp& op, const spectral::SpectralWeights& w,
                            const Eigen::Ref<const Eigen::MatrixXd>& bstack,
                            const Eigen::Ref<const Eigen::MatrixXd>& g_forecast,
                            spectral::SpectralWeights& grad, Eigen::MatrixXd* g_features);

/// Adjoint of compute_features: maps a packed feature gradient (2MN x S)
/// back to the raw window inputs (L x S).
Eigen::MatrixXd features_backward_to_input(const ExpertOp& op,
                                           const Eigen::Ref<const Eigen::MatrixXd>& g_features);

} // namespace film::engine

#endif
