#ifndef FILM_SPECTRAL_HPP
#define FILM_SPECTRAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "film/fft.hpp"

namespace film::spectral {

enum class ModePolicy { lowest, random, low_random };

std::string to_string(ModePolicy policy);
ModePolicy parse_mode_policy(const std::string& name);

/// Which real-FFT bins receive learnable mixing.
struct ModeSet {
    std::vector<Eigen::Index> indices; // sorted, distinct, < floor(L/2)+1
    ModePolicy policy = ModePolicy::lowest;
    std::uint64_t seed = 0;

    Eigen::Index count() const { return static_cast<Eigen::Index>(indices.size()); }
};

/// Deterministic mode selection. `lowest` takes bins 0..m-1, `random` draws
/// m distinct bins, `low_random` keeps the ceil(0.8 m) lowest bins and draws
/// the remainder from the higher bins without replacement. Requests beyond
/// the bin count clamp with a warning on stderr.
ModeSet select_modes(ModePolicy policy, Eigen::Index m, Eigen::Index bin_count,
                     std::uint64_t seed);

/// Learnable per-mode channel mixing, either one dense N x N complex map per
/// selected mode or the rank-K factorization w2^T * w1[m] * w0^T.
struct SpectralWeights {
    enum class Variant { full, low_rank };

    Variant variant = Variant::full;
    std::vector<Eigen::MatrixXcd> full_w; // M maps, each N x N

    Eigen::MatrixXcd w0;                  // N x K
    std::vector<Eigen::MatrixXcd> w1;     // M maps, each K x K
    Eigen::MatrixXcd w2;                  // K x N
    Eigen::Index rank = 0;                // K

    Eigen::Index mode_count() const;
    Eigen::Index order() const; // N
};

/// Fresh weights with every real and imaginary part drawn uniformly from
/// [0, 1/(N*N)). rank = 0 selects the full variant.
SpectralWeights init_spectral_weights(Eigen::Index order, Eigen::Index mode_count,
                                      Eigen::Index rank, std::uint64_t seed);

/// Full-variant weights that act as the identity on every selected mode.
SpectralWeights identity_spectral_weights(Eigen::Index order, Eigen::Index mode_count);

/// Frequency-enhanced mixing: DFT over time, apply the per-mode channel map
/// on the selected bins, zero all other bins, inverse DFT. Linear in both
/// the trajectory and the weights.
Eigen::MatrixXd fel_forward(const Eigen::Ref<const Eigen::MatrixXd>& traj,
                            const SpectralWeights& weights, const ModeSet& modes);

struct ParamCount {
    std::int64_t count = 0;      // complex scalars counted once
    double ratio_vs_full = 0.0;  // count / (M * N^2)
};

ParamCount param_count(const SpectralWeights& weights);

struct ColumnProjectionReport {
    double error = 0.0;                  // Frobenius norm of A - P(A)
    double bound = 0.0;                  // (1 + eps) * a_min * sqrt((n-s) d)
    double a_min = 0.0;                  // max |entry| over the last n-s columns
    std::vector<Eigen::Index> selected;  // chosen column indices
};

/// Project A onto the span of its first `keep_first` columns plus `extra`
/// random columns from the remainder and report the residual against the
/// coherence-style bound. Rank-deficient selections go through least squares.
ColumnProjectionReport column_projection_error(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                               Eigen::Index keep_first, Eigen::Index extra,
                                               std::uint64_t seed, double epsilon);

} // namespace film::spectral

#endif
