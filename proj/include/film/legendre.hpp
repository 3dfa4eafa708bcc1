#ifndef FILM_LEGENDRE_HPP
#define FILM_LEGENDRE_HPP

#include <Eigen/Dense>

namespace film::legendre {

/// Continuous-time transition system of the truncated Legendre projection.
/// Entries follow the fixed windowed-Legendre convention and are fully
/// determined by the order:
///   a(n, k) = (2n+1) * (-1)^(n-k)  for k <= n,   (2n+1) otherwise
///   b(n)    = (2n+1) * (-1)^n
struct LegendreTransition {
    Eigen::Index order = 0;
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
};

/// Bilinear (Tustin) discretization of the stable continuous system
/// dc/dt = -A c + B f at step size dt. dt is a dimensionless fraction of
/// the memory window; dt = 1/L covers a length-L sample window exactly.
struct DiscretizedTransition {
    Eigen::MatrixXd ad;
    Eigen::VectorXd bd;
    double dt = 0.0;
};

LegendreTransition build_transition(Eigen::Index order);

DiscretizedTransition discretize_bilinear(const LegendreTransition& trans, double dt);

/// Online projection recursion C_t = ad C_{t-1} + bd x_t, C_0 = 0.
/// Row t-1 of the result is the memory state after consuming sample t.
/// Throws DataError naming the index of any non-finite sample.
Eigen::MatrixXd project(const Eigen::Ref<const Eigen::VectorXd>& signal,
                        const DiscretizedTransition& disc);

/// Legendre polynomials on the right-aligned grid x_i = 2(i+1)/L - 1:
/// entries(i, n) = P_n(x_i). Column 0 is all ones and the final row is all
/// ones (P_n(1) = 1), so row L-1 corresponds to the freshest time point.
Eigen::MatrixXd build_eval_matrix(Eigen::Index length, Eigen::Index order);

/// Expand a memory vector back into the last `tail` samples of its window.
/// The state-space recursion stores coefficients in the mirrored window
/// orientation, so the expansion applies the Legendre parity factor (-1)^n
/// before evaluating on the grid; see the round-trip tests.
Eigen::VectorXd reconstruct(const Eigen::Ref<const Eigen::VectorXd>& memory,
                            const Eigen::Ref<const Eigen::MatrixXd>& eval,
                            Eigen::Index tail);

} // namespace film::legendre

#endif
