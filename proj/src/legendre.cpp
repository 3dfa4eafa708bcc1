#include "film/legendre.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "film/errors.hpp"

namespace film::legendre {

LegendreTransition build_transition(Eigen::Index order) {
    if (order < 1) {
        throw std::invalid_argument("build_transition: order must be >= 1");
    }
    LegendreTransition t;
    t.order = order;
    t.a.resize(order, order);
    t.b.resize(order);
    for (Eigen::Index n = 0; n < order; ++n) {
        const double scale = 2.0 * static_cast<double>(n) + 1.0;
        for (Eigen::Index k = 0; k < order; ++k) {
            if (k <= n) {
                t.a(n, k) = scale * (((n - k) % 2 == 0) ? 1.0 : -1.0);
            } else {
                t.a(n, k) = scale;
            }
        }
        t.b(n) = scale * ((n % 2 == 0) ? 1.0 : -1.0);
    }
    return t;
}

DiscretizedTransition discretize_bilinear(const LegendreTransition& trans, double dt) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("discretize_bilinear: dt must be > 0");
    }
    const Eigen::Index n = trans.order;
    const Eigen::MatrixXd ac = -trans.a;
    const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) - (dt / 2.0) * ac;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
    // lhs is I + (dt/2) A with A the stable generator; it is singular only
    // for degenerate dt far outside the supported range.
    const double rcond_proxy = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(rcond_proxy > 0.0) || !std::isfinite(rcond_proxy)) {
        throw NumericalError("discretize_bilinear: singular (I - dt/2 * Ac)");
    }
    DiscretizedTransition d;
    d.ad = lu.solve(Eigen::MatrixXd::Identity(n, n) + (dt / 2.0) * ac);
    d.bd = lu.solve((dt * trans.b).eval());
    d.dt = dt;
    if (!d.ad.allFinite() || !d.bd.allFinite()) {
        throw NumericalError("discretize_bilinear: non-finite discretization");
    }
    return d;
}

Eigen::MatrixXd project(const Eigen::Ref<const Eigen::VectorXd>& signal,
                        const DiscretizedTransition& disc) {
    const Eigen::Index len = signal.size();
    if (len < 1) {
        throw std::invalid_argument("project: signal must hold at least one sample");
    }
    for (Eigen::Index t = 0; t < len; ++t) {
        if (!std::isfinite(signal(t))) {
            throw DataError("project: non-finite sample at index " + std::to_string(t));
        }
    }
    const Eigen::Index order = disc.ad.rows();
    Eigen::MatrixXd coeffs(len, order);
    Eigen::VectorXd state = Eigen::VectorXd::Zero(order);
    for (Eigen::Index t = 0; t < len; ++t) {
        state = disc.ad * state + disc.bd * signal(t);
        coeffs.row(t) = state.transpose();
    }
    return coeffs;
}

Eigen::MatrixXd build_eval_matrix(Eigen::Index length, Eigen::Index order) {
    if (length < 1 || order < 1) {
        throw std::invalid_argument("build_eval_matrix: length and order must be >= 1");
    }
    Eigen::VectorXd xs(length);
    for (Eigen::Index i = 0; i < length; ++i) {
        xs(i) = 2.0 * static_cast<double>(i + 1) / static_cast<double>(length) - 1.0;
    }
    Eigen::MatrixXd e(length, order);
    e.col(0).setOnes();
    if (order > 1) {
        e.col(1) = xs;
    }
    // (n+1) P_{n+1}(x) = (2n+1) x P_n(x) - n P_{n-1}(x)
    for (Eigen::Index n = 1; n + 1 < order; ++n) {
        const double dn = static_cast<double>(n);
        e.col(n + 1) = ((2.0 * dn + 1.0) * xs.cwiseProduct(e.col(n)) - dn * e.col(n - 1)) / (dn + 1.0);
    }
    return e;
}

Eigen::VectorXd reconstruct(const Eigen::Ref<const Eigen::VectorXd>& memory,
                            const Eigen::Ref<const Eigen::MatrixXd>& eval,
                            Eigen::Index tail) {
    if (tail < 1 || tail > eval.rows()) {
        throw std::invalid_argument("reconstruct: tail must be in [1, eval rows]");
    }
    if (memory.size() != eval.cols()) {
        throw std::invalid_argument("reconstruct: memory size does not match eval order");
    }
    Eigen::VectorXd flipped(memory.size());
    for (Eigen::Index n = 0; n < memory.size(); ++n) {
        flipped(n) = (n % 2 == 0) ? memory(n) : -memory(n);
    }
    return eval.bottomRows(tail) * flipped;
}

} // namespace film::legendre
