#include "film/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>
#include <stdexcept>

#include <Eigen/SVD>

namespace film::spectral {

std::string to_string(ModePolicy policy) {
    switch (policy) {
        case ModePolicy::lowest: return "lowest";
        case ModePolicy::random: return "random";
        case ModePolicy::low_random: return "low_random";
    }
    return "lowest";
}

ModePolicy parse_mode_policy(const std::string& name) {
    if (name == "lowest") return ModePolicy::lowest;
    if (name == "random") return ModePolicy::random;
    if (name == "low_random") return ModePolicy::low_random;
    throw std::invalid_argument("unknown mode policy: " + name);
}

namespace {

// Draw `want` distinct values from [lo, hi) by partial Fisher-Yates; the
// explicit implementation pins the byte-level outcome to the seed.
std::vector<Eigen::Index> sample_without_replacement(Eigen::Index lo, Eigen::Index hi,
                                                     Eigen::Index want, std::mt19937_64& rng) {
    std::vector<Eigen::Index> pool;
    pool.reserve(static_cast<std::size_t>(hi - lo));
    for (Eigen::Index v = lo; v < hi; ++v) pool.push_back(v);
    std::vector<Eigen::Index> out;
    out.reserve(static_cast<std::size_t>(want));
    for (Eigen::Index i = 0; i < want; ++i) {
        const std::uint64_t span = static_cast<std::uint64_t>(pool.size() - static_cast<std::size_t>(i));
        const std::size_t j = static_cast<std::size_t>(i) + static_cast<std::size_t>(rng() % span);
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
        out.push_back(pool[static_cast<std::size_t>(i)]);
    }
    return out;
}

} // namespace

ModeSet select_modes(ModePolicy policy, Eigen::Index m, Eigen::Index bin_count,
                     std::uint64_t seed) {
    if (m < 1) {
        throw std::invalid_argument("select_modes: mode count must be >= 1");
    }
    if (bin_count < 1) {
        throw std::invalid_argument("select_modes: bin count must be >= 1");
    }
    if (m > bin_count) {
        std::cerr << "select_modes: requested " << m << " modes but only " << bin_count
                  << " bins exist; clamping\n";
        m = bin_count;
    }
    ModeSet set;
    set.policy = policy;
    set.seed = seed;
    std::mt19937_64 rng(seed);
    switch (policy) {
        case ModePolicy::lowest: {
            for (Eigen::Index i = 0; i < m; ++i) set.indices.push_back(i);
            break;
        }
        case ModePolicy::random: {
            set.indices = sample_without_replacement(0, bin_count, m, rng);
            break;
        }
        case ModePolicy::low_random: {
            const Eigen::Index low = std::min<Eigen::Index>(
                m, static_cast<Eigen::Index>(std::ceil(0.8 * static_cast<double>(m))));
            for (Eigen::Index i = 0; i < low; ++i) set.indices.push_back(i);
            const Eigen::Index rest = std::min(m - low, bin_count - low);
            auto high = sample_without_replacement(low, bin_count, rest, rng);
            set.indices.insert(set.indices.end(), high.begin(), high.end());
            break;
        }
    }
    std::sort(set.indices.begin(), set.indices.end());
    return set;
}

Eigen::Index SpectralWeights::mode_count() const {
    return variant == Variant::full ? static_cast<Eigen::Index>(full_w.size())
                                    : static_cast<Eigen::Index>(w1.size());
}

Eigen::Index SpectralWeights::order() const {
    if (variant == Variant::full) {
        return full_w.empty() ? 0 : full_w.front().rows();
    }
    return w0.rows();
}

SpectralWeights init_spectral_weights(Eigen::Index order, Eigen::Index mode_count,
                                      Eigen::Index rank, std::uint64_t seed) {
    if (order < 1 || mode_count < 1 || rank < 0) {
        throw std::invalid_argument("init_spectral_weights: bad dimensions");
    }
    const double scale = 1.0 / (static_cast<double>(order) * static_cast<double>(order));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, scale);
    auto draw = [&](Eigen::Index rows, Eigen::Index cols) {
        Eigen::MatrixXcd w(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) {
                const double re = dist(rng);
                const double im = dist(rng);
                w(i, j) = std::complex<double>(re, im);
            }
        }
        return w;
    };
    SpectralWeights w;
    if (rank == 0) {
        w.variant = SpectralWeights::Variant::full;
        w.full_w.reserve(static_cast<std::size_t>(mode_count));
        for (Eigen::Index m = 0; m < mode_count; ++m) w.full_w.push_back(draw(order, order));
    } else {
        w.variant = SpectralWeights::Variant::low_rank;
        w.rank = rank;
        w.w0 = draw(order, rank);
        w.w1.reserve(static_cast<std::size_t>(mode_count));
        for (Eigen::Index m = 0; m < mode_count; ++m) w.w1.push_back(draw(rank, rank));
        w.w2 = draw(rank, order);
    }
    return w;
}

SpectralWeights identity_spectral_weights(Eigen::Index order, Eigen::Index mode_count) {
    SpectralWeights w;
    w.variant = SpectralWeights::Variant::full;
    w.full_w.assign(static_cast<std::size_t>(mode_count),
                    Eigen::MatrixXcd::Identity(order, order));
    return w;
}

namespace {

// Per-mode channel map applied to one bin held column-wise.
Eigen::MatrixXcd apply_mode(const SpectralWeights& w, Eigen::Index mode_pos,
                            const Eigen::MatrixXcd& bin) {
    if (w.variant == SpectralWeights::Variant::full) {
        return w.full_w[static_cast<std::size_t>(mode_pos)] * bin;
    }
    const Eigen::MatrixXcd u = w.w0.transpose() * bin;
    const Eigen::MatrixXcd v = w.w1[static_cast<std::size_t>(mode_pos)] * u;
    return w.w2.transpose() * v;
}

} // namespace

Eigen::MatrixXd fel_forward(const Eigen::Ref<const Eigen::MatrixXd>& traj,
                            const SpectralWeights& weights, const ModeSet& modes) {
    if (weights.mode_count() != modes.count()) {
        throw std::invalid_argument("fel_forward: weight mode dimension " +
                                    std::to_string(weights.mode_count()) +
                                    " does not match mode set size " +
                                    std::to_string(modes.count()));
    }
    if (weights.order() != traj.cols()) {
        throw std::invalid_argument("fel_forward: weight channel dimension " +
                                    std::to_string(weights.order()) +
                                    " does not match trajectory width " +
                                    std::to_string(traj.cols()));
    }
    const Eigen::Index len = traj.rows();
    const fft::FrequencyTrajectory in = fft::rfft_time(traj);
    fft::FrequencyTrajectory out;
    out.original_length = len;
    out.bins = Eigen::MatrixXcd::Zero(in.bins.rows(), in.bins.cols());
    for (Eigen::Index j = 0; j < modes.count(); ++j) {
        const Eigen::Index k = modes.indices[static_cast<std::size_t>(j)];
        if (k >= in.bins.rows()) {
            throw std::invalid_argument("fel_forward: mode index " + std::to_string(k) +
                                        " out of range for length " + std::to_string(len));
        }
        const Eigen::MatrixXcd bin = in.bins.row(k).transpose();
        out.bins.row(k) = apply_mode(weights, j, bin).transpose();
    }
    return fft::irfft_time(out, len);
}

ParamCount param_count(const SpectralWeights& weights) {
    const Eigen::Index n = weights.order();
    const Eigen::Index m = weights.mode_count();
    ParamCount pc;
    if (weights.variant == SpectralWeights::Variant::full) {
        pc.count = static_cast<std::int64_t>(m) * n * n;
    } else {
        const Eigen::Index k = weights.rank;
        pc.count = static_cast<std::int64_t>(n) * k + static_cast<std::int64_t>(k) * k * m +
                   static_cast<std::int64_t>(k) * n;
    }
    const double full = static_cast<double>(m) * static_cast<double>(n) * static_cast<double>(n);
    pc.ratio_vs_full = static_cast<double>(pc.count) / full;
    return pc;
}

ColumnProjectionReport column_projection_error(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                               Eigen::Index keep_first, Eigen::Index extra,
                                               std::uint64_t seed, double epsilon) {
    const Eigen::Index d = a.rows();
    const Eigen::Index n = a.cols();
    if (keep_first < 0 || extra < 0 || keep_first + extra > n) {
        throw std::invalid_argument("column_projection_error: need keep_first + extra <= columns");
    }
    ColumnProjectionReport rep;
    for (Eigen::Index i = 0; i < keep_first; ++i) rep.selected.push_back(i);
    std::mt19937_64 rng(seed);
    auto high = sample_without_replacement(keep_first, n, extra, rng);
    rep.selected.insert(rep.selected.end(), high.begin(), high.end());
    std::sort(rep.selected.begin(), rep.selected.end());

    rep.a_min = (n > keep_first) ? a.rightCols(n - keep_first).cwiseAbs().maxCoeff() : 0.0;
    rep.bound = (1.0 + epsilon) * rep.a_min *
                std::sqrt(static_cast<double>(n - keep_first) * static_cast<double>(d));

    if (rep.selected.empty()) {
        rep.error = a.norm();
        return rep;
    }
    Eigen::MatrixXd s(d, static_cast<Eigen::Index>(rep.selected.size()));
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
        s.col(j) = a.col(rep.selected[static_cast<std::size_t>(j)]);
    }
    // Orthogonal projector via thin SVD; zero singular directions drop out,
    // which is the least-squares treatment of rank-deficient selections.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(s, Eigen::ComputeThinU);
    const double tol = std::max(d, s.cols()) * svd.singularValues().maxCoeff() *
                       std::numeric_limits<double>::epsilon();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
        if (svd.singularValues()(i) > tol) ++rank;
    }
    if (rank == 0) {
        rep.error = a.norm();
        return rep;
    }
    const Eigen::MatrixXd u = svd.matrixU().leftCols(rank);
    rep.error = (a - u * (u.transpose() * a)).norm();
    return rep;
}

} // namespace film::spectral
