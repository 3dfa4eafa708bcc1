// Iterative radix-2 FFT with a Bluestein fallback so that any trajectory
// length works exactly (expert windows are arbitrary multiples of the
// horizon). Twiddles for the chirp use n^2 mod 2N to keep angles small.

#include "film/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "film/errors.hpp"

namespace film::fft {

namespace {

using cd = std::complex<double>;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Radix-2 Cooley-Tukey, n must be a power of two.
void radix2(std::vector<cd>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n < 2) return;
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const cd wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cd w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const cd u = a[i + j];
                const cd v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Chirp-z: X_k = w_k * sum_n (x_n w_n) * conj(w_{k-n}), w_m = e^{-i pi m^2 / N}.
void bluestein(std::vector<cd>& a, bool inverse) {
    const std::size_t n = a.size();
    const std::size_t m = next_pow2(2 * n - 1);
    std::vector<cd> chirp(n);
    for (std::size_t i = 0; i < n; ++i) {
        // i^2 mod 2n keeps the angle argument bounded for long inputs
        const std::size_t sq = (i * i) % (2 * n);
        const double ang = std::numbers::pi * static_cast<double>(sq) / static_cast<double>(n) * (inverse ? 1.0 : -1.0);
        chirp[i] = cd(std::cos(ang), std::sin(ang));
    }
    std::vector<cd> u(m, cd(0.0, 0.0));
    std::vector<cd> v(m, cd(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i) u[i] = a[i] * chirp[i];
    v[0] = std::conj(chirp[0]);
    for (std::size_t i = 1; i < n; ++i) {
        v[i] = std::conj(chirp[i]);
        v[m - i] = std::conj(chirp[i]);
    }
    radix2(u, false);
    radix2(v, false);
    for (std::size_t i = 0; i < m; ++i) u[i] *= v[i];
    radix2(u, true);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = u[i] * scale * chirp[i];
    }
}

} // namespace

void transform(std::vector<cd>& data, bool inverse) {
    if (data.empty()) return;
    if (is_pow2(data.size())) {
        radix2(data, inverse);
    } else {
        bluestein(data, inverse);
    }
}

FrequencyTrajectory rfft_time(const Eigen::Ref<const Eigen::MatrixXd>& traj) {
    const Eigen::Index len = traj.rows();
    if (len < 1) {
        throw std::invalid_argument("rfft_time: trajectory must have at least one row");
    }
    if (!traj.allFinite()) {
        for (Eigen::Index c = 0; c < traj.cols(); ++c) {
            for (Eigen::Index t = 0; t < len; ++t) {
                if (!std::isfinite(traj(t, c))) {
                    throw DataError("rfft_time: non-finite value at row " + std::to_string(t) +
                                    ", column " + std::to_string(c));
                }
            }
        }
    }
    const Eigen::Index nbins = len / 2 + 1;
    FrequencyTrajectory out;
    out.original_length = len;
    out.bins.resize(nbins, traj.cols());
    std::vector<cd> buf(static_cast<std::size_t>(len));
    for (Eigen::Index c = 0; c < traj.cols(); ++c) {
        for (Eigen::Index t = 0; t < len; ++t) buf[static_cast<std::size_t>(t)] = cd(traj(t, c), 0.0);
        transform(buf, false);
        for (Eigen::Index k = 0; k < nbins; ++k) out.bins(k, c) = buf[static_cast<std::size_t>(k)];
    }
    return out;
}

Eigen::MatrixXd irfft_time(const FrequencyTrajectory& freq, Eigen::Index length) {
    if (length < 1) {
        throw std::invalid_argument("irfft_time: length must be >= 1");
    }
    if (freq.bins.rows() != length / 2 + 1) {
        throw std::invalid_argument("irfft_time: bin count " + std::to_string(freq.bins.rows()) +
                                    " inconsistent with length " + std::to_string(length));
    }
    const Eigen::Index nbins = freq.bins.rows();
    Eigen::MatrixXd out(length, freq.bins.cols());
    std::vector<cd> buf(static_cast<std::size_t>(length));
    const double scale = 1.0 / static_cast<double>(length);
    for (Eigen::Index c = 0; c < freq.bins.cols(); ++c) {
        buf[0] = cd(freq.bins(0, c).real(), 0.0);
        for (Eigen::Index k = 1; k < nbins; ++k) {
            if (length % 2 == 0 && k == length / 2) {
                buf[static_cast<std::size_t>(k)] = cd(freq.bins(k, c).real(), 0.0);
            } else {
                buf[static_cast<std::size_t>(k)] = freq.bins(k, c);
                buf[static_cast<std::size_t>(length - k)] = std::conj(freq.bins(k, c));
            }
        }
        transform(buf, true);
        for (Eigen::Index t = 0; t < length; ++t) {
            out(t, c) = buf[static_cast<std::size_t>(t)].real() * scale;
        }
    }
    return out;
}

} // namespace film::fft
