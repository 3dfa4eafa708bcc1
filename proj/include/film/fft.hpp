#ifndef FILM_FFT_HPP
#define FILM_FFT_HPP

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace film::fft {

/// Non-negative-frequency bins of a real DFT taken down the time axis of a
/// trajectory. Forward transform is unnormalized; the inverse carries 1/L.
struct FrequencyTrajectory {
    Eigen::MatrixXcd bins;            // (floor(L/2)+1) x channels
    Eigen::Index original_length = 0; // L
};

/// In-place complex DFT of arbitrary length. Power-of-two lengths use the
/// iterative radix-2 kernel, everything else goes through Bluestein's
/// chirp-z reduction to a power-of-two convolution. Neither direction is
/// normalized; an inverse pass returns length * signal.
void transform(std::vector<std::complex<double>>& data, bool inverse);

/// DFT over the time axis (rows) of a real trajectory; keeps bins 0..L/2.
/// Throws DataError on non-finite input.
FrequencyTrajectory rfft_time(const Eigen::Ref<const Eigen::MatrixXd>& traj);

/// Inverse of rfft_time with 1/L normalization. The imaginary parts of the
/// DC bin and (for even L) the Nyquist bin do not contribute, matching the
/// Hermitian half-spectrum convention.
Eigen::MatrixXd irfft_time(const FrequencyTrajectory& freq, Eigen::Index length);

} // namespace film::fft

#endif
