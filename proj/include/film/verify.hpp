#ifndef FILM_VERIFY_HPP
#define FILM_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace film::verify {

struct VerifyReport {
    std::string name;
    double measured = 0.0;
    double expected = 0.0; // target value or bound
    bool pass = false;
    std::string detail;
};

/// Round-trip projection error versus Legendre order on seeded Lipschitz
/// random walks. Passes when the mean log-log slope is at most -0.4
/// (the O(1/sqrt(N)) approximation bound predicts -0.5).
VerifyReport approximation_rate(const std::vector<Eigen::Index>& orders, Eigen::Index length,
                                Eigen::Index seeds, std::uint64_t seed0);

/// Noise accumulation in a unitary autoregression: the mean deviation of the
/// noisy trajectory from its deterministic part after theta steps must grow
/// like sqrt(theta); passes when the fitted slope is within 0.5 +/- 0.1.
VerifyReport noise_accumulation(const std::vector<Eigen::Index>& thetas, Eigen::Index trials,
                                Eigen::Index dim, double sigma, std::uint64_t seed);

/// Column-subset projection residual against the (1+eps) a_min sqrt((n-s) d)
/// bound on a matrix whose trailing columns are uniformly small. The number
/// of random extra columns follows the k^2/eps^2 sampling budget.
VerifyReport projection_bound(Eigen::Index d, Eigen::Index n, Eigen::Index keep_first,
                              double decay, double epsilon, Eigen::Index sample_rank,
                              std::uint64_t seed);

/// All three checks at their default desk-scale settings.
std::vector<VerifyReport> run_all(std::uint64_t seed);

} // namespace film::verify

#endif
