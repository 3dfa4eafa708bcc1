#ifndef FILM_STATS_HPP
#define FILM_STATS_HPP

#include <vector>

namespace film::stats {

struct KSResult {
    double statistic = 0.0;
    double threshold = 0.0;
    double alpha = 0.0;
    std::size_t n = 0;
    std::size_t m = 0;
    bool reject = false;
};

/// Exact two-sample Kolmogorov-Smirnov statistic: the supremum distance
/// between the empirical CDFs, found by a merged sweep over both samples.
double ks_statistic(const std::vector<double>& sample1, const std::vector<double>& sample2);

/// Large-sample rejection threshold sqrt(-ln(alpha/2)/2) * sqrt((n+m)/(n m)).
double ks_threshold(double alpha, std::size_t n, std::size_t m);

KSResult ks_test(const std::vector<double>& sample1, const std::vector<double>& sample2,
                 double alpha);

} // namespace film::stats

#endif
