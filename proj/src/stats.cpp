#include "film/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace film::stats {

double ks_statistic(const std::vector<double>& sample1, const std::vector<double>& sample2) {
    if (sample1.empty() || sample2.empty()) {
        throw std::invalid_argument("ks_statistic: samples must be nonempty");
    }
    std::vector<double> a(sample1), b(sample2);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_threshold(double alpha, std::size_t n, std::size_t m) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw std::invalid_argument("ks_threshold: alpha must be in (0, 1)");
    }
    if (n < 1 || m < 1) {
        throw std::invalid_argument("ks_threshold: sample sizes must be >= 1");
    }
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    return c * std::sqrt((dn + dm) / (dn * dm));
}

KSResult ks_test(const std::vector<double>& sample1, const std::vector<double>& sample2,
                 double alpha) {
    KSResult r;
    r.statistic = ks_statistic(sample1, sample2);
    r.threshold = ks_threshold(alpha, sample1.size(), sample2.size());
    r.alpha = alpha;
    r.n = sample1.size();
    r.m = sample2.size();
    r.reject = r.statistic > r.threshold;
    return r;
}

} // namespace film::stats
