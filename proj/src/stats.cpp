// SPDX-License-Identifier: Apache-2.0
#include "brox/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "brox/error.hpp"

namespace brox::stats {

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples)
    : samples_(std::move(samples)) {
    detail::require(!samples_.empty(), "empirical distribution needs at least one sample");
    for (double s : samples_) detail::require(!std::isnan(s), "NaN sample");
    std::sort(samples_.begin(), samples_.end());
}

double EmpiricalDistribution::ecdf(double x) const noexcept {
    const auto it = std::upper_bound(samples_.begin(), samples_.end(), x);
    return static_cast<double>(it - samples_.begin()) / static_cast<double>(samples_.size());
}

double EmpiricalDistribution::ecdf_left(double x) const noexcept {
    const auto it = std::lower_bound(samples_.begin(), samples_.end(), x);
    return static_cast<double>(it - samples_.begin()) / static_cast<double>(samples_.size());
}

double EmpiricalDistribution::quantile(double p) const {
    detail::require(p >= 0.0 && p <= 1.0, "quantile level must lie in [0,1]");
    const double h = p * static_cast<double>(samples_.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, samples_.size() - 1);
    return samples_[lo] + (h - static_cast<double>(lo)) * (samples_[hi] - samples_[lo]);
}

double EmpiricalDistribution::mean() const noexcept {
    return std::accumulate(samples_.begin(), samples_.end(), 0.0) /
           static_cast<double>(samples_.size());
}

double EmpiricalDistribution::stddev() const noexcept {
    if (samples_.size() < 2) return 0.0;
    const double m = mean();
    double ss = 0.0;
    for (double s : samples_) ss += (s - m) * (s - m);
    return std::sqrt(ss / static_cast<double>(samples_.size() - 1));
}

double ks_statistic(const EmpiricalDistribution& dist, const Cdf& cdf) {
    const auto xs = dist.samples();
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        // Skip ties so the step is evaluated once, at its full height.
        if (i + 1 < xs.size() && xs[i + 1] == xs[i]) continue;
        const double f = cdf(xs[i]);
        const auto first = static_cast<std::size_t>(
            std::lower_bound(xs.begin(), xs.end(), xs[i]) - xs.begin());
        d = std::max(d, std::max(static_cast<double>(i + 1) / n - f,
                                 f - static_cast<double>(first) / n));
    }
    return d;
}

double ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
    return ks_two_sample_below(a, b, std::numeric_limits<double>::infinity());
}

double ks_two_sample_below(const EmpiricalDistribution& a, const EmpiricalDistribution& b,
                           double cap) {
    const auto xa = a.samples();
    const auto xb = b.samples();
    const double na = static_cast<double>(xa.size());
    const double nb = static_cast<double>(xb.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < xa.size() || j < xb.size()) {
        double x;
        if (j == xb.size() || (i < xa.size() && xa[i] <= xb[j])) x = xa[i];
        else x = xb[j];
        if (!(x < cap)) break;
        while (i < xa.size() && xa[i] == x) ++i;
        while (j < xb.size() && xb[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double dkw_band(std::size_t n, double alpha) {
    detail::require(n >= 1, "DKW band needs n >= 1");
    detail::require(alpha > 0.0 && alpha < 1.0, "DKW alpha must lie in (0,1)");
    return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

}  // namespace brox::stats
