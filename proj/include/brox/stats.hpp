// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace brox::stats {

/// Sorted sample set. Immutable after construction.
class EmpiricalDistribution {
  public:
    /// Takes ownership and sorts. Throws InvalidArgument when empty or when a
    /// sample is NaN.
    explicit EmpiricalDistribution(std::vector<double> samples);

    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
    [[nodiscard]] std::span<const double> samples() const noexcept { return samples_; }
    [[nodiscard]] double min() const noexcept { return samples_.front(); }
    [[nodiscard]] double max() const noexcept { return samples_.back(); }

    /// Fraction of samples <= x (right-continuous).
    [[nodiscard]] double ecdf(double x) const noexcept;

    /// Fraction of samples < x (left limit of the ECDF).
    [[nodiscard]] double ecdf_left(double x) const noexcept;

    /// Type-7 (linear interpolation) quantile, p in [0,1].
    [[nodiscard]] double quantile(double p) const;
    [[nodiscard]] double median() const { return quantile(0.5); }
    [[nodiscard]] double mean() const noexcept;
    /// Unbiased sample standard deviation (0 for a single sample).
    [[nodiscard]] double stddev() const noexcept;

  private:
    std::vector<double> samples_;
};

using Cdf = std::function<double(double)>;

/// sup_x |F_n(x) - F(x)|, both one-sided gaps checked at every sample point.
double ks_statistic(const EmpiricalDistribution& dist, const Cdf& cdf);

/// sup_x |F_n(x) - G_m(x)| between two empirical distributions.
double ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

/// Two-sample KS restricted to x < cap. Used when one side of a comparison
/// is right-censored at `cap`.
double ks_two_sample_below(const EmpiricalDistribution& a, const EmpiricalDistribution& b,
                           double cap);

/// Dvoretzky-Kiefer-Wolfowitz band half-width sqrt(ln(2/alpha) / (2n)).
double dkw_band(std::size_t n, double alpha);

}  // namespace brox::stats
