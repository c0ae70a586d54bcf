// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "brox/error.hpp"
#include "brox/rng.hpp"
#include "brox/stats.hpp"
#include "doctest.h"

using brox::stats::EmpiricalDistribution;

TEST_CASE("ecdf counts") {
    const EmpiricalDistribution d({3.0, 1.0, 2.0});
    CHECK(d.ecdf(0.5) == 0.0);
    CHECK(d.ecdf(3.0) == 1.0);
    CHECK(d.ecdf(2.0) == doctest::Approx(2.0 / 3.0));
    CHECK(d.ecdf_left(2.0) == doctest::Approx(1.0 / 3.0));
    CHECK(d.min() == 1.0);
    CHECK(d.max() == 3.0);
    CHECK(d.median() == 2.0);
    CHECK(d.quantile(0.25) == doctest::Approx(1.5));
    CHECK(d.mean() == doctest::Approx(2.0));
    CHECK(d.stddev() == doctest::Approx(1.0));
}

TEST_CASE("ecdf is monotone and right-continuous at samples") {
    brox::Stream s(2);
    std::vector<double> v(500);
    for (auto& x : v) x = std::floor(10.0 * s.uniform());
    const EmpiricalDistribution d(v);
    double prev = 0.0;
    for (double x = -1.0; x <= 11.0; x += 0.25) {
        CHECK(d.ecdf(x) >= prev);
        prev = d.ecdf(x);
    }
    for (double x : d.samples()) CHECK(d.ecdf(x) == d.ecdf(x + 1e-12));
}

TEST_CASE("invalid inputs throw") {
    CHECK_THROWS_AS(EmpiricalDistribution({}), brox::InvalidArgument);
    CHECK_THROWS_AS(EmpiricalDistribution({1.0, std::nan("")}), brox::InvalidArgument);
    CHECK_THROWS_AS(brox::stats::dkw_band(0, 0.01), brox::InvalidArgument);
    CHECK_THROWS_AS(brox::stats::dkw_band(10, 0.0), brox::InvalidArgument);
    CHECK_THROWS_AS(brox::stats::dkw_band(10, 1.0), brox::InvalidArgument);
    CHECK_THROWS_AS((void)EmpiricalDistribution({1.0}).quantile(1.5), brox::InvalidArgument);
}

TEST_CASE("KS statistics") {
    const EmpiricalDistribution a({1.0, 2.0, 3.0});
    CHECK(brox::stats::ks_two_sample(a, a) == 0.0);
    const auto uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
    CHECK(brox::stats::ks_statistic(EmpiricalDistribution({0.0}), uniform) == 1.0);

    const EmpiricalDistribution b({0.5, 2.5, 4.0, 5.0});
    CHECK(brox::stats::ks_two_sample(a, b) == brox::stats::ks_two_sample(b, a));
    CHECK(brox::stats::ks_two_sample(a, b) == doctest::Approx(0.5));
    // Below 2.2 the largest gap is at x = 2 (2/3 against 1/4).
    CHECK(brox::stats::ks_two_sample_below(a, b, 2.2) == doctest::Approx(5.0 / 12.0));
}

TEST_CASE("uniform draws fall inside the DKW band") {
    brox::Stream s(2024);
    std::vector<double> v(100000);
    for (auto& x : v) x = s.uniform();
    const double ks = brox::stats::ks_statistic(EmpiricalDistribution(v),
                                                [](double x) { return std::clamp(x, 0.0, 1.0); });
    CHECK(ks <= brox::stats::dkw_band(100000, 0.01));
}

TEST_CASE("DKW band values") {
    CHECK(brox::stats::dkw_band(100000, 0.01) == doctest::Approx(0.005147).epsilon(1e-3));
    CHECK(brox::stats::dkw_band(1000, 0.01) < brox::stats::dkw_band(100, 0.01));
    CHECK(brox::stats::dkw_band(1000, 0.001) > brox::stats::dkw_band(1000, 0.01));
}
