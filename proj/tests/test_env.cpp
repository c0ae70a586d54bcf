// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "brox/env.hpp"
#include "brox/error.hpp"
#include "brox/stats.hpp"
#include "doctest.h"

namespace env = brox::env;
using brox::Stream;

TEST_CASE("grid layout") {
    const auto g = env::build_potential(1.0, 0.1, -2.0, 3.0, Stream(1));
    CHECK(g.size() == 51);
    CHECK(g.x_at(g.origin()) == 0.0);
    CHECK(g.value_at(g.origin()) == 0.0);
    CHECK(g.x_min() == doctest::Approx(-2.0));
    CHECK(g.x_max() == doctest::Approx(3.0));
    CHECK(g.value(g.x_at(7)) == g.value_at(7));
    CHECK_THROWS_AS((void)g.value(3.5), brox::RangeError);
    CHECK_THROWS_AS(env::build_potential(1.0, 0.1, 1.0, 3.0, Stream(1)), brox::InvalidArgument);
    CHECK_THROWS_AS(env::build_potential(1.0, -0.1, -1.0, 3.0, Stream(1)), brox::InvalidArgument);
    CHECK_THROWS_AS(env::build_potential(-1.0, 0.1, -1.0, 3.0, Stream(1)), brox::InvalidArgument);
}

TEST_CASE("enlarging the grid keeps the common nodes") {
    const Stream s(99);
    const auto small = env::build_potential(0.5, 0.01, -3.0, 4.0, s);
    const auto big = env::build_potential(0.5, 0.01, -9.0, 12.0, s);
    const std::ptrdiff_t shift =
        static_cast<std::ptrdiff_t>(big.origin()) - static_cast<std::ptrdiff_t>(small.origin());
    for (std::size_t i = 0; i < small.size(); ++i) {
        REQUIRE(big.value_at(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + shift)) ==
                small.value_at(i));
    }
}

TEST_CASE("pure drift: closed-form scale function, A_inf and F") {
    const double k = 1.0;
    const auto table = env::scale_table(env::build_potential(k, 1e-3, -5.0, 60.0, Stream(0), 0),
                                        std::numeric_limits<double>::infinity());
    for (const double x : {-2.0, 0.5, 3.0, 10.0}) {
        CHECK(table.a(x) == doctest::Approx((2.0 / k) * (1.0 - std::exp(-k * x / 2.0))).epsilon(1e-6));
    }
    CHECK(table.a_inf() == doctest::Approx(2.0 / k).epsilon(1e-6));
    // (2/kappa) exp(-kappa F / 2) = exp(-kappa r / 2).
    for (const double r : {5.0, 20.0, 50.0}) {
        CHECK(env::solve_F(table, r) == doctest::Approx(r + (2.0 / k) * std::log(2.0 / k)).epsilon(1e-6));
    }
    // Exit probabilities for a drift: ratio of scale differences.
    const double p = env::exit_probability(table, -1.0, 0.0, 2.0);
    const double expect = (std::exp(0.5) - 1.0) / (std::exp(0.5) - std::exp(-1.0));
    CHECK(p == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("scale function round trips and monotonicity") {
    const auto table = env::scale_table(env::build_potential(2.0, 0.01, -10.0, 30.0, Stream(3)),
                                        std::numeric_limits<double>::infinity());
    const auto av = table.a_values();
    for (std::size_t i = 1; i < av.size(); ++i) {
        REQUIRE(table.cell_width(i - 1) > 0.0);
        REQUIRE(av[i] >= av[i - 1]);
    }
    CHECK(table.a(0.0) == 0.0);
    for (double x = -9.5; x < 15.0; x += 0.731) {
        CHECK(table.a_inverse(table.a(x)) == doctest::Approx(x).epsilon(1e-9));
    }
    CHECK_THROWS_AS((void)table.a_inverse(table.a_inf() + 1.0), brox::RangeError);
    CHECK_THROWS_AS((void)table.a(31.0), brox::RangeError);
    const double f = env::solve_F(table, 10.0);
    const auto idx = table.grid().cell_of(f);
    CHECK(table.tail_at(idx) >= std::exp(-10.0) * (1.0 - 1e-9));
    CHECK(table.tail_at(idx + 1) <= std::exp(-10.0) * (1.0 + 1e-9));
}

TEST_CASE("tail tolerance is enforced") {
    CHECK_THROWS_AS(env::scale_table(env::build_potential(1.0, 0.01, -1.0, 2.0, Stream(3)), 1e-6),
                    brox::RangeError);
    CHECK_THROWS_AS(env::solve_F(env::scale_table(env::build_potential(1.0, 0.01, -1.0, 5.0, Stream(3)),
                                                  std::numeric_limits<double>::infinity()),
                                 200.0),
                    brox::RangeError);
}

TEST_CASE("exit probability basic properties") {
    const auto table = env::scale_table(env::build_potential(1.0, 0.01, -5.0, 10.0, Stream(8)),
                                        std::numeric_limits<double>::infinity());
    CHECK(env::exit_probability(table, -1.0, -1.0 + 1e-12, 2.0) < 1e-9);
    CHECK(env::exit_probability(table, -1.0, 2.0 - 1e-12, 2.0) > 1.0 - 1e-9);
    const double p1 = env::exit_probability(table, -1.0, 0.0, 2.0);
    const double p2 = env::exit_probability(table, -1.0, 0.5, 2.0);
    CHECK(p1 > 0.0);
    CHECK(p2 > p1);
    CHECK(p2 < 1.0);
    CHECK_THROWS_AS(env::exit_probability(table, 1.0, 0.0, 2.0), brox::InvalidArgument);
    CHECK_THROWS_AS(env::exit_probability(table, -1.0, 2.0, 2.0), brox::InvalidArgument);
}

TEST_CASE("A_inf and sup W have their laws at kappa = 1 (small sample)") {
    std::vector<double> a_inf, sup;
    for (std::uint64_t i = 0; i < 2000; ++i) {
        const auto g = env::build_potential(1.0, 0.01, 0.0, 60.0, Stream(1234).split(i));
        sup.push_back(g.sup_right());
        a_inf.push_back(env::scale_table(g, std::numeric_limits<double>::infinity()).a_inf());
    }
    namespace stats = brox::stats;
    const double band = stats::dkw_band(2000, 0.01);
    // A_inf = 2 / gamma_1 = 2 / Exp(1); sup W ~ Exp(kappa).
    CHECK(stats::ks_statistic(stats::EmpiricalDistribution(a_inf),
                              [](double x) { return x <= 0 ? 0.0 : std::exp(-2.0 / x); }) <= band);
    CHECK(stats::ks_statistic(stats::EmpiricalDistribution(sup),
                              [](double x) { return x <= 0 ? 0.0 : 1.0 - std::exp(-x); }) <= band);
}
