// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "brox/diffusion.hpp"
#include "brox/error.hpp"
#include "brox/stats.hpp"
#include "doctest.h"

namespace df = brox::diffusion;
namespace st = brox::stable;
using brox::Stream;

TEST_CASE("occupation identity on lattice and euler paths") {
    const auto table = df::make_environment(1.0, 0.01, -20.0, 20.0, Stream(4));
    for (const auto scheme : {df::PathScheme::lattice, df::PathScheme::euler}) {
        df::PathOptions opt;
        opt.scheme = scheme;
        opt.horizon = 5.0;
        opt.dt = 1e-4;
        opt.bin_width = 0.05;
        opt.record_interval = 0.5;
        Stream rng(17);
        const auto p = df::simulate_path(table, opt, rng);
        CHECK(p.end == df::PathEnd::horizon);
        CHECK(p.end_time == doctest::Approx(5.0));
        CHECK(std::abs(p.occupation_total() - p.horizon) <= 1e-3 * p.horizon);
        CHECK(p.times.front() == 0.0);
        CHECK(p.positions.front() == 0.0);
        for (std::size_t i = 1; i < p.times.size(); ++i) CHECK(p.times[i] >= p.times[i - 1]);
    }
}

TEST_CASE("stop levels end the path") {
    const auto table = df::make_environment(2.0, 0.01, -20.0, 5.0, Stream(9));
    df::PathOptions opt;
    opt.horizon = 1e12;
    opt.stop_above = 3.0;
    Stream rng(1);
    const auto p = df::simulate_path(table, opt, rng);
    CHECK(p.end == df::PathEnd::above);
    CHECK(p.final_position() == doctest::Approx(3.0));
    opt.stop_above = 10.0;
    CHECK_THROWS_AS(df::simulate_path(table, opt, rng), brox::RangeError);
}

TEST_CASE("quenched exit frequency matches the scale ratio") {
    const auto table = df::make_environment(1.0, 0.02, -3.0, 3.0, Stream(123));
    const double p = brox::env::exit_probability(table, -1.0, 0.0, 1.0);
    df::PathOptions opt;
    opt.horizon = 1e300;
    opt.stop_above = 1.0;
    opt.stop_below = -1.0;
    const int n = 4000;
    int up = 0;
    for (int i = 0; i < n; ++i) {
        Stream rng = Stream(5).split(static_cast<std::uint64_t>(i));
        up += df::simulate_path(table, opt, rng).end == df::PathEnd::above ? 1 : 0;
    }
    CHECK(std::abs(static_cast<double>(up) / n - p) <= brox::stats::dkw_band(n, 0.01));
}

TEST_CASE("hitting functionals: decomposition and positivity") {
    df::AnnealedOptions opt;
    opt.env_step = 0.01;
    opt.space_step = 0.01;
    for (std::uint64_t i = 0; i < 40; ++i) {
        const auto s = df::annealed_hitting_sample(1.0 + 0.05 * static_cast<double>(i), 30.0, opt,
                                                   Stream(2).split(i));
        REQUIRE_FALSE(s.truncated);
        CHECK(s.h_total == s.h_minus + s.h_plus);
        CHECK(s.h_plus > 0.0);
        CHECK(s.l_star > 0.0);
        CHECK(s.l_star >= s.l_neg);
        CHECK(s.f_of_r == 30.0);
    }
    opt.use_F = true;
    const auto f = df::annealed_hitting_sample(2.0, 30.0, opt, Stream(3));
    CHECK(f.f_of_r != 30.0);
    CHECK(f.h_total == f.h_minus + f.h_plus);
}

TEST_CASE("annealed samples are functions of the replica stream") {
    df::AnnealedOptions opt;
    opt.env_step = 0.01;
    opt.space_step = 0.01;
    const auto a = df::annealed_hitting_sample(0.5, 20.0, opt, Stream(77));
    const auto b = df::annealed_hitting_sample(0.5, 20.0, opt, Stream(77));
    CHECK(a.h_total == b.h_total);
    CHECK(a.l_star == b.l_star);
}

TEST_CASE("brackets are ordered") {
    const auto bundle = st::constants(0.5, 1.0);
    Stream rng(8);
    for (int i = 0; i < 200; ++i) {
        const auto l = df::l_pm_bracket(bundle, 100.0, 1.0, rng);
        CHECK(l.l_plus_bar >= l.l_minus_bar);
        const auto h = df::i_pm_bracket(bundle, 100.0, 1.0, 0.1, 0.05, rng);
        CHECK(h.i_plus_bar >= h.i_minus_bar);
    }
    const auto one = st::constants(1.0, 1.0);
    const auto h1 = df::i_pm_bracket(one, 400.0, 1.0, 0.0, 0.05, rng);
    CHECK(h1.i_plus_bar >= h1.i_minus_bar);
    CHECK_THROWS_AS(df::i_pm_bracket(st::constants(2.0, 1.0), 400.0, 1.0, 0.0, 0.05, rng),
                    brox::InvalidArgument);
}

TEST_CASE("maximum local time normalization") {
    df::HittingFunctionalSample s;
    s.h_total = 100.0;
    s.l_star = 20.0;
    CHECK(df::maxlocal_normalize(2.0, s) == doctest::Approx(2.0));
    CHECK(df::maxlocal_normalize(1.0, s) == doctest::Approx(0.2 * std::log(100.0)));
    CHECK_THROWS_AS(df::maxlocal_normalize(0.5, s), brox::InvalidArgument);
}

TEST_CASE("lil track is nondecreasing") {
    std::vector<double> schedule{5.0, 10.0, 20.0, 40.0};
    const auto table = df::make_environment(1.0, 0.01, -200.0, 40.02, Stream(3).split(0));
    Stream rng = Stream(3).split(1);
    const auto recs = df::lil_track(table, schedule, 0.01, rng);
    REQUIRE(recs.size() == schedule.size());
    for (std::size_t i = 1; i < recs.size(); ++i) {
        CHECK(recs[i].h >= recs[i - 1].h);
        CHECK(recs[i].l_star >= recs[i - 1].l_star);
    }
    const std::vector<double> bad{2.0, 5.0};
    CHECK_THROWS_AS(df::lil_track(table, bad, 0.01, rng), brox::InvalidArgument);
}

TEST_CASE("path hitting time agrees with itself across calls and can be censored") {
    const auto a = df::annealed_path_hitting_time(2.0, 5.0, 0.05, df::PathScheme::lattice, 1e-3, 1e9,
                                                  Stream(1));
    const auto b = df::annealed_path_hitting_time(2.0, 5.0, 0.05, df::PathScheme::lattice, 1e-3, 1e9,
                                                  Stream(1));
    REQUIRE(a.has_value());
    CHECK(*a == *b);
    CHECK_FALSE(df::annealed_path_hitting_time(2.0, 5.0, 0.05, df::PathScheme::lattice, 1e-3,
                                               *a * 0.5, Stream(1))
                    .has_value());
}
