// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>
#include <set>

#include "brox/rng.hpp"
#include "doctest.h"

using brox::Stream;

TEST_CASE("philox4x32-10 known-answer vectors") {
    using W = std::array<std::uint32_t, 4>;
    CHECK(brox::philox4x32({0, 0, 0, 0}, {0, 0}) == W{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(brox::philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                           {0xffffffffu, 0xffffffffu}) ==
          W{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(brox::philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                           {0xa4093822u, 0x299f31d0u}) ==
          W{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and addressable") {
    Stream a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a() == b());

    Stream seq(7);
    for (std::uint64_t blk = 0; blk < 20; ++blk) {
        const auto words = seq.block_at(blk);
        // Sequential draws hand out the two words of each block in order.
        CHECK(seq() == words[0]);
        CHECK(seq() == words[1]);
    }
    CHECK(seq.position() == 20);
}

TEST_CASE("split children are distinct and stable") {
    const Stream root(1);
    std::set<std::uint64_t> keys;
    for (std::uint64_t i = 0; i < 1000; ++i) keys.insert(root.split(i).key());
    CHECK(keys.size() == 1000);
    CHECK(root.split(3).key() == Stream(1).split(3).key());
    CHECK(root.split(3).split(0).key() != root.split(0).split(3).key());
    Stream consumed(1);
    for (int i = 0; i < 50; ++i) consumed();
    CHECK(consumed.split(5).key() == root.split(5).key());
}

TEST_CASE("uniforms lie strictly inside (0,1)") {
    CHECK(brox::to_unit_open(0) > 0.0);
    CHECK(brox::to_unit_open(~0ull) < 1.0);
    Stream s(9);
    double mean = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        mean += u / n;
    }
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("normal and exponential moments") {
    Stream s(11);
    const int n = 200000;
    double m1 = 0, m2 = 0, e1 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = s.normal();
        m1 += z / n;
        m2 += z * z / n;
        e1 += s.exponential() / n;
    }
    CHECK(std::abs(m1) < 0.01);
    CHECK(m2 == doctest::Approx(1.0).epsilon(0.015));
    CHECK(e1 == doctest::Approx(1.0).epsilon(0.015));
    CHECK(std::isfinite(Stream(3).normal_at(17)));
    CHECK(Stream(3).uniform_at(17) == Stream(3).uniform_at(17));
}

TEST_CASE("works with <random> distributions") {
    Stream s(5);
    std::uniform_int_distribution<int> die(1, 6);
    for (int i = 0; i < 1000; ++i) {
        const int v = die(s);
        REQUIRE(v >= 1);
        REQUIRE(v <= 6);
    }
}
