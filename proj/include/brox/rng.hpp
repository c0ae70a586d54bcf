// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace brox {

/// Philox4x32-10 block function (Salmon et al., SC'11).
///
/// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits.
/// Stateless: equal inputs always give equal outputs, which is what lets
/// every random quantity in the library be addressed by an index.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// SplitMix64 finalizer, used to derive child keys.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Child key for (parent, index). Distinct indices give unrelated keys.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t index) noexcept {
    return mix64(mix64(parent) ^ mix64(index ^ 0x5851f42d4c957f2dull));
}

/// 53-bit uniform strictly inside (0, 1).
constexpr double to_unit_open(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Counter-based random stream.
///
/// A stream is identified by a 64-bit key; its n-th output block is
/// philox4x32(n, key). `split(i)` derives an independent child stream, so a
/// replica, a half-line of the environment or a profile leg can each own a
/// stream whose content does not depend on how much any other stream was
/// consumed. Satisfies UniformRandomBitGenerator, so it plugs into the
/// <random> distributions.
class Stream {
  public:
    using result_type = std::uint64_t;

    explicit Stream(std::uint64_t key = 0) noexcept : key_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept {
        if (buffered_ == 0) refill();
        return buffer_[--buffered_];
    }

    [[nodiscard]] Stream split(std::uint64_t index) const noexcept {
        return Stream(derive_key(key_, index));
    }

    [[nodiscard]] std::uint64_t key() const noexcept { return key_; }

    /// Number of 128-bit blocks consumed so far.
    [[nodiscard]] std::uint64_t position() const noexcept { return block_; }

    double uniform() noexcept { return to_unit_open((*this)()); }

    /// Standard normal (Box-Muller, second variate cached).
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        spare_ = rad * std::sin(ang);
        has_spare_ = true;
        return rad * std::cos(ang);
    }

    double exponential() noexcept { return -std::log(uniform()); }

    /// Random access: the two 64-bit words of block `index` of this key,
    /// independent of the sequential position.
    [[nodiscard]] std::array<std::uint64_t, 2> block_at(std::uint64_t index) const noexcept;

    /// Random access uniform in (0,1): first word of block `index`.
    [[nodiscard]] double uniform_at(std::uint64_t index) const noexcept {
        return to_unit_open(block_at(index)[0]);
    }

    /// Random access standard normal: Box-Muller on block `index`.
    [[nodiscard]] double normal_at(std::uint64_t index) const noexcept {
        const auto words = block_at(index);
        const double u1 = to_unit_open(words[0]);
        const double u2 = to_unit_open(words[1]);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    void refill() noexcept {
        const auto words = block_at(block_++);
        buffer_[0] = words[1];
        buffer_[1] = words[0];
        buffered_ = 2;
    }

    std::uint64_t key_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace brox
