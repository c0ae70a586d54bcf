// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "brox/rng.hpp"

namespace brox::bessel {

/// Exact transition of a squared Bessel process of dimension `dimension`
/// over a time (or space) increment dt. The law is
///   Z' = 2 dt * Gamma(dimension / 2 + N),  N ~ Poisson(value / (2 dt)),
/// with Gamma(0) = 0, so dimension 0 is absorbed at 0. For dimension >= 1
/// the same law is drawn as (sqrt(value) + sqrt(dt) N)^2 + 2 dt Gamma((d-1)/2).
double besq_step(double dimension, double value, double dt, Stream& rng);

/// Node placement for sampled profiles. Cells start at `first_cell` and grow
/// geometrically by `ratio` until they reach `step`; from there on the cell
/// at x is max(step, relative * x). With first_cell == step the first phase
/// is skipped and nodes sit exactly at k * step until the relative phase.
struct ProfileGrid {
    double first_cell = 1e-2;
    double ratio = 1.05;
    double step = 1e-2;
    double relative = 1e-2;

    /// Uniform cells of `step` near 0, relative growth min(step, 0.01) far out.
    static ProfileGrid uniform(double step);
    /// Geometric refinement toward 0 starting at `first_cell`.
    static ProfileGrid geometric(double first_cell, double step);
};

/// Iterates the nodes of a ProfileGrid: 0, x_1, x_2, ...
class ProfileGridWalker {
  public:
    explicit ProfileGridWalker(const ProfileGrid& grid);
    /// The next node strictly greater than the current one.
    double next();
    [[nodiscard]] double current() const noexcept { return x_; }

  private:
    enum class Phase { geometric, uniform, relative };
    ProfileGrid grid_;
    Phase phase_;
    double x_ = 0.0;
    double cell_;
    double base_ = 0.0;
    std::size_t uniform_index_ = 0;
};

/// A squared Bessel path sampled at increasing parameter values.
struct BesqPath {
    double dimension = 0.0;
    double start = 0.0;
    std::vector<double> grid;
    std::vector<double> values;
    std::optional<double> absorbed_at;
};

/// Exact transitions along `grid` (grid[0] is the start time). For
/// dimension 0 the path stops at the first zero.
BesqPath besq_path(double dimension, double start, std::span<const double> grid, Stream& rng);

enum class RayKnight { rn1, rn2 };

/// Brownian local-time profile at a hitting time (RN1) or an inverse local
/// time (RN2).
///
/// RN2: grid[i] is the spatial coordinate x >= 0 and ell[0] = level.
/// RN1: grid[i] is the distance s >= 0 below the level, i.e. the spatial
/// coordinate is level - s; ell[0] = 0, the BESQ(2) leg covers s in
/// [0, level] and the BESQ(0) leg s > level.
struct LocalTimeProfile {
    RayKnight kind = RayKnight::rn2;
    double level = 0.0;
    std::vector<double> grid;
    std::vector<double> ell;
    /// First grid parameter where the BESQ(0) leg reached 0.
    std::optional<double> absorbed_at;
    /// Set when the profile was cut before absorption.
    bool truncated = false;

    [[nodiscard]] double coordinate(std::size_t i) const noexcept {
        return kind == RayKnight::rn1 ? level - grid[i] : grid[i];
    }
};

/// Hard cap on the coordinate reached by an RN2 profile, in units of its
/// level. Absorption beyond it has probability about 1 / (2 * cap).
inline constexpr double kRn2ExtentCap = 1e12;

/// (L(tau(a), x), x >= 0): BESQ(0) from a, extended until absorption.
LocalTimeProfile rn2_profile(double a, const ProfileGrid& grid, Stream& rng);
LocalTimeProfile rn2_profile(double a, double space_step, Stream& rng);

/// (L(sigma(r), r - s), s >= 0): BESQ(2) from 0 on [0, r], BESQ(0) after,
/// followed until absorption or until s exceeds r + left_extent (then
/// `truncated` is set).
LocalTimeProfile rn1_profile(double r, double left_extent, const ProfileGrid& grid, Stream& rng);
LocalTimeProfile rn1_profile(double r, double left_extent, double space_step, Stream& rng);

/// RN1 profile of `level` read at the increasing parameters `s_nodes`
/// (s_nodes[0] >= 0, distance below the level). The BESQ(2) leg is switched
/// to BESQ(0) exactly at s = level. Values after absorption are 0; the
/// return value is the index of the first zero node or s_nodes.size().
std::size_t rn1_values_at(double level, std::span<const double> s_nodes,
                          std::span<double> values, Stream& rng);

/// Draw of sup_{s <= tau(v)} beta(s), i.e. v / (2E) with E ~ Exp(1).
double sup_at_inverse_local_time(double v, Stream& rng);
/// P(sup_{s <= tau(v)} beta(s) < y) = exp(-v / (2y)).
double sup_cdf(double v, double y);

/// lambda = 4 (1 + kappa).
double lambda_of(double kappa);

/// Grid used for the weighted functionals: geometric from 1e-8 * level with
/// ratio 1.05 near 0, then `space_step`.
ProfileGrid functional_grid(double level, double space_step);

/// int_0^inf x^{1/kappa - 2} ell(x) dx over an RN2 profile. The first cell
/// is integrated exactly against the linear interpolant of ell.
double k_beta_functional(double kappa, const LocalTimeProfile& profile);
/// K_beta(kappa) for kappa in (0,1): RN2 profile at lambda, then the
/// functional above.
double k_beta_sample(double kappa, double space_step, Stream& rng);

/// int_0^1 (ell - 8) / x dx + int_1^inf ell / x dx over an RN2 profile from 8.
double c_beta_functional(const LocalTimeProfile& profile);
double c_beta_sample(double space_step, Stream& rng);

/// Jacobi scale S(y) = int_{alpha}^{y} dx / (x (1-x)^{1+kappa}), with
/// alpha = 1 / (4 + 2 kappa). Throws InvalidArgument at y in {0, 1}.
double jacobi_scale(double kappa, double y);
/// Inverse of jacobi_scale by bisection.
double jacobi_scale_inverse(double kappa, double s);

/// Both sides of the local time at tau(lambda): right = x >= 0, left = the
/// mirror image x <= 0 (independent BESQ(0) from the same level).
struct TwoSidedProfile {
    LocalTimeProfile right;
    LocalTimeProfile left;
};

TwoSidedProfile two_sided_rn2(double a, const ProfileGrid& grid, Stream& rng);

/// J_beta(kappa, t) = int_0^1 y (1-y)^{kappa-2} L(tau(lambda), S(y)/t) dy,
/// evaluated as t int y(tx)^2 (1 - y(tx))^{2 kappa - 1} ell(x) dx with
/// y = S^{-1}. The node weights depend only on (kappa, t, grid) and are
/// cached, so one sampler should be reused across draws.
class JBetaSampler {
  public:
    JBetaSampler(double kappa, double t, double space_step);

    [[nodiscard]] double kappa() const noexcept { return kappa_; }
    [[nodiscard]] double t() const noexcept { return t_; }
    [[nodiscard]] const ProfileGrid& grid() const noexcept { return grid_; }

    /// Functional of an existing two-sided profile (for coupled draws).
    double functional(const TwoSidedProfile& profile);
    double sample(Stream& rng);

  private:
    // Cached weights along one side; the inverse scale is marched node by
    // node from the previous solution.
    struct Side {
        double sign;
        std::vector<double> nodes;
        std::vector<double> weights;
        double z;
        double s;
    };
    double weight(Side& side, std::size_t i, double x);
    double side_integral(Side& side, const LocalTimeProfile& profile);

    double kappa_;
    double t_;
    ProfileGrid grid_;
    Side right_;
    Side left_;
};

double j_beta_sample(double kappa, double t, double space_step, Stream& rng);

/// Jacobi diffusion dY = 2 sqrt(Y(1-Y)) dB + [d1 - (d1 + d2) Y] dt.
struct JacobiState {
    double d1 = 2.0;
    double d2 = 4.0;
    double y = 0.0;
    double time = 0.0;
};

/// One Euler-Maruyama step, clamped to [0, 1].
JacobiState jacobi_step(const JacobiState& state, double dt, Stream& rng);

/// (1 / log t) int_0^t ds / R^2(s) for a Bessel process R of dimension d > 4
/// started from R_0 with R_0^2 ~ BESQ(d-2) at time 1 from 0. Exact BESQ(d)
/// transitions on a grid that is uniform (0.01) up to 1 and geometric
/// (ratio 1.01) afterwards.
double time_avg_inverse_square(double d, double t, Stream& rng);

}  // namespace brox::bessel
