// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "brox/env.hpp"
#include "brox/rng.hpp"
#include "brox/stable.hpp"

namespace brox::diffusion {

/// Potential and scale table on [x_min, x_max] drawn from `rng`. Enlarging
/// the extent keeps the common nodes.
env::ScaleTable make_environment(double kappa, double env_step, double x_min, double x_max,
                                 const Stream& rng,
                                 double tail_tolerance = std::numeric_limits<double>::infinity());

/// How the driving Brownian motion B is advanced.
///
/// lattice: B is observed at its successive exits from the intervals between
/// neighbouring A-nodes. The exit side follows the scale ratio and the local
/// time of B at the node collected before the exit is exponential with mean
/// 2 D_- D_+ / (D_- + D_+) (D_pm the A-gaps), so T grows by
/// h e^{-W(x_i)} times that local time. Exact for the grid environment.
///
/// euler: Gaussian steps of B with ds = dt e^{2W(X)} and trapezoidal T.
enum class PathScheme { lattice, euler };

struct PathOptions {
    PathScheme scheme = PathScheme::lattice;
    double horizon = 1.0;
    /// Step of the euler scheme (ignored by lattice).
    double dt = 1e-4;
    /// Stop when X reaches this level from below.
    std::optional<double> stop_above;
    /// Stop when X reaches this level from above.
    std::optional<double> stop_below;
    /// Width of the local-time bins; 0 disables the occupation field.
    double bin_width = 0.0;
    /// Spacing of recorded (time, position) pairs; 0 records only the ends.
    double record_interval = 0.0;
};

enum class PathEnd { horizon, above, below };

/// One path of X(t) = A^{-1}[B(T^{-1}(t))].
struct PathSample {
    std::vector<double> times;
    std::vector<double> positions;
    /// Left edge of bin 0 and the common bin width of lt_bins.
    double lt_origin = 0.0;
    double bin_width = 0.0;
    /// Occupation time of each bin divided by the bin width.
    std::vector<double> lt_bins;
    double horizon = 0.0;
    /// Time at which the path stopped (horizon or a hitting time).
    double end_time = 0.0;
    PathEnd end = PathEnd::horizon;
    std::size_t steps = 0;

    /// Sum of lt_bins * bin_width; equals end_time up to rounding.
    [[nodiscard]] double occupation_total() const noexcept;
    [[nodiscard]] double final_position() const noexcept { return positions.back(); }
};

/// Runs B and accumulates T(u) = int_0^u exp(-2 W(A^{-1}(B))) ds, emitting X
/// on the T-clock. Under the lattice scheme stop levels are rounded outward
/// to grid nodes. Under the euler scheme each step advances the X-clock by
/// about dt and crossings of the stop levels between two steps are detected
/// with the Brownian-bridge crossing probability. Throws RangeError when X
/// leaves the grid first.
PathSample simulate_path(const env::ScaleTable& table, const PathOptions& options, Stream& rng);

/// Joint draw of the hitting-time functionals of one level.
struct HittingFunctionalSample {
    double r = 0.0;
    /// The level actually hit: r itself, or F(r).
    double f_of_r = 0.0;
    double h_total = 0.0;
    double h_minus = 0.0;
    double h_plus = 0.0;
    double l_star = 0.0;
    double l_neg = 0.0;
    bool truncated = false;
};

/// Ray-Knight backend. With level u = r (or F(r) when use_F) and a = A(u),
/// draws the RN1 profile of B at sigma_B(a) at the environment nodes y <= u
/// (every round(space_step / env_step)-th node, linear in A in between) and
/// evaluates
///   H_+ = int_0^u e^{-W(y)} ell(A(y)) dy,  H_- = the same over y < 0,
///   L* = sup_y e^{-W(y)} ell(A(y)),  L^neg = sup over y < 0.
/// Between nodes, log(e^{-W} ell) is treated as a Brownian bridge with
/// variance rate 1 + 4 / (e^{-W} ell) (the potential plus the BESQ noise), and
/// its maximum is drawn exactly, so the sups carry no grid bias to first
/// order. Distances a - A(y) are accumulated from cell widths, so they keep full
/// relative precision close to u. `truncated` is set when the BESQ(0) leg is
/// still positive at the left end of the grid.
HittingFunctionalSample hitting_sample_rk(const env::ScaleTable& table, double r, bool use_F,
                                          double space_step, Stream& rng);

/// Grid extents and resolution for annealed sampling.
struct AnnealedOptions {
    double env_step = 1e-3;
    double space_step = 1e-3;
    bool use_F = false;
    /// Initial left extent (negative). Doubled after a truncated profile.
    double x_min = -50.0;
    int max_attempts = 6;
};

/// Fresh environment from replica.split(0), profile from replica.split(1).
/// The grid is enlarged (to the right when F(r) or the tail bound fall
/// outside, to the left after truncation) and the draw repeated with the
/// same streams, so the result is a function of the replica stream only.
HittingFunctionalSample annealed_hitting_sample(double kappa, double r,
                                                const AnnealedOptions& options,
                                                const Stream& replica);

/// Hitting time of r by the path backend in a fresh environment
/// (replica.split(0), path from replica.split(1)), censored at `cap`:
/// returns nullopt when X has not reached r by time cap.
std::optional<double> annealed_path_hitting_time(double kappa, double r, double env_step,
                                                 PathScheme scheme, double dt, double cap,
                                                 const Stream& replica);

struct LBracket {
    double l_minus_bar = 0.0;
    double l_plus_bar = 0.0;
    double l_star = 0.0;
};

/// Lbar_pm(r) = 4 [sup_{u <= tau(lambda t_pm)} kappa beta(u)]^{1/kappa} from
/// one sup path: sup up to tau(v_-) is v_- / (2 E_1), the excursion part on
/// [tau(v_-), tau(v_+)] adds an independent (v_+ - v_-) / (2 E_2).
LBracket l_pm_bracket(const stable::ConstantsBundle& bundle, double r, double l_star, Stream& rng);

struct IBracket {
    double i_minus_bar = 0.0;
    double i_plus_bar = 0.0;
    double h_total = 0.0;
};

/// Ibar_pm(r) from one functional draw shared by both signs:
///   kappa < 1: 4 kappa^{1/kappa - 2} t^{1/kappa} [K +- c6 t^{1 - 1/kappa}],
///   kappa = 1: 4 t [C + 8 log t],
/// with c6 a slack constant (nonnegative).
IBracket i_pm_bracket(const stable::ConstantsBundle& bundle, double r, double h_total, double c6,
                      double space_step, Stream& rng);

/// Normalized maximum local time at H(F(r)): L* / H^{1/kappa} for kappa > 1,
/// L* log(H) / H for kappa = 1.
double maxlocal_normalize(double kappa, const HittingFunctionalSample& sample);

struct LilRecord {
    double r = 0.0;
    double h = 0.0;
    double l_star = 0.0;
    /// H / (r log r).
    double h_over_r_log_r = 0.0;
    /// H / r^{1/kappa}.
    double h_over_r_pow = 0.0;
    /// H / [r^{1/kappa} / (log log r)^{1/kappa - 1}], compared with c2 for kappa < 1.
    double h_liminf_scale = 0.0;
    /// L* / (r / log log r)^{1/kappa}.
    double l_star_scale = 0.0;
};

/// H(r) and L*(H(r)) along one trajectory for an increasing schedule. The
/// B-local time at sigma(a_k) is the one at sigma(a_{k-1}) plus an
/// independent RN1 increment of level a_k - a_{k-1} anchored at a_k, which
/// makes H nondecreasing along the schedule. Throws RangeError on truncation.
std::vector<LilRecord> lil_track(const env::ScaleTable& table, std::span<const double> r_schedule,
                                 double space_step, Stream& rng);

}  // namespace brox::diffusion
