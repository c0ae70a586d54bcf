// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "brox/rng.hpp"

namespace brox::env {

/// The potential W_kappa(x) = W(x) - kappa x / 2 sampled on a uniform grid
/// x_i = (i - origin) * step covering [x_min, x_max].
///
/// Node increments are addressed by index through counter-based streams, so
/// two grids built from the same stream agree on their common nodes whatever
/// their extents.
class PotentialGrid {
  public:
    PotentialGrid(double kappa, double step, std::ptrdiff_t left_nodes, std::ptrdiff_t right_nodes,
                  std::vector<double> values, int noise_scale, double sup_right);

    [[nodiscard]] double kappa() const noexcept { return kappa_; }
    [[nodiscard]] double step() const noexcept { return step_; }
    [[nodiscard]] int noise_scale() const noexcept { return noise_scale_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    /// Index of the node x = 0.
    [[nodiscard]] std::size_t origin() const noexcept { return origin_; }
    [[nodiscard]] double x_min() const noexcept { return x_at(0); }
    [[nodiscard]] double x_max() const noexcept { return x_at(values_.size() - 1); }
    [[nodiscard]] double x_at(std::size_t i) const noexcept {
        return (static_cast<double>(i) - static_cast<double>(origin_)) * step_;
    }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double value_at(std::size_t i) const noexcept { return values_[i]; }
    /// Linear interpolation of W_kappa; throws RangeError outside the grid.
    [[nodiscard]] double value(double x) const;
    /// Index of the node at or just left of x (clamped to the last cell).
    [[nodiscard]] std::size_t cell_of(double x) const;
    /// Exact supremum of the continuous potential over [0, x_max], the grid
    /// being a skeleton of a Brownian path: each cell contributes an exact
    /// Brownian-bridge maximum.
    [[nodiscard]] double sup_right() const noexcept { return sup_right_; }

  private:
    double kappa_;
    double step_;
    std::size_t origin_;
    std::vector<double> values_;
    int noise_scale_;
    double sup_right_;
};

/// Samples the potential. The right half-line uses rng.split(0), the left
/// half-line rng.split(1) (an independent Brownian motion run backwards in
/// index), bridge maxima rng.split(2). noise_scale 0 gives the deterministic
/// drift -kappa x / 2. kappa = 0 is allowed here (flat or driftless
/// environments) but rejected by the diffusion samplers.
PotentialGrid build_potential(double kappa, double step, double x_min, double x_max,
                              const Stream& rng, int noise_scale = 1);

/// Scale function A(x) = int_0^x exp(W_kappa), tabulated at the grid nodes,
/// with its limit A_inf.
class ScaleTable {
  public:
    ScaleTable(std::shared_ptr<const PotentialGrid> grid, std::vector<double> a_values,
               std::vector<double> cell_widths, std::vector<double> tails, double a_inf,
               double tail_bound);

    [[nodiscard]] const PotentialGrid& grid() const noexcept { return *grid_; }
    [[nodiscard]] std::shared_ptr<const PotentialGrid> grid_ptr() const noexcept { return grid_; }
    [[nodiscard]] std::span<const double> a_values() const noexcept { return a_values_; }
    /// A(x_{i+1}) - A(x_i), computed directly (no cancellation).
    [[nodiscard]] double cell_width(std::size_t i) const noexcept { return cells_[i]; }
    /// A_inf - A(x_i) for nodes i >= origin, accumulated from the right end so
    /// that tiny tails keep full relative precision.
    [[nodiscard]] double tail_at(std::size_t i) const noexcept { return tails_[i]; }
    [[nodiscard]] double a_inf() const noexcept { return a_inf_; }
    [[nodiscard]] double tail_bound() const noexcept { return tail_bound_; }

    /// Piecewise-linear A(x); throws RangeError outside the grid.
    [[nodiscard]] double a(double x) const;
    /// Inverse of the piecewise-linear A; throws RangeError outside
    /// [A(x_min), A(x_max)].
    [[nodiscard]] double a_inverse(double a) const;

  private:
    std::shared_ptr<const PotentialGrid> grid_;
    std::vector<double> a_values_;
    std::vector<double> cells_;
    std::vector<double> tails_;
    double a_inf_;
    double tail_bound_;
};

/// Trapezoid quadrature of exp(W_kappa) plus the drift-only tail estimate
/// exp(W_kappa(x_max)) * 2 / kappa beyond x_max. Throws RangeError when that
/// tail bound exceeds tail_tolerance. For kappa = 0 the limit is infinite and
/// no tolerance check is made.
ScaleTable scale_table(std::shared_ptr<const PotentialGrid> grid, double tail_tolerance);
ScaleTable scale_table(PotentialGrid grid, double tail_tolerance);

/// F(r): the point where A_inf - A(F(r)) = exp(-kappa r / 2). log(A_inf - A)
/// is interpolated linearly inside a cell, which is exact for a pure drift.
/// Throws RangeError when the root is not inside the grid.
double solve_F(const ScaleTable& table, double r);

/// Quenched probability, started at y, of hitting z before x:
/// [A(y) - A(x)] / [A(z) - A(x)].
double exit_probability(const ScaleTable& table, double x, double y, double z);

}  // namespace brox::env
