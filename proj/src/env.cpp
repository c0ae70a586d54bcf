// SPDX-License-Identifier: Apache-2.0
#include "brox/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "brox/error.hpp"

namespace brox::env {

PotentialGrid::PotentialGrid(double kappa, double step, std::ptrdiff_t left_nodes,
                             std::ptrdiff_t right_nodes, std::vector<double> values,
                             int noise_scale, double sup_right)
    : kappa_(kappa),
      step_(step),
      origin_(static_cast<std::size_t>(left_nodes)),
      values_(std::move(values)),
      noise_scale_(noise_scale),
      sup_right_(sup_right) {
    detail::require(values_.size() == static_cast<std::size_t>(left_nodes + right_nodes + 1),
                    "potential grid size mismatch");
}

std::size_t PotentialGrid::cell_of(double x) const {
    const double lo = x_min();
    const double hi = x_max();
    if (!(x >= lo - 1e-12 * step_ && x <= hi + 1e-12 * step_)) {
        throw RangeError("x = " + std::to_string(x) + " outside potential grid [" +
                         std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    const double pos = (x - lo) / step_;
    auto i = static_cast<std::size_t>(std::max(0.0, std::floor(pos)));
    return std::min(i, values_.size() >= 2 ? values_.size() - 2 : 0);
}

double PotentialGrid::value(double x) const {
    if (values_.size() == 1) {
        (void)cell_of(x);
        return values_[0];
    }
    const std::size_t i = cell_of(x);
    const double frac = (x - x_at(i)) / step_;
    return values_[i] + frac * (values_[i + 1] - values_[i]);
}

PotentialGrid build_potential(double kappa, double step, double x_min, double x_max,
                              const Stream& rng, int noise_scale) {
    detail::require(std::isfinite(kappa) && std::isfinite(step) && std::isfinite(x_min) &&
                        std::isfinite(x_max),
                    "build_potential: non-finite parameter");
    detail::require(step > 0.0, "build_potential: step must be positive");
    detail::require(kappa >= 0.0, "build_potential: kappa must be nonnegative");
    detail::require(x_min <= 0.0 && x_max >= 0.0, "build_potential: need x_min <= 0 <= x_max");
    detail::require(noise_scale == 0 || noise_scale == 1, "build_potential: noise_scale is 0 or 1");

    const auto left = static_cast<std::ptrdiff_t>(std::ceil(-x_min / step - 1e-9));
    const auto right = static_cast<std::ptrdiff_t>(std::ceil(x_max / step - 1e-9));
    std::vector<double> w(static_cast<std::size_t>(left + right + 1), 0.0);
    const auto origin = static_cast<std::size_t>(left);
    const double sqrt_h = std::sqrt(step);
    const double half_drift = 0.5 * kappa * step;

    const Stream right_stream = rng.split(0);
    const Stream left_stream = rng.split(1);
    const Stream bridge_stream = rng.split(2);

    double sup = 0.0;
    for (std::ptrdiff_t k = 1; k <= right; ++k) {
        const std::size_t i = origin + static_cast<std::size_t>(k);
        if (noise_scale == 0) {
            w[i] = -0.5 * kappa * (static_cast<double>(k) * step);
            sup = std::max(sup, w[i]);
            continue;
        }
        const auto idx = static_cast<std::uint64_t>(k - 1);
        w[i] = w[i - 1] + sqrt_h * right_stream.normal_at(idx) - half_drift;
        const double a = w[i - 1];
        const double b = w[i];
        sup = std::max(sup, b);
        // The bridge maximum exceeds `sup` iff -log U > 2 (sup - a)(sup - b) / h;
        // -log U never exceeds 40 for 53-bit U, so far-below cells are skipped.
        if (2.0 * (sup - a) * (sup - b) / step > 40.0) continue;
        const double u = bridge_stream.uniform_at(idx);
        const double m = 0.5 * (a + b + std::sqrt((b - a) * (b - a) - 2.0 * step * std::log(u)));
        sup = std::max(sup, m);
    }
    for (std::ptrdiff_t k = 1; k <= left; ++k) {
        const std::size_t i = origin - static_cast<std::size_t>(k);
        if (noise_scale == 0) {
            w[i] = 0.5 * kappa * (static_cast<double>(k) * step);
            continue;
        }
        w[i] = w[i + 1] + sqrt_h * left_stream.normal_at(static_cast<std::uint64_t>(k - 1)) +
               half_drift;
    }
    return PotentialGrid(kappa, step, left, right, std::move(w), noise_scale, sup);
}

ScaleTable::ScaleTable(std::shared_ptr<const PotentialGrid> grid, std::vector<double> a_values,
                       std::vector<double> cell_widths, std::vector<double> tails, double a_inf,
                       double tail_bound)
    : grid_(std::move(grid)),
      a_values_(std::move(a_values)),
      cells_(std::move(cell_widths)),
      tails_(std::move(tails)),
      a_inf_(a_inf),
      tail_bound_(tail_bound) {}

double ScaleTable::a(double x) const {
    const auto& g = *grid_;
    if (g.size() == 1) return a_values_[0];
    const std::size_t i = g.cell_of(x);
    const double frac = (x - g.x_at(i)) / g.step();
    return a_values_[i] + frac * cells_[i];
}

double ScaleTable::a_inverse(double a) const {
    const auto& g = *grid_;
    if (!(a >= a_values_.front() && a <= a_values_.back())) {
        throw RangeError("A^{-1}: value " + std::to_string(a) + " outside tabulated range");
    }
    if (g.size() == 1) return 0.0;
    auto it = std::upper_bound(a_values_.begin(), a_values_.end(), a);
    std::size_t i = it == a_values_.begin() ? 0 : static_cast<std::size_t>(it - a_values_.begin()) - 1;
    i = std::min(i, g.size() - 2);
    const double frac = cells_[i] > 0.0 ? (a - a_values_[i]) / cells_[i] : 0.0;
    return g.x_at(i) + std::clamp(frac, 0.0, 1.0) * g.step();
}

ScaleTable scale_table(std::shared_ptr<const PotentialGrid> grid, double tail_tolerance) {
    detail::require(grid != nullptr, "scale_table: null grid");
    detail::require(tail_tolerance > 0.0, "scale_table: tail tolerance must be positive");
    const auto& g = *grid;
    const std::size_t n = g.size();
    const std::size_t origin = g.origin();
    const double h = g.step();

    std::vector<double> cells(n > 1 ? n - 1 : 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        cells[i] = 0.5 * h * (std::exp(g.value_at(i)) + std::exp(g.value_at(i + 1)));
    }
    std::vector<double> a(n, 0.0);
    for (std::size_t i = origin + 1; i < n; ++i) a[i] = a[i - 1] + cells[i - 1];
    for (std::size_t i = origin; i-- > 0;) a[i] = a[i + 1] - cells[i];

    double tail_bound = std::numeric_limits<double>::infinity();
    double a_inf = std::numeric_limits<double>::infinity();
    std::vector<double> tails(n, std::numeric_limits<double>::infinity());
    if (g.kappa() > 0.0) {
        tail_bound = std::exp(g.value_at(n - 1)) * 2.0 / g.kappa();
        if (tail_bound > tail_tolerance) {
            throw RangeError("scale_table: tail bound " + std::to_string(tail_bound) +
                             " exceeds tolerance " + std::to_string(tail_tolerance) +
                             "; enlarge x_max (currently " + std::to_string(g.x_max()) + ")");
        }
        a_inf = a[n - 1] + tail_bound;
        tails[n - 1] = tail_bound;
        for (std::size_t i = n - 1; i-- > 0;) tails[i] = tails[i + 1] + cells[i];
    }
    return ScaleTable(std::move(grid), std::move(a), std::move(cells), std::move(tails), a_inf,
                      tail_bound);
}

ScaleTable scale_table(PotentialGrid grid, double tail_tolerance) {
    return scale_table(std::make_shared<const PotentialGrid>(std::move(grid)), tail_tolerance);
}

double solve_F(const ScaleTable& table, double r) {
    detail::require(std::isfinite(r) && r > 0.0, "solve_F: r must be positive");
    const auto& g = table.grid();
    detail::require(g.kappa() > 0.0, "solve_F: needs kappa > 0");
    const double log_target = -0.5 * g.kappa() * r;
    const std::size_t n = g.size();
    const double log_hi = std::log(table.tail_at(0));
    const double log_lo = std::log(table.tail_at(n - 1));
    if (!(log_target <= log_hi && log_target >= log_lo)) {
        throw RangeError("solve_F: root for r = " + std::to_string(r) +
                         " lies outside the tabulated range; enlarge the grid");
    }
    // tails are strictly decreasing: find the last node with tail >= target.
    std::size_t lo = 0, hi = n - 1;
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (std::log(table.tail_at(mid)) >= log_target) lo = mid;
        else hi = mid;
    }
    const double l0 = std::log(table.tail_at(lo));
    const double l1 = std::log(table.tail_at(hi));
    const double frac = l0 == l1 ? 0.0 : (l0 - log_target) / (l0 - l1);
    return g.x_at(lo) + std::clamp(frac, 0.0, 1.0) * g.step();
}

double exit_probability(const ScaleTable& table, double x, double y, double z) {
    detail::require(x < y && y < z, "exit_probability: need x < y < z");
    const double ax = table.a(x);
    const double ay = table.a(y);
    const double az = table.a(z);
    return std::clamp((ay - ax) / (az - ax), 0.0, 1.0);
}

}  // namespace brox::env
