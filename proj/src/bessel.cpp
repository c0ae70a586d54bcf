// SPDX-License-Identifier: Apache-2.0
#include "brox/bessel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "brox/error.hpp"

namespace brox::bessel {

double besq_step(double dimension, double value, double dt, Stream& rng) {
    detail::require(dimension >= 0.0 && value >= 0.0, "besq_step: negative dimension or value");
    detail::require(dt > 0.0, "besq_step: dt must be positive");
    if (dimension >= 1.0) {
        // Noncentral chi-square with at least one degree of freedom:
        // (sqrt(z) + sqrt(dt) N)^2 plus an independent central part.
        const double lead = std::sqrt(value) + std::sqrt(dt) * rng.normal();
        double rest = 0.0;
        if (dimension == 2.0) {
            const double n = rng.normal();
            rest = dt * n * n;
        } else if (dimension > 1.0) {
            std::gamma_distribution<double> gamma(0.5 * (dimension - 1.0), 1.0);
            rest = 2.0 * dt * gamma(rng);
        }
        return lead * lead + rest;
    }
    std::int64_t n = 0;
    if (value > 0.0) {
        std::poisson_distribution<std::int64_t> poisson(value / (2.0 * dt));
        n = poisson(rng);
    }
    const double shape = 0.5 * dimension + static_cast<double>(n);
    if (shape == 0.0) return 0.0;
    std::gamma_distribution<double> gamma(shape, 1.0);
    return 2.0 * dt * gamma(rng);
}

ProfileGrid ProfileGrid::uniform(double step) {
    detail::require(step > 0.0, "profile grid step must be positive");
    return ProfileGrid{step, 1.05, step, std::min(step, 0.01)};
}

ProfileGrid ProfileGrid::geometric(double first_cell, double step) {
    detail::require(first_cell > 0.0 && step > 0.0, "profile grid cells must be positive");
    return ProfileGrid{std::min(first_cell, step), 1.05, step, std::min(step, 0.01)};
}

ProfileGridWalker::ProfileGridWalker(const ProfileGrid& grid)
    : grid_(grid),
      phase_(grid.first_cell >= grid.step ? Phase::uniform : Phase::geometric),
      cell_(grid.first_cell) {
    detail::require(grid.first_cell > 0.0 && grid.step > 0.0 && grid.relative > 0.0 &&
                        grid.ratio > 1.0,
                    "invalid profile grid");
}

double ProfileGridWalker::next() {
    switch (phase_) {
        case Phase::geometric:
            x_ += cell_;
            cell_ *= grid_.ratio;
            if (cell_ >= grid_.step) {
                phase_ = Phase::uniform;
                base_ = x_;
                uniform_index_ = 0;
            }
            break;
        case Phase::uniform:
            ++uniform_index_;
            x_ = base_ + static_cast<double>(uniform_index_) * grid_.step;
            if (grid_.relative * x_ > grid_.step) phase_ = Phase::relative;
            break;
        case Phase::relative:
            x_ *= 1.0 + grid_.relative;
            break;
    }
    return x_;
}

BesqPath besq_path(double dimension, double start, std::span<const double> grid, Stream& rng) {
    detail::require(!grid.empty(), "besq_path: empty grid");
    BesqPath path;
    path.dimension = dimension;
    path.start = start;
    path.grid.push_back(grid[0]);
    path.values.push_back(start);
    double z = start;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        detail::require(grid[i] > grid[i - 1], "besq_path: grid must be increasing");
        z = besq_step(dimension, z, grid[i] - grid[i - 1], rng);
        path.grid.push_back(grid[i]);
        path.values.push_back(z);
        if (z == 0.0 && dimension == 0.0) {
            path.absorbed_at = grid[i];
            break;
        }
    }
    return path;
}

LocalTimeProfile rn2_profile(double a, const ProfileGrid& grid, Stream& rng) {
    detail::require(std::isfinite(a) && a > 0.0, "rn2_profile: level must be positive");
    LocalTimeProfile p;
    p.kind = RayKnight::rn2;
    p.level = a;
    p.grid.push_back(0.0);
    p.ell.push_back(a);
    ProfileGridWalker walker(grid);
    double x = 0.0;
    double z = a;
    const double cap = kRn2ExtentCap * a;
    while (true) {
        const double next = walker.next();
        z = besq_step(0.0, z, next - x, rng);
        x = next;
        p.grid.push_back(x);
        p.ell.push_back(z);
        if (z == 0.0) {
            p.absorbed_at = x;
            break;
        }
        if (x > cap) {
            p.truncated = true;
            break;
        }
    }
    return p;
}

LocalTimeProfile rn2_profile(double a, double space_step, Stream& rng) {
    return rn2_profile(a, ProfileGrid::uniform(space_step), rng);
}

LocalTimeProfile rn1_profile(double r, double left_extent, const ProfileGrid& grid, Stream& rng) {
    detail::require(std::isfinite(r) && r > 0.0, "rn1_profile: level must be positive");
    detail::require(left_extent > 0.0, "rn1_profile: left_extent must be positive");
    LocalTimeProfile p;
    p.kind = RayKnight::rn1;
    p.level = r;
    p.grid.push_back(0.0);
    p.ell.push_back(0.0);
    ProfileGridWalker walker(grid);
    double pending = walker.next();
    double s = 0.0;
    double z = 0.0;
    while (true) {
        const bool upper_leg = s < r;
        const double target = (upper_leg && pending > r) ? r : pending;
        z = besq_step(upper_leg ? 2.0 : 0.0, z, target - s, rng);
        s = target;
        p.grid.push_back(s);
        p.ell.push_back(z);
        if (target == pending) pending = walker.next();
        if (s >= r && z == 0.0) {
            p.absorbed_at = s;
            break;
        }
        if (s > r + left_extent) {
            p.truncated = true;
            break;
        }
    }
    return p;
}

LocalTimeProfile rn1_profile(double r, double left_extent, double space_step, Stream& rng) {
    return rn1_profile(r, left_extent, ProfileGrid::uniform(space_step), rng);
}

std::size_t rn1_values_at(double level, std::span<const double> s_nodes, std::span<double> values,
                          Stream& rng) {
    detail::require(level > 0.0, "rn1_values_at: level must be positive");
    detail::require(values.size() == s_nodes.size(), "rn1_values_at: size mismatch");
    if (s_nodes.empty()) return 0;
    detail::require(s_nodes[0] >= 0.0, "rn1_values_at: nodes must be nonnegative");
    double s = 0.0;
    double z = 0.0;
    std::size_t i = 0;
    for (; i < s_nodes.size(); ++i) {
        const double target = s_nodes[i];
        if (s < level && target > level) {
            z = besq_step(2.0, z, level - s, rng);
            s = level;
        }
        if (target > s) {
            z = besq_step(s < level ? 2.0 : 0.0, z, target - s, rng);
            s = target;
        }
        values[i] = z;
        if (z == 0.0 && s >= level) break;
    }
    const std::size_t first_zero = i;
    for (; i < s_nodes.size(); ++i) values[i] = 0.0;
    return first_zero;
}

double sup_at_inverse_local_time(double v, Stream& rng) {
    detail::require(v > 0.0, "sup_at_inverse_local_time: v must be positive");
    return v / (2.0 * rng.exponential());
}

double sup_cdf(double v, double y) {
    detail::require(v > 0.0 && y > 0.0, "sup_cdf: v and y must be positive");
    return std::exp(-v / (2.0 * y));
}

double lambda_of(double kappa) { return 4.0 * (1.0 + kappa); }

ProfileGrid functional_grid(double level, double space_step) {
    return ProfileGrid::geometric(1e-8 * level, space_step);
}

double k_beta_functional(double kappa, const LocalTimeProfile& profile) {
    detail::require(kappa > 0.0 && kappa < 1.0, "K_beta needs kappa in (0,1)");
    detail::require(profile.kind == RayKnight::rn2 && profile.grid.size() >= 2,
                    "K_beta needs an RN2 profile");
    const double w = 1.0 / kappa - 2.0;
    const auto& x = profile.grid;
    const auto& l = profile.ell;
    const double x1w = std::pow(x[1], w + 1.0);
    double total = l[0] * x1w / (w + 1.0) + (l[1] - l[0]) * x1w / (w + 2.0);
    double f_prev = std::pow(x[1], w) * l[1];
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        const double f_next = std::pow(x[i + 1], w) * l[i + 1];
        total += 0.5 * (x[i + 1] - x[i]) * (f_prev + f_next);
        f_prev = f_next;
    }
    return total;
}

double k_beta_sample(double kappa, double space_step, Stream& rng) {
    detail::require(kappa > 0.0 && kappa < 1.0, "K_beta needs kappa in (0,1)");
    const double lambda = lambda_of(kappa);
    const auto profile = rn2_profile(lambda, functional_grid(lambda, space_step), rng);
    if (profile.truncated) throw RangeError("K_beta: RN2 profile truncated");
    return k_beta_functional(kappa, profile);
}

double c_beta_functional(const LocalTimeProfile& profile) {
    detail::require(profile.kind == RayKnight::rn2 && profile.grid.size() >= 2,
                    "C_beta needs an RN2 profile");
    const auto& x = profile.grid;
    const auto& l = profile.ell;
    const double a = profile.level;
    detail::require(x[1] <= 1.0, "C_beta: first cell must lie inside [0, 1]");
    // Linear ell on the first cell: (ell - a)/x is constant there.
    double total = l[1] - a;
    auto g = [a](double xv, double lv, bool below_one) { return (lv - (below_one ? a : 0.0)) / xv; };
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        const double xa = x[i], xb = x[i + 1];
        if (xb <= 1.0) {
            total += 0.5 * (xb - xa) * (g(xa, l[i], true) + g(xb, l[i + 1], true));
        } else if (xa >= 1.0) {
            total += 0.5 * (xb - xa) * (g(xa, l[i], false) + g(xb, l[i + 1], false));
        } else {
            const double l1 = l[i] + (1.0 - xa) / (xb - xa) * (l[i + 1] - l[i]);
            total += 0.5 * (1.0 - xa) * (g(xa, l[i], true) + g(1.0, l1, true));
            total += 0.5 * (xb - 1.0) * (g(1.0, l1, false) + g(xb, l[i + 1], false));
        }
    }
    return total;
}

double c_beta_sample(double space_step, Stream& rng) {
    const auto profile = rn2_profile(8.0, functional_grid(8.0, space_step), rng);
    if (profile.truncated) throw RangeError("C_beta: RN2 profile truncated");
    return c_beta_functional(profile);
}

namespace {

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// Integrand of the scale function in the logit variable z = log(y / (1-y)):
// dS = (1 + e^z)^kappa dz.
double scale_density(double kappa, double z) { return std::exp(kappa * softplus(z)); }

constexpr std::array<double, 8> kGlNodes{-0.9602898564975363, -0.7966664774136267,
                                         -0.5255324099163290, -0.1834346424956498,
                                         0.1834346424956498,  0.5255324099163290,
                                         0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGlWeights{0.1012285362903763, 0.2223810344533745,
                                           0.3137066458778873, 0.3626837833783620,
                                           0.3626837833783620, 0.3137066458778873,
                                           0.2223810344533745, 0.1012285362903763};

// int_{za}^{zb} (1 + e^z)^kappa dz, composite 8-point Gauss-Legendre with
// panels no wider than 0.25.
double scale_integral(double kappa, double za, double zb) {
    if (za == zb) return 0.0;
    const double len = zb - za;
    const auto panels = static_cast<std::size_t>(std::ceil(std::abs(len) / 0.25));
    const double h = len / static_cast<double>(panels);
    double total = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double mid = za + (static_cast<double>(p) + 0.5) * h;
        double panel = 0.0;
        for (std::size_t k = 0; k < kGlNodes.size(); ++k) {
            panel += kGlWeights[k] * scale_density(kappa, mid + 0.5 * h * kGlNodes[k]);
        }
        total += 0.5 * h * panel;
    }
    return total;
}

double logit_alpha(double kappa) { return -std::log(3.0 + 2.0 * kappa); }

// Solves S = s in the logit variable, starting from a point (z0, s0) on the
// curve. S is convex in z, so Newton converges from either side.
double solve_logit(double kappa, double s, double z0, double s0) {
    double z = z0;
    double sz = s0;
    for (int it = 0; it < 200; ++it) {
        const double dz = (s - sz) / scale_density(kappa, z);
        const double z_new = z + dz;
        sz += scale_integral(kappa, z, z_new);
        z = z_new;
        if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) return z;
    }
    throw ConvergenceError("jacobi scale inverse: Newton did not converge");
}

}  // namespace

double jacobi_scale(double kappa, double y) {
    detail::require(kappa > 0.0, "jacobi_scale: kappa must be positive");
    if (!(y > 0.0 && y < 1.0)) throw InvalidArgument("jacobi_scale: y must lie in (0,1)");
    const double z = std::log(y) - std::log1p(-y);
    return scale_integral(kappa, logit_alpha(kappa), z);
}

double jacobi_scale_inverse(double kappa, double s) {
    detail::require(kappa > 0.0, "jacobi_scale_inverse: kappa must be positive");
    detail::require(std::isfinite(s), "jacobi_scale_inverse: s must be finite");
    // The logit-space density is >= 1, so |S(z) - S(z_alpha)| >= |z - z_alpha|.
    const double za = logit_alpha(kappa);
    double lo = za - std::abs(s) - 1.0;
    double hi = za + std::abs(s) + 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (scale_integral(kappa, za, mid) < s) lo = mid;
        else hi = mid;
    }
    const double z = 0.5 * (lo + hi);
    return 1.0 / (1.0 + std::exp(-z));
}

TwoSidedProfile two_sided_rn2(double a, const ProfileGrid& grid, Stream& rng) {
    TwoSidedProfile p;
    p.right = rn2_profile(a, grid, rng);
    p.left = rn2_profile(a, grid, rng);
    return p;
}

JBetaSampler::JBetaSampler(double kappa, double t, double space_step)
    : kappa_(kappa),
      t_(t),
      grid_(functional_grid(lambda_of(kappa), space_step)),
      right_{1.0, {}, {}, logit_alpha(kappa), 0.0},
      left_{-1.0, {}, {}, logit_alpha(kappa), 0.0} {
    detail::require(kappa > 0.0 && kappa <= 1.0, "J_beta needs kappa in (0,1]");
    detail::require(t > 0.0, "J_beta needs t > 0");
}

double JBetaSampler::weight(Side& side, std::size_t i, double x) {
    if (i < side.nodes.size()) {
        if (side.nodes[i] != x) throw InvalidArgument("J_beta: profile grid mismatch");
        return side.weights[i];
    }
    detail::require(i == side.nodes.size(), "J_beta: nodes must be visited in order");
    const double target = side.sign * t_ * x;
    side.z = solve_logit(kappa_, target, side.z, side.s);
    side.s = target;
    const double log_y = -softplus(-side.z);
    const double log_1my = -softplus(side.z);
    const double w = t_ * std::exp(2.0 * log_y + (2.0 * kappa_ - 1.0) * log_1my);
    side.nodes.push_back(x);
    side.weights.push_back(w);
    return w;
}

double JBetaSampler::side_integral(Side& side, const LocalTimeProfile& profile) {
    const auto& x = profile.grid;
    const auto& l = profile.ell;
    double total = 0.0;
    double f_prev = weight(side, 0, x[0]) * l[0];
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double f_next = weight(side, i + 1, x[i + 1]) * l[i + 1];
        total += 0.5 * (x[i + 1] - x[i]) * (f_prev + f_next);
        f_prev = f_next;
    }
    return total;
}

double JBetaSampler::functional(const TwoSidedProfile& profile) {
    detail::require(profile.right.level == lambda_of(kappa_) && profile.left.level == profile.right.level,
                    "J_beta: profile level must be lambda");
    if (profile.right.truncated || profile.left.truncated) {
        throw RangeError("J_beta: profile truncated");
    }
    return side_integral(right_, profile.right) + side_integral(left_, profile.left);
}

double JBetaSampler::sample(Stream& rng) {
    return functional(two_sided_rn2(lambda_of(kappa_), grid_, rng));
}

double j_beta_sample(double kappa, double t, double space_step, Stream& rng) {
    JBetaSampler sampler(kappa, t, space_step);
    return sampler.sample(rng);
}

JacobiState jacobi_step(const JacobiState& state, double dt, Stream& rng) {
    detail::require(dt > 0.0, "jacobi_step: dt must be positive");
    const double y = state.y;
    const double drift = state.d1 - (state.d1 + state.d2) * y;
    const double vol = 2.0 * std::sqrt(std::max(0.0, y * (1.0 - y)));
    JacobiState next = state;
    next.y = std::clamp(y + drift * dt + vol * std::sqrt(dt) * rng.normal(), 0.0, 1.0);
    next.time = state.time + dt;
    return next;
}

double time_avg_inverse_square(double d, double t, Stream& rng) {
    if (!(d > 4.0)) throw InvalidArgument("time_avg_inverse_square: dimension must exceed 4");
    detail::require(t > 1.0, "time_avg_inverse_square: t must exceed 1");
    std::gamma_distribution<double> start((d - 2.0) / 2.0, 1.0);
    double z = 2.0 * start(rng);
    double s = 0.0;
    double integral = 0.0;
    std::size_t k = 0;
    while (s < t) {
        double next = s < 1.0 ? static_cast<double>(++k) * 0.01 : s * 1.01;
        next = std::min(next, t);
        const double z_next = besq_step(d, z, next - s, rng);
        integral += 0.5 * (next - s) * (1.0 / z + 1.0 / z_next);
        z = z_next;
        s = next;
    }
    return integral / std::log(t);
}

}  // namespace brox::bessel
