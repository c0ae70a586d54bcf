// SPDX-License-Identifier: Apache-2.0
#include "brox/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "brox/bessel.hpp"
#include "brox/error.hpp"

namespace brox::diffusion {

env::ScaleTable make_environment(double kappa, double env_step, double x_min, double x_max,
                                 const Stream& rng, double tail_tolerance) {
    detail::require(kappa > 0.0, "diffusion needs kappa > 0");
    auto grid = std::make_shared<const env::PotentialGrid>(
        env::build_potential(kappa, env_step, x_min, x_max, rng, 1));
    return env::scale_table(std::move(grid), tail_tolerance);
}

double PathSample::occupation_total() const noexcept {
    double total = 0.0;
    for (double v : lt_bins) total += v * bin_width;
    return total;
}

namespace {

// Position of a path inside the grid: cell index and offset in A-units
// from the left node of the cell.
struct CellState {
    std::size_t cell;
    double offset;
};

constexpr std::size_t kBridgeCellWindow = 64;

// A-distance from `from` up to `to` (to at or right of from); infinite when
// more than kBridgeCellWindow cells apart.
double a_distance_up(const env::ScaleTable& table, CellState from, CellState to) {
    if (to.cell < from.cell) return 0.0;
    if (to.cell == from.cell) return std::max(0.0, to.offset - from.offset);
    if (to.cell - from.cell > kBridgeCellWindow) return std::numeric_limits<double>::infinity();
    double d = table.cell_width(from.cell) - from.offset;
    for (std::size_t k = from.cell + 1; k < to.cell; ++k) d += table.cell_width(k);
    return d + to.offset;
}

CellState locate(const env::ScaleTable& table, double x) {
    const auto& g = table.grid();
    const std::size_t j = g.cell_of(x);
    const double frac = std::clamp((x - g.x_at(j)) / g.step(), 0.0, 1.0);
    return {j, frac * table.cell_width(j)};
}

}  // namespace

namespace {

PathSample simulate_lattice(const env::ScaleTable& table, const PathOptions& opt, Stream& rng) {
    const auto& g = table.grid();
    const std::size_t n = g.size();
    const double h = g.step();
    // Exit probability to the right and mean X-time per visit, by node.
    std::vector<double> p_up(n, 0.0);
    std::vector<double> visit_time(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double dm = table.cell_width(i - 1);
        const double dp = table.cell_width(i);
        p_up[i] = dm / (dm + dp);
        visit_time[i] = h * std::exp(-g.value_at(i)) * 2.0 * dm * dp / (dm + dp);
    }
    const auto node_tol = 1e-9 * h;
    std::size_t i_up = n;
    std::size_t i_down = 0;
    bool has_down = false;
    if (opt.stop_above) {
        const double pos = (*opt.stop_above - g.x_min()) / h;
        i_up = static_cast<std::size_t>(std::ceil(pos - node_tol / h));
        if (i_up >= n) throw RangeError("simulate_path: stop level above the grid");
    }
    if (opt.stop_below) {
        const double pos = (*opt.stop_below - g.x_min()) / h;
        if (pos < 0.0) throw RangeError("simulate_path: stop level below the grid");
        i_down = static_cast<std::size_t>(std::floor(pos + node_tol / h));
        has_down = true;
    }

    PathSample out;
    out.horizon = opt.horizon;
    out.bin_width = opt.bin_width;
    if (opt.bin_width > 0.0) {
        out.lt_origin = g.x_min();
        const auto bins =
            static_cast<std::size_t>(std::ceil((g.x_max() - g.x_min()) / opt.bin_width)) + 1;
        out.lt_bins.assign(bins, 0.0);
    }
    auto occupy = [&](double x, double duration) {
        if (out.lt_bins.empty()) return;
        const double pos = std::floor((x - out.lt_origin) / opt.bin_width);
        const auto k = static_cast<std::size_t>(
            std::clamp(pos, 0.0, static_cast<double>(out.lt_bins.size() - 1)));
        out.lt_bins[k] += duration;
    };
    out.times.push_back(0.0);
    out.positions.push_back(0.0);
    double next_record = opt.record_interval > 0.0 ? opt.record_interval
                                                   : std::numeric_limits<double>::infinity();
    std::size_t i = g.origin();
    double t = 0.0;
    while (true) {
        if (i == 0) throw RangeError("simulate_path: X left the grid on the left");
        if (i + 1 >= n) throw RangeError("simulate_path: X left the grid on the right");
        const double x = g.x_at(i);
        const double dT = visit_time[i] * rng.exponential();
        if (t + dT >= opt.horizon) {
            occupy(x, opt.horizon - t);
            out.end = PathEnd::horizon;
            out.end_time = opt.horizon;
            out.times.push_back(opt.horizon);
            out.positions.push_back(x);
            ++out.steps;
            break;
        }
        occupy(x, dT);
        t += dT;
        i = rng.uniform() < p_up[i] ? i + 1 : i - 1;
        ++out.steps;
        if (i == i_up || (has_down && i == i_down)) {
            out.end = i == i_up ? PathEnd::above : PathEnd::below;
            out.end_time = t;
            out.times.push_back(t);
            out.positions.push_back(g.x_at(i));
            break;
        }
        while (t >= next_record) {
            out.times.push_back(t);
            out.positions.push_back(g.x_at(i));
            next_record += opt.record_interval;
        }
    }
    for (double& v : out.lt_bins) v /= opt.bin_width;
    return out;
}

PathSample simulate_euler(const env::ScaleTable& table, const PathOptions& opt, Stream& rng) {
    const auto& g = table.grid();
    const double h = g.step();
    const std::size_t n = g.size();
    CellState st{g.origin(), 0.0};
    auto position = [&](const CellState& c) {
        const double w = table.cell_width(c.cell);
        return g.x_at(c.cell) + h * (w > 0.0 ? std::clamp(c.offset / w, 0.0, 1.0) : 0.0);
    };
    auto potential = [&](const CellState& c) {
        const double w = table.cell_width(c.cell);
        const double frac = w > 0.0 ? std::clamp(c.offset / w, 0.0, 1.0) : 0.0;
        return g.value_at(c.cell) + frac * (g.value_at(c.cell + 1) - g.value_at(c.cell));
    };

    std::optional<CellState> above;
    std::optional<CellState> below;
    if (opt.stop_above) above = locate(table, *opt.stop_above);
    if (opt.stop_below) below = locate(table, *opt.stop_below);

    PathSample out;
    out.horizon = opt.horizon;
    out.bin_width = opt.bin_width;
    if (opt.bin_width > 0.0) {
        out.lt_origin = g.x_min();
        const auto bins =
            static_cast<std::size_t>(std::ceil((g.x_max() - g.x_min()) / opt.bin_width)) + 1;
        out.lt_bins.assign(bins, 0.0);
    }
    auto occupy = [&](double x, double duration) {
        if (out.lt_bins.empty()) return;
        const double pos = std::floor((x - out.lt_origin) / opt.bin_width);
        const auto k = static_cast<std::size_t>(
            std::clamp(pos, 0.0, static_cast<double>(out.lt_bins.size() - 1)));
        out.lt_bins[k] += duration;
    };

    out.times.push_back(0.0);
    out.positions.push_back(0.0);
    double next_record = opt.record_interval > 0.0 ? opt.record_interval
                                                   : std::numeric_limits<double>::infinity();
    double t = 0.0;
    double x_old = 0.0;
    double w_old = potential(st);

    while (true) {
        const double ds = opt.dt * std::exp(2.0 * w_old);
        const double db = std::sqrt(ds) * rng.normal();
        const double d_up_old = above ? a_distance_up(table, st, *above) : 0.0;
        const double d_down_old = below ? a_distance_up(table, *below, st) : 0.0;

        CellState next = st;
        next.offset += db;
        while (next.offset > table.cell_width(next.cell)) {
            next.offset -= table.cell_width(next.cell);
            if (++next.cell >= n - 1) throw RangeError("simulate_path: X left the grid on the right");
        }
        while (next.offset < 0.0) {
            if (next.cell == 0) throw RangeError("simulate_path: X left the grid on the left");
            --next.cell;
            next.offset += table.cell_width(next.cell);
        }
        const double x_new = position(next);
        const double w_new = potential(next);
        const double dT = 0.5 * opt.dt * (1.0 + std::exp(2.0 * (w_old - w_new)));

        // Stop-level crossings, including those of the Brownian bridge in between.
        std::optional<double> hit_frac;
        PathEnd hit_kind = PathEnd::horizon;
        double hit_level = 0.0;
        if (above) {
            if (x_new >= *opt.stop_above) {
                hit_frac = x_new > x_old ? (*opt.stop_above - x_old) / (x_new - x_old) : 1.0;
            } else {
                const double d_new = a_distance_up(table, next, *above);
                if (std::isfinite(d_up_old) && std::isfinite(d_new) &&
                    rng.uniform() < std::exp(-2.0 * d_up_old * d_new / ds)) {
                    hit_frac = 0.5;
                }
            }
            if (hit_frac) {
                hit_kind = PathEnd::above;
                hit_level = *opt.stop_above;
            }
        }
        if (!hit_frac && below) {
            if (x_new <= *opt.stop_below) {
                hit_frac = x_new < x_old ? (x_old - *opt.stop_below) / (x_old - x_new) : 1.0;
            } else {
                const double d_new = a_distance_up(table, *below, next);
                if (std::isfinite(d_down_old) && std::isfinite(d_new) &&
                    rng.uniform() < std::exp(-2.0 * d_down_old * d_new / ds)) {
                    hit_frac = 0.5;
                }
            }
            if (hit_frac) {
                hit_kind = PathEnd::below;
                hit_level = *opt.stop_below;
            }
        }

        const double t_hit = hit_frac ? t + std::clamp(*hit_frac, 0.0, 1.0) * dT
                                      : std::numeric_limits<double>::infinity();
        if (t + dT >= opt.horizon && opt.horizon <= t_hit) {
            const double frac = (opt.horizon - t) / dT;
            const double x_end = x_old + frac * (x_new - x_old);
            occupy(0.5 * (x_old + x_end), opt.horizon - t);
            out.end = PathEnd::horizon;
            out.end_time = opt.horizon;
            out.times.push_back(opt.horizon);
            out.positions.push_back(x_end);
            ++out.steps;
            break;
        }
        if (hit_frac) {
            occupy(0.5 * (x_old + hit_level), t_hit - t);
            out.end = hit_kind;
            out.end_time = t_hit;
            out.times.push_back(t_hit);
            out.positions.push_back(hit_level);
            ++out.steps;
            break;
        }
        occupy(0.5 * (x_old + x_new), dT);
        t += dT;
        st = next;
        x_old = x_new;
        w_old = w_new;
        ++out.steps;
        while (t >= next_record) {
            out.times.push_back(t);
            out.positions.push_back(x_new);
            next_record += opt.record_interval;
        }
    }
    for (double& v : out.lt_bins) v /= opt.bin_width;
    return out;
}

}  // namespace

PathSample simulate_path(const env::ScaleTable& table, const PathOptions& opt, Stream& rng) {
    const auto& g = table.grid();
    detail::require(g.kappa() > 0.0, "simulate_path needs kappa > 0");
    detail::require(opt.horizon > 0.0, "simulate_path: horizon must be positive");
    detail::require(opt.bin_width >= 0.0 && opt.record_interval >= 0.0,
                    "simulate_path: negative bin width or record interval");
    detail::require(g.origin() > 0 && g.origin() + 1 < g.size(),
                    "simulate_path: grid must extend on both sides of 0");
    if (opt.stop_above) detail::require(*opt.stop_above > 0.0, "stop_above must be positive");
    if (opt.stop_below) detail::require(*opt.stop_below < 0.0, "stop_below must be negative");
    if (opt.scheme == PathScheme::lattice) return simulate_lattice(table, opt, rng);
    detail::require(opt.dt > 0.0, "simulate_path: dt must be positive");
    return simulate_euler(table, opt, rng);
}

namespace {

// Points y_0 = u > y_1 > ... (the environment nodes at or below u) with
// s_p = A(u) - A(y_p) and the B-local time ell at A(y_p).
struct NodeProfile {
    std::vector<double> y;
    std::vector<double> w;
    std::vector<double> s;
    std::vector<double> ell;
    std::size_t origin_point = 0;
    double level = 0.0;
    bool truncated = false;
};

NodeProfile node_points(const env::ScaleTable& table, double u) {
    const auto& g = table.grid();
    detail::require(u > 0.0 && u <= g.x_max() + 1e-12 * g.step(), "level outside the grid");
    const std::size_t j = g.cell_of(u);
    const double frac = std::clamp((u - g.x_at(j)) / g.step(), 0.0, 1.0);
    NodeProfile p;
    p.y.reserve(j + 2);
    p.w.reserve(j + 2);
    p.s.reserve(j + 2);
    if (frac >= 1.0) {
        p.y.push_back(g.x_at(j + 1));
        p.w.push_back(g.value_at(j + 1));
        p.s.push_back(0.0);
    } else if (frac > 0.0) {
        p.y.push_back(u);
        p.w.push_back(g.value_at(j) + frac * (g.value_at(j + 1) - g.value_at(j)));
        p.s.push_back(0.0);
    }
    double acc = frac * table.cell_width(j);
    for (std::size_t k = j + 1; k-- > 0;) {
        if (k < j) acc += table.cell_width(k);
        p.y.push_back(g.x_at(k));
        p.w.push_back(g.value_at(k));
        p.s.push_back(acc);
        if (k == g.origin()) {
            p.origin_point = p.y.size() - 1;
            p.level = acc;
        }
    }
    return p;
}

// Fills ell with an RN1 profile of `level` (anchored at s = 0) sampled at
// every stride-th point, the origin point and the last point, linear in s
// in between. Returns whether the BESQ(0) leg was absorbed.
bool sample_rn1_on_points(NodeProfile& p, double level, std::size_t stride, Stream& rng) {
    const std::size_t m = p.s.size();
    std::vector<std::size_t> idx;
    idx.reserve(m / stride + 3);
    for (std::size_t q = 0; q < m; q += stride) idx.push_back(q);
    if (idx.back() != m - 1) idx.push_back(m - 1);
    if (!std::binary_search(idx.begin(), idx.end(), p.origin_point)) {
        idx.insert(std::lower_bound(idx.begin(), idx.end(), p.origin_point), p.origin_point);
    }
    std::vector<double> s_nodes(idx.size());
    for (std::size_t q = 0; q < idx.size(); ++q) s_nodes[q] = p.s[idx[q]];
    std::vector<double> vals(idx.size());
    const std::size_t first_zero = bessel::rn1_values_at(level, s_nodes, vals, rng);
    p.ell.assign(m, 0.0);
    for (std::size_t q = 0; q < idx.size(); ++q) {
        p.ell[idx[q]] = vals[q];
        if (q + 1 < idx.size()) {
            const double s0 = s_nodes[q], s1 = s_nodes[q + 1];
            for (std::size_t k = idx[q] + 1; k < idx[q + 1]; ++k) {
                const double f = s1 > s0 ? (p.s[k] - s0) / (s1 - s0) : 0.0;
                p.ell[k] = vals[q] + f * (vals[q + 1] - vals[q]);
            }
        }
    }
    return first_zero < idx.size();
}

std::size_t stride_of(const env::PotentialGrid& g, double space_step) {
    detail::require(space_step > 0.0, "space_step must be positive");
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(space_step / g.step())));
}

// Largest value of exp(log-bridge) over a segment whose endpoint logs are
// la, lb, when it may exceed exp(best).
double bridge_max(double la, double lb, double variance, double best, Stream& rng) {
    const double top = std::max(la, lb);
    if (variance <= 0.0) return top;
    if (best > top && 2.0 * (best - la) * (best - lb) / variance > 40.0) return top;
    const double m = 0.5 * (la + lb + std::sqrt((lb - la) * (lb - la) - 2.0 * variance * std::log(rng.uniform())));
    return std::max(top, m);
}

HittingFunctionalSample integrate(const NodeProfile& p, double r, double u, Stream& rng) {
    HittingFunctionalSample out;
    out.r = r;
    out.f_of_r = u;
    out.truncated = p.truncated;
    const std::size_t m = p.y.size();
    std::vector<double> f(m);
    for (std::size_t q = 0; q < m; ++q) f[q] = p.ell[q] > 0.0 ? std::exp(-p.w[q]) * p.ell[q] : 0.0;
    std::size_t last = m - 1;
    for (std::size_t q = 0; q + 1 < m; ++q) {
        const double piece = 0.5 * (p.y[q] - p.y[q + 1]) * (f[q] + f[q + 1]);
        if (q < p.origin_point) out.h_plus += piece;
        else out.h_minus += piece;
        if (q > p.origin_point && f[q + 1] == 0.0) {
            last = q + 1;
            break;
        }
    }
    out.h_total = out.h_minus + out.h_plus;

    double log_star = -std::numeric_limits<double>::infinity();
    double log_neg = -std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q <= last; ++q) {
        if (f[q] <= 0.0) continue;
        const double lf = std::log(f[q]);
        log_star = std::max(log_star, lf);
        if (q >= p.origin_point) log_neg = std::max(log_neg, lf);
    }
    for (std::size_t q = 0; q < last; ++q) {
        if (f[q] <= 0.0 || f[q + 1] <= 0.0) continue;
        const double la = std::log(f[q]);
        const double lb = std::log(f[q + 1]);
        const double rate = 1.0 + 8.0 / (f[q] + f[q + 1]);
        const double variance = rate * (p.y[q] - p.y[q + 1]);
        if (q >= p.origin_point) {
            const double mx = bridge_max(la, lb, variance, log_neg, rng);
            log_neg = std::max(log_neg, mx);
            log_star = std::max(log_star, mx);
        } else {
            log_star = std::max(log_star, bridge_max(la, lb, variance, log_star, rng));
        }
    }
    out.l_star = std::exp(log_star);
    out.l_neg = std::isfinite(log_neg) ? std::exp(log_neg) : 0.0;
    return out;
}

}  // namespace

HittingFunctionalSample hitting_sample_rk(const env::ScaleTable& table, double r, bool use_F,
                                          double space_step, Stream& rng) {
    const auto& g = table.grid();
    detail::require(g.kappa() > 0.0, "hitting_sample_rk needs kappa > 0");
    detail::require(std::isfinite(r) && r > 0.0, "hitting_sample_rk: r must be positive");
    const double u = use_F ? env::solve_F(table, r) : r;
    if (!(u > 0.0 && u <= g.x_max() + 1e-12 * g.step())) {
        throw RangeError("hitting_sample_rk: level " + std::to_string(u) + " outside the grid");
    }
    NodeProfile p = node_points(table, u);
    detail::require(p.level > 0.0, "hitting_sample_rk: degenerate scale table");
    p.truncated = !sample_rn1_on_points(p, p.level, stride_of(g, space_step), rng);
    return integrate(p, r, u, rng);
}

HittingFunctionalSample annealed_hitting_sample(double kappa, double r,
                                                const AnnealedOptions& opt,
                                                const Stream& replica) {
    detail::require(kappa > 0.0 && r > 0.0, "annealed_hitting_sample: kappa and r must be positive");
    detail::require(opt.x_min < 0.0, "annealed_hitting_sample: x_min must be negative");
    double x_min = opt.x_min;
    double x_max = opt.use_F
                       ? r + (2.0 / kappa) * 30.0 + 6.0 * std::sqrt(r) + 10.0
                       : r + 2.0 * opt.env_step;
    const double tolerance = opt.use_F ? 1e-8 * std::exp(-0.5 * kappa * r)
                                       : std::numeric_limits<double>::infinity();
    detail::require(tolerance > 0.0, "annealed_hitting_sample: kappa * r too large for doubles");
    HittingFunctionalSample last;
    last.truncated = true;
    for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
        std::optional<env::ScaleTable> table;
        try {
            table.emplace(make_environment(kappa, opt.env_step, x_min, x_max, replica.split(0),
                                           tolerance));
        } catch (const RangeError&) {
            x_max = r + 2.0 * (x_max - r);
            continue;
        }
        Stream profile = replica.split(1);
        try {
            last = hitting_sample_rk(*table, r, opt.use_F, opt.space_step, profile);
        } catch (const RangeError&) {
            x_max = r + 2.0 * (x_max - r);
            continue;
        }
        if (!last.truncated) return last;
        x_min *= 2.0;
    }
    return last;
}

std::optional<double> annealed_path_hitting_time(double kappa, double r, double env_step,
                                                 PathScheme scheme, double dt, double cap,
                                                 const Stream& replica) {
    double x_min = -(20.0 + 40.0 / kappa);
    const double margin = scheme == PathScheme::lattice ? 2.0 * env_step
                                                        : std::max(1.0, 100.0 * std::sqrt(dt));
    for (int attempt = 0; attempt < 6; ++attempt) {
        const auto table = make_environment(kappa, env_step, x_min, r + margin, replica.split(0));
        Stream path_rng = replica.split(1);
        PathOptions opt;
        opt.scheme = scheme;
        opt.horizon = cap;
        opt.dt = dt;
        opt.stop_above = r;
        try {
            const auto path = simulate_path(table, opt, path_rng);
            if (path.end == PathEnd::above) return path.end_time;
            return std::nullopt;
        } catch (const RangeError&) {
            x_min *= 2.0;
        }
    }
    throw RangeError("annealed_path_hitting_time: path keeps leaving the grid");
}

LBracket l_pm_bracket(const stable::ConstantsBundle& bundle, double r, double l_star, Stream& rng) {
    const double v_minus = bundle.lambda * stable::t_pm(bundle, r, stable::Side::minus);
    const double v_plus = bundle.lambda * stable::t_pm(bundle, r, stable::Side::plus);
    const double sup_minus = bessel::sup_at_inverse_local_time(v_minus, rng);
    const double sup_plus =
        std::max(sup_minus, bessel::sup_at_inverse_local_time(v_plus - v_minus, rng));
    const double k = bundle.kappa;
    return LBracket{4.0 * std::pow(k * sup_minus, 1.0 / k), 4.0 * std::pow(k * sup_plus, 1.0 / k),
                    l_star};
}

IBracket i_pm_bracket(const stable::ConstantsBundle& bundle, double r, double h_total, double c6,
                      double space_step, Stream& rng) {
    const double k = bundle.kappa;
    detail::require(k > 0.0 && k <= 1.0, "i_pm_bracket needs kappa in (0,1]");
    detail::require(c6 >= 0.0, "i_pm_bracket: slack must be nonnegative");
    const double tm = stable::t_pm(bundle, r, stable::Side::minus);
    const double tp = stable::t_pm(bundle, r, stable::Side::plus);
    IBracket out;
    out.h_total = h_total;
    if (k < 1.0) {
        const double kb = bessel::k_beta_sample(k, space_step, rng);
        auto ibar = [&](double t, double sign) {
            return 4.0 * std::pow(k, 1.0 / k - 2.0) * std::pow(t, 1.0 / k) *
                   (kb + sign * c6 * std::pow(t, 1.0 - 1.0 / k));
        };
        out.i_minus_bar = ibar(tm, -1.0);
        out.i_plus_bar = ibar(tp, 1.0);
    } else {
        const double cb = bessel::c_beta_sample(space_step, rng);
        out.i_minus_bar = 4.0 * tm * (cb + 8.0 * std::log(tm));
        out.i_plus_bar = 4.0 * tp * (cb + 8.0 * std::log(tp));
    }
    return out;
}

double maxlocal_normalize(double kappa, const HittingFunctionalSample& s) {
    detail::require(kappa >= 1.0, "maximum local time law needs kappa >= 1");
    detail::require(s.h_total > 0.0 && s.l_star > 0.0, "maxlocal_normalize: degenerate sample");
    if (kappa == 1.0) return s.l_star * std::log(s.h_total) / s.h_total;
    return s.l_star / std::pow(s.h_total, 1.0 / kappa);
}

std::vector<LilRecord> lil_track(const env::ScaleTable& table, std::span<const double> schedule,
                                 double space_step, Stream& rng) {
    const auto& g = table.grid();
    const double kappa = g.kappa();
    detail::require(kappa > 0.0, "lil_track needs kappa > 0");
    detail::require(!schedule.empty(), "lil_track: empty schedule");
    detail::require(schedule.front() > std::exp(1.0), "lil_track: schedule must start above e");
    for (std::size_t k = 1; k < schedule.size(); ++k) {
        detail::require(schedule[k] > schedule[k - 1], "lil_track: schedule must increase");
    }
    const std::size_t stride = stride_of(g, space_step);
    // Accumulated B-local time at A(x_i), indexed by grid node.
    std::vector<double> total(g.size(), 0.0);
    std::vector<LilRecord> out;
    // The increments are sums of cell widths: differences of A would cancel
    // once A is close to its limit.
    std::size_t j_prev = g.origin();
    for (double r : schedule) {
        const std::size_t j = g.cell_of(r);
        const double top = g.x_at(j);
        detail::require(top > 0.0, "lil_track: schedule point below the first grid cell");
        detail::require(j > j_prev, "lil_track: schedule points share a grid cell");
        NodeProfile p = node_points(table, top);
        double increment = 0.0;
        for (std::size_t i = j_prev; i < j; ++i) increment += table.cell_width(i);
        if (!sample_rn1_on_points(p, increment, stride, rng)) {
            throw RangeError("lil_track: profile not absorbed inside the grid");
        }
        j_prev = j;
        // Point q is node j - q.
        for (std::size_t q = 0; q < p.ell.size(); ++q) {
            total[j - q] += p.ell[q];
            p.ell[q] = total[j - q];
        }
        const auto s = integrate(p, r, top, rng);
        LilRecord rec;
        rec.r = r;
        rec.h = s.h_total;
        rec.l_star = s.l_star;
        const double llr = std::log(std::log(r));
        rec.h_over_r_log_r = s.h_total / (r * std::log(r));
        rec.h_over_r_pow = s.h_total / std::pow(r, 1.0 / kappa);
        rec.h_liminf_scale = s.h_total / (std::pow(r, 1.0 / kappa) / std::pow(llr, 1.0 / kappa - 1.0));
        rec.l_star_scale = s.l_star / std::pow(r / llr, 1.0 / kappa);
        out.push_back(rec);
    }
    return out;
}

}  // namespace brox::diffusion
