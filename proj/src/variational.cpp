// SPDX-License-Identifier: Apache-2.0
#include "brox/variational.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <array>
#include <cmath>

#include "brox/error.hpp"

namespace brox::variational {

namespace {

void check_kappa(double kappa) {
    if (!(kappa > 0.0 && kappa < 1.0)) {
        throw InvalidArgument("c1 needs kappa in (0,1): the weight is not integrable otherwise");
    }
}

struct Level {
    double mu;
    Eigen::VectorXd vec;
    std::size_t iterations;
};

// int_a^b (1 - v)^e dv in closed form.
double power_integral(double a, double b, double e) {
    return (std::pow(1.0 - a, e + 1.0) - std::pow(1.0 - b, e + 1.0)) / (e + 1.0);
}

Level solve_mesh(double kappa, std::size_t cells, std::size_t dims) {
    const double p = 1.0 / kappa - 2.0;
    const double h = 1.0 / static_cast<double>(cells);
    const auto n = static_cast<Eigen::Index>(cells);
    const auto d = static_cast<Eigen::Index>(dims);

    // Lumped mass: m_k = int w(v) hat_k(v) dv, each half computed exactly.
    Eigen::VectorXd mass(n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        const double v = static_cast<double>(k) * h;
        const double a = v - h;
        // Left cell [a, v]: hat = (x - a)/h = ((1-a) - (1-x))/h.
        double m = ((1.0 - a) * power_integral(a, v, p) - power_integral(a, v, p + 1.0)) / h;
        if (k < n) {
            const double b = v + h;
            // Right cell [v, b]: hat = (b - x)/h = ((1-x) - (1-b))/h.
            m += (power_integral(v, b, p + 1.0) - (1.0 - b) * power_integral(v, b, p)) / h;
        }
        mass(k - 1) = m;
    }

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(3 * n * d));
    for (Eigen::Index k = 0; k < n; ++k) {
        const double diag = (k + 1 < n ? 2.0 : 1.0) / h;
        for (Eigen::Index c = 0; c < d; ++c) {
            const Eigen::Index row = k * d + c;
            trip.emplace_back(row, row, diag);
            if (k + 1 < n) {
                trip.emplace_back(row, row + d, -1.0 / h);
                trip.emplace_back(row + d, row, -1.0 / h);
            }
        }
    }
    Eigen::SparseMatrix<double> stiff(n * d, n * d);
    stiff.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(stiff);
    if (solver.info() != Eigen::Success) throw ConvergenceError("c1: stiffness factorization failed");

    Eigen::VectorXd m_full(n * d);
    for (Eigen::Index k = 0; k < n; ++k) m_full.segment(k * d, d).setConstant(mass(k));

    // Deterministic positive start with a different profile per coordinate.
    Eigen::VectorXd x(n * d);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index c = 0; c < d; ++c) {
            const double v = static_cast<double>(k + 1) * h;
            x(k * d + c) = v * (1.0 + 0.25 * static_cast<double>(c)) + 0.1 * v * v * static_cast<double>(c);
        }
    }
    double mu_prev = 0.0;
    for (std::size_t it = 1; it <= 10000; ++it) {
        const Eigen::VectorXd y = solver.solve(m_full.cwiseProduct(x));
        const double ky = y.dot(stiff * y);
        const double my = y.dot(m_full.cwiseProduct(y));
        const double mu = ky / my;
        x = y / std::sqrt(my);
        if (it > 1 && std::abs(mu - mu_prev) <= 1e-12 * mu) return {mu, x, it};
        mu_prev = mu;
    }
    throw ConvergenceError("c1: inverse iteration did not converge");
}

}  // namespace

C1Result c1_eigen(const C1Problem& problem) {
    check_kappa(problem.kappa);
    detail::require(problem.mesh >= 16, "c1: mesh must be at least 16");
    detail::require(problem.coordinates >= 1, "c1: at least one coordinate");
    const Level coarse = solve_mesh(problem.kappa, problem.mesh, problem.coordinates);
    const Level fine = solve_mesh(problem.kappa, 2 * problem.mesh, problem.coordinates);
    C1Result out;
    out.coarse = 0.5 * coarse.mu;
    out.fine = 0.5 * fine.mu;
    out.value = (4.0 * out.fine - out.coarse) / 3.0;
    out.iterations = coarse.iterations + fine.iterations;
    const auto d = static_cast<Eigen::Index>(problem.coordinates);
    const Eigen::Index n = fine.vec.size() / d;
    out.ground_state.resize(static_cast<std::size_t>(n));
    out.single_sign = true;
    for (Eigen::Index c = 0; c < d; ++c) {
        bool pos = false, neg = false;
        for (Eigen::Index k = 0; k < n; ++k) {
            const double v = fine.vec(k * d + c);
            pos = pos || v > 0.0;
            neg = neg || v < 0.0;
            if (c == 0) out.ground_state[static_cast<std::size_t>(k)] = v;
        }
        out.single_sign = out.single_sign && !(pos && neg);
    }
    return out;
}

double beta_integral(double a, double b) {
    detail::require(a >= 1.0 && b > 0.0, "beta_integral needs a >= 1 and b > 0");
    static constexpr std::array<double, 8> nodes{-0.9602898564975363, -0.7966664774136267,
                                                 -0.5255324099163290, -0.1834346424956498,
                                                 0.1834346424956498,  0.5255324099163290,
                                                 0.7966664774136267,  0.9602898564975363};
    static constexpr std::array<double, 8> weights{0.1012285362903763, 0.2223810344533745,
                                                   0.3137066458778873, 0.3626837833783620,
                                                   0.3626837833783620, 0.3137066458778873,
                                                   0.2223810344533745, 0.1012285362903763};
    // With 1 - v = t^{1/b}: int_0^1 (1 - t^{1/b})^{a-1} dt / b. The integrand
    // behaves like a power of t at 0, so the panels are dyadic toward 0.
    double total = 0.0;
    for (int level = 0; level < 64; ++level) {
        const double hi = std::ldexp(1.0, -level);
        const double lo = 0.5 * hi;
        const double width = (hi - lo) / 4.0;
        for (int k = 0; k < 4; ++k) {
            const double mid = lo + (k + 0.5) * width;
            for (std::size_t j = 0; j < nodes.size(); ++j) {
                const double t = mid + 0.5 * width * nodes[j];
                total += 0.5 * width * weights[j] * std::pow(1.0 - std::pow(t, 1.0 / b), a - 1.0);
            }
        }
    }
    return total / b;
}

C1Bounds c1_bounds(double kappa) {
    check_kappa(kappa);
    const double b = 1.0 / kappa - 1.0;
    return C1Bounds{1.0 / (2.0 * beta_integral(2.0, b)), 0.5 / beta_integral(3.0, b)};
}

}  // namespace brox::variational
