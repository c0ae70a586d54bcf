// SPDX-License-Identifier: Apache-2.0
#include "brox/stable.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "brox/error.hpp"

namespace brox::stable {

using std::numbers::pi;

namespace {

// CMS for index != 1, skew 1, unit scale, zero shift.
double cms_skewed(double alpha, double v, double w) {
    const double zeta = -std::tan(pi * alpha / 2.0);
    const double xi = std::atan(-zeta) / alpha;
    const double a = alpha * (v + xi);
    return std::pow(1.0 + zeta * zeta, 1.0 / (2.0 * alpha)) * std::sin(a) /
           std::pow(std::cos(v), 1.0 / alpha) *
           std::pow(std::cos(v - a) / w, (1.0 - alpha) / alpha);
}

// CMS for index 1, skew 1, unit scale, zero shift.
double cms_cauchy_skewed(double v, double w) {
    const double h = pi / 2.0 + v;
    return (2.0 / pi) * (h * std::tan(v) - std::log((pi / 2.0) * w * std::cos(v) / h));
}

}  // namespace

double sample(const StableSpec& spec, Stream& rng) {
    detail::require(spec.index > 0.0 && spec.index <= 1.0, "stable index must lie in (0,1]");
    detail::require(spec.scale > 0.0, "stable scale must be positive");
    // Keep v away from -pi/2 where cos(v) underflows.
    double v;
    do {
        v = pi * (rng.uniform() - 0.5);
    } while (std::cos(v) <= 0.0);
    const double w = rng.exponential();
    if (spec.index == 1.0) {
        const double x = cms_cauchy_skewed(v, w);
        return spec.scale * x + (2.0 / pi) * spec.scale * std::log(spec.scale) + spec.shift;
    }
    return spec.scale * cms_skewed(spec.index, v, w) + spec.shift;
}

double sample_stable_ca(double kappa, Stream& rng) {
    detail::require(kappa > 0.0 && kappa < 1.0, "S^ca needs kappa in (0,1)");
    return sample(StableSpec{kappa, 1.0, 0.0}, rng);
}

double sample_cauchy8_ca(Stream& rng) { return sample(StableSpec{1.0, 8.0, 0.0}, rng); }

double stable_laplace(double kappa, double t) {
    detail::require(kappa > 0.0 && kappa < 1.0, "stable_laplace needs kappa in (0,1)");
    detail::require(t >= 0.0, "Laplace argument must be nonnegative");
    return std::exp(-std::pow(t, kappa) / std::cos(pi * kappa / 2.0));
}

ConstantsBundle constants(double kappa, double delta1) {
    detail::require(std::isfinite(kappa) && kappa > 0.0, "kappa must be positive");
    detail::require(std::isfinite(delta1) && delta1 > 0.0, "delta1 must be positive");
    ConstantsBundle b{};
    b.kappa = kappa;
    b.lambda = 4.0 * (1.0 + kappa);
    b.alpha_kappa = 1.0 / (4.0 + 2.0 * kappa);
    b.delta1 = delta1;
    b.c5 = 2.0 * std::pow(b.lambda / kappa, delta1);

    const double g = std::tgamma(kappa);
    const double sin_half = std::sin(pi * kappa / 2.0);
    if (sin_half > 0.0 && kappa < 2.0) {
        const double psi = std::pow(pi * kappa / (4.0 * g * g * sin_half), 1.0 / kappa);
        b.psi = psi;
        b.c4 = 8.0 * psi * std::pow(b.lambda, 1.0 / kappa) * std::pow(kappa, -1.0 / kappa);
    }
    if (kappa < 1.0) {
        b.c2 = 8.0 * kappa * std::pow(pi * kappa, 1.0 / kappa) *
               std::pow(1.0 - kappa, (1.0 - kappa) / kappa) /
               std::pow(2.0 * g * g * std::sin(pi * kappa), 1.0 / kappa);
        b.c22 = (1.0 - kappa) * std::pow(kappa, kappa / (1.0 - kappa)) *
                std::pow(std::cos(pi * kappa / 2.0), -1.0 / (1.0 - kappa));
    }
    return b;
}

namespace {

double unwrap(const std::optional<double>& v, const char* name, double kappa) {
    if (!v) {
        throw InvalidArgument(std::string(name) + " is undefined at kappa = " +
                              std::to_string(kappa));
    }
    return *v;
}

}  // namespace

double ConstantsBundle::psi_value() const { return unwrap(psi, "psi", kappa); }
double ConstantsBundle::c4_value() const { return unwrap(c4, "c4", kappa); }
double ConstantsBundle::c2_value() const { return unwrap(c2, "c2", kappa); }
double ConstantsBundle::c22_value() const { return unwrap(c22, "c22", kappa); }

double psi_pm(const ConstantsBundle& bundle, double r, Side side) {
    detail::require(r > 0.0, "r must be positive");
    const double gap = bundle.c5 * std::pow(r, -bundle.delta1);
    return side == Side::plus ? 1.0 + gap : 1.0 - gap;
}

double t_pm(const ConstantsBundle& bundle, double r, Side side) {
    const double psi_minus = psi_pm(bundle, r, Side::minus);
    if (psi_minus <= 0.0) {
        throw InvalidArgument("t_pm: r^delta1 <= c5, r = " + std::to_string(r) +
                              " is too small for delta1 = " + std::to_string(bundle.delta1));
    }
    return bundle.kappa * psi_pm(bundle, r, side) * r / bundle.lambda;
}

double t_center(const ConstantsBundle& bundle, double r) {
    detail::require(r > 0.0, "r must be positive");
    return bundle.kappa * r / bundle.lambda;
}

}  // namespace brox::stable
