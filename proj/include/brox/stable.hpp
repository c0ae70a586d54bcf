// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "brox/rng.hpp"

namespace brox::stable {

/// Totally skewed (skew +1) stable law in the Samorodnitsky-Taqqu
/// parameterization S_index(scale, 1, shift).
struct StableSpec {
    double index = 0.5;  // (0, 1]
    double scale = 1.0;
    double shift = 0.0;
    static constexpr double skew = 1.0;
};

/// Chambers-Mallows-Stuck draw. index < 1 gives a positive variable; for
/// index == 1 the characteristic function is exp(-scale |t| (1 + i (2/pi) sgn(t) log|t|)).
double sample(const StableSpec& spec, Stream& rng);

/// Positive stable variable S^ca of index kappa in (0,1) with
/// E exp(itS) = exp(-|t|^kappa (1 - i sgn(t) tan(pi kappa / 2))).
double sample_stable_ca(double kappa, Stream& rng);

/// Completely asymmetric Cauchy variable with scale 8 and skew 1.
double sample_cauchy8_ca(Stream& rng);

/// E exp(-t S^ca) = exp(-t^kappa / cos(pi kappa / 2)).
double stable_laplace(double kappa, double t);

/// Explicit constants attached to one drift value.
struct ConstantsBundle {
    double kappa;
    double lambda;       // 4 (1 + kappa)
    double alpha_kappa;  // 1 / (4 + 2 kappa)
    double delta1;
    double c5;           // 2 (lambda / kappa)^delta1
    /// Defined when sin(pi kappa / 2) > 0, i.e. kappa in (0, 2).
    std::optional<double> psi;
    std::optional<double> c4;
    /// Defined for kappa in (0, 1) only.
    std::optional<double> c2;
    std::optional<double> c22;

    /// Accessors throwing InvalidArgument outside the domain.
    [[nodiscard]] double psi_value() const;
    [[nodiscard]] double c4_value() const;
    [[nodiscard]] double c2_value() const;
    [[nodiscard]] double c22_value() const;
};

inline constexpr double kDefaultDelta1 = 0.05;

ConstantsBundle constants(double kappa, double delta1 = kDefaultDelta1);

enum class Side { minus, plus };

/// 1 +/- c5 r^{-delta1}.
double psi_pm(const ConstantsBundle& bundle, double r, Side side);

/// t_pm(r) = kappa psi_pm(r) r / lambda. Throws InvalidArgument when
/// psi_minus(r) <= 0, i.e. r^{delta1} <= c5 (r too small for delta1).
double t_pm(const ConstantsBundle& bundle, double r, Side side);

/// kappa r / lambda, the common limit of t_pm(r) as r grows.
double t_center(const ConstantsBundle& bundle, double r);

}  // namespace brox::stable
