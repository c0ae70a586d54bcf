// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace brox::variational {

/// The quadratic problem
///   inf { (1/2) int_0^1 |phi'|^2 : phi(0) = 0, int_0^1 w |phi|^2 >= 1 },
///   w(v) = (1 - v)^{1/kappa - 2},
/// for phi with values in R^coordinates.
struct C1Problem {
    double kappa = 0.5;
    /// Number of cells of the coarse mesh on [0, 1]; the unknowns are the
    /// nodes 1..mesh (phi(0) = 0 is imposed, v = 1 is free).
    std::size_t mesh = 512;
    std::size_t coordinates = 1;
};

struct C1Result {
    /// Richardson extrapolation of the meshes `mesh` and 2 * mesh.
    double value = 0.0;
    /// Values on the two meshes before extrapolation.
    double coarse = 0.0;
    double fine = 0.0;
    /// First coordinate of the fine-mesh ground state, at nodes 1..2*mesh.
    std::vector<double> ground_state;
    /// Whether every coordinate of the ground state has a single sign.
    bool single_sign = false;
    std::size_t iterations = 0;
};

/// (1/2) mu_min of -phi'' = mu w phi with phi(0) = 0 and phi'(1) = 0, using
/// linear elements with a lumped mass whose cell integrals of w are exact,
/// solved by inverse iteration (sparse LDLT) to a relative change of 1e-12
/// in the Rayleigh quotient. Throws InvalidArgument for kappa outside (0,1)
/// or mesh < 16, ConvergenceError when the iteration stalls.
C1Result c1_eigen(const C1Problem& problem);

struct C1Bounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// lower = 1 / (2 B(2, 1/kappa - 1)) (Cauchy-Schwarz), upper =
/// (1/2) / B(3, 1/kappa - 1) (trial function phi(v) = v).
C1Bounds c1_bounds(double kappa);

/// int_0^1 v^{a-1} (1 - v)^{b-1} dv for a >= 1, b > 0, by Gauss-Legendre
/// after the substitution 1 - v = t^{1/b} that removes the endpoint
/// singularity.
double beta_integral(double a, double b);

}  // namespace brox::variational
