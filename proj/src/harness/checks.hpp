#pragma once

// Field and Cauchy-problem checks shared by the field_checks scenario and
// the acceptance suite.  Each returns a record with a "pass" member.

#include "sepam/harness.hpp"

#include <cstdint>

namespace sepam::checks {

json psi_bounds(int d, double T, double kappa, double rho, int samples, std::uint64_t seed);

// window K_diag against the closed form at kappa, the large-kappa limit at
// kappa_limit, and the K_off norms against 8 d T^2
json kernels(int d, double T, double kappa, double kappa_limit, int koff_radius, double closed_tol,
             double limit_tol);

// sum_x w = int sum_x c v ds on the torus (c = 1_Q/|Q|) and on the half-space
// (single negative site)
json cauchy_mass(double tol);

// stepping vs series (tol) and Feynman-Kac Monte Carlo (sigma) on small problems
json cauchy_modes(double tol, double sigma, std::uint64_t n, std::uint64_t seed);

} // namespace sepam::checks
