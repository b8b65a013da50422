#pragma once

#include "sepam/exclusion.hpp"
#include "sepam/lattice.hpp"
#include "sepam/stats.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sepam {

// E_{nu_rho, 0} exp[gamma int_0^t sum_q xi_{c s}(X_q(s)) ds] with p walkers
// jumping at rate kappa to each nearest neighbour and catalyst speed c.
struct MomentParams {
    Torus torus{1, 6};
    Kernel kernel = srw_kernel(1, 1.0);
    double rho = 0.5;
    double kappa = 1.0;
    int p = 1;
    double gamma = 1.0;
    double catalyst_speed = 1.0;
    std::optional<Configuration> eta; // fixed catalyst start
    int walkers_per_catalyst = 1;     // >1 reuses each catalyst path for several walker tuples
    bool parallel = true;
};

// The rescaled problem: catalyst at speed 1/kappa, potential 1/kappa, walkers at rate 1.
MomentParams scaled_params(const MomentParams& p);

// Per trial: int_0^{t_k} of the integrand at each t in `times` (increasing).
std::vector<std::vector<double>> sample_integrals(const MomentParams& pr, const std::vector<double>& times,
                                                  std::uint64_t n, std::uint64_t seed);

// mean = E exp[...], log_mean / log_stderr in log form
McEstimate estimate_moment(const MomentParams& pr, double t, std::uint64_t n, std::uint64_t seed);

struct LyapunovRun {
    MomentParams params;
    std::vector<double> t;
    std::vector<double> lambda, stderr_; // Lambda_p(t) = log E / (p t)
    std::vector<double> ess;
    double plateau = 0, plateau_stderr = 0, slope = 0; // Lambda ~ plateau + slope / t over the last third
    std::size_t fit_from = 0;
    bool fit_ok = false;
    bool within_bounds = false;  // rho gamma - sigma sd <= plateau <= gamma + sigma sd
    bool nondecreasing = false;  // within sigma sd
    std::string note;
};

LyapunovRun lambda_curve(const MomentParams& pr, const std::vector<double>& t_grid, std::uint64_t n,
                         std::uint64_t seed, double sigma = 3.0);

struct BlockingBound {
    McEstimate p_occupied; // P(xi = 1 on Q over [0, t])
    McEstimate p_stay;     // P(walker stays in Q over [0, t])
    double bound = 0;      // gamma + (1/t) log(p_occupied p_stay), -inf on a zero count
    McEstimate range;      // E R_t of the catalyst walk on Z^d
    double occupied_floor = 0; // rho^{|Q| E R_t}
    double range_bound = 0;    // gamma - |Q| log(1/rho) E R_t / t + (1/t) log p_stay
    bool zero_count = false;
};

// Q given as torus sites; it must contain the origin.
BlockingBound blocking_lower_bound(const MomentParams& pr, const std::vector<std::size_t>& Q, double t,
                                   std::uint64_t n, std::uint64_t seed);

// E R_t, number of distinct sites visited by the kernel walk on Z^d up to t
McEstimate range_mean(const Kernel& k, double t, std::uint64_t n, std::uint64_t seed);

// Jump skeleton of a walk on Z^d: position[k] on [times[k], times[k+1]), times[0] = 0.
struct WalkSkeleton {
    std::vector<double> times;
    std::vector<Coord> positions;
};

WalkSkeleton sample_skeleton(int d, double rate, double t, std::mt19937_64& g);

// (1/t) int_0^t ds int_s^t du p_{(u-s)/kappa + shift}(X_s, X_u), rate-1 SRW heat kernel;
// quadrature in u - s on geometric Gauss panels, exact sweep in s.
double probe_path_value(const WalkSkeleton& w, double kappa, double shift, double t);

struct ProbeResult {
    McEstimate estimate;
    double target = 0; // G_d(shift) / (2 d 1[kappa])
    double relative_gap = 0;
};

ProbeResult asymptotic_probe(int d, double kappa, double shift, double t, std::uint64_t n, std::uint64_t seed);

} // namespace sepam
