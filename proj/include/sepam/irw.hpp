#pragma once

#include "sepam/exclusion.hpp"
#include "sepam/lattice.hpp"
#include "sepam/stats.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace sepam {

// Independent walkers on a torus.  Every particle carries its own jump
// times (Poisson(kernel.rate)) and targets.
struct WalkPath {
    std::size_t start;
    std::vector<double> times;
    std::vector<std::size_t> sites; // position after each jump
    std::size_t at(double t) const;
};

struct WalkEnsemble {
    Torus torus;
    Kernel kernel;
    double horizon = 0;
    std::vector<WalkPath> paths;
};

WalkEnsemble sample_walks(const Torus& T, const Kernel& k, const std::vector<std::size_t>& starts, double horizon,
                          std::mt19937_64& g);
// occupation counts at time t (several walkers may share a site)
std::vector<int> evolve_irw(const WalkEnsemble& e, double t);
std::vector<std::size_t> occupied_sites(const Configuration& eta);

// K(z, s) as a finite sum of constant cells value * 1{s in [t0, t1)} at z,
// plus atoms a * delta(s - time) at z.
struct WeightFunction {
    struct Cell {
        std::size_t site;
        double t0, t1, value;
    };
    struct Atom {
        std::size_t site;
        double time, value;
    };
    std::vector<Cell> cells;
    std::vector<Atom> atoms;

    bool sign_uniform() const;
    bool zero() const;
    // sum_z int |K(z, s)| ds
    double l1() const;
    // breakpoints in [0, t], sorted, including 0 and t
    std::vector<double> breaks(double t) const;

    static WeightFunction box(const std::vector<std::size_t>& Q, double t0, double t1, double value);
};

struct IrwValue {
    double value = 1;
    double log_value = 0;
    bool diverged = false;
};

// E^{IRW}_{nu_rho} exp(sum_z int_0^t K(z,s) xi_s(z) ds) = prod_x (1 - rho + rho v(x,t))
IrwValue irw_exp_functional(double rho, const WeightFunction& K, double t, const Torus& T, const Kernel& k,
                            double bound = 1e300);
// same, started from the particles of eta: prod_{x in eta} v(x,t)
IrwValue irw_exp_functional(const Configuration& eta, const WeightFunction& K, double t, const Kernel& k,
                            double bound = 1e300);
// v(x, t) for every site
std::vector<double> irw_single_walk(const WeightFunction& K, double t, const Torus& T, const Kernel& k);

struct ComparisonParams {
    Torus torus{1, 6};
    Kernel kernel = srw_kernel(1, 1.0);
    double rho = 0.5;
    std::optional<Configuration> eta; // fixed start; nu_rho otherwise
    std::size_t exact_cap = std::size_t(1) << 14;
    std::uint64_t mc_trials = 100000;
    std::uint64_t seed = 1;
    double tolerance = 1e-10;
};

struct ComparisonReport {
    double se = 0, se_stderr = 0, irw = 0, margin = 0;
    std::string se_method, irw_method = "product";
    bool violation = false;
};

// SE value: exact by stepping the 2^N state space when it fits, otherwise
// Monte Carlo on the graphical representation.
double se_exp_functional_exact(const ComparisonParams& p, const WeightFunction& K, double t);
McEstimate se_exp_functional_mc(const ComparisonParams& p, const WeightFunction& K, double t);
ComparisonReport compare_se_irw(const ComparisonParams& p, const WeightFunction& K, double t);

} // namespace sepam
