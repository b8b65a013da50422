#pragma once

#include "sepam/exclusion.hpp"
#include "sepam/lattice.hpp"
#include "sepam/stats.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace sepam {

// 1 + 1/(2 d kappa); kappa = +inf gives 1.
double one_kappa(int d, double kappa);

struct PsiSpec {
    int d = 3;
    double kappa = 1.0;
    double T = 1.0;
    double rho = 0.5;
    int radius = 0; // 0: ceil(6 sqrt(2 d T 1[kappa])) + 1
};

int window_radius(const PsiSpec& s);

// Real values on the window [-radius, radius]^d of Z^d (kind Window) or on a
// torus (kind Torus, extent = L).  Sites outside a window read as 0.
struct Field {
    enum Kind { Window, Periodic } kind = Window;
    int d = 1;
    int extent = 0;
    std::vector<double> values;
    double tail_mass = 0; // mass discarded outside the window, when known

    std::size_t size() const { return values.size(); }
    std::size_t index(const Coord& z) const;
    Coord coord(std::size_t i) const;
    bool inside(const Coord& z) const;
    double at(const Coord& z) const;
    double sum() const;
    std::string table() const; // "site value" lines
};

// chi(z) = int_0^T p_{2 d u 1[kappa]}(0, z) du on the window
Field chi_field(const PsiSpec& s);
// chi folded onto a torus of side L
Field chi_on_torus(const Field& chi, int L);

// psi(eta, x) = sum_z chi(z - x) (eta(z) - rho) for every torus site x
Field psi_field(const Configuration& eta, const PsiSpec& s);
Field psi_field(const Configuration& eta, const PsiSpec& s, const Field& chi_torus);

// Bernoulli configuration on a box of Z^d, stored as a window field of 0/1
Field sample_box_configuration(int d, int radius, double rho, std::mt19937_64& g);
// psi on Z^d; eta is read as 0 outside its box
double psi_at(const Field& chi, const Field& eta, double rho, const Coord& x);

struct PsiBoundsReport {
    double diff_sites = 0;  // max |psi(eta,b) - psi(eta,a)|, a ~ b
    double diff_swap = 0;   // max |psi(eta^{ab},x) - psi(eta,x)|
    double swap_energy = 0; // max over samples of sum_{a,b} (psi(eta^{ab},x) - psi(eta,x))^2
    double bound_sites = 0, bound_swap = 0, bound_energy = 0;
    double tol = 1e-8;
    int samples = 0;
    bool pass = false;
};

PsiBoundsReport psi_bounds_check(const PsiSpec& s, int samples, std::uint64_t seed, double green_d);

struct KKernels {
    PsiSpec spec;
    Field chi;
    Field kdiag;            // on the window shrunk by one
    std::vector<Field> g;   // g_e(z) = chi(z + e) - chi(z), one per unit vector e
    double kdiag_l1 = 0;

    double koff(const Coord& z1, const Coord& z2) const;
    // sum_{z1 != z2, both in [-r, r]^d} |K_off(z1, z2)|
    double koff_l1_window(int r) const;
    // sum_e ||g_e||_1^2 >= ||K_off||_1
    double koff_l1_bound() const;
};

KKernels k_kernels(const PsiSpec& s);
// (4/1[kappa]) (int_0^T p_{4du1}(0,0) du - int_0^T p_{2d(u+T)1}(0,0) du)
double kdiag_closed_form(int d, double kappa, double T);
// kappa -> infinity: (1/d)(int_0^{2dT} p_u(0,0) du - int_{2dT}^{4dT} p_u(0,0) du)
double kdiag_limit(int d, double T);

// ---- Cauchy problems  dv/dt = (rate/2d) Delta v + c(x,t) v ----

enum class Domain {
    Periodic,  // torus of side `extent`
    Box,       // [-extent, extent]^d, v = 1 outside (w = v - 1 vanishes there)
    HalfSpace, // x_1 in [1, extent], others in [-extent, extent]; steps out are suppressed
};

struct SourceSegment {
    double t0 = 0, t1 = 0;
    std::vector<double> c; // per site, solver indexing
};

// v(x) <- exp(a) v(x) at time t
struct Kick {
    double t;
    std::size_t site;
    double a;
};

struct CauchyProblem {
    Domain domain = Domain::Periodic;
    int d = 1;
    int extent = 4;
    double rate = 1.0;
    double horizon = 1.0;
    std::vector<SourceSegment> segments; // c = 0 where no segment is active
    std::vector<Kick> kicks;

    std::size_t sites() const;
    std::size_t site(const Coord& x) const;
    Coord coord(std::size_t i) const;
    // neighbours in the domain (for Box, missing ones mean the walk leaves)
    std::vector<long> neighbours(std::size_t i) const;
    bool conservative() const { return domain != Domain::Box; }
};

enum class CauchyMode { Stepping, Series };

struct CauchySnapshot {
    double t;
    std::vector<double> v;
    double sum_w;  // sum_x (v - 1)
    double mass;   // int_0^t sum_x c v ds plus kick jumps, tracked by the Stepping mode
};

std::vector<CauchySnapshot> solve_cauchy(const CauchyProblem& pb, const std::vector<double>& query_times,
                                         CauchyMode mode = CauchyMode::Stepping);

// Feynman-Kac Monte Carlo for v(x, horizon) at the given sites.
std::vector<McEstimate> solve_cauchy_mc(const CauchyProblem& pb, const std::vector<std::size_t>& sites,
                                        std::uint64_t n, std::uint64_t seed);

// Source strength * profile(x - X(t)) along a piecewise constant path
// X = positions[k] on [times[k], times[k+1]).
std::vector<SourceSegment> moving_source(const CauchyProblem& pb, const std::vector<double>& times,
                                         const std::vector<Coord>& positions, double strength,
                                         const std::function<double(const Coord&)>& profile);

struct ContractionCertificate {
    double theta = 0;     // sup_x sum_y G(x,y) |c(y)|
    bool certified = false;
    double bound = 0;     // theta / (1 - theta) when certified
};

// For a time-independent source (one segment) on Z^d, rate-`rate` walk.
ContractionCertificate green_contraction(const CauchyProblem& pb);

} // namespace sepam
