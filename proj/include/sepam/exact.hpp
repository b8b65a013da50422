#pragma once

#include "sepam/csr.hpp"
#include "sepam/exclusion.hpp"
#include "sepam/lattice.hpp"

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

namespace sepam {

// Truncation of G = s L + kappa sum_i Delta_i + V on the torus, with
// V = gamma sum_i eta(x_i).  catalyst_speed s is 1 for the model and 1/kappa
// for the time-changed pair (xi_{t/kappa}, X_t) used by the martingales.
struct OperatorSpec {
    Torus torus{1, 4};
    Kernel kernel = srw_kernel(1, 1.0);
    double kappa = 0.0;
    int p = 1;
    double gamma = 1.0;
    double rho = 0.5;
    double catalyst_speed = 1.0;
    // -1: all particle numbers; otherwise the block with this many particles
    int sector = -1;
    // keep only states reachable from (sector configurations, walkers at 0)
    bool reachable_only = true;
    std::size_t cap = 0; // 0: 2^14 * sites
};

struct SparseOperator {
    Csr matrix;
    std::vector<std::uint64_t> keys; // basis states
    std::unordered_map<std::uint64_t, std::uint32_t> lookup;
    int sites = 0;
    int p = 0;

    std::size_t size() const { return matrix.n; }
    void apply(const std::vector<double>& x, std::vector<double>& y) const { matrix.apply(x, y); }

    std::uint32_t eta(std::size_t i) const;
    int walker(std::size_t i, int q) const;
    std::uint64_t key(std::uint32_t eta, const std::vector<int>& walkers) const;
    long find(std::uint64_t key) const; // -1 if absent
};

std::size_t state_cap(const OperatorSpec& s);

// Stirring generator on {0,1}^sites (no walkers, no potential).
SparseOperator build_se_generator(const Torus& T, const Kernel& k, std::size_t cap = 0);
SparseOperator build_joint_generator(const OperatorSpec& s);

// nu_rho weight of the configuration of each basis state
std::vector<double> state_weights(const SparseOperator& op, double rho);

// Initial laws.  Nu: eta ~ nu_rho, walkers at 0.  Sector: eta uniform among
// configurations with `sector` particles (nu_rho conditioned on the count).
enum class StartLaw { Nu, Sector, Fixed };
std::vector<double> start_vector(const SparseOperator& op, const OperatorSpec& s, StartLaw law,
                                 std::uint32_t fixed_eta = 0);

// log <pi, e^{tG} 1>
double exact_log_moment(const SparseOperator& op, const std::vector<double>& pi, double t);
double exact_log_moment(const OperatorSpec& s, double t, StartLaw law = StartLaw::Nu);
// Lambda_p(t) = log moment / (p t); NaN at t = 0 where it is undefined.
std::vector<double> exact_lambda_profile(const OperatorSpec& s, const std::vector<double>& t_grid,
                                         StartLaw law = StartLaw::Nu);
// d/dt log <pi, e^{tG} 1>, computed as <pi, G e^{tG} 1> / <pi, e^{tG} 1>
double exact_log_slope(const SparseOperator& op, const std::vector<double>& pi, double t);

// exp(tA) x, scaled (uniformization; A must have nonnegative off-diagonals)
std::vector<double> semigroup_apply(const SparseOperator& op, double t, const std::vector<double>& x,
                                    double* log_scale = nullptr);

// max |(D G - (D G)^T)_{ij}| with D = diag of nu_rho weights
double reversibility_defect(const SparseOperator& op, double rho);

// (1/kappa) L + Delta for one walker.
SparseOperator martingale_generator(const Torus& T, const Kernel& k, double kappa);

struct MartingaleReport {
    double mean_min = 1, mean_max = 1;
    double deviation = 0;           // max |E N_t - 1| via the Feynman-Kac route
    double new_semigroup_deviation = 0; // max |e^{t A_new} 1 - 1|
    double generator_defect = 0;    // max |row sum| of A_new
    bool generator_ok = true;       // off-diagonals of A_new nonnegative
};

// E_{eta,x} N_t^r for every state of `A`; psi given per basis state.
MartingaleReport martingale_check(const SparseOperator& A, const std::vector<double>& psi, double r,
                                  double kappa, double t);

} // namespace sepam
