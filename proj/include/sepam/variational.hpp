#pragma once

#include "sepam/exact.hpp"

#include <string>
#include <vector>

namespace sepam {

// f on the basis of a SparseOperator, normalized in L2(nu_rho x counting).
struct TestFunction {
    std::vector<double> values;
};

double l2_norm_sq(const SparseOperator& op, const TestFunction& f, double rho);
TestFunction normalized(const SparseOperator& op, TestFunction f, double rho);

struct RayleighTerms {
    double a1 = 0; // sum pi V f^2
    double a2 = 0; // stirring Dirichlet form
    double a3 = 0; // walker Dirichlet form, rate 1 per neighbour
    double value = 0; // a1 - speed a2 - kappa a3
};

// (G f, f) split into its three parts.  f must be normalized (1e-9).
RayleighTerms rayleigh_quotient(const TestFunction& f, const SparseOperator& op, const OperatorSpec& spec);

struct EigenResult {
    double mu = 0;     // top of the spectrum
    double lambda = 0; // mu / p
    std::vector<double> vector; // eigenvector in the original basis, L2(pi) normalized
    double residual = 0;
    int iterations = 0;
    bool converged = false;
    std::string method;
};

// Largest eigenvalue of the nu_rho-symmetrized operator D^{1/2} G D^{-1/2}.
// Restarted Lanczos with full reorthogonalization; dense below dense_below states.
EigenResult top_eigenvalue(const SparseOperator& op, const OperatorSpec& spec, double tol = 1e-10,
                           int max_restarts = 400, std::size_t dense_below = 0);
EigenResult top_eigenvalue(const OperatorSpec& spec, double tol = 1e-10);

// Walker geometry for the epsilon test function
struct TestGeometry {
    enum Kind { Box, Torus } kind = Box;
    int d = 1;
    int L = 64; // box [0, L)^d with phi = 0 outside, or the torus of side L
    double kappa = 1.0;
};

struct TestBound {
    double epsilon = 0, width = 0, energy = 0;
    double I = 0, II = 0, III = 0;
    double bound = 0; // (I - II - kappa III) / (1 + (2 eps + eps^2) rho)
    std::vector<double> phi;
};

// phi: discrete Gaussian in the walker space, width by bisection so that
// sum_{x~y} (phi(x) - phi(y))^2 <= eps^2 (ordered pairs).  Throws when no
// width meets the budget.  I, II, III are exact nu_rho expectations.
TestBound test_function_bound(double epsilon, double rho, const TestGeometry& geo);
// f_eps(eta, x) = (1 + eps eta(x)) phi(x) / sqrt(1 + (2 eps + eps^2) rho) on a p = 1 basis
TestFunction epsilon_test_function(const SparseOperator& op, const Torus& T, const TestBound& b, double rho);

// (sqrt(alpha) - sqrt(rho))^2 / 2G
double psi_rate_bound(double alpha, double rho, double G);

struct VaradhanMax {
    double value = 0; // sup_beta [gamma beta - psi_rate_bound(beta)]
    double beta = 0;  // maximizer rho / (1 - 2 G gamma)^2
    bool interior = true; // beta <= 1
};

// Unconstrained maximum over beta >= 0; needs 2 G gamma < 1.
VaradhanMax varadhan_closed_form(double gamma, double rho, double G);
// Maximum over beta in [0, 1]: the closed form when it lands inside, the endpoint otherwise.
VaradhanMax varadhan_constrained(double gamma, double rho, double G);

struct Lambda0Surrogate {
    std::vector<int> p;
    std::vector<double> lambda; // (1/p) max_{alpha in [0,1]} [p alpha - psi_rate_bound(alpha)]
    std::vector<std::string> branch; // "closed-form" or "endpoint"
    bool strictly_increasing = true;
    std::string label = "SURROGATE";
};

Lambda0Surrogate lambda0_via_varadhan(int pmax, double rho, double G);

// Principal eigenvalue of -kappa Delta on the box prod [0, sides_j) with zero
// boundary values; inverse iteration with conjugate gradients.
double dirichlet_eigenvalue(double kappa, const std::vector<int>& sides, double tol = 1e-12);

} // namespace sepam
