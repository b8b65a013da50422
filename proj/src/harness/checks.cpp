#include "checks.hpp"

#include "sepam/fields.hpp"
#include "sepam/lattice.hpp"

#include <algorithm>
#include <cmath>

namespace sepam::checks {

json psi_bounds(int d, double T, double kappa, double rho, int samples, std::uint64_t seed)
{
    const double G = d >= 3 ? green(srw_kernel(d, 1.0)) : INFINITY;
    auto r = psi_bounds_check(PsiSpec{d, kappa, T, rho}, samples, seed, G);
    return {{"check", "psi_bounds"},      {"d", d},
            {"T", T},                     {"kappa", kappa},
            {"samples", samples},         {"diff_sites", r.diff_sites},
            {"bound_sites", r.bound_sites}, {"diff_swap", r.diff_swap},
            {"bound_swap", r.bound_swap}, {"swap_energy", r.swap_energy},
            {"bound_energy", r.bound_energy}, {"pass", r.pass}};
}

json kernels(int d, double T, double kappa, double kappa_limit, int koff_radius, double closed_tol,
             double limit_tol)
{
    auto k = k_kernels(PsiSpec{d, kappa, T, 0.5});
    const double closed = kdiag_closed_form(d, kappa, T);
    const double window_koff = k.koff_l1_window(koff_radius);
    const double koff_bound = k.koff_l1_bound();
    const double cap = 8.0 * d * T * T;
    auto kl = k_kernels(PsiSpec{d, kappa_limit, T, 0.5});
    const double limit = kdiag_limit(d, T);
    bool ok_closed = std::abs(k.kdiag_l1 - closed) <= closed_tol;
    bool ok_limit = std::abs(kl.kdiag_l1 - limit) <= limit_tol;
    bool ok_koff = window_koff <= koff_bound && koff_bound <= cap;
    return {{"check", "kernels"},
            {"d", d},
            {"T", T},
            {"kappa", kappa},
            {"kdiag_l1", k.kdiag_l1},
            {"kdiag_closed_form", closed},
            {"kdiag_gap", std::abs(k.kdiag_l1 - closed)},
            {"kappa_limit", kappa_limit},
            {"kdiag_l1_at_limit", kl.kdiag_l1},
            {"kdiag_limit", limit},
            {"limit_gap", std::abs(kl.kdiag_l1 - limit)},
            {"koff_window_radius", koff_radius},
            {"koff_l1_window", window_koff},
            {"koff_l1_bound", koff_bound},
            {"koff_cap", cap},
            {"chi_tail_mass", k.chi.tail_mass},
            {"pass", ok_closed && ok_limit && ok_koff}};
}

namespace {

std::vector<double> site_source(const CauchyProblem& pb, const std::vector<Coord>& Q, double value)
{
    std::vector<double> c(pb.sites(), 0.0);
    for (const auto& x : Q) c[pb.site(x)] += value;
    return c;
}

std::vector<double> grid(double t, int n)
{
    std::vector<double> g;
    for (int k = 0; k <= n; ++k) g.push_back(t * k / n);
    return g;
}

double max_residual(const std::vector<CauchySnapshot>& s)
{
    double r = 0;
    for (const auto& x : s) r = std::max(r, std::abs(x.sum_w - x.mass));
    return r;
}

} // namespace

json cauchy_mass(double tol)
{
    CauchyProblem tor;
    tor.domain = Domain::Periodic;
    tor.d = 2;
    tor.extent = 10;
    tor.horizon = 4;
    std::vector<Coord> Q{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    tor.segments = {{0, 4, site_source(tor, Q, 1.0 / Q.size())}};
    double r_torus = max_residual(solve_cauchy(tor, grid(4, 40)));

    // half-space, one site at the wall with c = -(3 gamma / kappa) rho
    const double gamma = 1, kappa = 1, rho = 0.5;
    CauchyProblem hp;
    hp.domain = Domain::HalfSpace;
    hp.d = 3;
    hp.extent = 6;
    hp.rate = 2 * kappa;
    hp.horizon = 3;
    hp.segments = {{0, 3, site_source(hp, {{1, 0, 0}}, -3 * gamma / kappa * rho)}};
    double r_half = max_residual(solve_cauchy(hp, grid(3, 30)));
    return {{"check", "cauchy_mass"},
            {"torus_residual", r_torus},
            {"halfspace_residual", r_half},
            {"tol", tol},
            {"pass", r_torus <= tol && r_half <= tol}};
}

json cauchy_modes(double tol, double sigma, std::uint64_t n, std::uint64_t seed)
{
    CauchyProblem pb;
    pb.domain = Domain::Box;
    pb.d = 1;
    pb.extent = 4;
    pb.rate = 1.5;
    pb.horizon = 2;
    std::vector<double> c1(pb.sites()), c2(pb.sites());
    for (std::size_t i = 0; i < pb.sites(); ++i) {
        c1[i] = 0.3 * std::cos(0.7 * pb.coord(i)[0]);
        c2[i] = -0.2 + 0.1 * pb.coord(i)[0];
    }
    pb.segments = {{0, 0.8, c1}, {0.8, 2, c2}};
    pb.kicks = {{1.2, pb.site({1}), 0.5}};

    CauchyProblem mv;
    mv.d = 2;
    mv.extent = 6;
    mv.horizon = 1.5;
    mv.segments = moving_source(mv, {0.0, 0.4, 0.9}, {{0, 0}, {1, 0}, {1, 1}}, 0.6,
                                [](const Coord& x) { return x[0] == 0 && x[1] == 0 ? 1.0 : 0.0; });

    std::vector<std::vector<Coord>> probes{{{0}, {1}, {-3}}, {{0, 0}, {1, 1}, {2, 1}}};
    double series_gap = 0, worst_z = 0;
    int which = 0;
    for (const auto* p : {&pb, &mv}) {
        auto a = solve_cauchy(*p, {p->horizon}, CauchyMode::Stepping).back();
        auto b = solve_cauchy(*p, {p->horizon}, CauchyMode::Series).back();
        for (std::size_t i = 0; i < a.v.size(); ++i) series_gap = std::max(series_gap, std::abs(a.v[i] - b.v[i]));
        std::vector<std::size_t> probe;
        for (const auto& x : probes[which++]) probe.push_back(p->site(x));
        auto mc = solve_cauchy_mc(*p, probe, n, seed);
        for (std::size_t q = 0; q < probe.size(); ++q) {
            double diff = std::abs(mc[q].mean - a.v[probe[q]]);
            worst_z = std::max(worst_z, mc[q].stderr_ > 0 ? diff / mc[q].stderr_ : (diff <= tol ? 0.0 : INFINITY));
        }
    }
    return {{"check", "cauchy_modes"},
            {"series_vs_stepping", series_gap},
            {"tol", tol},
            {"mc_worst_sigma", worst_z},
            {"sigma", sigma},
            {"mc_trials", n},
            {"pass", series_gap <= tol && worst_z <= sigma}};
}

} // namespace sepam::checks
