#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sepam/fields.hpp"
#include "sepam/rng.hpp"

#include <cmath>
#include <numeric>

using namespace sepam;

namespace {

std::vector<double> indicator(const CauchyProblem& pb, const std::vector<Coord>& Q, double value)
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

} // namespace

TEST_CASE("psi for constant and balanced configurations")
{
    PsiSpec s{2, 2.0, 1.5, 0.3};
    Torus T(2, 40);
    Configuration full = filled(T, true), empty = filled(T, false);
    auto pf = psi_field(full, s), pe = psi_field(empty, s);
    for (double v : pf.values) CHECK(v == doctest::Approx((1 - s.rho) * s.T).epsilon(1e-9));
    for (double v : pe.values) CHECK(v == doctest::Approx(-s.rho * s.T).epsilon(1e-9));

    // checkerboard at rho = 1/2: psi sums to zero and stays within [-rho T, (1-rho) T]
    s.rho = 0.5;
    Configuration cb = filled(T, false);
    for (std::size_t i = 0; i < T.sites(); ++i) {
        auto x = T.coords(i);
        cb.bits[i] = (x[0] + x[1]) % 2 == 0;
    }
    auto pc = psi_field(cb, s);
    CHECK(std::abs(pc.sum()) < 1e-9);

    auto g = stream(3, 0);
    auto eta = sample_initial(T, 0.4, g);
    s.rho = 0.4;
    auto pr = psi_field(eta, s);
    // direct summation oracle at one site
    Field chi = chi_field(s);
    double direct = 0;
    for (std::size_t i = 0; i < chi.size(); ++i) {
        auto z = chi.coord(i);
        direct += chi.values[i] * ((eta.bits[T.index(z)] ? 1.0 : 0.0) - s.rho);
    }
    CHECK(pr.values[0] == doctest::Approx(direct).epsilon(1e-12));
    for (double v : pr.values) {
        CHECK(v >= -s.rho * s.T - 1e-9);
        CHECK(v <= (1 - s.rho) * s.T + 1e-9);
    }
}

TEST_CASE("psi bounds")
{
    const double G3 = green(srw_kernel(3, 1.0));
    auto rep = psi_bounds_check(PsiSpec{3, 2.0, 5.0, 0.5}, 100, 11, G3);
    CHECK(rep.pass);
    CHECK(rep.diff_sites <= 2 * 5.0);
    CHECK(rep.diff_swap <= 2 * G3);
    CHECK(rep.swap_energy <= G3 / 6);

    auto small = psi_bounds_check(PsiSpec{3, 2.0, 1e-6, 0.5}, 5, 12, G3);
    CHECK(small.diff_sites < 1e-5);
    CHECK(small.diff_swap < 1e-5);
    CHECK(small.swap_energy < 1e-10);

    // swapping equal occupations leaves psi untouched
    Torus T(1, 16);
    auto g = stream(4, 0);
    auto eta = sample_initial(T, 0.5, g);
    std::size_t a = 0, b = 1;
    while (eta.bits[a] != eta.bits[b]) ++a, b = (a + 1) % T.sites();
    auto eta2 = eta;
    std::swap(eta2.bits[a], eta2.bits[b]);
    PsiSpec s1{1, 1.0, 2.0, 0.5};
    auto p1f = psi_field(eta, s1), p2f = psi_field(eta2, s1);
    for (std::size_t i = 0; i < T.sites(); ++i) CHECK(p1f.values[i] == p2f.values[i]);
}

TEST_CASE("K kernels")
{
    PsiSpec s{3, 2.0, 1.0, 0.5};
    auto k = k_kernels(s);
    CHECK(k.chi.tail_mass < 1e-9);
    CHECK(k.kdiag_l1 == doctest::Approx(kdiag_closed_form(3, 2.0, 1.0)).epsilon(1e-6));
    double w = k.koff_l1_window(5);
    CHECK(w > 0);
    CHECK(w <= k.koff_l1_bound() + 1e-12);
    CHECK(k.koff_l1_bound() <= 8 * 3 * 1.0 * 1.0);
    // symmetric under the pair swap
    CHECK(k.koff({1, 0, 0}, {0, 2, -1}) == doctest::Approx(k.koff({0, 2, -1}, {1, 0, 0})));

    double prev = INFINITY;
    const double lim = kdiag_limit(3, 1.0);
    for (double kappa : {0.5, 5.0, 50.0, 5000.0}) {
        double gap = std::abs(kdiag_closed_form(3, kappa, 1.0) - lim);
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 1e-3);
    auto kinf = k_kernels(PsiSpec{3, 5000.0, 1.0, 0.5});
    CHECK(kinf.kdiag_l1 == doctest::Approx(lim).epsilon(1e-3));
}

TEST_CASE("Cauchy problem: trivial source and mass identities")
{
    CauchyProblem pb;
    pb.domain = Domain::Periodic;
    pb.d = 2;
    pb.extent = 8;
    pb.horizon = 3;
    for (const auto& s : solve_cauchy(pb, {0.0, 1.5, 3.0}))
        for (double v : s.v) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

    // c = 1_Q / |Q| on the torus
    std::vector<Coord> Q{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    pb.segments = {{0, 3, indicator(pb, Q, 0.25)}};
    auto ts = grid(3.0, 300);
    auto snaps = solve_cauchy(pb, ts);
    double integral = 0;
    for (std::size_t k = 0; k < snaps.size(); ++k) {
        CHECK(snaps[k].sum_w == doctest::Approx(snaps[k].mass).epsilon(1e-10));
        if (k > 0) {
            auto qw = [&](const CauchySnapshot& s) {
                double a = 0;
                for (const auto& x : Q) a += 0.25 * (s.v[pb.site(x)] - 1);
                return a;
            };
            integral += 0.5 * (qw(snaps[k]) + qw(snaps[k - 1])) * (ts[k] - ts[k - 1]);
        }
        // independent trapezoid check of sum w = int (1/|Q|) sum_Q w ds + t
        CHECK(snaps[k].sum_w == doctest::Approx(integral + ts[k]).epsilon(1e-4));
        if (k > 0)
            for (std::size_t i = 0; i < pb.sites(); ++i) CHECK(snaps[k].v[i] >= snaps[k - 1].v[i] - 1e-14);
    }

    // single negative site on the half-space
    const double gamma = 1, kappa = 1, rho = 0.5, c0 = -3 * gamma / kappa * rho;
    CauchyProblem hp;
    hp.domain = Domain::HalfSpace;
    hp.d = 3;
    hp.extent = 5;
    hp.rate = 2 * kappa;
    hp.horizon = 2;
    Coord z{1, 0, 0};
    hp.segments = {{0, 2, indicator(hp, {z}, c0)}};
    CHECK(hp.conservative());
    auto hs = solve_cauchy(hp, grid(2.0, 200));
    double wz = 0;
    for (std::size_t k = 0; k < hs.size(); ++k) {
        if (k > 0)
            wz += 0.5 * (hs[k].v[hp.site(z)] + hs[k - 1].v[hp.site(z)] - 2) * (hs[k].t - hs[k - 1].t);
        CHECK(hs[k].sum_w == doctest::Approx(hs[k].mass).epsilon(1e-10));
        CHECK(hs[k].sum_w == doctest::Approx(c0 * hs[k].t + c0 * wz).epsilon(1e-4));
    }
}

TEST_CASE("Cauchy problem: stepping, series and Feynman-Kac agree")
{
    CauchyProblem pb;
    pb.domain = Domain::Box;
    pb.d = 1;
    pb.extent = 4;
    pb.rate = 1.5;
    pb.horizon = 2;
    std::vector<double> c1(pb.sites(), 0.0), c2(pb.sites(), 0.0);
    for (std::size_t i = 0; i < pb.sites(); ++i) {
        c1[i] = 0.3 * std::cos(0.7 * pb.coord(i)[0]);
        c2[i] = -0.2 + 0.1 * pb.coord(i)[0];
    }
    pb.segments = {{0, 0.8, c1}, {0.8, 2, c2}};
    pb.kicks = {{1.2, pb.site({1}), 0.5}, {0.4, pb.site({-2}), -0.7}};
    auto a = solve_cauchy(pb, {2.0}, CauchyMode::Stepping).back();
    auto b = solve_cauchy(pb, {2.0}, CauchyMode::Series).back();
    for (std::size_t i = 0; i < pb.sites(); ++i) CHECK(a.v[i] == doctest::Approx(b.v[i]).epsilon(1e-9));

    std::vector<std::size_t> probe{pb.site({0}), pb.site({1}), pb.site({-3})};
    auto mc = solve_cauchy_mc(pb, probe, 40000, 21);
    for (std::size_t q = 0; q < probe.size(); ++q) CHECK(std::abs(mc[q].mean - a.v[probe[q]]) <= 4 * mc[q].stderr_);

    // moving point source on a torus
    CauchyProblem mv;
    mv.d = 1;
    mv.extent = 10;
    mv.horizon = 1.5;
    mv.segments = moving_source(mv, {0.0, 0.5, 1.1}, {{0}, {1}, {3}}, 0.8,
                                [](const Coord& x) { return x[0] == 0 ? 1.0 : (std::abs(x[0]) == 1 ? 0.25 : 0.0); });
    CHECK(mv.segments.size() == 3);
    auto ma = solve_cauchy(mv, {1.5}).back();
    auto mb = solve_cauchy(mv, {1.5}, CauchyMode::Series).back();
    for (std::size_t i = 0; i < mv.sites(); ++i) CHECK(ma.v[i] == doctest::Approx(mb.v[i]).epsilon(1e-9));
    auto mm = solve_cauchy_mc(mv, {mv.site({2})}, 40000, 22);
    CHECK(std::abs(mm[0].mean - ma.v[mv.site({2})]) <= 4 * mm[0].stderr_);

    CHECK_THROWS(solve_cauchy(pb, {3.0}));
}

TEST_CASE("Green contraction")
{
    CauchyProblem pb;
    pb.domain = Domain::Box;
    pb.d = 3;
    pb.extent = 8;
    pb.horizon = 40;
    auto cert0 = green_contraction(pb);
    CHECK(cert0.theta == 0);
    CHECK(cert0.bound == 0);

    const double beta = 0.3, G3 = green(srw_kernel(3, 1.0));
    pb.segments = {{0, 40, indicator(pb, {{0, 0, 0}}, beta)}};
    auto cert = green_contraction(pb);
    CHECK(cert.theta == doctest::Approx(beta * G3).epsilon(1e-10));
    REQUIRE(cert.certified);
    auto v = solve_cauchy(pb, {40.0}).back().v;
    double sup = 0;
    for (double x : v) sup = std::max(sup, x - 1);
    CHECK(sup <= cert.bound);
    CHECK(sup > 0.8 * cert.bound); // the point-source bound is sharp as t grows

    // averaging over larger boxes lowers the norm
    double prev = INFINITY;
    for (int r : {0, 1, 2}) {
        std::vector<Coord> Q;
        for (int x = -r; x <= r; ++x)
            for (int y = -r; y <= r; ++y)
                for (int z = -r; z <= r; ++z) Q.push_back({x, y, z});
        pb.segments = {{0, 40, indicator(pb, Q, 1.0 / Q.size())}};
        double th = green_contraction(pb).theta;
        CHECK(th < prev);
        prev = th;
    }

    CauchyProblem tor;
    CHECK_THROWS(green_contraction(tor));
}
