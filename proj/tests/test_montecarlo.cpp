#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sepam/exact.hpp"
#include "sepam/montecarlo.hpp"
#include "sepam/rng.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <cmath>

using namespace sepam;

namespace {

OperatorSpec as_spec(const MomentParams& m)
{
    OperatorSpec s;
    s.torus = m.torus;
    s.kernel = m.kernel;
    s.kappa = m.kappa;
    s.p = m.p;
    s.gamma = m.gamma;
    s.rho = m.rho;
    s.catalyst_speed = m.catalyst_speed;
    return s;
}

bool within(const McEstimate& e, double exact_log, double k)
{
    return std::abs(e.log_mean - exact_log) <= k * e.log_stderr;
}

} // namespace

TEST_CASE("trivial moments")
{
    MomentParams m;
    m.gamma = 0;
    auto e = estimate_moment(m, 2.0, 100, 1);
    CHECK(e.mean == 1.0);
    CHECK(e.log_mean == 0.0);

    m.gamma = 1;
    m.p = 2;
    m.eta = filled(m.torus, true);
    auto f = estimate_moment(m, 1.5, 100, 2);
    CHECK(f.log_mean == doctest::Approx(3.0).epsilon(1e-12));
    CHECK_THROWS(estimate_moment(m, 1.0, 1, 1));
}

TEST_CASE("Monte Carlo against exact semigroups")
{
    MomentParams m;
    m.kappa = 0.5;
    auto ex = exact_log_moment(as_spec(m), 2.0);
    CHECK(within(estimate_moment(m, 2.0, 40000, 3), ex, 3));

    m.p = 2;
    m.rho = 0.3;
    CHECK(within(estimate_moment(m, 1.5, 40000, 4), exact_log_moment(as_spec(m), 1.5), 3));

    // several walker tuples per catalyst path
    m.walkers_per_catalyst = 4;
    CHECK(within(estimate_moment(m, 1.5, 20000, 5), exact_log_moment(as_spec(m), 1.5), 3));

    // rescaled time
    MomentParams b;
    b.kappa = 2.0;
    auto s = scaled_params(b);
    CHECK(within(estimate_moment(s, 3.0, 40000, 6), exact_log_moment(as_spec(s), 3.0), 3));

    // fixed start
    MomentParams c;
    c.kappa = 1.0;
    c.eta = filled(c.torus, false);
    c.eta->bits[1] = c.eta->bits[4] = 1;
    auto spec = as_spec(c);
    auto op = build_joint_generator(spec);
    auto ef = exact_log_moment(op, start_vector(op, spec, StartLaw::Fixed, 0b10010u), 2.0);
    CHECK(within(estimate_moment(c, 2.0, 40000, 7), ef, 3));
}

TEST_CASE("seed determinism")
{
    MomentParams m;
    m.kappa = 0.7;
    auto a = estimate_moment(m, 1.0, 3000, 11);
    auto b = estimate_moment(m, 1.0, 3000, 11);
    m.parallel = false;
    auto c = estimate_moment(m, 1.0, 3000, 11);
    CHECK(a.log_mean == b.log_mean);
    CHECK(a.log_mean == c.log_mean);
    CHECK(a.log_stderr == c.log_stderr);
    auto d = estimate_moment(m, 1.0, 3000, 12);
    CHECK(a.log_mean != d.log_mean);
}

TEST_CASE("Lyapunov curves")
{
    MomentParams m;
    m.torus = Torus(1, 8);
    m.kappa = 1.0;
    auto run = lambda_curve(m, {1, 2, 3, 4, 5, 6, 8, 10, 12}, 20000, 21);
    CHECK(run.fit_ok);
    CHECK(run.within_bounds);
    CHECK(run.nondecreasing);
    for (std::size_t k = 0; k < run.t.size(); ++k) CHECK(run.lambda[k] >= m.rho - 3 * run.stderr_[k]);
    auto ex = exact_lambda_profile(as_spec(m), {4.0, 12.0});
    CHECK(std::abs(run.lambda[3] - ex[0]) <= 3 * run.stderr_[3]);
    CHECK(std::abs(run.lambda[8] - ex[1]) <= 3 * run.stderr_[8]);

    auto short_run = lambda_curve(m, {1, 2}, 200, 22);
    CHECK(!short_run.fit_ok);

    // kappa = 0: Lambda_p strictly increasing in p
    m.kappa = 0;
    std::vector<double> lam, sd;
    for (int p = 1; p <= 3; ++p) {
        m.p = p;
        auto r = lambda_curve(m, {4.0}, 40000, 30 + p);
        lam.push_back(r.lambda[0]);
        sd.push_back(r.stderr_[0]);
    }
    for (int p = 1; p < 3; ++p) CHECK(lam[p] - lam[p - 1] > 3 * std::hypot(sd[p], sd[p - 1]));
}

TEST_CASE("range and blocking bound")
{
    auto k1 = srw_kernel(1, 1.0);
    CHECK(range_mean(k1, 0.0, 10, 1).mean == 1.0);
    double prev = INFINITY;
    for (double t : {4.0, 16.0, 64.0, 256.0}) {
        double r = range_mean(k1, t, 2000, 2).mean / t;
        CHECK(r < prev);
        prev = r;
    }
    auto k3 = srw_kernel(3, 1.0);
    const double inv_g = 1 / green(k3);
    double gap_prev = INFINITY;
    for (double t : {25.0, 100.0, 400.0}) {
        auto r = range_mean(k3, t, 2000, 3);
        double gap = std::abs(r.mean / t - inv_g);
        CHECK(gap < gap_prev);
        gap_prev = gap;
    }
    CHECK(gap_prev < 0.1 * inv_g);

    MomentParams m;
    m.torus = Torus(1, 8);
    m.rho = 0.9;
    m.kappa = 0.5;
    auto zero = blocking_lower_bound(m, {0}, 0.0, 100, 4);
    CHECK(zero.bound == 1.0);
    auto b = blocking_lower_bound(m, {0}, 0.5, 40000, 5);
    CHECK(std::isfinite(b.bound));
    auto mom = estimate_moment(m, 0.5, 40000, 6);
    CHECK(b.bound <= mom.log_mean / 0.5 + 3 * mom.log_stderr / 0.5);
    CHECK(b.p_occupied.mean >= b.occupied_floor - 3 * b.p_occupied.stderr_);
    CHECK(b.range_bound <= b.bound + 3 * b.p_occupied.stderr_ / (b.p_occupied.mean * 0.5));
    auto big = blocking_lower_bound(m, {7, 0, 1}, 0.5, 40000, 7);
    CHECK(big.p_occupied.mean >= big.occupied_floor - 3 * big.p_occupied.stderr_);
    CHECK_THROWS(blocking_lower_bound(m, {1, 2}, 0.5, 10, 8));
}

TEST_CASE("asymptotic probe")
{
    // frozen walk: (1/t) int_0^t (t - sigma) p_{sigma/kappa + shift}(0, 0) d sigma
    for (int d : {3, 4})
        for (double shift : {0.0, 0.7}) {
            const double kappa = 10, t = 3;
            WalkSkeleton w{{0.0}, {Coord(d, 0)}};
            auto p00 = [&](double s) {
                double x = (s / kappa + shift) / d;
                return std::pow(std::exp(-x) * boost::math::cyl_bessel_i(0, x), d);
            };
            double oracle = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                                [&](double s) { return (t - s) * p00(s); }, 0.0, t, 15, 1e-14) /
                            t;
            CHECK(probe_path_value(w, kappa, shift, t) == doctest::Approx(oracle).epsilon(1e-10));
        }
    // one jump at time 1 to e_1: direct two-piece oracle
    {
        const double kappa = 2, t = 2.5;
        WalkSkeleton w{{0.0, 1.0}, {Coord{0, 0, 0}, Coord{1, 0, 0}}};
        auto pz = [&](double s, int z) {
            double x = (s / kappa) / 3;
            double a = std::exp(-x) * boost::math::cyl_bessel_i(0, x);
            double b = std::exp(-x) * boost::math::cyl_bessel_i(z, x);
            return a * a * b;
        };
        // s and u on the same side of the jump: displacement 0, otherwise 1
        auto gk = [](auto f, double a, double b) {
            return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
        };
        double same = gk([&](double s) { return (1 - s) * pz(s, 0); }, 0, 1) +
                      gk([&](double s) { return (1.5 - s) * pz(s, 0); }, 0, 1.5);
        // s in [0,1), u in [1, 2.5): sigma = u - s in (0, 2.5), overlap length
        double cross = gk(
            [&](double sg) {
                double lo = std::max(0.0, 1 - sg), hi = std::min(1.0, 2.5 - sg);
                return std::max(0.0, hi - lo) * pz(sg, 1);
            },
            0, 2.5);
        double oracle = (same + cross) / t;
        // the sigma integrand has kinks at differences of jump times, so
        // Gauss panels only give a few digits once the walk moves
        CHECK(probe_path_value(w, kappa, 0, t) == doctest::Approx(oracle).epsilon(1e-4));
    }
    CHECK_THROWS(asymptotic_probe(2, 10, 0, 10, 10, 1));

    auto r = asymptotic_probe(4, 10, 0, 50, 100, 9);
    CHECK(r.target == doctest::Approx(green(srw_kernel(4, 1.0)) / (8 * 1.0125)));
    CHECK(r.relative_gap < 0.05);
}
