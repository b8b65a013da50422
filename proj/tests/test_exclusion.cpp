#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sepam/exclusion.hpp"
#include "sepam/rng.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>

using namespace sepam;

TEST_CASE("initial configurations")
{
    Torus T(1, 16);
    CHECK_THROWS(sample_initial(T, 0.0, 1ULL));
    CHECK_THROWS(sample_initial(T, 1.0, 1ULL));
    CHECK(sample_initial(T, 0.3, 99ULL) == sample_initial(T, 0.3, 99ULL));

    double ones = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) ones += double(sample_initial(T, 0.5, std::uint64_t(i)).count());
    double n = double(draws) * 16, p = ones / n;
    CHECK(std::abs(p - 0.5) <= 4 * std::sqrt(0.25 / n));
}

TEST_CASE("link schedule statistics")
{
    Torus T(1, 8);
    auto k = srw_kernel(1, 1.0);
    CHECK(build_schedule(T, k, 0.0, 5ULL).events.empty());
    CHECK_THROWS(build_schedule(T, k, -1.0, 5ULL));

    auto bonds = stirring_bonds(T, k);
    REQUIRE(bonds.size() == 8);
    for (auto& b : bonds) CHECK(b.rate == 0.5);

    const int reps = 4000;
    const double H = 10.0;
    std::vector<double> per_bond(8, 0.0);
    std::vector<double> bins(10, 0.0);
    double total = 0, total2 = 0;
    for (int r = 0; r < reps; ++r) {
        auto s = build_schedule(T, k, H, std::uint64_t(1000 + r));
        for (std::size_t i = 1; i < s.events.size(); ++i) REQUIRE(s.events[i - 1].t <= s.events[i].t);
        for (auto& e : s.events) {
            per_bond[e.bond] += 1;
            bins[std::min(9, int(e.t / H * 10))] += 1;
        }
        total += double(s.events.size());
        total2 += double(s.events.size()) * double(s.events.size());
    }
    // Poisson(5) per bond
    for (double c : per_bond) CHECK(std::abs(c / reps - 5.0) <= 4 * std::sqrt(5.0 / reps));
    // expected total = H * sites * rate/2 * sum of weights over both directions
    double mean = total / reps, expect = H * 8 * (1.0 / 2) * 1.0;
    CHECK(std::abs(mean - expect) <= 4 * std::sqrt(expect / reps));
    double var = total2 / reps - mean * mean;
    CHECK(std::abs(var / expect - 1) < 0.1);
    double chi2 = 0, all = 0;
    for (double b : bins) all += b;
    for (double b : bins) chi2 += (b - all / 10) * (b - all / 10) / (all / 10);
    boost::math::chi_squared dist(9);
    CHECK(chi2 < boost::math::quantile(dist, 0.99));

    // L = 2: the two geometric bonds are both kept
    CHECK(stirring_bonds(Torus(1, 2), k).size() == 2);
    // d = 2 torus: one bond per site and axis
    auto b2 = stirring_bonds(Torus(2, 4), srw_kernel(2, 1.0));
    CHECK(b2.size() == 32);
    CHECK(b2[0].rate == 0.25);
}

TEST_CASE("stirring evolution")
{
    Torus T(1, 6);
    auto k = srw_kernel(1, 1.0);
    Trajectory tr{sample_initial(T, 0.5, 3ULL), LinkSchedule{}};
    tr.schedule.horizon = 2.0;
    tr.schedule.bonds = stirring_bonds(T, k);
    CHECK(evolve(tr, 1.5) == tr.initial);

    Configuration c = filled(T, false);
    c.bits[2] = 1;
    tr.initial = c;
    tr.schedule.events = {{0.5, 2}}; // bond {2,3}
    auto after = evolve(tr, 1.0);
    CHECK(after.bits[2] == 0);
    CHECK(after.bits[3] == 1);
    CHECK(evolve(tr, 0.4) == c);
    CHECK_THROWS(evolve(tr, 3.0));

    Trajectory full{filled(T, true), build_schedule(T, k, 5.0, 11ULL)};
    CHECK(evolve(full, 5.0) == full.initial);
    CHECK(occupation_time(full, 0, 5.0) == doctest::Approx(5.0));
    Trajectory empty{filled(T, false), build_schedule(T, k, 5.0, 11ULL)};
    CHECK(occupation_time(empty, 0, 5.0) == 0.0);

    Trajectory r{sample_initial(T, 0.5, 21ULL), build_schedule(T, k, 5.0, 22ULL)};
    for (double t : {0.0, 1.0, 3.3, 5.0}) CHECK(evolve(r, t).count() == r.initial.count());
    // occupation time against a fine Riemann sum of evolve
    double riemann = 0;
    const int steps = 20000;
    for (int i = 0; i < steps; ++i) riemann += evolve(r, (i + 0.5) * 5.0 / steps).bits[1] * (5.0 / steps);
    CHECK(std::abs(riemann - occupation_time(r, 1, 5.0)) < 5e-3);
}

TEST_CASE("equilibrium statistics")
{
    Torus T(1, 6);
    auto k = srw_kernel(1, 1.0);
    const int n = 10000;
    double s = 0, s2 = 0;
    double marg = 0;
    double n10 = 0, n01 = 0;
    for (int i = 0; i < n; ++i) {
        auto g = stream(77, i);
        Trajectory tr{sample_initial(T, 0.5, g), build_schedule(T, k, 5.0, g)};
        double x = occupation_time(tr, 0, 5.0) / 5.0;
        s += x;
        s2 += x * x;
        auto end = evolve(tr, 5.0);
        marg += end.bits[3];
        n10 += tr.initial.bits[0] && !end.bits[1];
        n01 += !tr.initial.bits[0] && end.bits[1];
    }
    double m = s / n, se = std::sqrt((s2 / n - m * m) / n);
    CHECK(std::abs(m - 0.5) <= 4 * se);
    CHECK(std::abs(marg / n - 0.5) <= 4 * std::sqrt(0.25 / n));
    // reversibility: (xi_0(0), xi_t(1)) = (1,0) and (0,1) equally likely
    CHECK(std::abs(n10 - n01) <= 4 * std::sqrt(n10 + n01));
}

TEST_CASE("mean-field identity of the graphical representation")
{
    Torus T(1, 8);
    auto k = srw_kernel(1, 1.0);
    Configuration eta = filled(T, false);
    eta.bits[0] = eta.bits[1] = eta.bits[5] = 1;
    const int n = 20000;
    for (auto [y, t] : {std::pair{2, 0.7}, std::pair{4, 2.0}}) {
        double hits = 0;
        for (int i = 0; i < n; ++i) {
            Trajectory tr{eta, build_schedule(T, k, t, std::uint64_t(500000 + i))};
            hits += evolve(tr, t).bits[y];
        }
        double expect = 0;
        for (std::size_t x = 0; x < T.sites(); ++x)
            if (eta.bits[x]) expect += torus_transition_prob(k, T, t, T.displacement(x, y));
        double m = hits / n;
        CHECK(std::abs(m - expect) <= 4 * std::sqrt(m * (1 - m) / n));
    }
}

TEST_CASE("checkpoint export")
{
    Torus T(1, 4);
    Trajectory tr{filled(T, true), build_schedule(T, srw_kernel(1, 1.0), 1.0, 1ULL)};
    CHECK(export_checkpoints(tr, {0.0, 1.0}) == "0 1111\n1 1111\n");
}
