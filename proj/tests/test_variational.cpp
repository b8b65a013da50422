#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sepam/rng.hpp"
#include "sepam/variational.hpp"

#include <Eigen/Dense>

#include <cmath>

using namespace sepam;

namespace {

OperatorSpec spec(int L, int p, double kappa, int sector = -1, double rho = 0.5)
{
    OperatorSpec s;
    s.torus = Torus(1, L);
    s.p = p;
    s.kappa = kappa;
    s.sector = sector;
    s.rho = rho;
    return s;
}

// <f, G f>_pi straight from the matrix
double direct_form(const SparseOperator& op, const TestFunction& f, double rho)
{
    auto w = state_weights(op, rho);
    std::vector<double> y;
    op.apply(f.values, y);
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * f.values[i] * y[i];
    return s;
}

TestFunction random_f(const SparseOperator& op, double rho, std::uint64_t seed)
{
    auto g = stream(seed, 0);
    TestFunction f;
    for (std::size_t i = 0; i < op.size(); ++i) f.values.push_back(uniform01(g) - 0.3);
    return normalized(op, f, rho);
}

// golden section for a concave objective on [a, b]
template <class F> double golden_max(F f, double a, double b)
{
    const double r = (std::sqrt(5.0) - 1) / 2;
    double c = b - r * (b - a), d = a + r * (b - a);
    for (int i = 0; i < 200; ++i) {
        if (f(c) > f(d))
            b = d;
        else
            a = c;
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    return f(0.5 * (a + b));
}

} // namespace

TEST_CASE("Rayleigh quotient decomposition")
{
    for (auto s : {spec(4, 1, 0.7), spec(4, 2, 1.3, 2, 0.3), spec(6, 1, 0.0, -1, 0.6)}) {
        auto op = build_joint_generator(s);
        for (int k = 0; k < 5; ++k) {
            auto f = random_f(op, s.rho, 10 + k);
            auto r = rayleigh_quotient(f, op, s);
            CHECK(r.value == doctest::Approx(direct_form(op, f, s.rho)).epsilon(1e-12));
            CHECK(r.a2 >= 0);
            CHECK(r.a3 >= 0);
        }
    }
    // constant in eta, point mass at the origin for the walker
    auto s = spec(6, 1, 0.8);
    auto op = build_joint_generator(s);
    TestFunction f;
    for (std::size_t i = 0; i < op.size(); ++i) f.values.push_back(op.walker(i, 0) == 0 ? 1.0 : 0.0);
    auto r = rayleigh_quotient(f, op, s);
    CHECK(std::abs(r.a2) < 1e-15);
    CHECK(r.a1 == doctest::Approx(s.rho));
    CHECK(r.value == doctest::Approx(s.rho - s.kappa * 2));

    f.values[0] *= 3;
    CHECK_THROWS(rayleigh_quotient(f, op, s));
}

TEST_CASE("top eigenvalue")
{
    auto s = spec(6, 1, 1.0, 3);
    auto op = build_joint_generator(s);
    auto lz = top_eigenvalue(op, s, 1e-11);
    auto dn = top_eigenvalue(op, s, 1e-11, 400, 1u << 20);
    CHECK(lz.method == "lanczos");
    CHECK(dn.method == "dense");
    CHECK(lz.mu == doctest::Approx(dn.mu).epsilon(1e-10));

    // the eigenvector's quotient is the eigenvalue
    auto q = rayleigh_quotient(TestFunction{lz.vector}, op, s);
    CHECK(std::abs(q.value - lz.mu) < 1e-9);
    for (int k = 0; k < 100; ++k) CHECK(rayleigh_quotient(random_f(op, s.rho, 100 + k), op, s).value <= lz.mu + 1e-9);

    // large-t slope of the exact moment
    double slope = exact_log_slope(op, start_vector(op, s, StartLaw::Sector), 150.0);
    CHECK(std::abs(slope - lz.mu) <= 1e-6 * (1 + std::abs(lz.mu)));

    // no potential: generator, constant eigenvector
    auto s0 = s;
    s0.gamma = 0;
    auto op0 = build_joint_generator(s0);
    auto z = top_eigenvalue(op0, s0);
    CHECK(std::abs(z.mu) < 1e-10);
    for (double v : z.vector) CHECK(v == doctest::Approx(z.vector[0]).epsilon(1e-6));

    // kappa = 0 exceeds rho; the kappa sweep is non-increasing and convex
    auto k0 = top_eigenvalue(spec(6, 1, 0.0, 3));
    CHECK(k0.lambda > 0.5);
    std::vector<double> lam;
    for (int i = 0; i <= 8; ++i) lam.push_back(top_eigenvalue(spec(6, 1, 0.5 * i, 3)).lambda);
    for (std::size_t i = 1; i < lam.size(); ++i) CHECK(lam[i] <= lam[i - 1] + 1e-12);
    for (std::size_t i = 2; i < lam.size(); ++i) CHECK(lam[i] - 2 * lam[i - 1] + lam[i - 2] >= -1e-9);
}

TEST_CASE("epsilon test function")
{
    TestGeometry box;
    box.L = 64;
    auto b = test_function_bound(0.2, 0.5, box);
    CHECK(b.energy <= 0.04 + 1e-12);
    CHECK(b.bound > 0.5);
    auto tiny = test_function_bound(1e-2, 0.5, TestGeometry{TestGeometry::Box, 1, 2048, 1.0});
    CHECK(tiny.bound == doctest::Approx(0.5).epsilon(1e-2));
    CHECK_THROWS_AS(test_function_bound(0.2, 0.5, TestGeometry{TestGeometry::Box, 1, 3, 1.0}), std::domain_error);

    // on a small torus the closed expression is the exact quotient, and sits below the top
    for (double kappa : {0.3, 1.0}) {
        auto s = spec(6, 1, kappa);
        auto op = build_joint_generator(s);
        TestGeometry tg{TestGeometry::Torus, 1, 6, kappa};
        auto tb = test_function_bound(0.5, s.rho, tg);
        auto f = epsilon_test_function(op, s.torus, tb, s.rho);
        CHECK(l2_norm_sq(op, f, s.rho) == doctest::Approx(1.0).epsilon(1e-13));
        auto q = rayleigh_quotient(f, op, s);
        CHECK(q.value == doctest::Approx(tb.bound).epsilon(1e-12));
        CHECK(tb.bound <= top_eigenvalue(op, s).mu + 1e-12);
    }
}

TEST_CASE("Varadhan maximization")
{
    CHECK(psi_rate_bound(0.3, 0.3, 1.5) == 0);
    auto z = varadhan_closed_form(0, 0.4, 1.5);
    CHECK(z.value == 0);
    CHECK(z.beta == doctest::Approx(0.4));

    const double rho = 0.5, G = 1.516386, gamma = 0.1;
    auto m = varadhan_closed_form(gamma, rho, G);
    CHECK(m.value == doctest::Approx(0.05 / (1 - 0.3032772)).epsilon(1e-12));
    auto obj = [&](double b) { return gamma * b - std::pow(std::sqrt(b) - std::sqrt(rho), 2) / (2 * G); };
    CHECK(std::abs(golden_max(obj, 0.0, 10.0) - m.value) < 1e-8);
    CHECK(!m.interior); // the maximizer is just above 1
    auto mc = varadhan_constrained(gamma, rho, G);
    CHECK(std::abs(golden_max(obj, 0.0, 1.0) - mc.value) < 1e-8);

    for (double r : {0.1, 0.3, 0.5})
        for (double g : {0.01, 0.05, 0.08})
            for (double GG : {1.0, 1.2394, 1.516386}) {
                auto c = varadhan_closed_form(g, r, GG);
                auto f = [&](double b) { return g * b - std::pow(std::sqrt(b) - std::sqrt(r), 2) / (2 * GG); };
                CHECK(c.interior);
                CHECK(std::abs(golden_max(f, 0.0, 1.0) - c.value) < 1e-8);
            }
    CHECK_THROWS_AS(varadhan_closed_form(0.4, 0.5, 1.516386), std::domain_error);

    auto s = lambda0_via_varadhan(5, 0.5, 1.516386);
    CHECK(s.strictly_increasing);
    CHECK(s.label == "SURROGATE");
    for (double l : s.lambda) {
        CHECK(l >= 0.5);
        CHECK(l < 1);
    }
    auto small = lambda0_via_varadhan(3, 0.05, 0.2);
    CHECK(small.branch[0] == "closed-form");
    CHECK(small.strictly_increasing);
}

TEST_CASE("Dirichlet eigenvalues")
{
    CHECK(dirichlet_eigenvalue(1.0, {1}) == doctest::Approx(2.0));
    CHECK(dirichlet_eigenvalue(0.5, {1, 1, 1}) == doctest::Approx(3.0));
    for (int n : {2, 5, 17, 40}) {
        double exact = 2 * 0.7 * (1 - std::cos(M_PI / (n + 1)));
        CHECK(dirichlet_eigenvalue(0.7, {n}) == doctest::Approx(exact).epsilon(1e-9));
    }
    double sq = 2 * (1 - std::cos(M_PI / 9)) + 2 * (1 - std::cos(M_PI / 5));
    CHECK(dirichlet_eigenvalue(1.0, {8, 4}) == doctest::Approx(sq).epsilon(1e-9));
    double prev = INFINITY;
    for (int n : {1, 2, 4, 8, 16}) {
        double v = dirichlet_eigenvalue(1.0, {n, n});
        CHECK(v < prev);
        prev = v;
    }
}
