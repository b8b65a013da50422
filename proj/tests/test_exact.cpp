#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sepam/exact.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <bit>
#include <cmath>
#include <random>

using namespace sepam;

namespace {

Eigen::MatrixXd dense(const SparseOperator& op)
{
    const Csr& A = op.matrix;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(A.n, A.n);
    for (std::size_t i = 0; i < A.n; ++i)
        for (auto k = A.rowptr[i]; k < A.rowptr[i + 1]; ++k) M(i, A.col[k]) += A.val[k];
    return M;
}

// oriented-jump form: sum_{x,y} p(x,y) eta(x)(1 - eta(y)) [f(eta^{xy}) - f(eta)]
Eigen::MatrixXd oriented_se(int L)
{
    const int n = 1 << L;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (int e = 0; e < n; ++e)
        for (int x = 0; x < L; ++x)
            for (int s : {-1, 1}) {
                int y = ((x + s) % L + L) % L;
                if (((e >> x) & 1) && !((e >> y) & 1)) {
                    int f = e ^ (1 << x) ^ (1 << y);
                    M(e, f) += 0.5;
                    M(e, e) -= 0.5;
                }
            }
    return M;
}

double dense_top(const SparseOperator& op)
{
    Eigen::MatrixXd M = dense(op);
    REQUIRE((M - M.transpose()).cwiseAbs().maxCoeff() < 1e-13);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    return es.eigenvalues().maxCoeff();
}

} // namespace

TEST_CASE("exclusion generator")
{
    auto k = srw_kernel(1, 1.0);
    auto g2 = build_se_generator(Torus(1, 2), k);
    REQUIRE(g2.size() == 4);
    Eigen::MatrixXd M = dense(g2);
    long i01 = g2.find(1), i10 = g2.find(2), i00 = g2.find(0), i11 = g2.find(3);
    CHECK(M(i01, i10) == doctest::Approx(1.0));
    CHECK(M(i10, i01) == doctest::Approx(1.0));
    CHECK(M.row(i00).cwiseAbs().sum() == 0.0);
    CHECK(M.row(i11).cwiseAbs().sum() == 0.0);

    auto g4 = build_se_generator(Torus(1, 4), k);
    Eigen::MatrixXd O = oriented_se(4);
    Eigen::MatrixXd G = dense(g4);
    // basis of g4 is sorted by key == eta
    CHECK((G - O).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(build_se_generator(Torus(1, 16), k, 1000), std::length_error);
    CHECK(!g4.matrix.triplets().empty());
}

TEST_CASE("joint generator structure")
{
    OperatorSpec s;
    s.torus = Torus(1, 4);
    s.kappa = 0.0;
    s.p = 1;
    auto op = build_joint_generator(s);
    // walkers frozen at 0
    for (std::size_t i = 0; i < op.size(); ++i) CHECK(op.walker(i, 0) == 0);
    for (std::size_t i = 0; i < op.size(); ++i)
        for (auto k = op.matrix.rowptr[i]; k < op.matrix.rowptr[i + 1]; ++k)
            CHECK(op.walker(op.matrix.col[k], 0) == op.walker(i, 0));

    s.kappa = 0.7;
    s.gamma = 0.0;
    auto g = build_joint_generator(s);
    CHECK(g.size() == 16 * 4);
    for (double r : g.matrix.row_sums()) CHECK(std::abs(r) < 1e-14);

    s.gamma = 1.0;
    auto gv = build_joint_generator(s);
    CHECK(reversibility_defect(gv, 0.3) < 1e-12);
    CHECK(gv.matrix.offdiag_nonnegative());
    // V only on the diagonal
    Eigen::MatrixXd D = dense(gv) - dense(g);
    CHECK((D - Eigen::MatrixXd(D.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
    for (std::size_t i = 0; i < gv.size(); ++i)
        CHECK(D(i, i) == double((gv.eta(i) >> gv.walker(i, 0)) & 1));

    s.sector = 2;
    auto sec = build_joint_generator(s);
    for (std::size_t i = 0; i < sec.size(); ++i) CHECK(std::popcount(sec.eta(i)) == 2);
    CHECK(sec.size() == 6 * 4);
}

TEST_CASE("exact moments against dense exponential")
{
    OperatorSpec s;
    s.torus = Torus(1, 4);
    s.kappa = 0.7;
    s.p = 1;
    s.rho = 0.4;
    auto op = build_joint_generator(s);
    auto pi = start_vector(op, s, StartLaw::Nu);
    CHECK(exact_log_moment(op, pi, 0.0) == doctest::Approx(0.0));
    Eigen::MatrixXd M = dense(op);
    Eigen::VectorXd P = Eigen::Map<Eigen::VectorXd>(pi.data(), pi.size());
    for (double t : {0.5, 2.0, 5.0}) {
        Eigen::MatrixXd E = (t * M).exp();
        double ref = std::log(P.dot(E * Eigen::VectorXd::Ones(op.size())));
        CHECK(std::abs(exact_log_moment(op, pi, t) - ref) < 1e-11);
    }
    CHECK_THROWS(exact_log_moment(op, pi, -1.0));

    auto prof = exact_lambda_profile(s, {0.0, 1.0, 3.0, 6.0});
    CHECK(std::isnan(prof[0]));
    for (std::size_t i = 1; i < prof.size(); ++i) {
        CHECK(prof[i] <= 1.0);
        CHECK(prof[i] >= s.rho - 1e-12); // Jensen
        CHECK(prof[i] == doctest::Approx(exact_log_moment(op, pi, i == 1 ? 1.0 : i == 2 ? 3.0 : 6.0) / (s.p * (i == 1 ? 1.0 : i == 2 ? 3.0 : 6.0))).epsilon(1e-12));
    }
}

TEST_CASE("Hoelder monotonicity in p")
{
    for (double kappa : {0.0, 0.5}) {
        std::vector<double> prev;
        for (int p = 1; p <= 3; ++p) {
            OperatorSpec s;
            s.torus = Torus(1, 4);
            s.kappa = kappa;
            s.p = p;
            auto prof = exact_lambda_profile(s, {0.5, 2.0, 4.0});
            if (!prev.empty())
                for (std::size_t i = 0; i < prof.size(); ++i) CHECK(prof[i] >= prev[i] - 1e-12);
            prev = prof;
        }
    }
}

TEST_CASE("spectral consistency on a sector")
{
    OperatorSpec s;
    s.torus = Torus(1, 6);
    s.kappa = 0.5;
    s.p = 1;
    s.sector = 3;
    auto op = build_joint_generator(s);
    double mu = dense_top(op);
    auto pi = start_vector(op, s, StartLaw::Sector);
    double slope = exact_log_slope(op, pi, 80.0);
    CHECK(std::abs(slope - mu) < 1e-8);
    CHECK(mu > 0.5);
    CHECK(mu < 1.0);

    // full nu_rho space: the eta == 1 block pins the top at gamma p
    OperatorSpec f = s;
    f.sector = -1;
    auto full = build_joint_generator(f);
    CHECK(std::abs(dense_top(full) - 1.0) < 1e-12);

    // kappa monotone and convex on the truncation
    std::vector<double> mus;
    for (int i = 0; i <= 8; ++i) {
        s.kappa = 0.5 * i;
        mus.push_back(dense_top(build_joint_generator(s)));
    }
    for (std::size_t i = 1; i < mus.size(); ++i) CHECK(mus[i] <= mus[i - 1] + 1e-12);
    for (std::size_t i = 1; i + 1 < mus.size(); ++i) CHECK(mus[i + 1] - 2 * mus[i] + mus[i - 1] >= -1e-9);
}

TEST_CASE("martingale identity")
{
    Torus T(1, 4);
    auto A = martingale_generator(T, srw_kernel(1, 1.0), 1.0);
    CHECK(A.size() == 16 * 4);
    for (double r : A.matrix.row_sums()) CHECK(std::abs(r) < 1e-14);
    std::vector<double> psi(A.size());
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> u(-1, 1);
    for (double& x : psi) x = u(g);

    auto zero = martingale_check(A, psi, 0.0, 1.0, 1.0);
    CHECK(zero.deviation < 1e-14);
    std::vector<double> c(A.size(), 0.7);
    CHECK(martingale_check(A, c, 2.0, 1.0, 1.0).deviation <= 1e-12);
    for (double r : {-1.0, 0.5, 2.0}) {
        auto rep = martingale_check(A, psi, r, 1.0, 1.0);
        CHECK(rep.deviation <= 1e-8);
        CHECK(rep.new_semigroup_deviation <= 1e-8);
        CHECK(rep.generator_ok);
        CHECK(rep.generator_defect < 1e-12);
    }
    // large, eta-dependent psi at another kappa
    std::vector<double> big(A.size());
    for (std::size_t i = 0; i < big.size(); ++i) big[i] = A.eta(i) & 1 ? 3.0 : 0.0;
    auto rep = martingale_check(A, big, 1.0, 0.5, 2.0);
    CHECK(rep.deviation <= 1e-8);
}
