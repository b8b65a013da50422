#include "sepam/harness.hpp"

#include "checks.hpp"
#include "sepam/exact.hpp"
#include "sepam/fields.hpp"
#include "sepam/irw.hpp"
#include "sepam/montecarlo.hpp"
#include "sepam/variational.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

namespace sepam {

namespace {

std::string fmt(const char* f, auto... a)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

// C1: link-driven dynamics reproduce the one-particle heat kernel in the mean
CriterionResult graphical()
{
    const Torus T(1, 16);
    const auto k = srw_kernel(1, 1.0);
    const auto eta = sample_initial(T, 0.5, 11);
    const std::vector<std::pair<std::size_t, double>> pairs{{0, 0.5}, {3, 1.0}, {8, 2.0}, {15, 4.0}, {5, 8.0}};
    const std::uint64_t n = 100000;
    std::vector<double> hits(pairs.size(), 0.0);
    std::mt19937_64 g(2024);
    for (std::uint64_t i = 0; i < n; ++i) {
        Trajectory tr{eta, build_schedule(T, k, 8.0, g)};
        for (std::size_t j = 0; j < pairs.size(); ++j) hits[j] += evolve(tr, pairs[j].second).bits[pairs[j].first];
    }
    double worst = 0;
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        auto [y, t] = pairs[j];
        double expect = 0;
        for (std::size_t x = 0; x < T.sites(); ++x)
            if (eta.bits[x]) expect += torus_transition_prob(k, T, t, T.displacement(x, y));
        double m = hits[j] / n;
        double se = std::sqrt(std::max(m * (1 - m), 1e-300) / (n - 1));
        worst = std::max(worst, std::abs(m - expect) / se);
    }
    return {1, "", worst <= 4.0, fmt("max |mc - sum eta p_t| = %.2f sd (<= 4), n=%llu", worst, (unsigned long long)n)};
}

CriterionResult exact_vs_mc()
{
    OperatorSpec s;
    s.torus = Torus(1, 6);
    s.kappa = 0.5;
    s.p = 1;
    s.gamma = 1;
    s.rho = 0.5;
    const double t = 2;
    const double ex = std::exp(exact_log_moment(s, t));
    MomentParams m;
    m.torus = s.torus;
    m.rho = s.rho;
    m.kappa = s.kappa;
    m.p = s.p;
    m.gamma = s.gamma;
    auto e = estimate_moment(m, t, 200000, 7);
    double z = std::abs(e.mean - ex) / e.stderr_, rel = std::abs(e.mean - ex) / ex;
    return {2, "", z <= 3 && rel <= 0.02,
            fmt("exact %.6f mc %.6f +- %.2e: %.2f sd (<= 3), rel gap %.2e (<= 2e-2)", ex, e.mean, e.stderr_, z, rel)};
}

CriterionResult comparison()
{
    ComparisonParams p;
    p.torus = Torus(1, 6);
    p.kernel = srw_kernel(1, 1.0);
    std::vector<WeightFunction> ks;
    for (double sg : {1.0, -1.0}) {
        ks.push_back(WeightFunction::box({0}, 0, 1, sg));
        ks.push_back(WeightFunction::box({0, 1, 2}, 0, 1, sg / 3));
    }
    double worst = INFINITY;
    int cases = 0;
    bool exact = true;
    for (double rho : {0.3, 0.5, 0.7})
        for (const auto& K : ks) {
            p.rho = rho;
            auto r = compare_se_irw(p, K, 1.0);
            exact = exact && r.se_method == "exact";
            worst = std::min(worst, r.margin);
            ++cases;
        }
    return {3, "", exact && cases == 12 && worst >= -1e-10,
            fmt("%d cases, min (irw - se) = %.3e (>= -1e-10)%s", cases, worst, exact ? "" : ", not all exact")};
}

CriterionResult martingale()
{
    const Torus T(1, 4);
    const auto k = srw_kernel(1, 1.0);
    const double kappa = 1.0, t = 1.0;
    auto A = martingale_generator(T, k, kappa);
    double worst = 0;
    bool gen_ok = true;
    for (double Th : {0.5, 2.0}) {
        PsiSpec ps{1, kappa, Th, 0.5};
        std::map<std::uint32_t, Field> cache;
        std::vector<double> psi(A.size());
        for (std::size_t i = 0; i < A.size(); ++i) {
            std::uint32_t e = A.eta(i);
            auto it = cache.find(e);
            if (it == cache.end()) {
                Configuration c = filled(T, false);
                for (std::size_t x = 0; x < T.sites(); ++x) c.bits[x] = (e >> x) & 1;
                it = cache.emplace(e, psi_field(c, ps)).first;
            }
            psi[i] = it->second.values[A.walker(i, 0)];
        }
        for (double r : {-1.0, 0.5, 2.0}) {
            auto rep = martingale_check(A, psi, r, kappa, t);
            worst = std::max(worst, rep.deviation);
            gen_ok = gen_ok && rep.generator_ok;
        }
    }
    return {4, "", worst <= 1e-8 && gen_ok, fmt("max |E N_t^r - 1| = %.2e (<= 1e-8) over 6 runs", worst)};
}

std::vector<OperatorSpec> spectral_specs()
{
    std::vector<OperatorSpec> v;
    OperatorSpec a;
    a.torus = Torus(1, 6);
    a.kappa = 0.5;
    a.rho = 0.5;
    a.sector = 3;
    v.push_back(a);
    OperatorSpec b = a;
    b.kappa = 1.5;
    b.gamma = 0.7;
    b.rho = 1.0 / 3;
    b.sector = 2;
    v.push_back(b);
    OperatorSpec c;
    c.torus = Torus(2, 2);
    c.kernel = srw_kernel(2, 1.0);
    c.kappa = 1.0;
    c.rho = 0.5;
    c.sector = 2;
    v.push_back(c);
    return v;
}

CriterionResult spectral()
{
    double worst_slope = 0, worst_rq = -INFINITY, worst_vec = 0;
    std::mt19937_64 g(99);
    std::normal_distribution<double> nd;
    for (const auto& s : spectral_specs()) {
        auto op = build_joint_generator(s);
        auto e = top_eigenvalue(op, s);
        double slope = exact_log_slope(op, start_vector(op, s, StartLaw::Sector), 150.0);
        worst_slope = std::max(worst_slope, std::abs(slope - e.mu));
        // the maximizer attains mu, so the random-f test is not vacuous
        worst_vec = std::max(worst_vec, std::abs(rayleigh_quotient({e.vector}, op, s).value - e.mu));
        for (int i = 0; i < 100; ++i) {
            TestFunction f{std::vector<double>(op.size())};
            for (double& x : f.values) x = nd(g);
            auto q = rayleigh_quotient(normalized(op, f, s.rho), op, s);
            worst_rq = std::max(worst_rq, q.value - e.mu);
        }
    }
    return {5, "", worst_slope <= 1e-6 && worst_rq <= 1e-9 && worst_vec <= 1e-8,
            fmt("max |slope(150) - mu| = %.2e (<= 1e-6); max (RQ - mu) = %.2e (<= 1e-9); |RQ(eigvec) - mu| = %.1e",
                worst_slope, worst_rq, worst_vec)};
}

CriterionResult kappa_shape()
{
    OperatorSpec s;
    s.torus = Torus(1, 6);
    s.rho = 0.5;
    s.sector = 3;
    std::vector<double> lam;
    for (int i = 0; i <= 16; ++i) {
        s.kappa = 0.25 * i;
        lam.push_back(top_eigenvalue(s).lambda);
    }
    double rise = -INFINITY, dd = INFINITY;
    for (std::size_t i = 1; i < lam.size(); ++i) rise = std::max(rise, lam[i] - lam[i - 1]);
    for (std::size_t i = 1; i + 1 < lam.size(); ++i) dd = std::min(dd, lam[i + 1] - 2 * lam[i] + lam[i - 1]);
    return {6, "", rise <= 0 && dd >= -1e-9,
            fmt("lambda_1(0)=%.6f lambda_1(4)=%.6f; max step %.2e (<= 0); min 2nd diff %.2e (>= -1e-9)", lam.front(),
                lam.back(), rise, dd)};
}

CriterionResult intermittency()
{
    OperatorSpec s;
    s.torus = Torus(1, 8);
    s.kappa = 0;
    s.rho = 0.5;
    const std::vector<double> grid{1, 2, 4, 8};
    std::vector<std::vector<double>> prof;
    for (int p = 1; p <= 3; ++p) {
        s.p = p;
        prof.push_back(exact_lambda_profile(s, grid));
    }
    double gap = INFINITY, hoelder = INFINITY;
    for (int i = 1; i < 3; ++i) {
        gap = std::min(gap, prof[i].back() - prof[i - 1].back());
        for (std::size_t k = 0; k < grid.size(); ++k) hoelder = std::min(hoelder, prof[i][k] - prof[i - 1][k]);
    }
    return {7, "", gap > 1e-6 && hoelder >= 0,
            fmt("Lambda_1..3(8) = %.6f %.6f %.6f; min gap %.2e (> 1e-6); min Lambda_p - Lambda_{p-1} %.2e (>= 0)",
                prof[0].back(), prof[1].back(), prof[2].back(), gap, hoelder)};
}

CriterionResult probe()
{
    auto p = asymptotic_probe(4, 10.0, 0.0, 200.0, 2000, 4);
    return {8, "", p.relative_gap <= 0.05,
            fmt("estimate %.5f +- %.1e, target %.5f, rel gap %.3f (<= 0.05)", p.estimate.mean, p.estimate.stderr_,
                p.target, p.relative_gap)};
}

CriterionResult green_functions()
{
    double worst = 0;
    std::string vals;
    for (int d : {3, 4}) {
        double a = green(srw_kernel(d, 1.0));
        double b = green_series(d).value;
        worst = std::max(worst, std::abs(a - b) / b);
        vals += fmt("G%d %.8f/%.8f ", d, a, b);
    }
    // reflected Green function on H+ = {x_1 >= 1}: G(y - x) + G(y* - x), y* = (1 - y_1, ...)
    double sup_ratio = 0;
    for (int d : {3, 4}) {
        auto k = srw_kernel(d, 1.0);
        const double G = green(k);
        std::map<Coord, double> cache;
        auto gat = [&](Coord z) {
            for (int& c : z) c = std::abs(c);
            std::sort(z.begin(), z.end());
            auto it = cache.find(z);
            if (it == cache.end()) it = cache.emplace(z, green_at(k, z)).first;
            return it->second;
        };
        std::vector<Coord> sample;
        for (int a = 1; a <= 3; ++a)
            for (int b = -1; b <= 1; ++b) {
                Coord x(d, 0);
                x[0] = a;
                x[1] = b;
                sample.push_back(x);
            }
        for (const auto& x : sample)
            for (const auto& y : sample) {
                Coord z(d), zm(d);
                for (int j = 0; j < d; ++j) z[j] = zm[j] = y[j] - x[j];
                zm[0] = 1 - y[0] - x[0];
                sup_ratio = std::max(sup_ratio, (gat(z) + gat(zm)) / (2 * G));
            }
    }
    return {9, "", worst <= 1e-5 && sup_ratio <= 1 + 1e-9,
            fmt("%srel diff %.2e (<= 1e-5); sup G+ / 2G_d = %.6f (<= 1)", vals.c_str(), worst, sup_ratio)};
}

CriterionResult field_suite()
{
    auto a = checks::psi_bounds(3, 5.0, 2.0, 0.5, 100, 3);
    auto b = checks::kernels(3, 5.0, 2.0, 1e3, 6, 1e-6, 1e-3);
    return {10, "", a["pass"].get<bool>() && b["pass"].get<bool>(), a.dump() + " " + b.dump()};
}

CriterionResult cauchy()
{
    auto a = checks::cauchy_mass(1e-8);
    auto b = checks::cauchy_modes(1e-6, 4.0, 40000, 5);
    return {11, "", a["pass"].get<bool>() && b["pass"].get<bool>(), a.dump() + " " + b.dump()};
}

// golden-section refinement of a grid maximum; independent of the closed form
double grid_max(const std::function<double(double)>& f, double lo, double hi)
{
    const int n = 4000;
    int best = 0;
    for (int i = 1; i <= n; ++i)
        if (f(lo + (hi - lo) * i / n) > f(lo + (hi - lo) * best / n)) best = i;
    double a = lo + (hi - lo) * std::max(best - 1, 0) / n, b = lo + (hi - lo) * std::min(best + 1, n) / n;
    const double r = (std::sqrt(5.0) - 1) / 2;
    double c = b - r * (b - a), e = a + r * (b - a);
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        if (f(c) > f(e)) {
            b = e;
            e = c;
            c = b - r * (b - a);
        } else {
            a = c;
            c = e;
            e = a + r * (b - a);
        }
    }
    return f(0.5 * (a + b));
}

CriterionResult varadhan_and_bounds()
{
    double worst = 0;
    bool interior = true;
    for (double rho : {0.1, 0.3, 0.5})
        for (double gamma : {0.01, 0.05, 0.08})
            for (double G : {1.0, 1.2394, 1.516386}) {
                auto cf = varadhan_closed_form(gamma, rho, G);
                auto f = [&](double b) {
                    double s = std::sqrt(b) - std::sqrt(rho);
                    return gamma * b - s * s / (2 * G);
                };
                worst = std::max(worst, std::abs(cf.value - grid_max(f, 0.0, 4.0)));
                interior = interior && cf.interior;
            }

    // rho <= lambda <= 1 (gamma = 1) on every estimate produced here
    const double rho = 0.5;
    std::vector<double> est;
    for (double l : lambda0_via_varadhan(3, rho, green(srw_kernel(3, 1.0))).lambda) est.push_back(l);
    for (const auto& s0 : spectral_specs())
        if (s0.gamma == 1.0 && s0.rho == rho) est.push_back(top_eigenvalue(s0).lambda);
    OperatorSpec s;
    s.torus = Torus(1, 6);
    s.rho = rho;
    for (int p = 1; p <= 2; ++p) {
        s.p = p;
        for (double l : exact_lambda_profile(s, {0.5, 2.0, 6.0})) est.push_back(l);
    }
    MomentParams m;
    m.torus = Torus(1, 16);
    m.rho = rho;
    m.kappa = 1.0;
    auto run = lambda_curve(m, {1, 2, 4, 6, 8}, 4000, 8);
    double lo = INFINITY, hi = -INFINITY;
    for (double l : est) {
        lo = std::min(lo, l);
        hi = std::max(hi, l);
    }
    bool bounds = lo >= rho - 1e-12 && hi <= 1 + 1e-12 && run.within_bounds;
    return {12, "", worst <= 1e-8 && bounds,
            fmt("max |closed - grid| = %.2e (<= 1e-8) on 27 points%s; %zu estimates in [%.4f, %.4f] (within [%.1f, 1]), "
                "MC plateau %.4f +- %.4f %s",
                worst, interior ? "" : " (some beta* > 1)", est.size(), lo, hi, rho, run.plateau, run.plateau_stderr,
                run.within_bounds ? "inside" : "outside")};
}

} // namespace

std::vector<Criterion> acceptance_criteria()
{
    return {{1, "graphical representation", graphical},
            {2, "exact vs Monte Carlo moment", exact_vs_mc},
            {3, "SE <= IRW comparison", comparison},
            {4, "martingale identity", martingale},
            {5, "spectral consistency", spectral},
            {6, "lambda_1(kappa) non-increasing, convex", kappa_shape},
            {7, "kappa = 0 intermittency", intermittency},
            {8, "d = 4 asymptotic probe", probe},
            {9, "Green function", green_functions},
            {10, "psi and K kernel suite", field_suite},
            {11, "Cauchy mass identities and modes", cauchy},
            {12, "closed-form maximization and bounds", varadhan_and_bounds}};
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids,
                                            const std::function<void(const CriterionResult&)>& print)
{
    std::vector<CriterionResult> out;
    for (const auto& c : acceptance_criteria()) {
        if (!ids.empty() && std::find(ids.begin(), ids.end(), c.id) == ids.end()) continue;
        auto t0 = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = c.run();
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        r.id = c.id;
        r.name = c.name;
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (print) print(r);
        out.push_back(r);
    }
    return out;
}

std::string format_result(const CriterionResult& r)
{
    return fmt("[%s] C%-2d %-40s %7.1fs  %s", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds,
               r.detail.c_str());
}

} // namespace sepam
