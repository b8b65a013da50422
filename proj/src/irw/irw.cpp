#include "sepam/irw.hpp"

#include "sepam/exact.hpp"
#include "sepam/expm.hpp"
#include "sepam/fields.hpp"
#include "sepam/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sepam {

std::size_t WalkPath::at(double t) const
{
    auto it = std::upper_bound(times.begin(), times.end(), t);
    return it == times.begin() ? start : sites[it - times.begin() - 1];
}

WalkEnsemble sample_walks(const Torus& T, const Kernel& k, const std::vector<std::size_t>& starts, double horizon,
                          std::mt19937_64& g)
{
    validate(k);
    if (k.d != T.d()) throw std::invalid_argument("sample_walks: dimension mismatch");
    WalkEnsemble e{T, k, horizon, {}};
    std::vector<double> w;
    for (const auto& o : k.offsets) w.push_back(o.w);
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    for (std::size_t s : starts) {
        WalkPath p{s, {}, {}};
        double t = 0;
        std::size_t x = s;
        while (true) {
            t += exponential(g, k.rate);
            if (t > horizon) break;
            x = T.shift(x, k.offsets[pick(g)].dz);
            p.times.push_back(t);
            p.sites.push_back(x);
        }
        e.paths.push_back(std::move(p));
    }
    return e;
}

std::vector<int> evolve_irw(const WalkEnsemble& e, double t)
{
    if (t > e.horizon) throw std::invalid_argument("evolve_irw: t beyond horizon");
    std::vector<int> n(e.torus.sites(), 0);
    for (const auto& p : e.paths) ++n[p.at(t)];
    return n;
}

std::vector<std::size_t> occupied_sites(const Configuration& eta)
{
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < eta.bits.size(); ++i)
        if (eta.bits[i]) s.push_back(i);
    return s;
}

bool WeightFunction::sign_uniform() const
{
    bool pos = false, neg = false;
    for (const auto& c : cells) (c.value > 0 ? pos : neg) |= c.value != 0;
    for (const auto& a : atoms) (a.value > 0 ? pos : neg) |= a.value != 0;
    return !(pos && neg);
}

bool WeightFunction::zero() const
{
    for (const auto& c : cells)
        if (c.value != 0 && c.t1 > c.t0) return false;
    for (const auto& a : atoms)
        if (a.value != 0) return false;
    return true;
}

double WeightFunction::l1() const
{
    double s = 0;
    for (const auto& c : cells) s += std::abs(c.value) * std::max(0.0, c.t1 - c.t0);
    for (const auto& a : atoms) s += std::abs(a.value);
    return s;
}

std::vector<double> WeightFunction::breaks(double t) const
{
    std::vector<double> b{0.0, t};
    for (const auto& c : cells) {
        b.push_back(std::clamp(c.t0, 0.0, t));
        b.push_back(std::clamp(c.t1, 0.0, t));
    }
    for (const auto& a : atoms)
        if (a.time >= 0 && a.time <= t) b.push_back(a.time);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

WeightFunction WeightFunction::box(const std::vector<std::size_t>& Q, double t0, double t1, double value)
{
    WeightFunction K;
    for (auto z : Q) K.cells.push_back({z, t0, t1, value});
    return K;
}

namespace {

void check_weights(const WeightFunction& K, std::size_t sites)
{
    if (!K.sign_uniform()) throw std::invalid_argument("weight function must be sign uniform");
    for (const auto& c : K.cells)
        if (c.site >= sites || !std::isfinite(c.value)) throw std::invalid_argument("weight function: bad cell");
    for (const auto& a : K.atoms)
        if (a.site >= sites || !std::isfinite(a.value)) throw std::invalid_argument("weight function: bad atom");
}

// Feynman-Kac problem for one walker, time reversed: solver time tau sees K(., t - tau).
CauchyProblem single_walk_problem(const WeightFunction& K, double t, const Torus& T, const Kernel& k)
{
    if (!k.is_srw() || k.d != T.d())
        throw std::invalid_argument("irw functional: nearest-neighbour walk on the torus required");
    CauchyProblem pb;
    pb.domain = Domain::Periodic;
    pb.d = T.d();
    pb.extent = T.L();
    pb.rate = k.rate;
    pb.horizon = t;
    auto b = K.breaks(t);
    for (std::size_t j = 0; j + 1 < b.size(); ++j) {
        double mid = 0.5 * (b[j] + b[j + 1]);
        std::vector<double> c(T.sites(), 0.0);
        bool any = false;
        for (const auto& cell : K.cells)
            if (cell.t0 <= mid && mid < cell.t1) {
                c[cell.site] += cell.value;
                any = true;
            }
        if (any) pb.segments.push_back({t - b[j + 1], t - b[j], std::move(c)});
    }
    for (const auto& a : K.atoms)
        if (a.time >= 0 && a.time <= t) pb.kicks.push_back({t - a.time, a.site, a.value});
    return pb;
}

} // namespace

std::vector<double> irw_single_walk(const WeightFunction& K, double t, const Torus& T, const Kernel& k)
{
    check_weights(K, T.sites());
    auto pb = single_walk_problem(K, t, T, k);
    return solve_cauchy(pb, {t}).back().v;
}

IrwValue irw_exp_functional(double rho, const WeightFunction& K, double t, const Torus& T, const Kernel& k,
                            double bound)
{
    if (rho < 0 || rho > 1) throw std::invalid_argument("irw functional: density outside [0, 1]");
    IrwValue r;
    if (K.zero() || rho == 0) return r;
    auto v = irw_single_walk(K, t, T, k);
    for (double x : v) {
        if (!std::isfinite(x) || x > bound) {
            r.diverged = true;
            r.value = r.log_value = INFINITY;
            return r;
        }
        r.log_value += std::log1p(rho * (x - 1));
    }
    r.value = std::exp(r.log_value);
    return r;
}

IrwValue irw_exp_functional(const Configuration& eta, const WeightFunction& K, double t, const Kernel& k,
                            double bound)
{
    IrwValue r;
    if (K.zero()) return r;
    auto v = irw_single_walk(K, t, eta.torus, k);
    for (auto x : occupied_sites(eta)) {
        if (!std::isfinite(v[x]) || v[x] > bound) {
            r.diverged = true;
            r.value = r.log_value = INFINITY;
            return r;
        }
        r.log_value += std::log(v[x]);
    }
    r.value = std::exp(r.log_value);
    return r;
}

namespace {

struct Tilted {
    const SparseOperator& op;
    const std::vector<double>& w;
    void apply(const std::vector<double>& x, std::vector<double>& y) const
    {
        op.apply(x, y);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += w[i] * x[i];
    }
};

} // namespace

double se_exp_functional_exact(const ComparisonParams& p, const WeightFunction& K, double t)
{
    const std::size_t n = p.torus.sites();
    check_weights(K, n);
    if (n >= 63 || (std::size_t(1) << n) > p.exact_cap) throw std::length_error("se functional: state space too large");
    auto op = build_se_generator(p.torus, p.kernel, std::size_t(1) << n);
    const std::size_t m = op.size();
    auto occ = [&](std::size_t i, std::size_t z) { return double((op.eta(i) >> z) & 1u); };

    auto b = K.breaks(t);
    std::vector<double> u(m, 1.0), w(m);
    double ls = 0;
    auto kick = [&](double s) {
        for (const auto& a : K.atoms)
            if (a.time == s)
                for (std::size_t i = 0; i < m; ++i) u[i] *= std::exp(a.value * occ(i, a.site));
    };
    kick(t);
    for (std::size_t j = b.size() - 1; j > 0; --j) {
        double mid = 0.5 * (b[j - 1] + b[j]);
        std::fill(w.begin(), w.end(), 0.0);
        for (const auto& c : K.cells)
            if (c.t0 <= mid && mid < c.t1)
                for (std::size_t i = 0; i < m; ++i) w[i] += c.value * occ(i, c.site);
        double wmax = 0;
        for (double x : w) wmax = std::max(wmax, std::abs(x));
        auto r = uniformized_expv(Tilted{op, w}, b[j] - b[j - 1], u, op.matrix.max_abs_diag() + wmax);
        u = std::move(r.v);
        ls += r.log_scale;
        kick(b[j - 1]);
    }
    double s = 0;
    if (p.eta) {
        std::uint32_t e = 0;
        for (std::size_t z = 0; z < n; ++z)
            if (p.eta->bits[z]) e |= 1u << z;
        long i = op.find(e);
        if (i < 0) throw std::logic_error("se functional: configuration missing from basis");
        s = u[i];
    } else {
        auto pi = state_weights(op, p.rho);
        for (std::size_t i = 0; i < m; ++i) s += pi[i] * u[i];
    }
    return s * std::exp(ls);
}

McEstimate se_exp_functional_mc(const ComparisonParams& p, const WeightFunction& K, double t)
{
    check_weights(K, p.torus.sites());
    std::vector<double> x(p.mc_trials);
    const std::int64_t n = static_cast<std::int64_t>(p.mc_trials);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        auto g = stream(p.seed, static_cast<std::uint64_t>(i));
        Trajectory tr{p.eta ? *p.eta : sample_initial(p.torus, p.rho, g), build_schedule(p.torus, p.kernel, t, g)};
        double acc = 0;
        for (const auto& c : K.cells) {
            double a = std::clamp(c.t0, 0.0, t), b = std::clamp(c.t1, 0.0, t);
            if (b > a) acc += c.value * (occupation_time(tr, c.site, b) - occupation_time(tr, c.site, a));
        }
        for (const auto& at : K.atoms)
            if (at.time >= 0 && at.time <= t) acc += at.value * evolve(tr, at.time).bits[at.site];
        x[i] = acc;
    }
    return exp_mean_estimate(x, p.seed);
}

ComparisonReport compare_se_irw(const ComparisonParams& p, const WeightFunction& K, double t)
{
    check_weights(K, p.torus.sites());
    ComparisonReport r;
    const std::size_t n = p.torus.sites();
    bool exact = n < 63 && (std::size_t(1) << n) <= p.exact_cap;
    if (exact) {
        r.se = se_exp_functional_exact(p, K, t);
        r.se_method = "exact";
    } else {
        auto e = se_exp_functional_mc(p, K, t);
        r.se = e.mean;
        r.se_stderr = e.stderr_;
        r.se_method = "mc";
    }
    r.irw = p.eta ? irw_exp_functional(*p.eta, K, t, p.kernel).value
                  : irw_exp_functional(p.rho, K, t, p.torus, p.kernel).value;
    r.margin = r.irw - r.se;
    r.violation = exact ? r.margin < -p.tolerance : r.margin < -4 * r.se_stderr;
    return r;
}

} // namespace sepam
