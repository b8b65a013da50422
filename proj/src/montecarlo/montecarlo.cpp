#include "sepam/montecarlo.hpp"

#include "sepam/quad.hpp"
#include "sepam/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace sepam {

MomentParams scaled_params(const MomentParams& p)
{
    if (!(p.kappa > 0)) throw std::invalid_argument("scaled_params: kappa must be positive");
    MomentParams s = p;
    s.catalyst_speed = p.catalyst_speed / p.kappa;
    s.gamma = p.gamma / p.kappa;
    s.kappa = 1.0;
    return s;
}

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void check(const MomentParams& pr, const std::vector<double>& times)
{
    if (pr.p < 0 || pr.kappa < 0 || pr.catalyst_speed < 0) throw std::invalid_argument("moment: negative parameter");
    if (pr.walkers_per_catalyst < 1) throw std::invalid_argument("moment: walkers_per_catalyst >= 1");
    if (!pr.eta && !(pr.rho > 0 && pr.rho < 1)) throw std::invalid_argument("moment: rho outside (0, 1)");
    for (std::size_t k = 0; k < times.size(); ++k)
        if (times[k] < 0 || (k > 0 && times[k] < times[k - 1]))
            throw std::invalid_argument("moment: times must be increasing and >= 0");
}

// one catalyst path, one walker tuple; integrals up to each time
void run_tuple(const MomentParams& pr, Configuration eta, const LinkSchedule& sched, const std::vector<double>& times,
               std::mt19937_64& g, std::vector<double>& out)
{
    const Torus& T = pr.torus;
    const int d = T.d();
    const double walk_rate = pr.p * 2.0 * d * pr.kappa;
    const double c = pr.catalyst_speed;
    std::vector<std::size_t> x(pr.p, 0);
    std::uniform_int_distribution<int> who(0, std::max(0, pr.p - 1)), dir(0, 2 * d - 1);
    auto on = [&] {
        int n = 0;
        for (auto s : x) n += eta.bits[s];
        return n;
    };
    int occ = on();
    double s = 0, acc = 0;
    std::size_t li = 0;
    double next_walk = walk_rate > 0 ? exponential(g, walk_rate) : inf;
    out.assign(times.size(), 0.0);
    for (std::size_t k = 0; k < times.size(); ++k) {
        while (true) {
            double next_link = (c > 0 && li < sched.events.size()) ? sched.events[li].t / c : inf;
            double next = std::min(next_link, next_walk);
            if (next > times[k]) break;
            acc += pr.gamma * occ * (next - s);
            s = next;
            if (next_link <= next_walk) {
                const Bond& b = sched.bonds[sched.events[li++].bond];
                std::swap(eta.bits[b.a], eta.bits[b.b]);
            } else {
                int q = who(g), e = dir(g);
                Coord dz(d, 0);
                dz[e / 2] = e % 2 ? -1 : 1;
                x[q] = T.shift(x[q], dz);
                next_walk = s + exponential(g, walk_rate);
            }
            occ = on();
        }
        acc += pr.gamma * occ * (times[k] - s);
        s = times[k];
        out[k] = acc;
    }
}

} // namespace

std::vector<std::vector<double>> sample_integrals(const MomentParams& pr, const std::vector<double>& times,
                                                  std::uint64_t n, std::uint64_t seed)
{
    check(pr, times);
    const double tmax = times.empty() ? 0.0 : times.back();
    const int m = pr.walkers_per_catalyst;
    std::vector<std::vector<double>> out(n);
    auto trial = [&](std::int64_t i) {
        auto g = stream(seed, static_cast<std::uint64_t>(i));
        Configuration eta = pr.eta ? *pr.eta : sample_initial(pr.torus, pr.rho, g);
        LinkSchedule sched = pr.catalyst_speed > 0 ? build_schedule(pr.torus, pr.kernel, pr.catalyst_speed * tmax, g)
                                                   : LinkSchedule{};
        if (m == 1) {
            run_tuple(pr, eta, sched, times, g, out[i]);
            return;
        }
        // log of the average of exp over the walker tuples, per time
        std::vector<std::vector<double>> all(m);
        for (int j = 0; j < m; ++j) run_tuple(pr, eta, sched, times, g, all[j]);
        out[i].resize(times.size());
        for (std::size_t k = 0; k < times.size(); ++k) {
            double mx = -inf;
            for (int j = 0; j < m; ++j) mx = std::max(mx, all[j][k]);
            double s = 0;
            for (int j = 0; j < m; ++j) s += std::exp(all[j][k] - mx);
            out[i][k] = mx + std::log(s / m);
        }
    };
    const std::int64_t nn = static_cast<std::int64_t>(n);
    if (pr.parallel) {
#pragma omp parallel for schedule(dynamic, 256)
        for (std::int64_t i = 0; i < nn; ++i) trial(i);
    } else {
        for (std::int64_t i = 0; i < nn; ++i) trial(i);
    }
    return out;
}

McEstimate estimate_moment(const MomentParams& pr, double t, std::uint64_t n, std::uint64_t seed)
{
    if (n < 2) throw std::invalid_argument("estimate_moment: n >= 2");
    auto v = sample_integrals(pr, {t}, n, seed);
    std::vector<double> x(n);
    for (std::uint64_t i = 0; i < n; ++i) x[i] = v[i][0];
    return exp_mean_estimate(x, seed);
}

LyapunovRun lambda_curve(const MomentParams& pr, const std::vector<double>& t_grid, std::uint64_t n,
                         std::uint64_t seed, double sigma)
{
    if (n < 2) throw std::invalid_argument("lambda_curve: n >= 2");
    if (pr.p < 1) throw std::invalid_argument("lambda_curve: p >= 1");
    LyapunovRun run;
    run.params = pr;
    run.t = t_grid;
    auto v = sample_integrals(pr, t_grid, n, seed);
    std::vector<double> x(n);
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        for (std::uint64_t i = 0; i < n; ++i) x[i] = v[i][k];
        auto e = exp_mean_estimate(x, seed);
        double t = t_grid[k];
        run.lambda.push_back(t > 0 ? e.log_mean / (pr.p * t) : std::nan(""));
        run.stderr_.push_back(t > 0 ? e.log_stderr / (pr.p * t) : std::nan(""));
        run.ess.push_back(e.ess);
        if (e.ess < 0.01 * n) run.note += "effective sample size below 1% of n at t=" + std::to_string(t) + "; ";
    }
    // weighted fit lambda = a + b / t over the last third
    const std::size_t K = t_grid.size();
    run.fit_from = K - K / 3;
    double s0 = 0, s1 = 0, s2 = 0, y0 = 0, y1 = 0;
    std::size_t used = 0;
    for (std::size_t k = run.fit_from; k < K; ++k) {
        if (!(t_grid[k] > 0) || !(run.stderr_[k] > 0)) continue;
        double w = 1 / (run.stderr_[k] * run.stderr_[k]), u = 1 / t_grid[k];
        s0 += w;
        s1 += w * u;
        s2 += w * u * u;
        y0 += w * run.lambda[k];
        y1 += w * u * run.lambda[k];
        ++used;
    }
    double det = s0 * s2 - s1 * s1;
    if (used >= 2 && det > 0) {
        run.plateau = (s2 * y0 - s1 * y1) / det;
        run.slope = (s0 * y1 - s1 * y0) / det;
        run.plateau_stderr = std::sqrt(s2 / det);
        run.fit_ok = true;
    } else {
        run.note += "fit window too short; ";
        run.plateau = run.lambda.empty() ? std::nan("") : run.lambda.back();
        run.plateau_stderr = run.stderr_.empty() ? std::nan("") : run.stderr_.back();
    }
    double tol = sigma * run.plateau_stderr;
    run.within_bounds = run.plateau >= pr.rho * pr.gamma - tol && run.plateau <= pr.gamma + tol;
    run.nondecreasing = true;
    for (std::size_t k = 1; k < K; ++k) {
        if (!(t_grid[k - 1] > 0)) continue;
        double sd = std::hypot(run.stderr_[k], run.stderr_[k - 1]);
        if (run.lambda[k] < run.lambda[k - 1] - sigma * sd) run.nondecreasing = false;
    }
    return run;
}

McEstimate range_mean(const Kernel& k, double t, std::uint64_t n, std::uint64_t seed)
{
    validate(k);
    if (n < 2) throw std::invalid_argument("range_mean: n >= 2");
    std::vector<double> w;
    for (const auto& o : k.offsets) w.push_back(o.w);
    std::vector<double> r(n);
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < nn; ++i) {
        auto g = stream(seed, static_cast<std::uint64_t>(i));
        std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
        // coordinates packed into 21-bit fields
        auto pack = [&](const Coord& x) {
            std::uint64_t key = 0;
            for (int v : x) key = (key << 21) | static_cast<std::uint64_t>((v + (1 << 20)) & ((1 << 21) - 1));
            return key;
        };
        Coord x(k.d, 0);
        std::unordered_set<std::uint64_t> seen{pack(x)};
        double s = exponential(g, k.rate);
        while (s <= t) {
            const auto& dz = k.offsets[pick(g)].dz;
            for (int j = 0; j < k.d; ++j) x[j] += dz[j];
            seen.insert(pack(x));
            s += exponential(g, k.rate);
        }
        r[i] = static_cast<double>(seen.size());
    }
    return mean_estimate(r, seed);
}

BlockingBound blocking_lower_bound(const MomentParams& pr, const std::vector<std::size_t>& Q, double t,
                                   std::uint64_t n, std::uint64_t seed)
{
    check(pr, {t});
    if (pr.eta) throw std::invalid_argument("blocking bound: needs the equilibrium start");
    std::vector<std::uint8_t> inQ(pr.torus.sites(), 0);
    for (auto z : Q) {
        if (z >= inQ.size()) throw std::invalid_argument("blocking bound: Q outside the torus");
        inQ[z] = 1;
    }
    if (!inQ[0]) throw std::invalid_argument("blocking bound: Q must contain the origin");
    const int d = pr.torus.d();
    std::vector<double> occ(n), stay(n);
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 256)
    for (std::int64_t i = 0; i < nn; ++i) {
        auto g = stream(seed, static_cast<std::uint64_t>(i));
        auto eta = sample_initial(pr.torus, pr.rho, g);
        bool ok = true;
        for (auto z : Q) ok = ok && eta.bits[z];
        if (ok && pr.catalyst_speed > 0) {
            auto sched = build_schedule(pr.torus, pr.kernel, pr.catalyst_speed * t, g);
            for (const auto& e : sched.events) {
                const Bond& b = sched.bonds[e.bond];
                std::swap(eta.bits[b.a], eta.bits[b.b]);
                if ((inQ[b.a] && !eta.bits[b.a]) || (inQ[b.b] && !eta.bits[b.b])) {
                    ok = false;
                    break;
                }
            }
        }
        occ[i] = ok;
        // one walker at rate kappa per neighbour
        bool in = true;
        if (pr.kappa > 0) {
            std::uniform_int_distribution<int> dir(0, 2 * d - 1);
            std::size_t x = 0;
            double s = exponential(g, 2.0 * d * pr.kappa);
            while (s <= t && in) {
                int e = dir(g);
                Coord dz(d, 0);
                dz[e / 2] = e % 2 ? -1 : 1;
                x = pr.torus.shift(x, dz);
                in = inQ[x];
                s += exponential(g, 2.0 * d * pr.kappa);
            }
        }
        stay[i] = in;
    }
    BlockingBound b;
    b.p_occupied = mean_estimate(occ, seed);
    b.p_stay = mean_estimate(stay, seed);
    b.range = range_mean(pr.kernel.with_rate(pr.kernel.rate * pr.catalyst_speed), t, n, seed ^ 0x5eed);
    const double p = std::max(1, pr.p);
    b.occupied_floor = std::pow(pr.rho, Q.size() * b.range.mean);
    b.zero_count = b.p_occupied.mean == 0 || b.p_stay.mean == 0;
    if (t == 0) {
        b.bound = b.range_bound = pr.gamma;
    } else {
        b.bound = b.zero_count ? -inf
                               : pr.gamma + std::log(b.p_occupied.mean) / (p * t) + std::log(b.p_stay.mean) / t;
        b.range_bound = b.p_stay.mean == 0 ? -inf
                                           : pr.gamma - Q.size() * std::log(1 / pr.rho) * b.range.mean / (p * t) +
                                                 std::log(b.p_stay.mean) / t;
    }
    return b;
}

WalkSkeleton sample_skeleton(int d, double rate, double t, std::mt19937_64& g)
{
    WalkSkeleton w;
    w.times.push_back(0);
    w.positions.push_back(Coord(d, 0));
    std::uniform_int_distribution<int> dir(0, 2 * d - 1);
    double s = exponential(g, rate);
    while (s < t) {
        Coord x = w.positions.back();
        int e = dir(g);
        x[e / 2] += e % 2 ? -1 : 1;
        w.times.push_back(s);
        w.positions.push_back(std::move(x));
        s += exponential(g, rate);
    }
    return w;
}

double probe_path_value(const WalkSkeleton& w, double kappa, double shift, double t)
{
    if (!(t > 0) || !(kappa > 0) || shift < 0) throw std::invalid_argument("probe: bad parameters");
    if (w.times.empty() || w.times[0] != 0) throw std::invalid_argument("probe: skeleton must start at 0");
    const int d = static_cast<int>(w.positions[0].size());
    const std::size_t J = w.times.size();
    long span = 0;
    for (int j = 0; j < d; ++j) {
        int lo = 0, hi = 0;
        for (const auto& x : w.positions) lo = std::min(lo, x[j]), hi = std::max(hi, x[j]);
        span = std::max<long>(span, hi - lo);
    }
    const double first = std::min(t / 4, 0.05 * std::min(kappa, 1e6));
    auto rule = gauss_panels(geometric_breaks(0, t, first, 1.3), 16);
    double total = 0;
    std::vector<double> row;
    for (std::size_t q = 0; q < rule.x.size(); ++q) {
        const double sigma = rule.x[q];
        row = p1_row((sigma / kappa + shift) / d, span);
        auto p = [&](const Coord& a, const Coord& b) {
            double v = 1;
            for (int j = 0; j < d; ++j) v *= row[std::abs(b[j] - a[j])];
            return v;
        };
        // int_0^{t - sigma} p(X_s, X_{s + sigma}) ds, sweeping the breaks tau_k and tau_k - sigma
        const double end = t - sigma;
        std::size_t i = 0;
        std::size_t j = std::upper_bound(w.times.begin(), w.times.end(), sigma) - w.times.begin() - 1;
        double s = 0, acc = 0;
        while (s < end) {
            double ni = i + 1 < J ? w.times[i + 1] : inf;
            double nj = j + 1 < J ? w.times[j + 1] - sigma : inf;
            double next = std::min({ni, nj, end});
            acc += (next - s) * p(w.positions[i], w.positions[j]);
            s = next;
            if (ni <= next) ++i;
            if (nj <= next) ++j;
        }
        total += rule.w[q] * acc;
    }
    return total / t;
}

ProbeResult asymptotic_probe(int d, double kappa, double shift, double t, std::uint64_t n, std::uint64_t seed)
{
    if (d <= 2) throw std::invalid_argument("asymptotic_probe: d >= 3 required");
    if (n < 2) throw std::invalid_argument("asymptotic_probe: n >= 2");
    std::vector<double> v(n);
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < nn; ++i) {
        auto g = stream(seed, static_cast<std::uint64_t>(i));
        v[i] = probe_path_value(sample_skeleton(d, 2.0 * d, t, g), kappa, shift, t);
    }
    ProbeResult r;
    r.estimate = mean_estimate(v, seed);
    const double one = std::isinf(kappa) ? 1.0 : 1 + 1 / (2 * d * kappa);
    r.target = green(srw_kernel(d, 1.0), shift) / (2 * d * one);
    r.relative_gap = std::abs(r.estimate.mean - r.target) / r.target;
    return r;
}

} // namespace sepam
