#include "sepam/expm.hpp"
#include "sepam/fields.hpp"
#include "sepam/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace sepam {

namespace {

struct Axis {
    int lo, hi;
};

std::vector<Axis> axes(const CauchyProblem& pb)
{
    if (pb.d < 1 || pb.extent < 1) throw std::invalid_argument("CauchyProblem: bad geometry");
    std::vector<Axis> a(pb.d);
    for (int j = 0; j < pb.d; ++j) {
        switch (pb.domain) {
        case Domain::Periodic: a[j] = {0, pb.extent - 1}; break;
        case Domain::Box: a[j] = {-pb.extent, pb.extent}; break;
        case Domain::HalfSpace: a[j] = j == 0 ? Axis{1, pb.extent} : Axis{-pb.extent, pb.extent}; break;
        }
    }
    return a;
}

} // namespace

std::size_t CauchyProblem::sites() const
{
    std::size_t n = 1;
    for (auto a : axes(*this)) n *= static_cast<std::size_t>(a.hi - a.lo + 1);
    return n;
}

std::size_t CauchyProblem::site(const Coord& x) const
{
    auto ax = axes(*this);
    std::size_t s = 0;
    for (int j = d - 1; j >= 0; --j) {
        int w = ax[j].hi - ax[j].lo + 1;
        int c = x[j];
        if (domain == Domain::Periodic) c = ((c % extent) + extent) % extent;
        if (c < ax[j].lo || c > ax[j].hi) throw std::out_of_range("CauchyProblem: site outside domain");
        s = s * w + static_cast<std::size_t>(c - ax[j].lo);
    }
    return s;
}

Coord CauchyProblem::coord(std::size_t i) const
{
    auto ax = axes(*this);
    Coord x(d);
    for (int j = 0; j < d; ++j) {
        int w = ax[j].hi - ax[j].lo + 1;
        x[j] = ax[j].lo + static_cast<int>(i % w);
        i /= w;
    }
    return x;
}

std::vector<long> CauchyProblem::neighbours(std::size_t i) const
{
    auto ax = axes(*this);
    Coord x = coord(i);
    std::vector<long> nb;
    for (int j = 0; j < d; ++j)
        for (int s : {+1, -1}) {
            Coord y = x;
            y[j] += s;
            if (domain == Domain::Periodic || (y[j] >= ax[j].lo && y[j] <= ax[j].hi))
                nb.push_back(static_cast<long>(site(y)));
            else
                nb.push_back(-1);
        }
    return nb;
}

namespace {

// Sites 0..n-1 carry v; n carries the mass integral; n+1 the constant 1.
struct CauchyOp {
    std::size_t n;
    int deg;
    double jump; // rate / 2d
    bool box;
    bool track_mass;
    std::vector<long> nbr; // n * deg
    std::vector<double> c;

    std::size_t size() const { return n + 2; }
    void apply(const std::vector<double>& x, std::vector<double>& y) const
    {
        y.assign(n + 2, 0.0);
        const double one = x[n + 1];
        double m = 0;
        const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for reduction(+ : m) schedule(static)
        for (std::int64_t i = 0; i < nn; ++i) {
            double acc = 0;
            for (int k = 0; k < deg; ++k) {
                long j = nbr[i * deg + k];
                if (j >= 0)
                    acc += x[j] - x[i];
                else if (box)
                    acc += one - x[i];
            }
            y[i] = jump * acc + c[i] * x[i];
            m += c[i] * x[i];
        }
        if (track_mass) y[n] = m;
    }
};

CauchyOp make_op(const CauchyProblem& pb, bool track_mass)
{
    CauchyOp op;
    op.n = pb.sites();
    op.deg = 2 * pb.d;
    op.jump = pb.rate / (2.0 * pb.d);
    op.box = pb.domain == Domain::Box;
    op.track_mass = track_mass;
    op.nbr.resize(op.n * op.deg);
    for (std::size_t i = 0; i < op.n; ++i) {
        auto nb = pb.neighbours(i);
        std::copy(nb.begin(), nb.end(), op.nbr.begin() + i * op.deg);
    }
    op.c.assign(op.n, 0.0);
    return op;
}

std::vector<double> source_on(const CauchyProblem& pb, double a, double b)
{
    std::vector<double> c(pb.sites(), 0.0);
    const double mid = 0.5 * (a + b);
    for (const auto& s : pb.segments) {
        if (s.c.size() != c.size()) throw std::invalid_argument("CauchyProblem: source size");
        if (s.t0 <= mid && mid < s.t1)
            for (std::size_t i = 0; i < c.size(); ++i) c[i] += s.c[i];
    }
    return c;
}

} // namespace

std::vector<CauchySnapshot> solve_cauchy(const CauchyProblem& pb, const std::vector<double>& query_times,
                                         CauchyMode mode)
{
    if (!(pb.horizon >= 0)) throw std::invalid_argument("solve_cauchy: horizon");
    if (!(pb.rate > 0)) throw std::invalid_argument("solve_cauchy: rate");
    for (double q : query_times)
        if (q < 0 || q > pb.horizon) throw std::invalid_argument("solve_cauchy: query time outside [0, horizon]");
    for (const auto& k : pb.kicks)
        if (k.t < 0 || k.t > pb.horizon || k.site >= pb.sites())
            throw std::invalid_argument("solve_cauchy: kick outside the problem");
    const bool stepping = mode == CauchyMode::Stepping;
    CauchyOp op = make_op(pb, stepping);
    const std::size_t n = op.n;

    std::vector<double> cuts{0.0, pb.horizon};
    for (const auto& s : pb.segments) {
        cuts.push_back(std::clamp(s.t0, 0.0, pb.horizon));
        cuts.push_back(std::clamp(s.t1, 0.0, pb.horizon));
    }
    for (const auto& k : pb.kicks) cuts.push_back(std::clamp(k.t, 0.0, pb.horizon));
    for (double q : query_times) cuts.push_back(q);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<double> x(n + 2, 1.0);
    x[n] = 0.0;
    double ls = 0;
    std::vector<CauchySnapshot> out;
    auto apply_kicks = [&](double t) {
        for (const auto& k : pb.kicks)
            if (k.t == t) {
                double dv = (std::exp(k.a) - 1) * x[k.site];
                x[k.site] += dv;
                if (stepping) x[n] += dv; // keeps sum_w = mass on conservative domains
            }
    };
    auto snapshot = [&](double t) {
        for (double q : query_times)
            if (q == t) {
                CauchySnapshot s;
                s.t = t;
                double f = std::exp(ls);
                s.v.resize(n);
                double sw = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    s.v[i] = x[i] * f;
                    sw += s.v[i] - 1;
                }
                s.sum_w = sw;
                s.mass = stepping ? x[n] * f : std::nan("");
                out.push_back(std::move(s));
                break;
            }
    };
    apply_kicks(0.0);
    snapshot(0.0);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        double a = cuts[k], b = cuts[k + 1];
        op.c = source_on(pb, a, b);
        double cmax = 0, csum = 0;
        for (double v : op.c) {
            cmax = std::max(cmax, std::abs(v));
            csum += std::abs(v);
        }
        ScaledVector r;
        if (stepping) {
            double norm = std::max(2 * pb.rate + cmax, csum);
            r = taylor_expv(op, b - a, x, norm);
        } else {
            r = uniformized_expv(op, b - a, x, pb.rate + cmax);
        }
        x = std::move(r.v);
        ls += r.log_scale;
        apply_kicks(b);
        snapshot(b);
    }
    return out;
}

std::vector<McEstimate> solve_cauchy_mc(const CauchyProblem& pb, const std::vector<std::size_t>& sites,
                                        std::uint64_t n, std::uint64_t seed)
{
    const std::size_t ns = pb.sites();
    const int deg = 2 * pb.d;
    std::vector<long> nbr(ns * deg);
    for (std::size_t i = 0; i < ns; ++i) {
        auto nb = pb.neighbours(i);
        std::copy(nb.begin(), nb.end(), nbr.begin() + i * deg);
    }
    const double t = pb.horizon;
    std::vector<McEstimate> out;
    for (std::size_t q = 0; q < sites.size(); ++q) {
        std::vector<double> logs(n);
        const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
        for (std::int64_t trial = 0; trial < nn; ++trial) {
            auto g = stream(seed + q, static_cast<std::uint64_t>(trial));
            std::uniform_int_distribution<int> dir(0, deg - 1);
            long x = static_cast<long>(sites[q]);
            double s = 0, acc = 0;
            // path time s corresponds to solver time t - s
            auto collect = [&](double s0, double s1, long site) {
                for (const auto& seg : pb.segments) {
                    double lo = std::max(seg.t0, t - s1), hi = std::min(seg.t1, t - s0);
                    if (hi > lo) acc += seg.c[site] * (hi - lo);
                }
                for (const auto& k : pb.kicks) {
                    double sk = t - k.t;
                    bool hit = (sk >= s0 && sk < s1) || (s1 == t && sk == t);
                    if (hit && static_cast<long>(k.site) == site) acc += k.a;
                }
            };
            bool alive = true;
            while (alive) {
                double next = s + exponential(g, pb.rate);
                if (next >= t) {
                    collect(s, t, x);
                    break;
                }
                collect(s, next, x);
                long y = nbr[x * deg + dir(g)];
                if (y >= 0)
                    x = y;
                else if (pb.domain == Domain::Box)
                    alive = false; // left the box, v = 1 outside
                s = next;
            }
            logs[trial] = acc;
        }
        out.push_back(exp_mean_estimate(logs, seed + q));
    }
    return out;
}

std::vector<SourceSegment> moving_source(const CauchyProblem& pb, const std::vector<double>& times,
                                         const std::vector<Coord>& positions, double strength,
                                         const std::function<double(const Coord&)>& profile)
{
    if (times.size() != positions.size() || times.empty()) throw std::invalid_argument("moving_source: path");
    std::vector<SourceSegment> segs;
    const std::size_t n = pb.sites();
    for (std::size_t k = 0; k < times.size(); ++k) {
        double t0 = times[k], t1 = k + 1 < times.size() ? times[k + 1] : pb.horizon;
        t0 = std::max(t0, 0.0);
        t1 = std::min(t1, pb.horizon);
        if (t1 <= t0) continue;
        SourceSegment s{t0, t1, std::vector<double>(n)};
        for (std::size_t i = 0; i < n; ++i) {
            Coord x = pb.coord(i);
            for (int j = 0; j < pb.d; ++j) {
                x[j] -= positions[k][j];
                if (pb.domain == Domain::Periodic) {
                    int L = pb.extent, w = ((x[j] % L) + L) % L;
                    x[j] = w > L / 2 ? w - L : w;
                }
            }
            s.c[i] = strength * profile(x);
        }
        segs.push_back(std::move(s));
    }
    return segs;
}

ContractionCertificate green_contraction(const CauchyProblem& pb)
{
    if (pb.domain == Domain::Periodic) throw std::invalid_argument("green_contraction: needs Z^d or H+");
    std::vector<double> c(pb.sites(), 0.0);
    if (!pb.segments.empty()) {
        c = pb.segments.front().c;
        for (const auto& s : pb.segments)
            if (s.c != c) throw std::invalid_argument("green_contraction: source must be time independent");
    }
    auto k = srw_kernel(pb.d, 1.0);
    std::map<Coord, double> cache;
    auto G = [&](Coord z) {
        for (int& v : z) v = std::abs(v);
        std::sort(z.begin(), z.end()); // symmetric in coordinates
        auto it = cache.find(z);
        if (it != cache.end()) return it->second;
        double v = green_at(k, z) / pb.rate;
        cache.emplace(z, v);
        return v;
    };
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c[i] != 0) support.push_back(i);
    ContractionCertificate cert;
    for (std::size_t xi : support) {
        Coord x = pb.coord(xi);
        double s = 0;
        for (std::size_t yi : support) {
            Coord y = pb.coord(yi), dz(pb.d);
            for (int j = 0; j < pb.d; ++j) dz[j] = y[j] - x[j];
            double gxy = G(dz);
            if (pb.domain == Domain::HalfSpace) {
                dz[0] = 1 - y[0] - x[0];
                gxy += G(dz);
            }
            s += gxy * std::abs(c[yi]);
        }
        cert.theta = std::max(cert.theta, s);
    }
    cert.certified = cert.theta < 1;
    cert.bound = cert.certified ? cert.theta / (1 - cert.theta) : INFINITY;
    return cert;
}

} // namespace sepam
