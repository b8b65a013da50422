#include "sepam/lattice.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sepam {

namespace {

struct LogFact {
    std::vector<double> t;
    explicit LogFact(long n) : t(n + 1)
    {
        t[0] = 0;
        for (long i = 1; i <= n; ++i) t[i] = t[i - 1] + std::log(double(i));
    }
    double operator()(long i) const { return t[i]; }
};

// log of C(m, m/2) / 2^m, m even
double log_q(const LogFact& lf, long m)
{
    return lf(m) - 2 * lf(m / 2) - m * std::numbers::ln2;
}

double log_return(const LogFact& lf, int d, long n)
{
    if (n % 2) return -INFINITY;
    switch (d) {
    case 1: return log_q(lf, n);
    case 2: return 2 * log_q(lf, n);
    case 3:
    case 4: {
        // m steps go to the first block: one axis for d = 3, two axes for d = 4
        const double pr = d == 3 ? 1.0 / 3 : 0.5;
        const double lp = std::log(pr), lq = std::log1p(-pr);
        const double mean = pr * n, w = 12 * std::sqrt(double(n)) + 4;
        long lo = std::max(0L, static_cast<long>(mean - w)), hi = std::min(n, static_cast<long>(mean + w));
        lo += lo % 2;
        double mx = -INFINITY;
        std::vector<double> terms;
        terms.reserve((hi - lo) / 2 + 1);
        for (long m = lo; m <= hi; m += 2) {
            double a = lf(n) - lf(m) - lf(n - m) + m * lp + (n - m) * lq;
            double b = d == 3 ? log_q(lf, m) + 2 * log_q(lf, n - m)
                              : 2 * log_q(lf, m) + 2 * log_q(lf, n - m);
            terms.push_back(a + b);
            mx = std::max(mx, a + b);
        }
        double s = 0;
        for (double x : terms) s += std::exp(x - mx);
        return mx + std::log(s);
    }
    default: throw std::invalid_argument("return probability: d must be 1..4");
    }
}

} // namespace

double log_return_prob(int d, long n)
{
    LogFact lf(n);
    return log_return(lf, d, n);
}

GreenSeries green_series(int d, long nmax)
{
    if (d != 3 && d != 4) throw std::invalid_argument("green_series: d must be 3 or 4");
    if (nmax < 400) throw std::invalid_argument("green_series: nmax too small");
    nmax -= nmax % 8;
    LogFact lf(nmax);
    const long K = nmax / 2;
    std::vector<double> p(K + 1);
#pragma omp parallel for schedule(dynamic, 64)
    for (long k = 0; k <= K; ++k) p[k] = std::exp(log_return(lf, d, 2 * k));
    double partial = 0;
    for (long k = K; k >= 0; --k) partial += p[k];

    // fit p_n = A n^{-d/2} + B n^{-d/2-1} + C n^{-d/2-2} through n = N, N/2, N/4
    const double a = d / 2.0;
    Eigen::Matrix3d M;
    Eigen::Vector3d rhs;
    long ns[3] = {nmax, nmax / 2, nmax / 4};
    for (int i = 0; i < 3; ++i) {
        double n = double(ns[i]);
        for (int j = 0; j < 3; ++j) M(i, j) = std::pow(n, -a - j);
        rhs(i) = p[ns[i] / 2];
    }
    Eigen::Vector3d c = M.colPivHouseholderQr().solve(rhs);

    // sum_{k > K} F(k), F(k) = sum_j c_j (2k)^{-a-j}, by Euler-Maclaurin
    double tail = 0;
    const double x = 2.0 * K;
    for (int j = 0; j < 3; ++j) {
        double e = a + j;
        double integral = std::pow(x, 1 - e) / (2 * (e - 1)); // int_K^inf (2k)^{-e} dk
        double f = std::pow(x, -e);
        double f1 = -2 * e * std::pow(x, -e - 1);
        double f3 = -8 * e * (e + 1) * (e + 2) * std::pow(x, -e - 3);
        tail += c(j) * (integral - f / 2 - f1 / 12 + f3 / 720);
    }
    return {partial + tail, partial, tail, nmax};
}

double srw_nstep(int d, int n, const Coord& z)
{
    if (n < 0 || d < 1 || static_cast<int>(z.size()) != d) throw std::invalid_argument("srw_nstep");
    int l1 = 0;
    for (int x : z) l1 += std::abs(x);
    if (l1 > n || (n - l1) % 2) return 0.0;
    const int R = n, W = 2 * R + 1;
    std::size_t sz = 1;
    for (int i = 0; i < d; ++i) sz *= W;
    std::vector<double> cur(sz, 0.0), nxt(sz);
    std::vector<std::size_t> stride(d, 1);
    for (int i = 1; i < d; ++i) stride[i] = stride[i - 1] * W;
    std::size_t origin = 0;
    for (int i = 0; i < d; ++i) origin += R * stride[i];
    cur[origin] = 1.0;
    for (int step = 0; step < n; ++step) {
        std::fill(nxt.begin(), nxt.end(), 0.0);
        for (std::size_t s = 0; s < sz; ++s) {
            if (cur[s] == 0) continue;
            std::size_t r = s;
            for (int i = 0; i < d; ++i) {
                int c = static_cast<int>(r % W);
                r /= W;
                if (c > 0) nxt[s - stride[i]] += cur[s] / (2 * d);
                if (c < W - 1) nxt[s + stride[i]] += cur[s] / (2 * d);
            }
        }
        cur.swap(nxt);
    }
    std::size_t idx = 0;
    for (int i = 0; i < d; ++i) idx += (z[i] + R) * stride[i];
    return cur[idx];
}

namespace {

void check_halfspace(const Coord& x, const Coord& y)
{
    if (x.empty() || y.size() != x.size()) throw std::invalid_argument("halfspace: dimension");
    if (x[0] < 1 || y[0] < 1) throw std::invalid_argument("halfspace: site outside H+");
}

Coord mirror(const Coord& y)
{
    Coord m = y;
    m[0] = 1 - y[0];
    return m;
}

Coord diff(const Coord& a, const Coord& b)
{
    Coord r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

} // namespace

double halfspace_transition(const Kernel& k, double t, const Coord& x, const Coord& y)
{
    check_halfspace(x, y);
    if (!k.is_srw()) throw std::invalid_argument("halfspace: SRW kernels only");
    return transition_prob(k, t, diff(y, x)) + transition_prob(k, t, diff(mirror(y), x));
}

double halfspace_nstep(int d, int n, const Coord& x, const Coord& y)
{
    check_halfspace(x, y);
    return srw_nstep(d, n, diff(y, x)) + srw_nstep(d, n, diff(mirror(y), x));
}

double decay_constant(const Kernel& k, double tmax, int npts)
{
    double c = 0;
    for (int i = 0; i <= npts; ++i) {
        // denser near zero
        double t = tmax * std::pow(double(i) / npts, 2.0);
        double p = transition_prob(k, t, Coord(k.d, 0));
        c = std::max(c, p * std::pow(1 + t, k.d / 2.0));
    }
    return c;
}

} // namespace sepam
