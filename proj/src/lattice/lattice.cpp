#include "sepam/lattice.hpp"
#include "sepam/quad.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sepam {

Torus::Torus(int d, int L) : d_(d), L_(L)
{
    if (d < 1) throw std::invalid_argument("Torus: d must be >= 1");
    if (L < 2 || L % 2 != 0) throw std::invalid_argument("Torus: L must be even and >= 2");
    n_ = 1;
    for (int i = 0; i < d; ++i) n_ *= static_cast<std::size_t>(L);
}

Coord Torus::coords(std::size_t site) const
{
    Coord c(d_);
    for (int i = 0; i < d_; ++i) {
        c[i] = static_cast<int>(site % L_);
        site /= L_;
    }
    return c;
}

std::size_t Torus::index(const Coord& c) const
{
    std::size_t s = 0;
    for (int i = d_ - 1; i >= 0; --i) s = s * L_ + static_cast<std::size_t>(wrap(c[i]));
    return s;
}

std::size_t Torus::shift(std::size_t site, const Coord& dz) const
{
    Coord c = coords(site);
    for (int i = 0; i < d_; ++i) c[i] += dz[i];
    return index(c);
}

int Torus::centered(int x) const
{
    int w = wrap(x);
    return w > L_ / 2 ? w - L_ : w;
}

Coord Torus::displacement(std::size_t from, std::size_t to) const
{
    Coord a = coords(from), b = coords(to);
    for (int i = 0; i < d_; ++i) b[i] = centered(b[i] - a[i]);
    return b;
}

int Torus::distance(std::size_t a, std::size_t b) const
{
    int s = 0;
    for (int x : displacement(a, b)) s += std::abs(x);
    return s;
}

bool Kernel::is_srw() const
{
    if (static_cast<int>(offsets.size()) != 2 * d) return false;
    for (const auto& o : offsets) {
        int nz = 0, l1 = 0;
        for (int x : o.dz) {
            nz += x != 0;
            l1 += std::abs(x);
        }
        if (nz != 1 || l1 != 1 || std::abs(o.w - 1.0 / (2 * d)) > 1e-15) return false;
    }
    return true;
}

Kernel srw_kernel(int d, double rate)
{
    if (d < 1) throw std::invalid_argument("srw_kernel: d must be >= 1");
    if (!(rate > 0)) throw std::invalid_argument("srw_kernel: rate must be positive");
    Kernel k;
    k.d = d;
    k.rate = rate;
    for (int i = 0; i < d; ++i)
        for (int s : {+1, -1}) {
            Coord e(d, 0);
            e[i] = s;
            k.offsets.push_back({e, 1.0 / (2 * d)});
        }
    return k;
}

void validate(const Kernel& k)
{
    double s = 0;
    for (const auto& o : k.offsets) {
        if (static_cast<int>(o.dz.size()) != k.d) throw std::invalid_argument("Kernel: offset dimension");
        bool zero = true;
        for (int x : o.dz) zero = zero && x == 0;
        if (zero && o.w != 0) throw std::invalid_argument("Kernel: weight at zero displacement");
        s += o.w;
        double wneg = 0;
        for (const auto& q : k.offsets) {
            bool neg = true;
            for (int i = 0; i < k.d; ++i) neg = neg && q.dz[i] == -o.dz[i];
            if (neg) wneg += q.w;
        }
        if (std::abs(wneg - o.w) > 1e-14) throw std::invalid_argument("Kernel: not symmetric");
    }
    if (std::abs(s - 1) > 1e-14) throw std::invalid_argument("Kernel: weights must sum to 1");
}

namespace {

int trapezoid_points(double t, long n, long spread = 1)
{
    return static_cast<int>(std::abs(n) + spread * (10.0 * std::sqrt(t) + 32.0)) + 1;
}

} // namespace

double p1(double t, long n)
{
    if (t < 0) throw std::invalid_argument("p1: negative time");
    n = std::abs(n);
    if (t == 0) return n == 0 ? 1.0 : 0.0;
    const int N = trapezoid_points(t, n);
    const double h = 2 * std::numbers::pi / N;
    // symmetric in j <-> N-j
    double s = 1.0; // j = 0
    for (int j = 1; 2 * j < N; ++j) {
        double k = h * j;
        s += 2.0 * std::exp(-t * (1 - std::cos(k))) * std::cos(n * k);
    }
    if (N % 2 == 0) s += std::exp(-2 * t) * ((n % 2) ? -1.0 : 1.0);
    return std::max(0.0, s / N);
}

std::vector<double> p1_row(double t, long nmax)
{
    if (t < 0) throw std::invalid_argument("p1_row: negative time");
    std::vector<double> r(nmax + 1, 0.0);
    if (t == 0) {
        r[0] = 1.0;
        return r;
    }
    const int N = trapezoid_points(t, nmax);
    const double h = 2 * std::numbers::pi / N;
    for (int j = 0; j < N; ++j) {
        double k = h * j;
        double e = std::exp(-t * (1 - std::cos(k)));
        // cos(nk) by the Chebyshev recurrence
        double c0 = 1.0, c1 = std::cos(k), tc = 2 * c1;
        r[0] += e;
        if (nmax >= 1) r[1] += e * c1;
        for (long n = 2; n <= nmax; ++n) {
            double c2 = tc * c1 - c0;
            r[n] += e * c2;
            c0 = c1;
            c1 = c2;
        }
    }
    for (double& x : r) x = std::max(0.0, x / N);
    return r;
}

namespace {

double general_1d(const Kernel& k, double t, long n)
{
    long m = 0;
    for (const auto& o : k.offsets) m = std::max<long>(m, std::abs(o.dz[0]));
    const double tt = k.rate * t;
    const int N = trapezoid_points(tt, n, std::max<long>(m, 1));
    const double h = 2 * std::numbers::pi / N;
    double s = 0;
    for (int j = 0; j < N; ++j) {
        double kk = h * j, phi = 0;
        for (const auto& o : k.offsets) phi += o.w * (1 - std::cos(kk * o.dz[0]));
        s += std::exp(-tt * phi) * std::cos(n * kk);
    }
    return std::max(0.0, s / N);
}

} // namespace

double transition_prob(const Kernel& k, double t, const Coord& z)
{
    if (t < 0) throw std::invalid_argument("transition_prob: negative time");
    if (static_cast<int>(z.size()) != k.d) throw std::invalid_argument("transition_prob: dimension");
    if (k.is_srw()) {
        double tau = k.rate * t / k.d, p = 1.0;
        for (int x : z) p *= p1(tau, x);
        return p;
    }
    if (k.d == 1) return general_1d(k, t, z[0]);
    throw std::invalid_argument("transition_prob: non-SRW kernels only in d = 1");
}

double torus_transition_prob(const Kernel& k, const Torus& T, double t, const Coord& z)
{
    if (!k.is_srw()) {
        if (k.d != 1) throw std::invalid_argument("torus_transition_prob: SRW only for d > 1");
    }
    const double tau = k.rate * t / k.d;
    const long reach = static_cast<long>(10 * std::sqrt(k.rate * t) + 40);
    auto sum_images = [&](auto&& f, int x) {
        double s = 0;
        for (long m = -(reach / T.L() + 2); m <= reach / T.L() + 2; ++m) s += f(x + m * T.L());
        return s;
    };
    if (k.is_srw()) {
        double p = 1.0;
        for (int x : z) p *= sum_images([&](long y) { return p1(tau, y); }, x);
        return p;
    }
    return sum_images([&](long y) { return general_1d(k, t, y); }, z[0]);
}

namespace {

// coefficients of the large-x expansion e^{-x} I_n(x) sqrt(2 pi x)
// = sum_k c_k x^{-k}
std::vector<double> bessel_asymptotic(long n, int K)
{
    std::vector<double> c(K + 1);
    double a = 1.0, nu2 = 4.0 * double(n) * double(n);
    c[0] = 1.0;
    for (int k = 1; k <= K; ++k) {
        a *= (nu2 - double(2 * k - 1) * double(2 * k - 1)) / (8.0 * k);
        c[k] = (k % 2 ? -a : a);
    }
    return c;
}

// d * int_X^inf (2 pi x)^{-d/2} prod_j S_{z_j}(x) dx
double asymptotic_tail(int d, const Coord& z, double X)
{
    const int K = 8;
    std::vector<double> poly(K + 1, 0.0);
    poly[0] = 1.0;
    for (int j = 0; j < d; ++j) {
        auto c = bessel_asymptotic(j < static_cast<int>(z.size()) ? z[j] : 0, K);
        std::vector<double> np(K + 1, 0.0);
        for (int a = 0; a <= K; ++a)
            for (int b = 0; a + b <= K; ++b) np[a + b] += poly[a] * c[b];
        poly = np;
    }
    double s = 0;
    for (int k = 0; k <= K; ++k) {
        double e = d / 2.0 + k - 1.0; // int_X^inf x^{-d/2-k} = X^{-e}/e
        s += poly[k] * std::pow(X, -e) / e;
    }
    return d * std::pow(2 * std::numbers::pi, -d / 2.0) * s;
}

} // namespace

double green_at(const Kernel& k, const Coord& z, double t_min)
{
    if (!k.is_srw()) throw std::invalid_argument("green: SRW kernels only");
    if (t_min < 0) throw std::invalid_argument("green: negative t_min");
    const int d = k.d;
    if (d <= 2) throw std::domain_error("green: recurrent walk, the integral diverges");
    // s = d x, p_s(0,z) = prod_j p1(x, z_j)
    const double x0 = t_min / d;
    const double X = std::max(2e4, 4.0 * x0);
    auto integrand = [&](double x) {
        double p = 1.0;
        for (int j = 0; j < d; ++j) p *= p1(x, z[j]);
        return p;
    };
    auto rule = gauss_panels(geometric_breaks(x0, X, 0.05, 1.4), 20);
    double s = d * rule.integrate(integrand);
    return s + asymptotic_tail(d, z, X);
}

double green(const Kernel& k, double t_min)
{
    return green_at(k, Coord(k.d, 0), t_min);
}

} // namespace sepam
