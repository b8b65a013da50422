#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sepam {

using Coord = std::vector<int>;

// Periodic box {0..L-1}^d.  Sites are numbered with the first coordinate
// running fastest.
class Torus {
public:
    Torus() = default;
    Torus(int d, int L);

    int d() const { return d_; }
    int L() const { return L_; }
    std::size_t sites() const { return n_; }

    Coord coords(std::size_t site) const;
    std::size_t index(const Coord& c) const; // wraps
    std::size_t shift(std::size_t site, const Coord& dz) const;
    int wrap(int x) const { return ((x % L_) + L_) % L_; }
    // representative of x in (-L/2, L/2]
    int centered(int x) const;
    Coord displacement(std::size_t from, std::size_t to) const;
    int distance(std::size_t a, std::size_t b) const; // l1, wrapped

private:
    int d_ = 1, L_ = 2;
    std::size_t n_ = 2;
};

struct Offset {
    Coord dz;
    double w;
};

// Symmetric jump kernel; the walk jumps at `rate` and picks dz with prob. w.
struct Kernel {
    int d = 1;
    std::vector<Offset> offsets;
    double rate = 1.0;

    bool is_srw() const;
    Kernel with_rate(double r) const
    {
        Kernel k = *this;
        k.rate = r;
        return k;
    }
};

Kernel srw_kernel(int d, double rate);
void validate(const Kernel& k);

// e^{-t} I_n(t): one-dimensional walk jumping +-1 at total rate 1.
// Periodic trapezoid on the Fourier integral, aliasing error below 1e-15.
double p1(double t, long n);
// p1(t, n) for n = 0..nmax
std::vector<double> p1_row(double t, long nmax);

// p_t(0,z) for the continuous-time walk of `k` (with its rate).
double transition_prob(const Kernel& k, double t, const Coord& z);
// Same, summed over periodic images on a torus.
double torus_transition_prob(const Kernel& k, const Torus& T, double t, const Coord& z);

// int_{t_min}^inf p_s(0,0) ds for the rate-1 version of `k`.
double green(const Kernel& k, double t_min = 0.0);
// int_{t_min}^inf p_s(0,z) ds, rate-1 walk
double green_at(const Kernel& k, const Coord& z, double t_min = 0.0);

// Second method for G_d: sum of n-step return probabilities of the discrete
// SRW by binomial allocation of steps to coordinates, up to nmax, plus a
// fitted n^{-d/2}(1 + c1/n + c2/n^2) tail.  Supports d = 3, 4.
struct GreenSeries {
    double value;
    double partial;
    double tail;
    long nmax;
};
GreenSeries green_series(int d, long nmax = 100000);

// log P(S_n = 0) for discrete-time SRW, n even (d = 1..4)
double log_return_prob(int d, long n);

// n-step probability of discrete SRW, by dynamic programming (small n).
double srw_nstep(int d, int n, const Coord& z);

// Half-space H+ = {x : x_1 >= 1}, walk with steps out of H+ suppressed.
// p^+_t(x,y) = p_t(x,y) + p_t(x,y*), y* = (1 - y_1, y_2, ...).
double halfspace_transition(const Kernel& k, double t, const Coord& x, const Coord& y);
double halfspace_nstep(int d, int n, const Coord& x, const Coord& y);

// max_t p_t(0,0) (1+t)^{d/2} over a grid of [0, tmax]: the constant of the
// standard heat-kernel decay bound, fitted rather than assumed.
double decay_constant(const Kernel& k, double tmax, int npts = 400);

// p_t(0,z) on a window |z_i| <= radius for a list of times.
struct HeatKernelTable {
    Kernel kernel;
    std::vector<double> times;
    int radius = 0;
    double tol = 1e-10;
    std::vector<double> values; // [time][site in window]

    std::size_t window_size() const;
    double at(std::size_t ti, const Coord& z) const;
    double slice_mass(std::size_t ti) const;

    static HeatKernelTable build(const Kernel& k, std::vector<double> times, int radius);
    // columnar text: time, displacement (comma separated), value
    std::string to_text() const;
    static HeatKernelTable from_text(const Kernel& k, const std::string& s);
    std::string cache_key() const;
};

// Uses $SEPAM_HK_CACHE as a directory if set; otherwise just builds.
HeatKernelTable cached_heat_kernel(const Kernel& k, const std::vector<double>& times, int radius);

} // namespace sepam
