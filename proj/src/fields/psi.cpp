#include "sepam/fields.hpp"
#include "sepam/quad.hpp"
#include "sepam/rng.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sepam {

double one_kappa(int d, double kappa)
{
    if (!(kappa > 0)) throw std::invalid_argument("one_kappa: kappa must be positive");
    if (std::isinf(kappa)) return 1.0;
    return 1.0 + 1.0 / (2.0 * d * kappa);
}

int window_radius(const PsiSpec& s)
{
    if (s.radius > 0) return s.radius;
    return static_cast<int>(std::ceil(6.0 * std::sqrt(2.0 * s.d * s.T * one_kappa(s.d, s.kappa)))) + 1;
}

std::size_t Field::index(const Coord& z) const
{
    std::size_t s = 0;
    const int w = kind == Window ? 2 * extent + 1 : extent;
    for (int i = d - 1; i >= 0; --i) {
        int c = kind == Window ? z[i] + extent : ((z[i] % extent) + extent) % extent;
        s = s * w + static_cast<std::size_t>(c);
    }
    return s;
}

Coord Field::coord(std::size_t i) const
{
    const int w = kind == Window ? 2 * extent + 1 : extent;
    Coord z(d);
    for (int j = 0; j < d; ++j) {
        z[j] = static_cast<int>(i % w) - (kind == Window ? extent : 0);
        i /= w;
    }
    return z;
}

bool Field::inside(const Coord& z) const
{
    if (kind == Periodic) return true;
    for (int x : z)
        if (std::abs(x) > extent) return false;
    return true;
}

double Field::at(const Coord& z) const
{
    return inside(z) ? values[index(z)] : 0.0;
}

double Field::sum() const
{
    double s = 0;
    for (double v : values) s += v;
    return s;
}

std::string Field::table() const
{
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < values.size(); ++i) {
        Coord z = coord(i);
        for (std::size_t j = 0; j < z.size(); ++j) os << (j ? "," : "") << z[j];
        os << ' ' << values[i] << '\n';
    }
    return os.str();
}

namespace {

Field make_window(int d, int radius)
{
    Field f;
    f.kind = Field::Window;
    f.d = d;
    f.extent = radius;
    std::size_t n = 1;
    for (int i = 0; i < d; ++i) n *= static_cast<std::size_t>(2 * radius + 1);
    f.values.assign(n, 0.0);
    return f;
}

} // namespace

Field chi_field(const PsiSpec& s)
{
    if (s.d < 1 || s.T < 0) throw std::invalid_argument("chi_field: bad spec");
    const int R = window_radius(s);
    Field chi = make_window(s.d, R);
    if (s.T == 0) return chi;
    // chi(z) = (1/c) int_0^{cT} p_s(0,z) ds, c = 2 d 1[kappa]; p_s = prod_j p1(s/d, z_j)
    const double c = 2.0 * s.d * one_kappa(s.d, s.kappa);
    auto rule = gauss_panels(geometric_breaks(0.0, c * s.T, 0.05, 1.5), 20);
    std::vector<std::vector<double>> rows(rule.x.size());
    for (std::size_t k = 0; k < rule.x.size(); ++k) rows[k] = p1_row(rule.x[k] / s.d, R);
    const std::int64_t n = static_cast<std::int64_t>(chi.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        Coord z = chi.coord(static_cast<std::size_t>(i));
        double acc = 0;
        for (std::size_t k = 0; k < rule.x.size(); ++k) {
            double p = rule.w[k];
            for (int x : z) p *= rows[k][std::abs(x)];
            acc += p;
        }
        chi.values[i] = acc / c;
    }
    chi.tail_mass = s.T - chi.sum();
    return chi;
}

Field chi_on_torus(const Field& chi, int L)
{
    Field f;
    f.kind = Field::Periodic;
    f.d = chi.d;
    f.extent = L;
    std::size_t n = 1;
    for (int i = 0; i < chi.d; ++i) n *= static_cast<std::size_t>(L);
    f.values.assign(n, 0.0);
    for (std::size_t i = 0; i < chi.size(); ++i) f.values[f.index(chi.coord(i))] += chi.values[i];
    f.tail_mass = chi.tail_mass;
    return f;
}

Field psi_field(const Configuration& eta, const PsiSpec& s, const Field& chi_t)
{
    const Torus& T = eta.torus;
    if (T.d() != s.d || chi_t.kind != Field::Periodic || chi_t.extent != T.L())
        throw std::invalid_argument("psi_field: geometry mismatch");
    Field psi;
    psi.kind = Field::Periodic;
    psi.d = s.d;
    psi.extent = T.L();
    psi.values.assign(T.sites(), 0.0);
    for (std::size_t x = 0; x < T.sites(); ++x) {
        double acc = 0;
        for (std::size_t z = 0; z < T.sites(); ++z) acc += chi_t.at(T.displacement(x, z)) * (eta.bits[z] - s.rho);
        psi.values[psi.index(T.coords(x))] = acc;
    }
    return psi;
}

Field psi_field(const Configuration& eta, const PsiSpec& s)
{
    return psi_field(eta, s, chi_on_torus(chi_field(s), eta.torus.L()));
}

Field sample_box_configuration(int d, int radius, double rho, std::mt19937_64& g)
{
    Field f = make_window(d, radius);
    std::bernoulli_distribution b(rho);
    for (double& v : f.values) v = b(g) ? 1.0 : 0.0;
    return f;
}

double psi_at(const Field& chi, const Field& eta, double rho, const Coord& x)
{
    double acc = 0;
    Coord z(chi.d);
    for (std::size_t i = 0; i < chi.size(); ++i) {
        Coord c = chi.coord(i);
        for (int j = 0; j < chi.d; ++j) z[j] = x[j] + c[j];
        if (!eta.inside(z)) throw std::out_of_range("psi_at: configuration box too small");
        acc += chi.values[i] * (eta.values[eta.index(z)] - rho);
    }
    return acc;
}

PsiBoundsReport psi_bounds_check(const PsiSpec& s, int samples, std::uint64_t seed, double green_d)
{
    PsiBoundsReport rep;
    rep.samples = samples;
    rep.bound_sites = 2 * s.T;
    rep.bound_swap = 2 * green_d;
    rep.bound_energy = green_d / (2 * s.d);
    Field chi = chi_field(s);
    const int R = chi.extent, Re = R + 2;
    const int d = s.d;
    // flat offsets: chi index -> eta index of the same point (x = 0)
    std::vector<std::int64_t> cstride(d), estride(d);
    cstride[0] = estride[0] = 1;
    for (int j = 1; j < d; ++j) {
        cstride[j] = cstride[j - 1] * (2 * R + 1);
        estride[j] = estride[j - 1] * (2 * Re + 1);
    }
    std::vector<std::int64_t> off(chi.size());
    std::vector<std::vector<int>> coords(chi.size());
    std::int64_t origin = 0;
    for (int j = 0; j < d; ++j) origin += Re * estride[j];
    for (std::size_t i = 0; i < chi.size(); ++i) {
        coords[i] = chi.coord(i);
        off[i] = origin;
        for (int j = 0; j < d; ++j) off[i] += coords[i][j] * estride[j];
    }
    auto psi_fast = [&](const Field& eta, std::int64_t shift) {
        double acc = 0;
        for (std::size_t i = 0; i < chi.size(); ++i) acc += chi.values[i] * (eta.values[off[i] + shift] - s.rho);
        return acc;
    };
    for (int k = 0; k < samples; ++k) {
        auto g = stream(seed, k);
        Field eta = sample_box_configuration(d, Re, s.rho, g);
        double pa = psi_fast(eta, 0);
        for (int i = 0; i < d; ++i)
            rep.diff_sites = std::max(rep.diff_sites, std::abs(psi_fast(eta, estride[i]) - pa));
        // swaps seen from x = 0: (chi(b) - chi(a)) (eta(a) - eta(b)) over bonds {a, a+e}
        double energy = 0;
        for (std::size_t idx = 0; idx < chi.size(); ++idx) {
            for (int i = 0; i < d; ++i) {
                if (coords[idx][i] == R) continue;
                double ea = eta.values[off[idx]], eb = eta.values[off[idx] + estride[i]];
                if (ea == eb) continue;
                double diff = (chi.values[idx + cstride[i]] - chi.values[idx]) * (ea - eb);
                rep.diff_swap = std::max(rep.diff_swap, std::abs(diff));
                energy += diff * diff;
            }
        }
        rep.swap_energy = std::max(rep.swap_energy, energy);
    }
    rep.pass = rep.diff_sites <= rep.bound_sites + rep.tol && rep.diff_swap <= rep.bound_swap + rep.tol &&
               rep.swap_energy <= rep.bound_energy + rep.tol;
    return rep;
}

double KKernels::koff(const Coord& z1, const Coord& z2) const
{
    double s = 0;
    for (const auto& ge : g) s += ge.at(z1) * ge.at(z2);
    return s;
}

double KKernels::koff_l1_window(int r) const
{
    const int d = spec.d;
    r = std::min(r, kdiag.extent);
    std::size_t m = 1;
    for (int i = 0; i < d; ++i) m *= static_cast<std::size_t>(2 * r + 1);
    Field box = make_window(d, r);
    const std::size_t ne = g.size();
    std::vector<double> gv(m * ne);
    for (std::size_t i = 0; i < m; ++i) {
        Coord z = box.coord(i);
        for (std::size_t e = 0; e < ne; ++e) gv[i * ne + e] = g[e].at(z);
    }
    double total = 0;
    const std::int64_t mm = static_cast<std::int64_t>(m);
#pragma omp parallel for reduction(+ : total) schedule(dynamic, 64)
    for (std::int64_t i = 0; i < mm; ++i) {
        double acc = 0;
        for (std::int64_t j = i + 1; j < mm; ++j) {
            double s = 0;
            for (std::size_t e = 0; e < ne; ++e) s += gv[i * ne + e] * gv[j * ne + e];
            acc += std::abs(s);
        }
        total += 2 * acc;
    }
    return total;
}

double KKernels::koff_l1_bound() const
{
    double s = 0;
    for (const auto& ge : g) {
        double n1 = 0;
        for (double v : ge.values) n1 += std::abs(v);
        s += n1 * n1;
    }
    return s;
}

KKernels k_kernels(const PsiSpec& s)
{
    KKernels k;
    k.spec = s;
    k.chi = chi_field(s);
    const int R = k.chi.extent;
    k.kdiag = make_window(s.d, R - 1);
    auto unit = srw_kernel(s.d, 1.0);
    for (const auto& o : unit.offsets) {
        Field ge = make_window(s.d, R - 1);
        for (std::size_t i = 0; i < ge.size(); ++i) {
            Coord z = ge.coord(i), ze = z;
            for (int j = 0; j < s.d; ++j) ze[j] += o.dz[j];
            ge.values[i] = k.chi.at(ze) - k.chi.at(z);
        }
        k.g.push_back(std::move(ge));
    }
    for (std::size_t i = 0; i < k.kdiag.size(); ++i) {
        double v = 0;
        for (const auto& ge : k.g) v += ge.values[i] * ge.values[i];
        k.kdiag.values[i] = v;
    }
    k.kdiag_l1 = k.kdiag.sum();
    return k;
}

namespace {

double p00(int d, double s)
{
    return std::pow(p1(s / d, 0), d);
}

// int_a^b p_s(0,0) ds
double return_integral(int d, double a, double b)
{
    if (b <= a) return 0;
    auto rule = gauss_panels(geometric_breaks(a, b, std::min(0.05, b - a), 1.5), 20);
    return rule.integrate([d](double s) { return p00(d, s); });
}

} // namespace

double kdiag_closed_form(int d, double kappa, double T)
{
    const double one = one_kappa(d, kappa), c = 2.0 * d * one;
    // int_0^T p_{2cu} du = (1/2c) int_0^{2cT} p_s ds ; int_0^T p_{c(u+T)} du = (1/c) int_{cT}^{2cT} p_s ds
    double a = return_integral(d, 0, 2 * c * T) / (2 * c);
    double b = return_integral(d, c * T, 2 * c * T) / c;
    return 4.0 / one * (a - b);
}

double kdiag_limit(int d, double T)
{
    return (return_integral(d, 0, 2 * d * T) - return_integral(d, 2 * d * T, 4 * d * T)) / d;
}

} // namespace sepam
