#include "sepam/exclusion.hpp"
#include "sepam/rng.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace sepam {

std::size_t Configuration::count() const
{
    std::size_t c = 0;
    for (auto b : bits) c += b;
    return c;
}

std::string Configuration::bitstring() const
{
    std::string s;
    for (auto b : bits) s.push_back(b ? '1' : '0');
    return s;
}

Configuration sample_initial(const Torus& T, double rho, std::mt19937_64& g)
{
    if (!(rho > 0 && rho < 1)) throw std::invalid_argument("sample_initial: rho must lie in (0,1)");
    Configuration c{T, std::vector<std::uint8_t>(T.sites())};
    std::bernoulli_distribution b(rho);
    for (auto& x : c.bits) x = b(g);
    return c;
}

Configuration sample_initial(const Torus& T, double rho, std::uint64_t seed)
{
    auto g = stream(seed, 0);
    return sample_initial(T, rho, g);
}

Configuration filled(const Torus& T, bool value)
{
    return {T, std::vector<std::uint8_t>(T.sites(), value ? 1 : 0)};
}

std::vector<Bond> stirring_bonds(const Torus& T, const Kernel& k)
{
    if (k.d != T.d()) throw std::invalid_argument("stirring_bonds: dimension mismatch");
    std::vector<Bond> bonds;
    for (std::size_t x = 0; x < T.sites(); ++x)
        for (const auto& o : k.offsets) {
            int lead = 0;
            for (int v : o.dz)
                if (v != 0) {
                    lead = v;
                    break;
                }
            if (lead <= 0 || o.w == 0) continue;
            std::size_t y = T.shift(x, o.dz);
            if (y == x) continue;
            bonds.push_back({x, y, k.rate * o.w});
        }
    return bonds;
}

LinkSchedule build_schedule(const Torus& T, const Kernel& k, double horizon, std::mt19937_64& g)
{
    if (horizon < 0) throw std::invalid_argument("build_schedule: negative horizon");
    LinkSchedule s;
    s.horizon = horizon;
    s.bonds = stirring_bonds(T, k);
    if (horizon == 0) return s;
    std::uniform_real_distribution<double> u(0.0, horizon);
    for (std::size_t b = 0; b < s.bonds.size(); ++b) {
        std::poisson_distribution<long> pois(s.bonds[b].rate * horizon);
        long n = pois(g);
        for (long i = 0; i < n; ++i) s.events.push_back({u(g), static_cast<std::uint32_t>(b)});
    }
    std::stable_sort(s.events.begin(), s.events.end(), [](const Link& a, const Link& b) { return a.t < b.t; });
    return s;
}

LinkSchedule build_schedule(const Torus& T, const Kernel& k, double horizon, std::uint64_t seed)
{
    auto g = stream(seed, 1);
    return build_schedule(T, k, horizon, g);
}

Configuration evolve(const Trajectory& tr, double t)
{
    if (t > tr.schedule.horizon) throw std::invalid_argument("evolve: t beyond horizon");
    Configuration c = tr.initial;
    for (const auto& e : tr.schedule.events) {
        if (e.t > t) break;
        const auto& b = tr.schedule.bonds[e.bond];
        std::swap(c.bits[b.a], c.bits[b.b]);
    }
    return c;
}

double occupation_time(const Trajectory& tr, std::size_t site, double t)
{
    if (t > tr.schedule.horizon) throw std::invalid_argument("occupation_time: t beyond horizon");
    Configuration c = tr.initial;
    double last = 0, occ = 0;
    for (const auto& e : tr.schedule.events) {
        if (e.t > t) break;
        const auto& b = tr.schedule.bonds[e.bond];
        if (b.a == site || b.b == site) {
            if (c.bits[site]) occ += e.t - last;
            last = e.t;
        }
        std::swap(c.bits[b.a], c.bits[b.b]);
    }
    if (c.bits[site]) occ += t - last;
    return occ;
}

std::string export_checkpoints(const Trajectory& tr, const std::vector<double>& times)
{
    std::ostringstream os;
    os.precision(17);
    for (double t : times) os << t << ' ' << evolve(tr, t).bitstring() << '\n';
    return os.str();
}

} // namespace sepam
