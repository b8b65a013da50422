#include "sepam/lattice.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace sepam {

std::size_t HeatKernelTable::window_size() const
{
    std::size_t s = 1;
    for (int i = 0; i < kernel.d; ++i) s *= static_cast<std::size_t>(2 * radius + 1);
    return s;
}

namespace {

std::size_t window_index(const Coord& z, int radius)
{
    std::size_t s = 0;
    for (int i = static_cast<int>(z.size()) - 1; i >= 0; --i) {
        if (std::abs(z[i]) > radius) throw std::out_of_range("HeatKernelTable: outside window");
        s = s * (2 * radius + 1) + static_cast<std::size_t>(z[i] + radius);
    }
    return s;
}

Coord window_coord(std::size_t s, int d, int radius)
{
    Coord z(d);
    for (int i = 0; i < d; ++i) {
        z[i] = static_cast<int>(s % (2 * radius + 1)) - radius;
        s /= (2 * radius + 1);
    }
    return z;
}

} // namespace

double HeatKernelTable::at(std::size_t ti, const Coord& z) const
{
    return values.at(ti * window_size() + window_index(z, radius));
}

double HeatKernelTable::slice_mass(std::size_t ti) const
{
    double s = 0;
    for (std::size_t i = 0; i < window_size(); ++i) s += values[ti * window_size() + i];
    return s;
}

HeatKernelTable HeatKernelTable::build(const Kernel& k, std::vector<double> times, int radius)
{
    if (radius < 0) throw std::invalid_argument("HeatKernelTable: radius");
    HeatKernelTable h;
    h.kernel = k;
    h.times = std::move(times);
    h.radius = radius;
    const std::size_t W = h.window_size();
    h.values.assign(h.times.size() * W, 0.0);
    for (std::size_t ti = 0; ti < h.times.size(); ++ti) {
        if (k.is_srw()) {
            auto row = p1_row(k.rate * h.times[ti] / k.d, radius);
            for (std::size_t s = 0; s < W; ++s) {
                double p = 1;
                for (int x : window_coord(s, k.d, radius)) p *= row[std::abs(x)];
                h.values[ti * W + s] = p;
            }
        } else {
            for (std::size_t s = 0; s < W; ++s)
                h.values[ti * W + s] = transition_prob(k, h.times[ti], window_coord(s, k.d, radius));
        }
    }
    return h;
}

std::string HeatKernelTable::to_text() const
{
    std::ostringstream os;
    os.precision(17);
    os << "# time displacement value\n";
    const std::size_t W = window_size();
    for (std::size_t ti = 0; ti < times.size(); ++ti)
        for (std::size_t s = 0; s < W; ++s) {
            Coord z = window_coord(s, kernel.d, radius);
            os << times[ti] << ' ';
            for (std::size_t i = 0; i < z.size(); ++i) os << (i ? "," : "") << z[i];
            os << ' ' << values[ti * W + s] << '\n';
        }
    return os.str();
}

HeatKernelTable HeatKernelTable::from_text(const Kernel& k, const std::string& text)
{
    HeatKernelTable h;
    h.kernel = k;
    std::istringstream is(text);
    std::string line;
    struct Row {
        double t;
        Coord z;
        double v;
    };
    std::vector<Row> rows;
    int radius = 0;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        Row r;
        std::string zs;
        if (!(ls >> r.t >> zs >> r.v)) throw std::runtime_error("HeatKernelTable: bad line");
        std::istringstream zz(zs);
        std::string part;
        while (std::getline(zz, part, ',')) r.z.push_back(std::stoi(part));
        if (static_cast<int>(r.z.size()) != k.d) throw std::runtime_error("HeatKernelTable: dimension");
        for (int x : r.z) radius = std::max(radius, std::abs(x));
        rows.push_back(std::move(r));
    }
    h.radius = radius;
    const std::size_t W = h.window_size();
    for (const auto& r : rows)
        if (h.times.empty() || h.times.back() != r.t) h.times.push_back(r.t);
    if (rows.size() != h.times.size() * W) throw std::runtime_error("HeatKernelTable: incomplete table");
    h.values.assign(rows.size(), 0.0);
    std::size_t ti = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].t != h.times[ti]) ++ti;
        h.values[ti * W + window_index(rows[i].z, radius)] = rows[i].v;
    }
    return h;
}

std::string HeatKernelTable::cache_key() const
{
    std::ostringstream ts;
    ts.precision(17);
    for (double t : times) ts << t << ';';
    std::ostringstream os;
    os << "hk_d" << kernel.d << "_rate" << kernel.rate << "_w" << radius << "_tol" << tol << '_'
       << std::hex << std::hash<std::string>{}(ts.str());
    return os.str();
}

HeatKernelTable cached_heat_kernel(const Kernel& k, const std::vector<double>& times, int radius)
{
    HeatKernelTable probe;
    probe.kernel = k;
    probe.times = times;
    probe.radius = radius;
    const char* dir = std::getenv("SEPAM_HK_CACHE");
    if (!dir || !*dir) return HeatKernelTable::build(k, times, radius);
    std::filesystem::path path = std::filesystem::path(dir) / (probe.cache_key() + ".txt");
    if (std::filesystem::exists(path)) {
        std::ifstream in(path);
        std::stringstream ss;
        ss << in.rdbuf();
        auto h = HeatKernelTable::from_text(k, ss.str());
        if (h.times.size() == times.size() && h.radius == radius) return h;
    }
    auto h = HeatKernelTable::build(k, times, radius);
    std::filesystem::create_directories(dir);
    std::ofstream(path) << h.to_text();
    return h;
}

} // namespace sepam
