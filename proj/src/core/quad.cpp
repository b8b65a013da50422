#include "sepam/quad.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <stdexcept>

namespace sepam {

namespace {

template <unsigned N>
void add_panels(const std::vector<double>& b, QuadRule& rule)
{
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& ab = G::abscissa();
    const auto& wt = G::weights();
    for (std::size_t p = 0; p + 1 < b.size(); ++p) {
        double mid = 0.5 * (b[p] + b[p + 1]);
        double half = 0.5 * (b[p + 1] - b[p]);
        if (half <= 0) continue;
        for (std::size_t i = 0; i < ab.size(); ++i) {
            if (ab[i] == 0.0) {
                rule.x.push_back(mid);
                rule.w.push_back(half * wt[i]);
                continue;
            }
            rule.x.push_back(mid - half * ab[i]);
            rule.w.push_back(half * wt[i]);
            rule.x.push_back(mid + half * ab[i]);
            rule.w.push_back(half * wt[i]);
        }
    }
}

} // namespace

QuadRule gauss_panels(const std::vector<double>& breaks, int order)
{
    QuadRule r;
    switch (order) {
    case 16: add_panels<16>(breaks, r); break;
    case 20: add_panels<20>(breaks, r); break;
    case 30: add_panels<30>(breaks, r); break;
    default: throw std::invalid_argument("gauss_panels: unsupported order");
    }
    return r;
}

std::vector<double> geometric_breaks(double a, double b, double first, double ratio)
{
    if (!(b > a)) return {a};
    std::vector<double> br{a};
    double h = first;
    double x = a;
    while (x + h < b * (1 - 1e-12)) {
        x += h;
        br.push_back(x);
        h *= ratio;
    }
    br.push_back(b);
    return br;
}

} // namespace sepam
