#pragma once

#include <vector>

namespace sepam {

// Nodes and weights of a composite rule.
struct QuadRule {
    std::vector<double> x;
    std::vector<double> w;

    template <class F> double integrate(F&& f) const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * f(x[i]);
        return s;
    }
};

// Gauss-Legendre with `order` nodes (16, 20 or 30) on every panel [b[i], b[i+1]].
QuadRule gauss_panels(const std::vector<double>& breaks, int order = 16);

// Breakpoints a, a+h, a+h(1+r), ... clipped at b.  Good for integrands that
// vary fast near a and decay slowly afterwards.
std::vector<double> geometric_breaks(double a, double b, double first, double ratio);

} // namespace sepam
