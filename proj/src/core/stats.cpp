#include "sepam/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sepam {

McEstimate mean_estimate(const std::vector<double>& v, std::uint64_t seed)
{
    if (v.size() < 2) throw std::invalid_argument("mean_estimate: need n >= 2");
    McEstimate e;
    e.n = v.size();
    e.seed = seed;
    double s = 0;
    for (double x : v) s += x;
    e.mean = s / double(e.n);
    double q = 0;
    for (double x : v) q += (x - e.mean) * (x - e.mean);
    e.stderr_ = std::sqrt(q / double(e.n - 1) / double(e.n));
    return e;
}

McEstimate exp_mean_estimate(const std::vector<double>& x, std::uint64_t seed)
{
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("exp_mean_estimate: need n >= 2");
    double m = *std::max_element(x.begin(), x.end());
    std::vector<double> y(n);
    double s = 0, s2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = std::exp(x[i] - m);
        s += y[i];
        s2 += y[i] * y[i];
    }
    McEstimate e;
    e.n = n;
    e.seed = seed;
    double ybar = s / double(n);
    e.log_mean = m + std::log(ybar);
    e.mean = std::exp(e.log_mean);
    double var = std::max(0.0, (s2 - double(n) * ybar * ybar) / double(n - 1));
    e.stderr_ = std::exp(m) * std::sqrt(var / double(n));
    e.ess = s * s / s2;

    // leave-one-out logs
    double jbar = 0;
    std::vector<double> lj(n);
    for (std::size_t i = 0; i < n; ++i) {
        double rest = std::max(s - y[i], 1e-300);
        lj[i] = m + std::log(rest / double(n - 1));
        jbar += lj[i];
    }
    jbar /= double(n);
    double jv = 0;
    for (double l : lj) jv += (l - jbar) * (l - jbar);
    e.log_stderr = std::sqrt(jv * double(n - 1) / double(n));
    return e;
}

} // namespace sepam
