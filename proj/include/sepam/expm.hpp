#pragma once

// Action of exp(tA) on a vector for operators that only expose y = A x.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sepam {

// exp(tA) v == exp(log_scale) * v
struct ScaledVector {
    std::vector<double> v;
    double log_scale = 0.0;
};

inline double sup_norm(const std::vector<double>& v)
{
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Uniformization: exp(tA) = exp(-ct) sum_k (t(A+cI))^k / k!.  With
// c >= max|a_ii| and nonnegative off-diagonals every term is a
// nonnegative vector when v is, so nothing cancels.  The horizon is cut in
// chunks with c*tau <= max_ct and renormalized after each chunk.
template <class Op>
ScaledVector uniformized_expv(const Op& A, double t, std::vector<double> v, double c,
                              double max_ct = 20.0, double tol = 1e-17)
{
    if (t < 0) throw std::invalid_argument("expv: negative time");
    ScaledVector out;
    if (t == 0) {
        out.v = std::move(v);
        return out;
    }
    if (c <= 0) c = 1.0; // any c >= max|a_ii| is valid
    int chunks = std::max(1, static_cast<int>(std::ceil(c * t / max_ct)));
    double tau = t / chunks;
    std::vector<double> term, next, sum;
    for (int ch = 0; ch < chunks; ++ch) {
        term = v;
        sum = v;
        double ct = c * tau;
        for (int k = 1; k < 100000; ++k) {
            A.apply(term, next);
            for (std::size_t i = 0; i < next.size(); ++i)
                next[i] = (next[i] + c * term[i]) * (tau / k);
            term.swap(next);
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += term[i];
            if (k > ct && sup_norm(term) <= tol * sup_norm(sum)) break;
        }
        double s = sup_norm(sum);
        if (s == 0) {
            out.v = sum;
            out.log_scale = -INFINITY;
            return out;
        }
        for (double& x : sum) x /= s;
        out.log_scale += std::log(s) - ct;
        v.swap(sum);
    }
    out.v = std::move(v);
    return out;
}

// Taylor stepping with step control: h*norm_bound <= 1 and the series is
// summed until the last term is below tol relative to the partial sum.
// Used where the operator may have negative off-diagonals.
template <class Op>
ScaledVector taylor_expv(const Op& A, double t, std::vector<double> v, double norm_bound,
                         double tol = 1e-16, int max_terms = 60)
{
    if (t < 0) throw std::invalid_argument("expv: negative time");
    ScaledVector out;
    double h = norm_bound > 0 ? std::min(t, 1.0 / norm_bound) : t;
    double done = 0;
    std::vector<double> term, next, sum;
    while (done < t) {
        double step = std::min(h, t - done);
        term = v;
        sum = v;
        int k = 1;
        for (; k <= max_terms; ++k) {
            A.apply(term, next);
            for (std::size_t i = 0; i < next.size(); ++i) next[i] *= step / k;
            term.swap(next);
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += term[i];
            double tn = sup_norm(term), sn = sup_norm(sum);
            if (tn <= tol * std::max(sn, 1e-300)) break;
        }
        if (k > max_terms) throw std::runtime_error("taylor_expv: step control failed");
        double s = sup_norm(sum);
        if (s == 0) {
            out.v = sum;
            out.log_scale = -INFINITY;
            return out;
        }
        for (double& x : sum) x /= s;
        out.log_scale += std::log(s);
        v.swap(sum);
        done += step;
    }
    out.v = std::move(v);
    return out;
}

} // namespace sepam
