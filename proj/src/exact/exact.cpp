#include "sepam/exact.hpp"
#include "sepam/expm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace sepam {

std::uint32_t SparseOperator::eta(std::size_t i) const
{
    return static_cast<std::uint32_t>(keys[i] & ((std::uint64_t(1) << sites) - 1));
}

int SparseOperator::walker(std::size_t i, int q) const
{
    std::uint64_t w = keys[i] >> sites;
    for (int j = 0; j < q; ++j) w /= static_cast<std::uint64_t>(sites);
    return static_cast<int>(w % static_cast<std::uint64_t>(sites));
}

std::uint64_t SparseOperator::key(std::uint32_t e, const std::vector<int>& walkers) const
{
    std::uint64_t w = 0;
    for (int q = p - 1; q >= 0; --q) w = w * sites + static_cast<std::uint64_t>(walkers[q]);
    return std::uint64_t(e) | (w << sites);
}

long SparseOperator::find(std::uint64_t k) const
{
    auto it = lookup.find(k);
    return it == lookup.end() ? -1 : static_cast<long>(it->second);
}

std::size_t state_cap(const OperatorSpec& s)
{
    return s.cap ? s.cap : (std::size_t(1) << 14) * s.torus.sites();
}

namespace {

struct Model {
    int N = 0, p = 0;
    std::vector<Bond> bonds;
    std::vector<std::vector<std::size_t>> nbr; // walker neighbours (nearest, on the torus)
    double kappa = 0, gamma = 0, speed = 1;

    std::uint64_t walker_pow(int q) const
    {
        std::uint64_t m = 1;
        for (int j = 0; j < q; ++j) m *= N;
        return m;
    }

    template <class F> void transitions(std::uint64_t key, F&& f) const
    {
        const std::uint64_t mask = (std::uint64_t(1) << N) - 1;
        const std::uint64_t eta = key & mask;
        for (const auto& b : bonds) {
            std::uint64_t ba = (eta >> b.a) & 1, bb = (eta >> b.b) & 1;
            if (ba == bb) continue;
            std::uint64_t flip = (std::uint64_t(1) << b.a) | (std::uint64_t(1) << b.b);
            f(key ^ flip, speed * b.rate);
        }
        if (kappa == 0) return;
        std::uint64_t w = key >> N;
        for (int q = 0; q < p; ++q) {
            std::uint64_t pw = walker_pow(q);
            std::size_t x = (w / pw) % N;
            for (std::size_t y : nbr[x]) {
                std::uint64_t nw = w - x * pw + y * pw;
                f(eta | (nw << N), kappa);
            }
        }
    }

    double potential(std::uint64_t key) const
    {
        if (gamma == 0 || p == 0) return 0;
        std::uint64_t eta = key & ((std::uint64_t(1) << N) - 1);
        std::uint64_t w = key >> N;
        double v = 0;
        for (int q = 0; q < p; ++q) {
            v += double((eta >> (w % N)) & 1);
            w /= N;
        }
        return gamma * v;
    }
};

Model make_model(const OperatorSpec& s)
{
    Model m;
    m.N = static_cast<int>(s.torus.sites());
    if (m.N > 30) throw std::length_error("joint generator: too many sites for exact enumeration");
    if (s.p < 0 || s.kappa < 0) throw std::invalid_argument("joint generator: p and kappa must be >= 0");
    m.p = s.p;
    m.bonds = stirring_bonds(s.torus, s.kernel);
    m.kappa = s.kappa;
    m.gamma = s.gamma;
    m.speed = s.catalyst_speed;
    m.nbr.resize(m.N);
    auto walk = srw_kernel(s.torus.d(), 1.0);
    for (int x = 0; x < m.N; ++x)
        for (const auto& o : walk.offsets) m.nbr[x].push_back(s.torus.shift(x, o.dz));
    return m;
}

bool in_sector(std::uint64_t eta, int sector)
{
    return sector < 0 || std::popcount(eta) == sector;
}

} // namespace

SparseOperator build_joint_generator(const OperatorSpec& s)
{
    Model m = make_model(s);
    const std::size_t cap = state_cap(s);
    SparseOperator op;
    op.sites = m.N;
    op.p = m.p;

    const std::uint64_t neta = std::uint64_t(1) << m.N;
    std::vector<std::uint64_t> keys;
    std::unordered_map<std::uint64_t, std::uint32_t> seen;
    auto push = [&](std::uint64_t k) {
        if (seen.count(k)) return;
        if (keys.size() >= cap) throw std::length_error("joint generator: state cap exceeded");
        seen.emplace(k, static_cast<std::uint32_t>(keys.size()));
        keys.push_back(k);
    };
    if (s.reachable_only) {
        for (std::uint64_t e = 0; e < neta; ++e)
            if (in_sector(e, s.sector)) push(e);
        for (std::size_t head = 0; head < keys.size(); ++head)
            m.transitions(keys[head], [&](std::uint64_t k, double) { push(k); });
    } else {
        std::uint64_t nw = m.walker_pow(m.p);
        if (double(nw) * double(neta) > double(cap) * 4) throw std::length_error("joint generator: state cap exceeded");
        for (std::uint64_t w = 0; w < nw; ++w)
            for (std::uint64_t e = 0; e < neta; ++e)
                if (in_sector(e, s.sector)) push(e | (w << m.N));
    }
    std::sort(keys.begin(), keys.end());
    op.keys = keys;
    op.lookup.reserve(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) op.lookup.emplace(keys[i], static_cast<std::uint32_t>(i));

    CsrBuilder b(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
        double out = 0;
        m.transitions(keys[i], [&](std::uint64_t k, double r) {
            b.add(op.lookup.at(k), r);
            out += r;
        });
        b.add(i, -out + m.potential(keys[i]));
        b.end_row();
    }
    op.matrix = b.finish();
    return op;
}

SparseOperator build_se_generator(const Torus& T, const Kernel& k, std::size_t cap)
{
    OperatorSpec s;
    s.torus = T;
    s.kernel = k;
    s.p = 0;
    s.kappa = 0;
    s.gamma = 0;
    s.reachable_only = true;
    s.cap = cap ? cap : (std::size_t(1) << 14) * T.sites();
    if (T.sites() < 63 && (std::uint64_t(1) << T.sites()) > s.cap)
        throw std::length_error("se generator: state cap exceeded");
    return build_joint_generator(s);
}

std::vector<double> state_weights(const SparseOperator& op, double rho)
{
    std::vector<double> w(op.size());
    for (std::size_t i = 0; i < op.size(); ++i) {
        int n = std::popcount(op.eta(i));
        w[i] = std::pow(rho, n) * std::pow(1 - rho, op.sites - n);
    }
    return w;
}

std::vector<double> start_vector(const SparseOperator& op, const OperatorSpec& s, StartLaw law,
                                 std::uint32_t fixed_eta)
{
    std::vector<double> pi(op.size(), 0.0);
    double total = 0;
    for (std::size_t i = 0; i < op.size(); ++i) {
        if ((op.keys[i] >> op.sites) != 0) continue; // walkers not all at 0
        std::uint32_t e = op.eta(i);
        int n = std::popcount(e);
        double w = 0;
        switch (law) {
        case StartLaw::Nu: w = std::pow(s.rho, n) * std::pow(1 - s.rho, op.sites - n); break;
        case StartLaw::Sector: w = (s.sector < 0 || n == s.sector) ? 1.0 : 0.0; break;
        case StartLaw::Fixed: w = e == fixed_eta ? 1.0 : 0.0; break;
        }
        pi[i] = w;
        total += w;
    }
    if (total <= 0) throw std::invalid_argument("start_vector: no start state in the basis");
    for (double& x : pi) x /= total;
    return pi;
}

std::vector<double> semigroup_apply(const SparseOperator& op, double t, const std::vector<double>& x,
                                    double* log_scale)
{
    auto r = uniformized_expv(op, t, x, op.matrix.max_abs_diag());
    if (log_scale) {
        *log_scale = r.log_scale;
        return r.v;
    }
    double f = std::exp(r.log_scale);
    for (double& v : r.v) v *= f;
    return r.v;
}

double exact_log_moment(const SparseOperator& op, const std::vector<double>& pi, double t)
{
    if (t < 0) throw std::invalid_argument("exact moment: negative time");
    double ls = 0;
    auto u = semigroup_apply(op, t, std::vector<double>(op.size(), 1.0), &ls);
    double s = 0;
    for (std::size_t i = 0; i < u.size(); ++i) s += pi[i] * u[i];
    return std::log(s) + ls;
}

double exact_log_moment(const OperatorSpec& s, double t, StartLaw law)
{
    auto op = build_joint_generator(s);
    return exact_log_moment(op, start_vector(op, s, law), t);
}

std::vector<double> exact_lambda_profile(const OperatorSpec& s, const std::vector<double>& t_grid, StartLaw law)
{
    auto op = build_joint_generator(s);
    auto pi = start_vector(op, s, law);
    std::vector<double> u(op.size(), 1.0), out;
    double ls = 0, t_prev = 0;
    for (double t : t_grid) {
        if (t < t_prev) throw std::invalid_argument("lambda profile: grid must be increasing");
        double step_ls = 0;
        u = semigroup_apply(op, t - t_prev, u, &step_ls);
        ls += step_ls;
        t_prev = t;
        double m = 0;
        for (std::size_t i = 0; i < u.size(); ++i) m += pi[i] * u[i];
        out.push_back(t == 0 || s.p == 0 ? std::numeric_limits<double>::quiet_NaN()
                                         : (std::log(m) + ls) / (s.p * t));
    }
    return out;
}

double exact_log_slope(const SparseOperator& op, const std::vector<double>& pi, double t)
{
    auto u = semigroup_apply(op, t, std::vector<double>(op.size(), 1.0), nullptr);
    std::vector<double> gu;
    op.apply(u, gu);
    double a = 0, b = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        a += pi[i] * gu[i];
        b += pi[i] * u[i];
    }
    return a / b;
}

double reversibility_defect(const SparseOperator& op, double rho)
{
    auto w = state_weights(op, rho);
    const Csr& A = op.matrix;
    auto entry = [&](std::size_t i, std::size_t j) {
        auto first = A.col.begin() + A.rowptr[i], last = A.col.begin() + A.rowptr[i + 1];
        auto it = std::lower_bound(first, last, static_cast<std::int32_t>(j));
        return (it != last && *it == static_cast<std::int32_t>(j)) ? A.val[it - A.col.begin()] : 0.0;
    };
    double d = 0;
    for (std::size_t i = 0; i < A.n; ++i)
        for (auto k = A.rowptr[i]; k < A.rowptr[i + 1]; ++k) {
            std::size_t j = A.col[k];
            d = std::max(d, std::abs(w[i] * A.val[k] - w[j] * entry(j, i)));
        }
    return d;
}

SparseOperator martingale_generator(const Torus& T, const Kernel& k, double kappa)
{
    if (!(kappa > 0)) throw std::invalid_argument("martingale generator: kappa must be positive");
    OperatorSpec s;
    s.torus = T;
    s.kernel = k;
    s.p = 1;
    s.kappa = 1.0;
    s.gamma = 0.0;
    s.catalyst_speed = 1.0 / kappa;
    s.reachable_only = true;
    return build_joint_generator(s);
}

namespace {

struct Shifted {
    const Csr& A;
    const std::vector<double>& W;
    std::size_t size() const { return A.n; }
    void apply(const std::vector<double>& x, std::vector<double>& y) const
    {
        A.apply(x, y);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] -= W[i] * x[i];
    }
};

} // namespace

MartingaleReport martingale_check(const SparseOperator& Aop, const std::vector<double>& psi, double r,
                                  double kappa, double t)
{
    const Csr& A = Aop.matrix;
    const std::size_t n = A.n;
    if (psi.size() != n) throw std::invalid_argument("martingale_check: psi size");
    std::vector<double> h(n), eh(n), W(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        h[i] = r / kappa * psi[i];
        eh[i] = std::exp(h[i]);
    }
    // W = e^{-h} A e^{h}
    for (std::size_t i = 0; i < n; ++i)
        for (auto k = A.rowptr[i]; k < A.rowptr[i + 1]; ++k) W[i] += A.val[k] * std::exp(h[A.col[k]] - h[i]);

    MartingaleReport rep;
    rep.mean_min = INFINITY;
    rep.mean_max = -INFINITY;
    Shifted B{A, W};
    double c = 0;
    for (std::size_t i = 0; i < n; ++i) c = std::max(c, std::abs(A.diag(i) - W[i]));
    auto u = uniformized_expv(B, t, eh, c);
    double f = std::exp(u.log_scale);
    for (std::size_t i = 0; i < n; ++i) {
        double m = u.v[i] * f / eh[i];
        rep.mean_min = std::min(rep.mean_min, m);
        rep.mean_max = std::max(rep.mean_max, m);
        rep.deviation = std::max(rep.deviation, std::abs(m - 1));
    }

    // explicit tilted generator
    CsrBuilder bn(n);
    for (std::size_t i = 0; i < n; ++i) {
        double rs = 0;
        for (auto k = A.rowptr[i]; k < A.rowptr[i + 1]; ++k) {
            std::size_t j = A.col[k];
            double v = j == i ? A.val[k] - W[i] : A.val[k] * std::exp(h[j] - h[i]);
            if (j != i && v < 0) rep.generator_ok = false;
            rs += v;
            bn.add(j, v);
        }
        if (A.diag(i) == 0) bn.add(i, -W[i]), rs -= W[i];
        rep.generator_defect = std::max(rep.generator_defect, std::abs(rs));
        bn.end_row();
    }
    SparseOperator An;
    An.matrix = bn.finish();
    auto one = semigroup_apply(An, t, std::vector<double>(n, 1.0), nullptr);
    for (double x : one) rep.new_semigroup_deviation = std::max(rep.new_semigroup_deviation, std::abs(x - 1));
    return rep;
}

} // namespace sepam
