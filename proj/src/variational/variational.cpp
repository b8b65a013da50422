#include "sepam/variational.hpp"

#include "sepam/rng.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sepam {

double l2_norm_sq(const SparseOperator& op, const TestFunction& f, double rho)
{
    if (f.values.size() != op.size()) throw std::invalid_argument("test function: size mismatch");
    auto w = state_weights(op, rho);
    double s = 0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * f.values[i] * f.values[i];
    return s;
}

TestFunction normalized(const SparseOperator& op, TestFunction f, double rho)
{
    double n = std::sqrt(l2_norm_sq(op, f, rho));
    if (!(n > 0)) throw std::invalid_argument("test function: zero norm");
    for (double& v : f.values) v /= n;
    return f;
}

RayleighTerms rayleigh_quotient(const TestFunction& f, const SparseOperator& op, const OperatorSpec& spec)
{
    if (std::abs(l2_norm_sq(op, f, spec.rho) - 1) > 1e-9) throw std::invalid_argument("rayleigh: f not normalized");
    auto w = state_weights(op, spec.rho);
    auto bonds = stirring_bonds(spec.torus, spec.kernel);
    auto unit = srw_kernel(spec.torus.d(), 1.0);
    const auto& fv = f.values;
    RayleighTerms r;
    std::vector<int> walkers(op.p);
    for (std::size_t i = 0; i < op.size(); ++i) {
        const std::uint32_t eta = op.eta(i);
        for (int q = 0; q < op.p; ++q) walkers[q] = op.walker(i, q);
        auto other = [&](std::uint32_t e, const std::vector<int>& ws) {
            long j = op.find(op.key(e, ws));
            if (j < 0) throw std::logic_error("rayleigh: basis not closed under the dynamics");
            return fv[j];
        };
        int on = 0;
        for (int x : walkers) on += (eta >> x) & 1u;
        r.a1 += w[i] * spec.gamma * on * fv[i] * fv[i];
        for (const auto& b : bonds) {
            if (((eta >> b.a) & 1u) == ((eta >> b.b) & 1u)) continue;
            double df = other(eta ^ ((1u << b.a) | (1u << b.b)), walkers) - fv[i];
            r.a2 += 0.5 * w[i] * b.rate * df * df;
        }
        if (spec.kappa == 0) continue;
        for (int q = 0; q < op.p; ++q) {
            auto ws = walkers;
            for (const auto& o : unit.offsets) {
                ws[q] = static_cast<int>(spec.torus.shift(walkers[q], o.dz));
                double df = other(eta, ws) - fv[i];
                r.a3 += 0.5 * w[i] * df * df;
            }
        }
    }
    r.value = r.a1 - spec.catalyst_speed * r.a2 - spec.kappa * r.a3;
    return r;
}

namespace {

Csr symmetrized(const SparseOperator& op, const std::vector<double>& w)
{
    Csr s = op.matrix;
    for (std::size_t i = 0; i < s.n; ++i)
        for (auto k = s.rowptr[i]; k < s.rowptr[i + 1]; ++k) s.val[k] *= std::sqrt(w[i] / w[s.col[k]]);
    return s;
}

double dot(const std::vector<double>& a, const std::vector<double>& b)
{
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void finish(EigenResult& r, const std::vector<double>& s, const std::vector<double>& w, int p)
{
    r.vector.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) r.vector[i] = s[i] / std::sqrt(w[i]);
    r.lambda = p > 0 ? r.mu / p : std::nan("");
}

} // namespace

EigenResult top_eigenvalue(const SparseOperator& op, const OperatorSpec& spec, double tol, int max_restarts,
                           std::size_t dense_below)
{
    const std::size_t n = op.size();
    if (n == 0) throw std::invalid_argument("top_eigenvalue: empty operator");
    auto w = state_weights(op, spec.rho);
    Csr S = symmetrized(op, w);
    EigenResult r;

    if (n < dense_below) {
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (auto k = S.rowptr[i]; k < S.rowptr[i + 1]; ++k) M(i, S.col[k]) += S.val[k];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
        r.mu = es.eigenvalues()(n - 1);
        Eigen::VectorXd v = es.eigenvectors().col(n - 1);
        if (v.sum() < 0) v = -v;
        std::vector<double> s(v.data(), v.data() + n);
        std::vector<double> y;
        S.apply(s, y);
        double res = 0;
        for (std::size_t i = 0; i < n; ++i) res += (y[i] - r.mu * s[i]) * (y[i] - r.mu * s[i]);
        r.residual = std::sqrt(res);
        r.converged = true;
        r.method = "dense";
        finish(r, s, w, spec.p);
        return r;
    }

    const std::size_t m = std::min<std::size_t>(n, 80);
    std::vector<double> x(n, 1.0);
    auto g = stream(0x1a2c05, 0);
    for (double& v : x) v += 0.01 * uniform01(g);
    std::vector<std::vector<double>> V;
    std::vector<double> y;
    r.method = "lanczos";
    for (int restart = 0; restart < max_restarts; ++restart) {
        double nx = std::sqrt(dot(x, x));
        for (double& v : x) v /= nx;
        V.assign(1, x);
        std::vector<double> alpha, beta;
        for (std::size_t j = 0; j < m; ++j) {
            S.apply(V[j], y);
            alpha.push_back(dot(V[j], y));
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& v : V) {
                    double c = dot(v, y);
                    for (std::size_t i = 0; i < n; ++i) y[i] -= c * v[i];
                }
            double b = std::sqrt(dot(y, y));
            if (j + 1 == m || b < 1e-13) break;
            beta.push_back(b);
            for (double& v : y) v /= b;
            V.push_back(y);
        }
        const std::size_t k = alpha.size();
        Eigen::MatrixXd Tm = Eigen::MatrixXd::Zero(k, k);
        for (std::size_t i = 0; i < k; ++i) {
            Tm(i, i) = alpha[i];
            if (i + 1 < k) Tm(i, i + 1) = Tm(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Tm);
        r.mu = es.eigenvalues()(k - 1);
        Eigen::VectorXd c = es.eigenvectors().col(k - 1);
        std::fill(x.begin(), x.end(), 0.0);
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t i = 0; i < n; ++i) x[i] += c(j) * V[j][i];
        S.apply(x, y);
        double res = 0;
        for (std::size_t i = 0; i < n; ++i) res += (y[i] - r.mu * x[i]) * (y[i] - r.mu * x[i]);
        r.residual = std::sqrt(res);
        r.iterations = restart + 1;
        if (r.residual <= tol * std::max(1.0, std::abs(r.mu))) {
            r.converged = true;
            break;
        }
    }
    if (!r.converged) throw std::runtime_error("top_eigenvalue: Lanczos did not converge");
    double sum = std::accumulate(x.begin(), x.end(), 0.0);
    if (sum < 0)
        for (double& v : x) v = -v;
    finish(r, x, w, spec.p);
    return r;
}

EigenResult top_eigenvalue(const OperatorSpec& spec, double tol)
{
    auto op = build_joint_generator(spec);
    return top_eigenvalue(op, spec, tol);
}

namespace {

struct WalkerSpace {
    TestGeometry geo;
    std::size_t n = 1;
    std::vector<Coord> coords;

    explicit WalkerSpace(const TestGeometry& g) : geo(g)
    {
        if (g.d < 1 || g.L < 1) throw std::invalid_argument("test geometry: bad size");
        for (int j = 0; j < g.d; ++j) n *= static_cast<std::size_t>(g.L);
        coords.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            Coord x(g.d);
            std::size_t r = i;
            for (int j = 0; j < g.d; ++j, r /= g.L) x[j] = static_cast<int>(r % g.L);
            coords[i] = x;
        }
    }
    // index of x + s e_j, or -1 outside the box
    long step(std::size_t i, int j, int s) const
    {
        Coord y = coords[i];
        y[j] += s;
        if (geo.kind == TestGeometry::Torus)
            y[j] = ((y[j] % geo.L) + geo.L) % geo.L;
        else if (y[j] < 0 || y[j] >= geo.L)
            return -1;
        long idx = 0;
        for (int k = geo.d - 1; k >= 0; --k) idx = idx * geo.L + y[k];
        return idx;
    }
    double dist2(std::size_t i) const
    {
        double s = 0;
        for (int j = 0; j < geo.d; ++j) {
            double c = coords[i][j];
            double dx = 0;
            if (geo.kind == TestGeometry::Box)
                dx = c - 0.5 * (geo.L - 1);
            else {
                int L = geo.L;
                int w = static_cast<int>(c);
                dx = w > L / 2 ? w - L : w;
            }
            s += dx * dx;
        }
        return s;
    }
};

std::vector<double> gaussian(const WalkerSpace& ws, double width)
{
    std::vector<double> phi(ws.n);
    double s = 0;
    for (std::size_t i = 0; i < ws.n; ++i) {
        phi[i] = std::exp(-ws.dist2(i) / (2 * width * width));
        s += phi[i] * phi[i];
    }
    for (double& v : phi) v /= std::sqrt(s);
    return phi;
}

// sum over ordered neighbour pairs (x, y), phi = 0 outside a box
double energy(const WalkerSpace& ws, const std::vector<double>& phi)
{
    double e = 0;
    for (std::size_t i = 0; i < ws.n; ++i)
        for (int j = 0; j < ws.geo.d; ++j)
            for (int s : {1, -1}) {
                long k = ws.step(i, j, s);
                double d = phi[i] - (k >= 0 ? phi[k] : 0.0);
                e += d * d;
                if (k < 0) e += d * d; // the pair seen from the outside site
            }
    return e;
}

double neighbour_products(const WalkerSpace& ws, const std::vector<double>& phi)
{
    double e = 0;
    for (std::size_t i = 0; i < ws.n; ++i)
        for (int j = 0; j < ws.geo.d; ++j)
            for (int s : {1, -1}) {
                long k = ws.step(i, j, s);
                if (k >= 0) e += phi[i] * phi[k];
            }
    return e;
}

} // namespace

TestBound test_function_bound(double epsilon, double rho, const TestGeometry& geo)
{
    if (!(epsilon > 0)) throw std::invalid_argument("test_function_bound: epsilon must be positive");
    if (!(rho > 0 && rho < 1)) throw std::invalid_argument("test_function_bound: rho outside (0, 1)");
    WalkerSpace ws(geo);
    const double budget = epsilon * epsilon;
    auto E = [&](double w) { return energy(ws, gaussian(ws, w)); };

    // smallest grid width meeting the budget, then bisection below it
    double hi = -1, lo = 0.05;
    for (double w = 0.05; w <= 4.0 * geo.L; w *= 1.15) {
        if (E(w) <= budget) {
            hi = w;
            break;
        }
        lo = w;
    }
    if (hi < 0) throw std::domain_error("test_function_bound: energy budget unattainable on this box");
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        (E(mid) <= budget ? hi : lo) = mid;
    }
    TestBound b;
    b.epsilon = epsilon;
    b.width = hi;
    b.phi = gaussian(ws, hi);
    b.energy = energy(ws, b.phi);
    const double c = 1 + (2 * epsilon + epsilon * epsilon) * rho;
    const double e2 = epsilon * epsilon;
    b.I = (1 + epsilon) * (1 + epsilon) * rho;
    b.II = e2 * rho * (1 - rho); // sum_y p(x, y) = 1 and sum phi^2 = 1
    b.III = 0.5 * c * b.energy + e2 * rho * (1 - rho) * neighbour_products(ws, b.phi);
    b.bound = (b.I - b.II - geo.kappa * b.III) / c;
    return b;
}

TestFunction epsilon_test_function(const SparseOperator& op, const Torus& T, const TestBound& b, double rho)
{
    if (op.p != 1 || b.phi.size() != T.sites()) throw std::invalid_argument("epsilon test function: geometry");
    const double c = 1 + (2 * b.epsilon + b.epsilon * b.epsilon) * rho;
    TestFunction f;
    f.values.resize(op.size());
    for (std::size_t i = 0; i < op.size(); ++i) {
        int x = op.walker(i, 0);
        double occ = (op.eta(i) >> x) & 1u;
        f.values[i] = (1 + b.epsilon * occ) * b.phi[x] / std::sqrt(c);
    }
    return f;
}

double psi_rate_bound(double alpha, double rho, double G)
{
    if (alpha < 0 || alpha > 1) throw std::invalid_argument("psi_rate_bound: alpha outside [0, 1]");
    double d = std::sqrt(alpha) - std::sqrt(rho);
    return d * d / (2 * G);
}

VaradhanMax varadhan_closed_form(double gamma, double rho, double G)
{
    if (gamma < 0 || G <= 0 || rho < 0 || rho > 1) throw std::invalid_argument("varadhan: bad parameters");
    double s = 1 - 2 * G * gamma;
    if (s <= 0) throw std::domain_error("varadhan: 2 G gamma >= 1, the maximum is infinite");
    VaradhanMax m;
    m.value = rho * gamma / s;
    m.beta = rho / (s * s);
    m.interior = m.beta <= 1;
    return m;
}

VaradhanMax varadhan_constrained(double gamma, double rho, double G)
{
    if (gamma < 0 || G <= 0 || rho < 0 || rho > 1) throw std::invalid_argument("varadhan: bad parameters");
    if (2 * G * gamma < 1) {
        auto m = varadhan_closed_form(gamma, rho, G);
        if (m.interior) return m;
    }
    // the objective is concave and still increasing at beta = 1
    VaradhanMax m;
    m.beta = 1;
    m.value = gamma - psi_rate_bound(1, rho, G);
    m.interior = false;
    return m;
}

Lambda0Surrogate lambda0_via_varadhan(int pmax, double rho, double G)
{
    if (pmax < 1) throw std::invalid_argument("lambda0_via_varadhan: pmax >= 1");
    Lambda0Surrogate s;
    for (int p = 1; p <= pmax; ++p) {
        auto m = varadhan_constrained(p, rho, G);
        s.p.push_back(p);
        s.lambda.push_back(m.value / p);
        s.branch.push_back(m.interior ? "closed-form" : "endpoint");
        if (p > 1 && !(s.lambda[p - 1] > s.lambda[p - 2])) s.strictly_increasing = false;
    }
    return s;
}

double dirichlet_eigenvalue(double kappa, const std::vector<int>& sides, double tol)
{
    if (sides.empty()) throw std::invalid_argument("dirichlet_eigenvalue: empty box");
    const int d = static_cast<int>(sides.size());
    std::size_t n = 1;
    for (int s : sides) {
        if (s < 1) throw std::invalid_argument("dirichlet_eigenvalue: empty box");
        n *= s;
    }
    std::vector<std::size_t> stride(d, 1);
    for (int j = 1; j < d; ++j) stride[j] = stride[j - 1] * sides[j - 1];
    std::vector<Eigen::Triplet<double>> tr;
    for (std::size_t i = 0; i < n; ++i) {
        tr.emplace_back(i, i, 2.0 * d * kappa);
        for (int j = 0; j < d; ++j) {
            int c = static_cast<int>((i / stride[j]) % sides[j]);
            if (c + 1 < sides[j]) tr.emplace_back(i, i + stride[j], -kappa);
            if (c > 0) tr.emplace_back(i, i - stride[j], -kappa);
        }
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(tr.begin(), tr.end());
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(1e-14);
    cg.compute(A);
    Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
    x.normalize();
    double mu = x.dot(A * x);
    for (int it = 0; it < 1000; ++it) {
        Eigen::VectorXd y = cg.solve(x);
        x = y.normalized();
        double next = x.dot(A * x);
        if (std::abs(next - mu) <= tol * next) {
            mu = next;
            break;
        }
        mu = next;
    }
    return mu;
}

} // namespace sepam
