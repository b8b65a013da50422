#include "sepam/csr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sepam {

void Csr::apply(const std::vector<double>& x, std::vector<double>& y) const
{
    y.resize(n);
    const std::int64_t nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < nn; ++i) {
        double s = 0.0;
        for (std::int64_t k = rowptr[i]; k < rowptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

void Csr::apply_serial(const std::vector<double>& x, std::vector<double>& y) const
{
    y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::int64_t k = rowptr[i]; k < rowptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

double Csr::diag(std::size_t i) const
{
    for (std::int64_t k = rowptr[i]; k < rowptr[i + 1]; ++k)
        if (static_cast<std::size_t>(col[k]) == i) return val[k];
    return 0.0;
}

double Csr::max_abs_diag() const
{
    double m = 0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(diag(i)));
    return m;
}

bool Csr::offdiag_nonnegative() const
{
    for (std::size_t i = 0; i < n; ++i)
        for (std::int64_t k = rowptr[i]; k < rowptr[i + 1]; ++k)
            if (static_cast<std::size_t>(col[k]) != i && val[k] < 0) return false;
    return true;
}

std::vector<double> Csr::row_sums() const
{
    std::vector<double> r(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::int64_t k = rowptr[i]; k < rowptr[i + 1]; ++k) r[i] += val[k];
    return r;
}

std::string Csr::triplets() const
{
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < n; ++i)
        for (std::int64_t k = rowptr[i]; k < rowptr[i + 1]; ++k)
            os << i << ' ' << col[k] << ' ' << val[k] << '\n';
    return os.str();
}

CsrBuilder::CsrBuilder(std::size_t n) { m_.n = n; }

void CsrBuilder::add(std::size_t c, double v)
{
    if (c >= m_.n) throw std::out_of_range("CsrBuilder: column");
    row_.emplace_back(static_cast<std::int32_t>(c), v);
}

void CsrBuilder::end_row()
{
    std::sort(row_.begin(), row_.end(),
              [](auto& a, auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < row_.size();) {
        std::size_t j = i;
        double s = 0;
        while (j < row_.size() && row_[j].first == row_[i].first) s += row_[j++].second;
        if (s != 0.0) {
            m_.col.push_back(row_[i].first);
            m_.val.push_back(s);
        }
        i = j;
    }
    m_.rowptr.push_back(static_cast<std::int64_t>(m_.val.size()));
    row_.clear();
}

Csr CsrBuilder::finish()
{
    if (m_.rowptr.size() != m_.n + 1) throw std::logic_error("CsrBuilder: row count");
    return std::move(m_);
}

} // namespace sepam
