#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sepam {

// Compressed sparse rows.  The OpenMP product is the default; the serial
// one is kept as the reference the tests and the benchmark compare against.
struct Csr {
    std::size_t n = 0;
    std::vector<std::int64_t> rowptr{0};
    std::vector<std::int32_t> col;
    std::vector<double> val;

    std::size_t size() const { return n; }
    std::size_t nnz() const { return val.size(); }

    void apply(const std::vector<double>& x, std::vector<double>& y) const;
    void apply_serial(const std::vector<double>& x, std::vector<double>& y) const;

    double diag(std::size_t i) const;
    double max_abs_diag() const;
    bool offdiag_nonnegative() const;
    std::vector<double> row_sums() const;

    // (row, col, value) lines, 0-based
    std::string triplets() const;
};

// Row-by-row builder; entries of a row may be given in any order and
// duplicates are summed.
class CsrBuilder {
public:
    explicit CsrBuilder(std::size_t n);
    void add(std::size_t col, double v);
    void end_row();
    Csr finish();

private:
    Csr m_;
    std::vector<std::pair<std::int32_t, double>> row_;
};

} // namespace sepam
