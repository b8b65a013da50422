#pragma once

#include <cstdint>
#include <vector>

namespace sepam {

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    // Only filled by estimators of E exp[...]: log of the mean and its
    // jackknife standard error.
    double log_mean = 0.0;
    double log_stderr = 0.0;
    double ess = 0.0; // effective sample size of the exponential weights
};

// Plain sample mean and standard error.
McEstimate mean_estimate(const std::vector<double>& v, std::uint64_t seed = 0);

// E exp[x] from samples x_i, accumulated around max x_i so that large
// exponents do not overflow.  Standard error of the log by jackknife.
McEstimate exp_mean_estimate(const std::vector<double>& x, std::uint64_t seed = 0);

} // namespace sepam
