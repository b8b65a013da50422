// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Optional arguments select criteria by number.
#include "sepam/harness.hpp"

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv)
{
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
    auto res = sepam::run_acceptance(ids, [](const sepam::CriterionResult& r) {
        std::cout << sepam::format_result(r) << std::endl;
    });
    int failed = 0;
    for (const auto& r : res) failed += !r.pass;
    std::cout << res.size() - failed << "/" << res.size() << " criteria passed" << std::endl;
    return failed ? 1 : 0;
}
