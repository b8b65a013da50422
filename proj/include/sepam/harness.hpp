#pragma once

#include "json.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sepam {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fills defaults and checks the config against its scenario schema.
// Throws ConfigError on an unknown scenario, a missing or mistyped field.
json validate_config(const json& cfg);
std::vector<std::string> scenario_names();

struct Report {
    std::string scenario;
    json config;      // validated, with defaults
    json environment;
    std::vector<json> rows; // each has "table" and "pass"
    bool pass = true;
    double wall_seconds = 0;
};

json environment_fingerprint();
Report run_scenario(const json& cfg);

// header line, one line per row, summary line
std::string report_to_jsonl(const Report& r);
Report report_from_jsonl(const std::string& text);

// One whitespace separated table per curve, "# " header line first.
struct FigureFile {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::string text() const;
    static FigureFile parse(const std::string& name, const std::string& text);
};
std::vector<FigureFile> emit_figures_data(const Report& r);

// rho + rho (1 - rho) G_d / (2 d kappa)
double kappa_asymptote(double rho, int d, double kappa);

// ---- acceptance suite ----

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

struct Criterion {
    int id;
    std::string name;
    std::function<CriterionResult()> run;
};

std::vector<Criterion> acceptance_criteria();
// ids empty: all.  `print` gets one line per finished criterion.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids,
                                            const std::function<void(const CriterionResult&)>& print);
std::string format_result(const CriterionResult& r);

} // namespace sepam
