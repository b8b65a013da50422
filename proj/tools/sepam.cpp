// Command line front end: run scenarios, validate configs, write figure
// tables and run the acceptance suite.
#include "sepam/harness.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace sepam;

namespace {

json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Catalytic exclusion moments: scenarios, figures and acceptance checks"};
    app.require_subcommand(1);

    std::string cfg_path, out_path, report_path, fig_dir = ".";
    std::vector<int> only;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "run a scenario config and write a JSONL report");
    run->add_option("config", cfg_path, "scenario config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--out", out_path, "report path (default: the config's output field)");
    run->add_flag("-q,--quiet", quiet, "no per-row output");

    auto* val = app.add_subcommand("validate", "check a config against its schema and print it with defaults");
    val->add_option("config", cfg_path)->required()->check(CLI::ExistingFile);

    auto* fig = app.add_subcommand("figures", "write plot tables from a JSONL report");
    fig->add_option("report", report_path)->required()->check(CLI::ExistingFile);
    fig->add_option("-d,--dir", fig_dir, "output directory");

    auto* self = app.add_subcommand("selftest", "run the acceptance criteria");
    self->add_option("--only", only, "criterion numbers")->check(CLI::Range(1, 12));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*val) {
            std::cout << validate_config(read_json(cfg_path)).dump(2) << "\n";
            return 0;
        }
        if (*run) {
            auto rep = run_scenario(read_json(cfg_path));
            std::string path = out_path.empty() ? rep.config["output"].get<std::string>() : out_path;
            auto parent = std::filesystem::path(path).parent_path();
            if (!parent.empty()) std::filesystem::create_directories(parent);
            std::ofstream(path) << report_to_jsonl(rep);
            if (!quiet)
                for (const auto& row : rep.rows) std::cout << row.dump() << "\n";
            std::cout << rep.scenario << ": " << (rep.pass ? "PASS" : "FAIL") << " (" << rep.rows.size() << " rows, "
                      << rep.wall_seconds << " s) -> " << path << "\n";
            return rep.pass ? 0 : 1;
        }
        if (*fig) {
            auto rep = report_from_jsonl(slurp(report_path));
            auto files = emit_figures_data(rep);
            if (files.empty()) std::cout << "no figure tables for scenario " << rep.scenario << "\n";
            std::filesystem::create_directories(fig_dir);
            for (const auto& f : files) {
                auto p = std::filesystem::path(fig_dir) / f.name;
                std::ofstream(p) << f.text();
                std::cout << p.string() << " (" << f.rows.size() << " rows)\n";
            }
            return 0;
        }
        if (*self) {
            auto res = run_acceptance(only, [](const CriterionResult& r) { std::cout << format_result(r) << std::endl; });
            int failed = 0;
            for (const auto& r : res) failed += !r.pass;
            std::cout << res.size() - failed << "/" << res.size() << " criteria passed\n";
            return failed ? 1 : 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
