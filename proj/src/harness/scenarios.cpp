#include "sepam/harness.hpp"

#include "checks.hpp"
#include "sepam/exact.hpp"
#include "sepam/irw.hpp"
#include "sepam/montecarlo.hpp"
#include "sepam/variational.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

namespace sepam {

namespace {

enum class Kind { Number, Positive, NonNegative, Integer, NumberList, IntList, Objects, String };

struct FieldSpec {
    std::string key;
    Kind kind;
    json def; // null: required
};

json default_weights()
{
    return json::array({{{"sites", {0}}, {"t0", 0}, {"t1", 1}, {"value", 1.0}},
                        {{"sites", {0}}, {"t0", 0}, {"t1", 1}, {"value", -1.0}},
                        {{"sites", {0, 1, 2}}, {"t0", 0}, {"t1", 1}, {"value", 1.0 / 3}},
                        {{"sites", {0, 1, 2}}, {"t0", 0}, {"t1", 1}, {"value", -1.0 / 3}}});
}

struct Schema {
    std::vector<FieldSpec> fields;
    json thresholds;
};

const std::map<std::string, Schema>& schemas()
{
    static const std::map<std::string, Schema> s{
        {"comparison_suite",
         {{{"d", Kind::Integer, 1},
           {"L", Kind::Integer, 6},
           {"rho", Kind::NumberList, {0.3, 0.5, 0.7}},
           {"t", Kind::Positive, 1.0},
           {"weights", Kind::Objects, default_weights()}},
          {{"margin_tolerance", 1e-10}}}},
        {"exact_vs_mc",
         {{{"d", Kind::Integer, 1},
           {"L", Kind::Integer, 6},
           {"rho", Kind::Positive, 0.5},
           {"kappa", Kind::NonNegative, 0.5},
           {"p", Kind::Integer, 1},
           {"gamma", Kind::Number, 1.0},
           {"t", Kind::Positive, 2.0},
           {"n", Kind::Integer, 200000}},
          {{"sigma", 3.0}, {"rel_gap", 0.02}}}},
        {"kappa_sweep",
         {{{"d", Kind::Integer, 1},
           {"L", Kind::Integer, 6},
           {"rho", Kind::Positive, 0.5},
           {"p_list", Kind::IntList, {1}},
           {"kappa_grid", Kind::NumberList, {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0}},
           {"gamma", Kind::Number, 1.0},
           {"sector", Kind::Integer, -2},
           {"asymptote_d", Kind::Integer, 0}},
          {{"monotone_tol", 1e-12}, {"convex_tol", 1e-9}}}},
        {"intermittency_kappa0",
         {{{"d", Kind::Integer, 1},
           {"L", Kind::Integer, 8},
           {"rho", Kind::Positive, 0.5},
           {"p_list", Kind::IntList, {1, 2, 3}},
           {"t_grid", Kind::NumberList, {1.0, 2.0, 4.0, 8.0}},
           {"gamma", Kind::Number, 1.0}},
          {{"min_gap", 1e-6}, {"hoelder_tol", 1e-12}}}},
        {"recurrent_trend",
         {{{"d", Kind::Integer, 1},
           {"L", Kind::Integer, 16},
           {"rho", Kind::Positive, 0.5},
           {"kappa", Kind::NonNegative, 1.0},
           {"p", Kind::Integer, 1},
           {"gamma", Kind::Number, 1.0},
           {"t_grid", Kind::NumberList, {1.0, 2.0, 4.0, 6.0, 8.0, 10.0}},
           {"n", Kind::Integer, 20000}},
          {{"sigma", 3.0}}}},
        {"asymptotic_probe",
         {{{"d", Kind::Integer, 4},
           {"kappa", Kind::Positive, 10.0},
           {"shift", Kind::NonNegative, 0.0},
           {"t", Kind::Positive, 200.0},
           {"n", Kind::Integer, 2000}},
          {{"rel_gap", 0.05}}}},
        {"field_checks",
         {{{"d", Kind::Integer, 3},
           {"T", Kind::Positive, 5.0},
           {"kappa", Kind::Positive, 2.0},
           {"rho", Kind::Positive, 0.5},
           {"samples", Kind::Integer, 100},
           {"koff_radius", Kind::Integer, 6},
           {"kappa_limit", Kind::Positive, 1000.0},
           {"mc_n", Kind::Integer, 40000}},
          {{"kdiag_tol", 1e-6}, {"limit_tol", 1e-3}, {"mass_tol", 1e-8}, {"mode_tol", 1e-6}, {"sigma", 4.0}}}},
    };
    return s;
}

void check_kind(const std::string& key, const json& v, Kind k)
{
    auto fail = [&](const std::string& what) { throw ConfigError("config field '" + key + "': " + what); };
    switch (k) {
    case Kind::Number:
        if (!v.is_number()) fail("expected a number");
        break;
    case Kind::Positive:
        if (!v.is_number() || !(v.get<double>() > 0)) fail("expected a positive number");
        break;
    case Kind::NonNegative:
        if (!v.is_number() || !(v.get<double>() >= 0)) fail("expected a number >= 0");
        break;
    case Kind::Integer:
        if (!v.is_number_integer()) fail("expected an integer");
        break;
    case Kind::NumberList:
    case Kind::IntList:
        if (!v.is_array() || v.empty()) fail("expected a non-empty list");
        for (const auto& x : v)
            if (k == Kind::IntList ? !x.is_number_integer() : !x.is_number()) fail("bad list entry");
        break;
    case Kind::Objects:
        if (!v.is_array()) fail("expected a list of objects");
        for (const auto& x : v)
            if (!x.is_object()) fail("expected a list of objects");
        break;
    case Kind::String:
        if (!v.is_string()) fail("expected a string");
        break;
    }
}

Torus torus_of(const json& c)
{
    int d = c["d"], L = c["L"];
    if (d < 1 || L < 2 || L % 2) throw ConfigError("torus needs d >= 1 and an even L >= 2");
    return Torus(d, L);
}

void add(Report& r, const std::string& table, json row, bool pass)
{
    row["table"] = table;
    row["pass"] = pass;
    r.pass = r.pass && pass;
    r.rows.push_back(std::move(row));
}

WeightFunction weight_of(const json& w, const Torus& T)
{
    WeightFunction K;
    if (w.contains("sites"))
        for (int z : w["sites"]) {
            if (z < 0 || static_cast<std::size_t>(z) >= T.sites()) throw ConfigError("weight site outside the torus");
            K.cells.push_back({static_cast<std::size_t>(z), w.value("t0", 0.0), w.value("t1", 1.0), w.value("value", 1.0)});
        }
    if (w.contains("atoms"))
        for (const auto& a : w["atoms"]) K.atoms.push_back({a.at("site").get<std::size_t>(), a.at("time"), a.at("value")});
    return K;
}

void comparison_suite(const json& c, Report& r)
{
    ComparisonParams p;
    p.torus = torus_of(c);
    p.kernel = srw_kernel(p.torus.d(), 1.0);
    p.seed = c["seed"];
    const double tol = c["thresholds"]["margin_tolerance"];
    p.tolerance = tol;
    for (double rho : c["rho"]) {
        p.rho = rho;
        int idx = 0;
        for (const auto& w : c["weights"]) {
            auto K = weight_of(w, p.torus);
            auto rep = compare_se_irw(p, K, c["t"]);
            add(r, "comparison",
                {{"rho", rho}, {"weight", idx++}, {"se", rep.se}, {"se_stderr", rep.se_stderr}, {"irw", rep.irw},
                 {"margin", rep.margin}, {"se_method", rep.se_method}, {"irw_method", rep.irw_method}},
                !rep.violation && (rep.se_method != "exact" || rep.margin >= -tol));
        }
    }
}

OperatorSpec op_spec(const json& c, const Torus& T)
{
    OperatorSpec s;
    s.torus = T;
    s.kernel = srw_kernel(T.d(), 1.0);
    s.rho = c["rho"];
    s.gamma = c["gamma"];
    if (c.contains("kappa")) s.kappa = c["kappa"];
    if (c.contains("p")) s.p = c["p"];
    return s;
}

void exact_vs_mc(const json& c, Report& r)
{
    auto T = torus_of(c);
    auto s = op_spec(c, T);
    const double t = c["t"];
    double ex = std::exp(exact_log_moment(s, t));
    MomentParams m;
    m.torus = T;
    m.kernel = s.kernel;
    m.rho = s.rho;
    m.kappa = s.kappa;
    m.p = s.p;
    m.gamma = s.gamma;
    auto e = estimate_moment(m, t, c["n"], c["seed"]);
    const double sig = c["thresholds"]["sigma"], gap = c["thresholds"]["rel_gap"];
    double rel = std::abs(e.mean - ex) / ex;
    add(r, "moment",
        {{"t", t}, {"exact", ex}, {"mc", e.mean}, {"stderr", e.stderr_}, {"log_mc", e.log_mean},
         {"log_stderr", e.log_stderr}, {"ess", e.ess}, {"n", e.n}, {"seed", e.seed}, {"relative_gap", rel},
         {"z", std::abs(e.mean - ex) / e.stderr_}},
        std::abs(e.mean - ex) <= sig * e.stderr_ && rel <= gap);
}

void kappa_sweep(const json& c, Report& r)
{
    auto T = torus_of(c);
    const double rho = c["rho"];
    int sector = c["sector"];
    if (sector == -2) {
        double n = rho * T.sites();
        sector = std::abs(n - std::round(n)) < 1e-12 ? static_cast<int>(std::lround(n)) : -1;
    }
    const int ad = c["asymptote_d"];
    const double mono = c["thresholds"]["monotone_tol"], conv = c["thresholds"]["convex_tol"];
    for (int p : c["p_list"]) {
        std::vector<double> lam, kap;
        for (double kappa : c["kappa_grid"]) {
            auto s = op_spec(c, T);
            s.p = p;
            s.kappa = kappa;
            s.sector = sector;
            auto e = top_eigenvalue(s);
            lam.push_back(e.lambda);
            kap.push_back(kappa);
            json row{{"p", p}, {"kappa", kappa}, {"lambda", e.lambda}, {"mu", e.mu}, {"residual", e.residual},
                     {"method", e.method}, {"sector", sector}};
            if (ad >= 3 && kappa > 0) row["asymptote"] = kappa_asymptote(rho, ad, kappa);
            add(r, "lambda", row, e.converged);
        }
        bool nonincreasing = true, convex = true;
        for (std::size_t i = 1; i < lam.size(); ++i)
            if (kap[i] > kap[i - 1] && lam[i] > lam[i - 1] + mono) nonincreasing = false;
        for (std::size_t i = 2; i < lam.size(); ++i) {
            double h1 = kap[i - 1] - kap[i - 2], h2 = kap[i] - kap[i - 1];
            double dd = (lam[i] - lam[i - 1]) / h2 - (lam[i - 1] - lam[i - 2]) / h1;
            if (dd * 0.5 * (h1 + h2) < -conv) convex = false;
        }
        add(r, "shape", {{"p", p}, {"nonincreasing", nonincreasing}, {"convex", convex}}, nonincreasing && convex);
    }
}

void intermittency_kappa0(const json& c, Report& r)
{
    auto T = torus_of(c);
    std::vector<double> grid = c["t_grid"];
    std::vector<std::vector<double>> prof;
    std::vector<int> ps = c["p_list"];
    for (int p : ps) {
        auto s = op_spec(c, T);
        s.kappa = 0;
        s.p = p;
        prof.push_back(exact_lambda_profile(s, grid));
        for (std::size_t k = 0; k < grid.size(); ++k) add(r, "Lambda", {{"p", p}, {"t", grid[k]}, {"Lambda", prof.back()[k]}}, true);
    }
    const double gap = c["thresholds"]["min_gap"], htol = c["thresholds"]["hoelder_tol"];
    for (std::size_t i = 1; i < ps.size(); ++i) {
        bool hoelder = true;
        for (std::size_t k = 0; k < grid.size(); ++k)
            if (grid[k] > 0 && prof[i][k] < prof[i - 1][k] - htol) hoelder = false;
        double g = prof[i].back() - prof[i - 1].back();
        add(r, "gap", {{"p", ps[i]}, {"t", grid.back()}, {"gap", g}, {"hoelder", hoelder}}, g > gap && hoelder);
    }
}

void recurrent_trend(const json& c, Report& r)
{
    MomentParams m;
    m.torus = torus_of(c);
    m.kernel = srw_kernel(m.torus.d(), 1.0);
    m.rho = c["rho"];
    m.kappa = c["kappa"];
    m.p = c["p"];
    m.gamma = c["gamma"];
    auto run = lambda_curve(m, c["t_grid"].get<std::vector<double>>(), c["n"], c["seed"], c["thresholds"]["sigma"]);
    for (std::size_t k = 0; k < run.t.size(); ++k)
        add(r, "Lambda", {{"t", run.t[k]}, {"Lambda", run.lambda[k]}, {"stderr", run.stderr_[k]}, {"ess", run.ess[k]}},
            true);
    add(r, "trend",
        {{"plateau", run.plateau}, {"plateau_stderr", run.plateau_stderr}, {"slope", run.slope}, {"fit_ok", run.fit_ok},
         {"nondecreasing", run.nondecreasing}, {"within_bounds", run.within_bounds}, {"note", run.note}},
        run.nondecreasing && run.within_bounds);
}

void asymptotic_probe_scenario(const json& c, Report& r)
{
    auto p = asymptotic_probe(c["d"], c["kappa"], c["shift"], c["t"], c["n"], c["seed"]);
    add(r, "probe",
        {{"estimate", p.estimate.mean}, {"stderr", p.estimate.stderr_}, {"n", p.estimate.n}, {"seed", p.estimate.seed},
         {"target", p.target}, {"relative_gap", p.relative_gap}},
        p.relative_gap <= c["thresholds"]["rel_gap"].get<double>());
}

void field_checks(const json& c, Report& r)
{
    const auto& th = c["thresholds"];
    auto a = checks::psi_bounds(c["d"], c["T"], c["kappa"], c["rho"], c["samples"], c["seed"]);
    add(r, "fields", a, a["pass"]);
    auto b = checks::kernels(c["d"], c["T"], c["kappa"], c["kappa_limit"], c["koff_radius"], th["kdiag_tol"],
                             th["limit_tol"]);
    add(r, "fields", b, b["pass"]);
    auto m = checks::cauchy_mass(th["mass_tol"]);
    add(r, "fields", m, m["pass"]);
    auto s = checks::cauchy_modes(th["mode_tol"], th["sigma"], c["mc_n"], c["seed"]);
    add(r, "fields", s, s["pass"]);
}

} // namespace

std::vector<std::string> scenario_names()
{
    std::vector<std::string> n;
    for (const auto& [k, v] : schemas()) n.push_back(k);
    return n;
}

json validate_config(const json& in)
{
    if (!in.is_object()) throw ConfigError("config must be an object");
    if (!in.contains("scenario") || !in["scenario"].is_string()) throw ConfigError("config needs a 'scenario' string");
    const std::string name = in["scenario"];
    auto it = schemas().find(name);
    if (it == schemas().end()) throw ConfigError("unknown scenario '" + name + "'");
    const Schema& sc = it->second;
    json c = in;
    c["seed"] = in.value("seed", 1);
    check_kind("seed", c["seed"], Kind::Integer);
    c["output"] = in.value("output", name + ".jsonl");
    check_kind("output", c["output"], Kind::String);
    c["threads"] = in.value("threads", 0);
    check_kind("threads", c["threads"], Kind::Integer);
    for (const auto& f : sc.fields) {
        if (!c.contains(f.key)) {
            if (f.def.is_null()) throw ConfigError("config field '" + f.key + "' is required");
            c[f.key] = f.def;
        }
        check_kind(f.key, c[f.key], f.kind);
    }
    json th = sc.thresholds;
    if (in.contains("thresholds")) {
        if (!in["thresholds"].is_object()) throw ConfigError("'thresholds' must be an object");
        for (auto& [k, v] : in["thresholds"].items()) {
            if (!th.contains(k)) throw ConfigError("unknown threshold '" + k + "'");
            check_kind("thresholds." + k, v, Kind::Number);
            th[k] = v;
        }
    }
    c["thresholds"] = th;
    std::vector<std::string> known{"scenario", "seed", "output", "threads", "thresholds"};
    for (const auto& f : sc.fields) known.push_back(f.key);
    for (auto& [k, v] : c.items())
        if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("unknown config field '" + k + "'");
    if (c.contains("L")) torus_of(c);
    for (const char* k : {"n", "samples", "mc_n"})
        if (c.contains(k) && c[k].get<long long>() < 2) throw ConfigError(std::string("config field '") + k + "' must be >= 2");
    return c;
}

json environment_fingerprint()
{
    return {{"compiler", __VERSION__},
            {"cplusplus", __cplusplus},
            {"openmp", _OPENMP},
            {"omp_max_threads", omp_get_max_threads()},
            {"hardware_threads", std::thread::hardware_concurrency()},
#ifdef NDEBUG
            {"build", "release"},
#else
            {"build", "debug"},
#endif
            {"heat_kernel_cache", std::getenv("SEPAM_HK_CACHE") ? std::getenv("SEPAM_HK_CACHE") : ""}};
}

Report run_scenario(const json& cfg)
{
    static const std::map<std::string, void (*)(const json&, Report&)> dispatch{
        {"comparison_suite", comparison_suite},   {"exact_vs_mc", exact_vs_mc},
        {"kappa_sweep", kappa_sweep},             {"intermittency_kappa0", intermittency_kappa0},
        {"recurrent_trend", recurrent_trend},     {"asymptotic_probe", asymptotic_probe_scenario},
        {"field_checks", field_checks}};
    Report r;
    r.config = validate_config(cfg);
    r.scenario = r.config["scenario"];
    r.environment = environment_fingerprint();
    int threads = r.config["threads"];
    if (threads > 0) omp_set_num_threads(threads);
    auto t0 = std::chrono::steady_clock::now();
    dispatch.at(r.scenario)(r.config, r);
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::string report_to_jsonl(const Report& r)
{
    std::ostringstream os;
    os << json{{"type", "header"}, {"scenario", r.scenario}, {"config", r.config}, {"environment", r.environment}}.dump()
       << '\n';
    for (const auto& row : r.rows) {
        json x = row;
        x["type"] = "row";
        os << x.dump() << '\n';
    }
    os << json{{"type", "summary"}, {"pass", r.pass}, {"rows", r.rows.size()}, {"wall_seconds", r.wall_seconds}}.dump()
       << '\n';
    return os.str();
}

Report report_from_jsonl(const std::string& text)
{
    Report r;
    std::istringstream is(text);
    std::string line;
    bool header = false, summary = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        json x = json::parse(line);
        std::string type = x.value("type", "");
        if (type == "header") {
            r.scenario = x["scenario"];
            r.config = x["config"];
            r.environment = x["environment"];
            header = true;
        } else if (type == "row") {
            x.erase("type");
            r.rows.push_back(x);
        } else if (type == "summary") {
            r.pass = x["pass"];
            r.wall_seconds = x["wall_seconds"];
            summary = true;
        }
    }
    if (!header || !summary) throw ConfigError("report: missing header or summary line");
    return r;
}

double kappa_asymptote(double rho, int d, double kappa)
{
    return rho + rho * (1 - rho) * green(srw_kernel(d, 1.0)) / (2 * d * kappa);
}

std::string FigureFile::text() const
{
    std::ostringstream os;
    os << "#";
    for (const auto& c : columns) os << ' ' << c;
    os << '\n';
    os.precision(17);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? " " : "") << row[i];
        os << '\n';
    }
    return os.str();
}

FigureFile FigureFile::parse(const std::string& name, const std::string& text)
{
    FigureFile f;
    f.name = name;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (line[0] == '#') {
            std::string c;
            ls.get();
            while (ls >> c) f.columns.push_back(c);
            continue;
        }
        std::vector<double> row;
        std::string tok;
        while (ls >> tok) row.push_back(std::stod(tok));
        if (row.size() != f.columns.size()) throw ConfigError("figure file: ragged row in " + name);
        f.rows.push_back(std::move(row));
    }
    return f;
}

std::vector<FigureFile> emit_figures_data(const Report& r)
{
    std::vector<FigureFile> out;
    const double nan = std::nan("");
    if (r.scenario == "kappa_sweep") {
        const double rho = r.config["rho"];
        const int ad = r.config["asymptote_d"];
        for (int p : r.config["p_list"]) {
            FigureFile f{"kappa_sweep_p" + std::to_string(p) + ".dat", {"kappa", "lambda", "ci", "asymptote"}, {}};
            for (const auto& row : r.rows)
                if (row["table"] == "lambda" && row["p"] == p) {
                    double k = row["kappa"];
                    f.rows.push_back({k, row["lambda"], 0.0, ad >= 3 && k > 0 ? kappa_asymptote(rho, ad, k) : nan});
                }
            out.push_back(std::move(f));
        }
    } else if (r.scenario == "recurrent_trend") {
        FigureFile f{"recurrent_trend.dat", {"t", "Lambda", "ci"}, {}};
        for (const auto& row : r.rows)
            if (row["table"] == "Lambda") f.rows.push_back({row["t"], row["Lambda"], 3 * row["stderr"].get<double>()});
        out.push_back(std::move(f));
    } else if (r.scenario == "intermittency_kappa0") {
        for (int p : r.config["p_list"]) {
            FigureFile f{"intermittency_p" + std::to_string(p) + ".dat", {"t", "Lambda"}, {}};
            for (const auto& row : r.rows)
                if (row["table"] == "Lambda" && row["p"] == p) f.rows.push_back({row["t"], row["Lambda"]});
            out.push_back(std::move(f));
        }
    }
    return out;
}

} // namespace sepam
