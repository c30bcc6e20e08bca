#include "nozzle/config.hpp"

#include "nozzle/error.hpp"
#include "nozzle/grid.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace nozzle {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

void only_keys(const json& block, const std::string& path, std::initializer_list<const char*> keys) {
    if (!block.is_object()) fail(path, "expected an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : block.items()) {
        if (!allowed.count(key)) fail(path.empty() ? key : path + "." + key, "unknown key");
    }
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "expected a finite number");
    return x;
}

double positive(const json& v, const std::string& path) {
    const double x = number(v, path);
    if (!(x > 0.0)) fail(path, "must be positive");
    return x;
}

std::size_t count(const json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(path, "expected a non-negative integer");
    return static_cast<std::size_t>(v.get<long long>());
}

std::vector<double> numbers(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number(v[k], path + "[" + std::to_string(k) + "]"));
    return out;
}

std::string text(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

void read_geometry(const json& g, RunConfig& cfg) {
    only_keys(g, "geometry", {"preset", "params", "table"});
    if (g.contains("preset")) cfg.preset = text(g["preset"], "geometry.preset");
    if (g.contains("params")) {
        const auto& p = g["params"];
        if (!p.is_object()) fail("geometry.params", "expected an object");
        for (const auto& [key, value] : p.items()) {
            cfg.geometry_params.scalars[key] = number(value, "geometry.params." + key);
        }
    }
    if (g.contains("table")) {
        const auto& t = g["table"];
        only_keys(t, "geometry.table", {"x", "h0", "h1"});
        for (const char* key : {"x", "h0", "h1"}) {
            if (!t.contains(key)) fail(join("geometry.table", key), "missing");
        }
        cfg.geometry_params.table_x = numbers(t["x"], "geometry.table.x");
        cfg.geometry_params.table_lower = numbers(t["h0"], "geometry.table.h0");
        cfg.geometry_params.table_upper = numbers(t["h1"], "geometry.table.h1");
    }
}

void read_solver(const json& s, SolverConfig& solver) {
    only_keys(s, "solver", {"tol", "max_iter", "sweep", "omega", "init"});
    if (s.contains("tol")) solver.tol = positive(s["tol"], "solver.tol");
    if (s.contains("max_iter")) {
        const std::size_t n = count(s["max_iter"], "solver.max_iter");
        if (n < 1 || n > 100000000) fail("solver.max_iter", "must lie in [1, 1e8]");
        solver.max_iter = static_cast<int>(n);
    }
    if (s.contains("sweep")) {
        const std::string v = text(s["sweep"], "solver.sweep");
        if (v == "lexicographic") solver.sweep = SweepOrder::lexicographic;
        else if (v == "red-black") solver.sweep = SweepOrder::red_black;
        else fail("solver.sweep", "expected 'lexicographic' or 'red-black', got '" + v + "'");
    }
    if (s.contains("omega") && !s["omega"].is_null()) {
        const double w = number(s["omega"], "solver.omega");
        if (!(w > 0.0 && w < 2.0)) fail("solver.omega", "must lie in (0, 2)");
        solver.omega = w;
    }
    if (s.contains("init")) {
        const std::string v = text(s["init"], "solver.init");
        if (v == "column-profile") solver.init = InitialGuess::column_profile;
        else if (v == "sigma-linear") solver.init = InitialGuess::sigma_linear;
        else if (v == "harmonic") solver.init = InitialGuess::harmonic;
        else fail("solver.init", "expected 'column-profile', 'sigma-linear' or 'harmonic', got '" + v + "'");
    }
}

void read_diagnostics(const json& d, DiagnosticsBlock& diag) {
    only_keys(d, "diagnostics", {"eps_fb", "probe_radii", "sweep_N", "tol_energy"});
    if (d.contains("eps_fb") && !d["eps_fb"].is_null()) diag.eps_fb = positive(d["eps_fb"], "diagnostics.eps_fb");
    if (d.contains("probe_radii")) {
        const auto r = numbers(d["probe_radii"], "diagnostics.probe_radii");
        if (r.size() != 2 || !(r[0] >= 0.0) || !(r[1] > r[0])) {
            fail("diagnostics.probe_radii", "expected [min, max] with 0 <= min < max");
        }
        diag.probe_radii = {r[0], r[1]};
    }
    if (d.contains("sweep_N")) {
        diag.sweep = numbers(d["sweep_N"], "diagnostics.sweep_N");
        if (diag.sweep.size() < 2) fail("diagnostics.sweep_N", "needs at least two truncations");
        for (std::size_t k = 1; k < diag.sweep.size(); ++k) {
            if (!(diag.sweep[k] > diag.sweep[k - 1])) fail("diagnostics.sweep_N", "must be strictly increasing");
        }
    }
    if (d.contains("tol_energy")) {
        const double t = number(d["tol_energy"], "diagnostics.tol_energy");
        if (!(t >= 0.0)) fail("diagnostics.tol_energy", "must be non-negative");
        diag.tol_energy = t;
    }
}

ShearBlock read_shear(const json& s) {
    only_keys(s, "shear", {"d", "nodes"});
    ShearBlock out;
    if (!s.contains("d")) fail("shear.d", "missing");
    out.heights = numbers(s["d"], "shear.d");
    if (out.heights.empty()) fail("shear.d", "list of heights is empty");
    for (std::size_t k = 0; k < out.heights.size(); ++k) {
        const double d = out.heights[k];
        if (!(d > 0.0 && d <= 1.0)) fail("shear.d[" + std::to_string(k) + "]", "height must lie in (0, 1]");
    }
    if (s.contains("nodes")) {
        out.nodes = count(s["nodes"], "shear.nodes");
        if (out.nodes < 3) fail("shear.nodes", "must be at least 3");
    }
    return out;
}

void read_output(const json& o, OutputBlock& out) {
    only_keys(o, "output", {"directory", "formats"});
    if (o.contains("directory")) out.directory = text(o["directory"], "output.directory");
    if (o.contains("formats")) {
        const auto& f = o["formats"];
        if (!f.is_array()) fail("output.formats", "expected an array of strings");
        out.csv = out.json = out.svg = false;
        for (std::size_t k = 0; k < f.size(); ++k) {
            const std::string v = text(f[k], "output.formats[" + std::to_string(k) + "]");
            if (v == "csv") out.csv = true;
            else if (v == "json") out.json = true;
            else if (v == "svg") out.svg = true;
            else fail("output.formats[" + std::to_string(k) + "]", "unknown format '" + v + "'");
        }
    }
}

} // namespace

NozzleGeometry RunConfig::geometry() const { return preset_geometry(preset, geometry_params); }

double RunConfig::eps_fb() const {
    return diagnostics.eps_fb ? *diagnostics.eps_fb : default_eps_fb(consts(), solver.tol);
}

std::size_t RunConfig::columns_for(double n) const {
    const double hxi = 2.0 * grid.half_length / static_cast<double>(grid.nx - 1);
    const double cells = 2.0 * n / hxi;
    const double whole = std::round(cells);
    if (!(whole >= 1.0) || std::abs(cells - whole) > 1e-9 * std::max(1.0, cells)) {
        std::ostringstream msg;
        msg << "N = " << n << " is not a whole number of columns at spacing " << hxi;
        fail("diagnostics.sweep_N", msg.str());
    }
    return static_cast<std::size_t>(whole) + 1;
}

RunConfig parse_config(const std::string& text_in) {
    json doc;
    try {
        doc = json::parse(text_in);
    } catch (const json::parse_error& e) {
        throw ConfigError(e.what());
    }
    only_keys(doc, "", {"schema", "flow", "geometry", "grid", "solver", "diagnostics", "shear", "output"});
    if (!doc.contains("schema")) fail("schema", "missing");
    const std::string schema = text(doc["schema"], "schema");
    if (schema != kConfigSchema) fail("schema", "expected '" + std::string(kConfigSchema) + "', got '" + schema + "'");

    RunConfig cfg;
    if (doc.contains("flow")) {
        only_keys(doc["flow"], "flow", {"Q"});
        if (doc["flow"].contains("Q")) cfg.flux = positive(doc["flow"]["Q"], "flow.Q");
    }
    if (doc.contains("geometry")) read_geometry(doc["geometry"], cfg);
    if (doc.contains("grid")) {
        const auto& g = doc["grid"];
        only_keys(g, "grid", {"N", "nx", "ns"});
        if (g.contains("N")) cfg.grid.half_length = positive(g["N"], "grid.N");
        if (g.contains("nx")) cfg.grid.nx = count(g["nx"], "grid.nx");
        if (g.contains("ns")) cfg.grid.ns = count(g["ns"], "grid.ns");
        if (cfg.grid.nx < 8) fail("grid.nx", "must be at least 8");
        if (cfg.grid.ns < 8) fail("grid.ns", "must be at least 8");
    }
    if (doc.contains("solver")) read_solver(doc["solver"], cfg.solver);
    if (doc.contains("diagnostics")) read_diagnostics(doc["diagnostics"], cfg.diagnostics);
    if (doc.contains("shear")) cfg.shear = read_shear(doc["shear"]);
    if (doc.contains("output")) read_output(doc["output"], cfg.output);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

RunConfig validate_config_file(const std::filesystem::path& path) {
    RunConfig cfg = load_config(path);
    const NozzleGeometry geom = cfg.geometry();
    geom.validate();
    const double l0 = geom.min_truncation();
    if (cfg.grid.half_length < l0) {
        std::ostringstream msg;
        msg << "N = " << cfg.grid.half_length << " is below the geometry's minimum truncation " << l0;
        fail("grid.N", msg.str());
    }
    for (double n : cfg.diagnostics.sweep) {
        if (n < l0) {
            std::ostringstream msg;
            msg << "N = " << n << " is below the geometry's minimum truncation " << l0;
            fail("diagnostics.sweep_N", msg.str());
        }
        cfg.columns_for(n);
    }
    return cfg;
}

} // namespace nozzle
