#include "nozzle/runner.hpp"

#include "nozzle/diagnostics.hpp"
#include "nozzle/error.hpp"
#include "nozzle/freeboundary.hpp"
#include "nozzle/grid.hpp"
#include "nozzle/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace nozzle {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Logger {
    const RunOptions& options;
    template <typename... T>
    void operator()(const T&... parts) const {
        if (!options.verbose || !options.log) return;
        ((*options.log << parts), ...);
        *options.log << '\n';
    }
};

fs::path output_dir(const RunConfig& cfg, const RunOptions& options) {
    return options.out ? *options.out : cfg.output.directory;
}

SolverConfig solver_for(const RunConfig& cfg, const RunOptions& options) {
    SolverConfig s = cfg.solver;
    if (options.serial) s.sweep = SweepOrder::lexicographic;
    return s;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json config_echo(const RunConfig& cfg, const SolverConfig& solver, double half_length, std::size_t nx) {
    json params = json::object();
    for (const auto& [k, v] : cfg.geometry_params.scalars) params[k] = v;
    return {{"Q", cfg.flux},
            {"preset", cfg.preset},
            {"params", params},
            {"N", half_length},
            {"nx", nx},
            {"ns", cfg.grid.ns},
            {"tol", solver.tol},
            {"max_iter", solver.max_iter},
            {"sweep", to_string(solver.sweep)},
            {"omega", solver.omega ? json(*solver.omega) : json(nullptr)},
            {"init", to_string(solver.init)},
            {"eps_fb", cfg.eps_fb()}};
}

struct Diagnosed {
    json summary;
    std::optional<FreeBoundaryCurves> curves;
    VelocityField velocity;
    bool checks_ok = true;
};

// Everything the summary reports about one converged (or stopped) solve.
Diagnosed diagnose(const RunConfig& cfg, const SolverConfig& solver, const SolveResult& result) {
    const DiscreteField& field = result.field;
    const auto& grid = field.grid();
    const auto& geom = grid.geometry();
    const auto consts = field.consts();
    const double q = consts.flux();
    const double eps_fb = cfg.eps_fb();
    const double eps_mono = default_eps_mono(grid, consts, solver.tol);
    const std::size_t nx = grid.nx();
    const std::size_t ns = grid.ns();

    Diagnosed out;
    json& s = out.summary;
    json checks = json::object();
    const auto& rep = result.report;

    s["converged"] = rep.converged;
    s["status"] = rep.converged ? "converged" : "failed";
    if (!rep.converged) s["failure"] = "max_iter reached before the projected gradient met tol";
    s["config"] = config_echo(cfg, solver, grid.half_length(), nx);

    double max_increase = 0.0;
    for (std::size_t k = 1; k < rep.energy_trace.size(); ++k) {
        max_increase = std::max(max_increase, rep.energy_trace[k] - rep.energy_trace[k - 1]);
    }
    s["solver"] = {{"iterations", rep.iterations},
                   {"energy", rep.energy},
                   {"projected_gradient", rep.projected_gradient},
                   {"omega", rep.omega},
                   {"trace_length", rep.energy_trace.size()},
                   {"trace_max_increase", max_increase}};
    checks["energy_trace_monotone"] = max_increase <= 0.0;

    const auto [lo_it, hi_it] = std::minmax_element(field.values().begin(), field.values().end());
    double min_step = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j + 1 < ns; ++j) min_step = std::min(min_step, field(i, j + 1) - field(i, j));
    }
    json inv = {{"psi_min", *lo_it},
                {"psi_max", *hi_it},
                {"min_column_increment", min_step},
                {"eps_mono", eps_mono}};
    checks["box"] = *lo_it >= 0.0 && *hi_it <= q;
    checks["monotone_x2"] = min_step >= -eps_mono;
    if (geom.mirror_symmetric) {
        double skew = 0.0;
        for (std::size_t i = 0; i < nx; ++i) {
            for (std::size_t j = 0; j < ns; ++j) skew = std::max(skew, std::abs(field(i, j) - (q - field(i, ns - 1 - j))));
        }
        inv["skew_symmetry_residual"] = skew;
    }
    s["invariants"] = inv;

    const auto el = el_residual(field, eps_fb);
    s["el_residual"] = {{"max", el.max_abs},
                        {"l2", el.l2},
                        {"wet_nodes", el.wet_nodes},
                        {"collar_gradient_max", el.collar_gradient_max},
                        {"collar_nodes", el.collar_nodes}};

    out.velocity = velocity_field(field, eps_fb);
    const auto& vel = out.velocity;
    s["velocity"] = {{"min_u1_interior", vel.min_u1},
                     {"max_divergence", vel.max_divergence},
                     {"max_vorticity_residual", vel.max_vorticity_residual}};

    const auto flux = flux_per_column(field, vel);
    double flux_dev = 0.0;
    for (double v : flux) flux_dev = std::max(flux_dev, std::abs(v - q) / q);
    const auto [flo, fhi] = std::minmax_element(flux.begin(), flux.end());
    s["flux"] = {{"min", *flo}, {"max", *fhi}, {"max_relative_deviation", flux_dev}};
    checks["flux_within_1pct"] = flux_dev <= 0.01;

    const auto stag = stagnation(field, eps_fb);
    s["stagnation"] = {{"area", stag.area},
                       {"dry_nodes", stag.dry_nodes},
                       {"max_speed_on_mask", max_speed_on(vel, stag.mask)}};

    // sub-zero region of the lower wall and the comparison barrier
    double below_zero = 0.0;
    bool dips = false;
    bool lower_nonpositive = true;
    for (std::size_t i = 0; i < nx; ++i) {
        lower_nonpositive = lower_nonpositive && grid.lower(i) <= 0.0;
        for (std::size_t j = 0; j < ns; ++j) {
            if (grid.x2(i, j) < 0.0) {
                dips = true;
                below_zero = std::max(below_zero, field(i, j));
            }
        }
    }
    const bool case_i = geom.mirror_symmetric && lower_nonpositive && !geom.top_flat;
    const bool case_ii = geom.top_flat && lower_nonpositive;
    json barrier = {{"applicable", case_i || case_ii}};
    if (case_i || case_ii) {
        const ShearFunction phi1(1.0, consts);
        double excess = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < nx; ++i) {
            for (std::size_t j = 0; j < ns; ++j) {
                const double x2 = grid.x2(i, j);
                if (case_i && x2 > 0.5) continue;
                excess = std::max(excess, field(i, j) - phi1(x2));
            }
        }
        barrier["region"] = case_i ? "x2 <= 1/2" : "all nodes";
        barrier["max_excess"] = excess;
        barrier["threshold"] = 10.0 * solver.tol;
        checks["barrier"] = excess <= 10.0 * solver.tol;
    }
    s["barrier"] = barrier;
    if (dips) s["max_psi_below_x2_zero"] = below_zero;

    if (geom.is_straight()) {
        const ShearFunction phi1(1.0, consts);
        double dev = 0.0;
        for (std::size_t i = 0; i < nx; ++i) {
            for (std::size_t j = 0; j < ns; ++j) dev = std::max(dev, std::abs(field(i, j) - phi1(grid.x2(i, j))));
        }
        const double var = strip_liouville_check(field);
        s["liouville"] = {{"max_row_variation", var}, {"max_deviation_from_poiseuille", dev}, {"threshold", 5e-3 * q}};
        checks["liouville"] = var <= 5e-3 * q && dev <= 5e-3 * q;
    }

    try {
        FreeBoundaryCurves curves = extract_free_boundaries(field, eps_fb, eps_mono);
        std::size_t lower_detached = 0;
        std::size_t upper_detached = 0;
        double min_over_dip = std::numeric_limits<double>::infinity();
        double cell_max = 0.0;
        for (std::size_t i = 0; i < curves.size(); ++i) {
            lower_detached += curves.lower_contact[i] ? 0 : 1;
            upper_detached += curves.upper_contact[i] ? 0 : 1;
            cell_max = std::max(cell_max, curves.cell[i]);
            if (curves.wall_lower[i] < 0.0) min_over_dip = std::min(min_over_dip, curves.lower[i]);
        }
        json fb = {{"eps_fb", eps_fb},
                   {"lower_detached_columns", lower_detached},
                   {"upper_detached_columns", upper_detached}};
        if (std::isfinite(min_over_dip)) {
            fb["min_lower_over_dip"] = min_over_dip;
            fb["dip_threshold"] = -2.0 * cell_max;
            checks["lower_boundary_above_zero"] = min_over_dip >= -2.0 * cell_max;
        }
        s["free_boundary"] = fb;

        const auto growth = growth_fit(field, curves, cfg.diagnostics.probe_radii);
        s["growth"] = {{"samples", growth.samples.size()},
                       {"exponent_min", growth.exponent_min},
                       {"exponent_max", growth.exponent_max},
                       {"ratio_min", growth.ratio_min},
                       {"ratio_max", growth.ratio_max},
                       {"probe_radii", {cfg.diagnostics.probe_radii.min, cfg.diagnostics.probe_radii.max}},
                       {"notices", growth.notices}};

        const auto slopes = slope_profile(curves);
        s["slopes"] = {{"lower_max_jump", slopes.lower_max_jump},
                       {"upper_max_jump", slopes.upper_max_jump},
                       {"window", slopes.window},
                       {"lower_window_jump", slopes.lower_window_jump},
                       {"upper_window_jump", slopes.upper_window_jump},
                       {"max_tangency_gap", slopes.max_tangency_gap},
                       {"transitions", slopes.transitions}};
        out.curves = std::move(curves);
    } catch (const DiagnosticError& e) {
        s["free_boundary"] = {{"error", e.what()}};
        checks["free_boundary_extraction"] = false;
    }

    for (const auto& [k, v] : checks.items()) out.checks_ok = out.checks_ok && v.get<bool>();
    s["checks"] = checks;
    return out;
}

// Writes the per-solve artifacts into dir according to the output formats.
void write_solve_artifacts(const RunConfig& cfg, const fs::path& dir, const SolveResult& result,
                           const Diagnosed& d) {
    fs::create_directories(dir);
    if (cfg.output.csv) {
        write_text(dir / "field.csv", field_csv(result.field, d.velocity));
        if (d.curves) write_text(dir / "curves.csv", curves_csv(*d.curves));
        write_text(dir / "trace.csv", trace_csv(result.report.energy_trace));
    }
    if (cfg.output.json) write_text(dir / "summary.json", dump(d.summary));
    if (cfg.output.svg) write_text(dir / "field.svg", field_svg(result.field, d.curves ? &*d.curves : nullptr));
}

SolveResult solve_at(const RunConfig& cfg, const SolverConfig& solver, double half_length, std::size_t nx) {
    const auto grid = build_grid(cfg.geometry(), half_length, nx, cfg.grid.ns);
    const auto consts = cfg.consts();
    return solve_minimizer(grid, boundary_data(*grid, consts), consts, solver);
}

void require_truncation(const NozzleGeometry& geom, double n, const std::string& key) {
    if (n < geom.min_truncation()) {
        throw ConfigError(key + ": N = " + format_number(n, 9) + " is below the geometry's minimum truncation " +
                          format_number(geom.min_truncation(), 9));
    }
}

} // namespace

int run_shear(const RunConfig& cfg, const RunOptions& options) {
    const Logger log{options};
    if (!cfg.shear) throw ConfigError("shear: block missing");
    const auto& block = *cfg.shear;
    if (block.heights.empty()) throw ConfigError("shear.d: list of heights is empty");
    const auto consts = cfg.consts();
    const double q = consts.flux();
    const fs::path dir = output_dir(cfg, options);
    fs::create_directories(dir);

    struct Row {
        double d, c, j, identity, symmetry;
        bool increasing;
    };
    std::vector<Row> rows;
    std::string table = "d,c,J,energy_identity_residual,symmetry_residual\n";
    for (double d : block.heights) {
        const ShearProfile p = build_shear_profile(d, consts, block.nodes);
        bool increasing = true;
        for (std::size_t k = 1; k + 1 < p.slopes.size(); ++k) increasing = increasing && p.slopes[k] > 0.0;
        Row r{d, p.slope_at_wall, energy_1d(p), p.energy_identity_residual(), p.symmetry_residual(), increasing};
        rows.push_back(r);
        log("d=", d, " c=", r.c, " J=", r.j);
        table += format_number(d) + ',' + format_number(r.c) + ',' + format_number(r.j) + ',' +
                 format_number(r.identity) + ',' + format_number(r.symmetry) + '\n';
        if (cfg.output.csv) write_text(dir / ("profile_d" + format_number(d, 9) + ".csv"), profile_csv(p));
    }
    if (cfg.output.csv) write_text(dir / "shear_table.csv", table);

    json checks = json::object();
    const double id_tol = 1e-8 * std::max(1.0, q * q);
    double worst_identity = 0.0;
    double worst_symmetry = 0.0;
    bool increasing = true;
    for (const auto& r : rows) {
        worst_identity = std::max(worst_identity, r.identity);
        worst_symmetry = std::max(worst_symmetry, r.symmetry);
        increasing = increasing && r.increasing;
    }
    checks["energy_identity"] = worst_identity <= id_tol;
    checks["symmetry"] = worst_symmetry <= 1e-8 * q;
    checks["profiles_increasing"] = increasing;

    auto sorted = rows;
    std::sort(sorted.begin(), sorted.end(), [](const Row& a, const Row& b) { return a.d < b.d; });
    if (sorted.size() >= 2) {
        bool c_dec = true;
        bool j_dec = true;
        for (std::size_t k = 1; k < sorted.size(); ++k) {
            if (sorted[k].d == sorted[k - 1].d) continue;
            c_dec = c_dec && sorted[k].c < sorted[k - 1].c;
            j_dec = j_dec && sorted[k].j < sorted[k - 1].j;
        }
        checks["c_strictly_decreasing"] = c_dec;
        checks["J_strictly_decreasing"] = j_dec;
    }
    json unit = nullptr;
    for (const auto& r : rows) {
        if (r.d != 1.0) continue;
        checks["c_of_1_zero"] = r.c == 0.0;
        checks["J1_closed_form"] = std::abs(r.j - 1.2 * q * q) <= 1e-8;
        unit = {{"c", r.c}, {"J", r.j}, {"J_closed_form", 1.2 * q * q}};
    }

    json profiles = json::array();
    for (const auto& r : rows) {
        profiles.push_back({{"d", r.d},
                            {"c", r.c},
                            {"J", r.j},
                            {"energy_identity_residual", r.identity},
                            {"symmetry_residual", r.symmetry}});
    }
    bool ok = true;
    for (const auto& [k, v] : checks.items()) ok = ok && v.get<bool>();
    const json summary = {{"Q", q},
                          {"nodes", block.nodes},
                          {"profiles", profiles},
                          {"unit_height", unit},
                          {"checks", checks},
                          {"status", ok ? "pass" : "fail"}};
    if (cfg.output.json) write_text(dir / "shear_summary.json", dump(summary));
    return ok ? kExitOk : kExitCheckFailed;
}

int run_solve(const RunConfig& cfg, const RunOptions& options) {
    const Logger log{options};
    const SolverConfig solver = solver_for(cfg, options);
    solver.validate();
    require_truncation(cfg.geometry(), cfg.grid.half_length, "grid.N");
    log("solving ", cfg.preset, " N=", cfg.grid.half_length, " on ", cfg.grid.nx, "x", cfg.grid.ns);
    const SolveResult result = solve_at(cfg, solver, cfg.grid.half_length, cfg.grid.nx);
    log("sweeps=", result.report.iterations, " energy=", format_number(result.report.energy),
        " pg=", result.report.projected_gradient, result.report.converged ? "" : " (not converged)");
    const Diagnosed d = diagnose(cfg, solver, result);
    write_solve_artifacts(cfg, output_dir(cfg, options), result, d);
    if (!result.report.converged) return kExitNotConverged;
    return d.checks_ok ? kExitOk : kExitCheckFailed;
}

int run_sweep(const RunConfig& cfg, const RunOptions& options) {
    const Logger log{options};
    const auto& list = cfg.diagnostics.sweep;
    if (list.size() < 2) throw ConfigError("diagnostics.sweep_N: needs at least two truncations");
    const NozzleGeometry geom = cfg.geometry();
    for (double n : list) require_truncation(geom, n, "diagnostics.sweep_N");
    std::vector<std::size_t> columns;
    for (double n : list) columns.push_back(cfg.columns_for(n));

    const SolverConfig solver = solver_for(cfg, options);
    solver.validate();
    const fs::path dir = output_dir(cfg, options);
    fs::create_directories(dir);

    std::vector<DiscreteField> fields;
    json per_n = json::array();
    bool all_converged = true;
    for (std::size_t k = 0; k < list.size(); ++k) {
        log("solving N=", list[k], " on ", columns[k], "x", cfg.grid.ns);
        SolveResult result = solve_at(cfg, solver, list[k], columns[k]);
        all_converged = all_converged && result.report.converged;
        const Diagnosed d = diagnose(cfg, solver, result);
        write_solve_artifacts(cfg, dir / ("N" + format_number(list[k], 9)), result, d);
        per_n.push_back({{"N", list[k]},
                         {"nx", columns[k]},
                         {"converged", result.report.converged},
                         {"energy", result.report.energy},
                         {"checks_ok", d.checks_ok}});
        fields.push_back(std::move(result.field));
    }

    const auto report = far_field_report(fields, cfg.consts(), cfg.diagnostics.tol_energy);
    std::string zeta = "N,energy,zeta,zeta_continuum\n";
    std::string far = "N,side,x1,deviation\n";
    json entries = json::array();
    for (const auto& e : report.entries) {
        zeta += format_number(e.half_length) + ',' + format_number(e.energy) + ',' + format_number(e.zeta) + ',' +
                format_number(e.zeta_continuum) + '\n';
        for (std::size_t k = 0; k < e.left_x1.size(); ++k) {
            far += format_number(e.half_length) + ",left," + format_number(e.left_x1[k]) + ',' +
                   format_number(e.left_deviation[k]) + '\n';
        }
        for (std::size_t k = 0; k < e.right_x1.size(); ++k) {
            far += format_number(e.half_length) + ",right," + format_number(e.right_x1[k]) + ',' +
                   format_number(e.right_deviation[k]) + '\n';
        }
        auto edge = [](const std::vector<double>& v, bool first) {
            return v.empty() ? json(nullptr) : json(first ? v.front() : v.back());
        };
        entries.push_back({{"N", e.half_length},
                           {"energy", e.energy},
                           {"zeta", e.zeta},
                           {"zeta_continuum", e.zeta_continuum},
                           {"left_outermost_deviation", edge(e.left_deviation, true)},
                           {"left_innermost_deviation", edge(e.left_deviation, false)},
                           {"right_innermost_deviation", edge(e.right_deviation, true)},
                           {"right_outermost_deviation", edge(e.right_deviation, false)}});
    }
    if (cfg.output.csv) {
        write_text(dir / "zeta.csv", zeta);
        write_text(dir / "far_field.csv", far);
    }
    const bool verdict = report.zeta_nonincreasing;
    const json summary = {{"preset", cfg.preset},
                          {"solves", per_n},
                          {"zeta", entries},
                          {"tol_energy", report.tol_energy},
                          {"zeta_spread", report.zeta_spread},
                          {"zeta_nonincreasing", verdict},
                          {"all_converged", all_converged},
                          {"verdict", verdict ? "pass" : "fail"}};
    if (cfg.output.json) write_text(dir / "sweep_summary.json", dump(summary));
    log("zeta nonincreasing: ", verdict ? "yes" : "no", " (spread ", report.zeta_spread, ")");
    if (!all_converged) return kExitNotConverged;
    return verdict ? kExitOk : kExitCheckFailed;
}

} // namespace nozzle
