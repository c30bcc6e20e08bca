#include "oracles.hpp"

#include "nozzle/config.hpp"
#include "nozzle/error.hpp"
#include "nozzle/grid.hpp"
#include "nozzle/io.hpp"
#include "nozzle/runner.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <string>

using namespace nozzle;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::path(NOZZLE_TEST_TMP) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string message_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_text(p)); }

const char* kSmallBump = R"({
  "schema": "nozzle-run/1",
  "geometry": {"preset": "symmetric-bump", "params": {"amplitude": 0.2}},
  "grid": {"N": 2, "nx": 65, "ns": 41},
  "solver": {"tol": 1e-6}
})";

} // namespace

TEST_SUITE("cli") {

TEST_CASE("defaults and overrides") {
    const auto cfg = parse_config(R"({"schema": "nozzle-run/1"})");
    CHECK(cfg.flux == 1.0);
    CHECK(cfg.preset == "straight");
    CHECK(cfg.grid.nx == 161);
    CHECK(cfg.grid.ns == 41);
    CHECK(cfg.solver.tol == 1e-6);
    CHECK(cfg.eps_fb() == doctest::Approx(1e-5));
    CHECK(cfg.output.csv);
    CHECK_FALSE(cfg.shear.has_value());

    const auto full = parse_config(R"({
      "schema": "nozzle-run/1",
      "flow": {"Q": 2.0},
      "geometry": {"preset": "top-flat-bottom-bump", "params": {"amplitude": -0.1}},
      "grid": {"N": 3, "nx": 97, "ns": 21},
      "solver": {"tol": 1e-7, "max_iter": 50, "sweep": "red-black", "omega": 1.5, "init": "harmonic"},
      "diagnostics": {"eps_fb": 1e-4, "probe_radii": [0.01, 0.1], "sweep_N": [3, 4], "tol_energy": 1e-9},
      "shear": {"d": [0.5, 1.0], "nodes": 101},
      "output": {"directory": "elsewhere", "formats": ["json"]}
    })");
    CHECK(full.flux == 2.0);
    CHECK(full.geometry_params.scalars.at("amplitude") == -0.1);
    CHECK(full.solver.sweep == SweepOrder::red_black);
    CHECK(full.solver.init == InitialGuess::harmonic);
    CHECK(*full.solver.omega == 1.5);
    CHECK(full.eps_fb() == 1e-4);
    CHECK(full.diagnostics.probe_radii.max == 0.1);
    CHECK(full.shear->heights.size() == 2);
    CHECK_FALSE(full.output.csv);
    CHECK(full.output.json);
    CHECK(full.columns_for(4.0) == 129);
    CHECK_THROWS_AS(full.columns_for(3.01), ConfigError);
}

TEST_CASE("rejections carry key paths or positions") {
    CHECK(message_of(R"({"schema": "nozzle-run/1", "grid": {"nx": 10, "mx": 3}})").find("grid.mx") != std::string::npos);
    CHECK(message_of(R"({"schema": "nozzle-run/1", "extra": 1})").find("extra") != std::string::npos);
    CHECK(message_of(R"({"schema": "nozzle-run/2"})").find("schema") != std::string::npos);
    CHECK(message_of(R"({"flow": {"Q": 1}})").find("schema") != std::string::npos);
    CHECK(message_of(R"({"schema": "nozzle-run/1", "shear": {"d": []}})").find("shear.d") != std::string::npos);
    CHECK(message_of(R"({"schema": "nozzle-run/1", "shear": {"d": [0.5, 1.2]}})").find("shear.d[1]") !=
          std::string::npos);
    CHECK(message_of(R"({"schema": "nozzle-run/1", "diagnostics": {"sweep_N": [6]}})").find("sweep_N") !=
          std::string::npos);
    CHECK(message_of(R"({"schema": "nozzle-run/1", "solver": {"sweep": "random"}})").find("solver.sweep") !=
          std::string::npos);
    CHECK(message_of(R"({"schema": "nozzle-run/1", "grid": {"nx": 12.5}})").find("grid.nx") != std::string::npos);
    CHECK(message_of("{\"schema\": \"nozzle-run/1\",\n \"grid\": {\"N\": 5 \"nx\": 3}}").find("line 2") !=
          std::string::npos);
}

TEST_CASE("validate_config_file checks geometry and truncations") {
    const auto dir = scratch("validate");
    write_text(dir / "bad_walls.json", R"({"schema": "nozzle-run/1", "geometry": {"preset": "sampled",
        "table": {"x": [-1, 0, 1], "h0": [0, 0.6, 0], "h1": [1, 0.5, 1]}}})");
    try {
        validate_config_file(dir / "bad_walls.json");
        FAIL("expected a ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("x1=") != std::string::npos);
    }
    write_text(dir / "short.json", R"({"schema": "nozzle-run/1", "geometry": {"preset": "symmetric-bump"},
        "diagnostics": {"sweep_N": [0.5, 2]}})");
    CHECK_THROWS_AS(validate_config_file(dir / "short.json"), ConfigError);
    write_text(dir / "ok.json", kSmallBump);
    CHECK(validate_config_file(dir / "ok.json").grid.nx == 65);
    CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
}

TEST_CASE("field CSV round trip reproduces the energy") {
    const FlowConstants c(1.0);
    const auto grid = build_grid(preset_geometry("symmetric-bump"), 2.0, 33, 17);
    const auto r = solve_minimizer(grid, boundary_data(*grid, c), c, SolverConfig{});
    const auto vel = velocity_field(r.field, 1e-5);
    const std::string csv = field_csv(r.field, vel);
    CHECK(csv.rfind("x1,x2,psi,u1,u2\n", 0) == 0);
    CHECK(csv.find('\r') == std::string::npos);
    const auto back = read_field_csv(csv, grid, c);
    CHECK(back.values() == r.field.values());
    const double e0 = discrete_energy(r.field);
    CHECK(std::abs(discrete_energy(back) - e0) <= 1e-12 * e0);
    CHECK_THROWS_AS(read_field_csv(csv, build_grid(preset_geometry("symmetric-bump"), 2.0, 33, 9), c), DomainError);
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(0.1, 9) == "0.1");
    CHECK(format_number(-0.0) == "0");
    CHECK(std::stod(format_number(M_PI)) == M_PI);
}

TEST_CASE("contours of Poiseuille flow are horizontal at the right height") {
    const FlowConstants c(1.0);
    const auto grid = build_grid(preset_geometry("straight"), 1.0, 11, 21);
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < grid->nx(); ++i) {
        for (std::size_t j = 0; j < grid->ns(); ++j) v[grid->index(i, j)] = oracle::phi1(grid->x2(i, j), 1.0);
    }
    const DiscreteField f(grid, c, v);
    const auto segs = contour_segments(f, 0.5);
    CHECK(segs.size() == grid->nx() - 1);
    for (const auto& s : segs) {
        CHECK(s.x2a == doctest::Approx(0.5));
        CHECK(s.x2b == doctest::Approx(0.5));
    }
    const std::string svg = field_svg(f, nullptr);
    CHECK(svg.find("version=\"1.1\"") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("run_shear writes profiles and the table; unit height row is exact") {
    const auto dir = scratch("shear");
    auto cfg = parse_config(R"({"schema": "nozzle-run/1", "shear": {"d": [0.2, 0.4, 0.6, 0.8, 1.0]}})");
    RunOptions opt;
    opt.out = dir;
    REQUIRE(run_shear(cfg, opt) == kExitOk);
    const auto summary = read_json(dir / "shear_summary.json");
    CHECK(summary["status"] == "pass");
    CHECK(summary["checks"]["c_strictly_decreasing"] == true);
    CHECK(summary["checks"]["J_strictly_decreasing"] == true);
    CHECK(summary["unit_height"]["c"].get<double>() == 0.0);
    CHECK(std::abs(summary["unit_height"]["J"].get<double>() - 1.2) <= 1e-8);
    CHECK(fs::exists(dir / "profile_d0.2.csv"));
    CHECK(read_text(dir / "profile_d1.csv").rfind("x2,phi,dphi\n", 0) == 0);
    CHECK(read_text(dir / "shear_table.csv").rfind("d,c,J,", 0) == 0);

    cfg.shear->heights.clear();
    CHECK_THROWS_AS(run_shear(cfg, opt), ConfigError);
}

TEST_CASE("run_solve on the strip and the bump") {
    RunOptions opt;
    opt.serial = true;
    const auto straight_dir = scratch("solve_straight");
    opt.out = straight_dir;
    const auto straight = parse_config(R"({"schema": "nozzle-run/1", "grid": {"N": 2, "nx": 65, "ns": 41}})");
    REQUIRE(run_solve(straight, opt) == kExitOk);
    const auto s = read_json(straight_dir / "summary.json");
    CHECK(s["liouville"]["max_row_variation"].get<double>() <= s["liouville"]["threshold"].get<double>());
    CHECK(s["stagnation"]["area"].get<double>() == 0.0);
    CHECK(s["converged"] == true);
    for (const char* f : {"field.csv", "curves.csv", "trace.csv", "field.svg"}) CHECK(fs::exists(straight_dir / f));

    const auto bump_dir = scratch("solve_bump");
    opt.out = bump_dir;
    REQUIRE(run_solve(parse_config(kSmallBump), opt) == kExitOk);
    const auto b = read_json(bump_dir / "summary.json");
    CHECK(b["stagnation"]["area"].get<double>() > 0.0);
    CHECK(b["free_boundary"]["min_lower_over_dip"].get<double>() >= -1e-5);
    CHECK(b["checks"]["barrier"] == true);
}

TEST_CASE("serial runs are byte-identical") {
    RunOptions opt;
    opt.serial = true;
    auto cfg = parse_config(kSmallBump);
    cfg.solver.sweep = SweepOrder::red_black;
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    opt.out = a;
    REQUIRE(run_solve(cfg, opt) == kExitOk);
    opt.out = b;
    REQUIRE(run_solve(cfg, opt) == kExitOk);
    for (const char* f : {"field.csv", "curves.csv", "trace.csv", "summary.json", "field.svg"}) {
        CHECK(read_text(a / f) == read_text(b / f));
    }
    CHECK(read_json(a / "summary.json")["config"]["sweep"] == "lexicographic");
}

TEST_CASE("non-convergence exits nonzero and still writes a marked summary") {
    const auto dir = scratch("stalled");
    auto cfg = parse_config(kSmallBump);
    cfg.solver.max_iter = 2;
    RunOptions opt;
    opt.out = dir;
    CHECK(run_solve(cfg, opt) == kExitNotConverged);
    const auto s = read_json(dir / "summary.json");
    CHECK(s["converged"] == false);
    CHECK(s["status"] == "failed");
    CHECK(s.contains("failure"));
    CHECK(fs::exists(dir / "field.csv"));
}

TEST_CASE("run_sweep on the strip: zeta constant") {
    const auto dir = scratch("sweep");
    const auto cfg = parse_config(R"({"schema": "nozzle-run/1", "grid": {"N": 2, "nx": 33, "ns": 21},
        "diagnostics": {"sweep_N": [2, 3, 4]}, "output": {"formats": ["csv", "json"]}})");
    RunOptions opt;
    opt.out = dir;
    REQUIRE(run_sweep(cfg, opt) == kExitOk);
    const auto s = read_json(dir / "sweep_summary.json");
    CHECK(s["verdict"] == "pass");
    CHECK(s["zeta_spread"].get<double>() <= 1e-8);
    CHECK(s["solves"][2]["nx"] == 65);
    CHECK(read_text(dir / "zeta.csv").rfind("N,energy,zeta,zeta_continuum\n", 0) == 0);
    CHECK(fs::exists(dir / "N3" / "summary.json"));

    const auto short_sweep = parse_config(R"({"schema": "nozzle-run/1", "geometry": {"preset": "symmetric-bump"},
        "grid": {"N": 2, "nx": 33, "ns": 21}, "diagnostics": {"sweep_N": [0.5, 2]}})");
    CHECK_THROWS_AS(run_sweep(short_sweep, opt), ConfigError);
}

} // TEST_SUITE
