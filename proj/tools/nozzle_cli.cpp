// nozzle: shear profiles, single solves and N-sweeps from a JSON run config.

#include "nozzle/config.hpp"
#include "nozzle/error.hpp"
#include "nozzle/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Stagnation regions of steady Euler flow in 2-D nozzles"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    nozzle::RunOptions options;
    options.log = &std::cerr;

    auto add_flags = [&](CLI::App* sub, bool runs) {
        sub->add_option("--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
        if (!runs) return;
        sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
        sub->add_flag("--serial", options.serial, "force the lexicographic sweep");
        sub->add_flag("--verbose", options.verbose, "progress on stderr");
    };
    auto* shear = app.add_subcommand("shear", "1-D shear profiles and their invariants");
    auto* solve = app.add_subcommand("solve", "one truncated solve with diagnostics");
    auto* sweep = app.add_subcommand("sweep", "solves over diagnostics.sweep_N and the zeta(N) table");
    auto* validate = app.add_subcommand("validate-config", "parse and check a configuration");
    add_flags(shear, true);
    add_flags(solve, true);
    add_flags(sweep, true);
    add_flags(validate, false);
    validate->add_flag("--verbose", options.verbose, "print the resolved configuration");

    CLI11_PARSE(app, argc, argv);
    if (!out_dir.empty()) options.out = out_dir;

    try {
        if (validate->parsed()) {
            const auto cfg = nozzle::validate_config_file(config_path);
            std::cout << "ok: " << cfg.preset << " N=" << cfg.grid.half_length << " grid " << cfg.grid.nx << "x"
                      << cfg.grid.ns << "\n";
            return nozzle::kExitOk;
        }
        const auto cfg = nozzle::load_config(config_path);
        if (shear->parsed()) return nozzle::run_shear(cfg, options);
        if (solve->parsed()) return nozzle::run_solve(cfg, options);
        return nozzle::run_sweep(cfg, options);
    } catch (const nozzle::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return nozzle::kExitConfig;
    } catch (const nozzle::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return nozzle::kExitConfig;
    } catch (const nozzle::DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return nozzle::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return nozzle::kExitRuntime;
    }
}
