#pragma once

// Orchestration behind the command-line subcommands. Each run writes its
// artifacts under the output directory and returns a process exit status.

#include "nozzle/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace nozzle {

enum ExitStatus : int {
    kExitOk = 0,
    kExitConfig = 1,        ///< rejected configuration
    kExitNotConverged = 2,  ///< solver hit max_iter; artifacts still written
    kExitCheckFailed = 3,   ///< an invariant or verdict failed
    kExitRuntime = 4,
};

struct RunOptions {
    std::optional<std::filesystem::path> out;  ///< overrides output.directory
    bool serial = false;                       ///< force the lexicographic sweep
    bool verbose = false;
    std::ostream* log = nullptr;               ///< progress lines when verbose
};

/// Profiles CSV per d, table of (d, c(d), J_d) and invariant checks.
int run_shear(const RunConfig& config, const RunOptions& options);
/// One solve at grid.N: field, curves and energy trace CSV, summary JSON, SVG.
int run_solve(const RunConfig& config, const RunOptions& options);
/// One solve per diagnostics.sweep_N entry at the grid's column spacing, then
/// the zeta(N) table and far-field report.
int run_sweep(const RunConfig& config, const RunOptions& options);

} // namespace nozzle
