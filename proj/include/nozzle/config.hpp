#pragma once

// Run configuration: a JSON document with a schema tag and the blocks
// flow, geometry, grid, solver, diagnostics, shear and output. Unknown keys
// are rejected at every level.

#include "nozzle/freeboundary.hpp"
#include "nozzle/geometry.hpp"
#include "nozzle/minimizer.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nozzle {

inline constexpr const char* kConfigSchema = "nozzle-run/1";

struct GridBlock {
    double half_length = 5.0;  ///< N
    std::size_t nx = 161;
    std::size_t ns = 41;
};

struct DiagnosticsBlock {
    std::optional<double> eps_fb;  ///< default max(1e-6 Q, 10 tol)
    ProbeRadii probe_radii;
    std::vector<double> sweep;     ///< truncations for the N-sweep
    double tol_energy = 1e-8;      ///< slack in the zeta monotonicity verdict
};

struct ShearBlock {
    std::vector<double> heights;  ///< d values
    std::size_t nodes = 2001;
};

struct OutputBlock {
    std::filesystem::path directory = "out";
    bool csv = true;
    bool json = true;
    bool svg = true;
};

struct RunConfig {
    double flux = 1.0;
    std::string preset = "straight";
    GeometryParams geometry_params;
    GridBlock grid;
    SolverConfig solver;
    DiagnosticsBlock diagnostics;
    std::optional<ShearBlock> shear;
    OutputBlock output;

    FlowConstants consts() const { return FlowConstants(flux); }
    NozzleGeometry geometry() const;
    double eps_fb() const;
    /// Column count for truncation n at the grid block's column spacing;
    /// ConfigError when n is not a whole number of columns.
    std::size_t columns_for(double n) const;
};

/// Throws ConfigError with line/column or key-path context.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Full check: parse, geometry construction, grid limits, sweep list.
/// Returns the parsed config; throws ConfigError or ValidationError.
RunConfig validate_config_file(const std::filesystem::path& path);

} // namespace nozzle
