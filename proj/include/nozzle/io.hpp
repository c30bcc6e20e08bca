#pragma once

// Artifact serialisation: CSV (header row, LF endings, 17 significant digits),
// SVG 1.1 plots (9 significant digits) and plain file helpers.

#include "nozzle/diagnostics.hpp"
#include "nozzle/freeboundary.hpp"
#include "nozzle/minimizer.hpp"
#include "nozzle/profile1d.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace nozzle {

/// %.<digits>g
std::string format_number(double x, int digits = 17);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

/// One row per node in (i, j) order: x1,x2,psi,u1,u2.
std::string field_csv(const DiscreteField& field, const VelocityField& velocity);

/// Rebuilds a field on `grid` from field_csv output. Throws DomainError when
/// the row count or node coordinates do not match the grid.
DiscreteField read_field_csv(const std::string& csv, std::shared_ptr<const CurvilinearGrid> grid,
                             const FlowConstants& consts);

std::string curves_csv(const FreeBoundaryCurves& curves);
/// x2,phi,dphi
std::string profile_csv(const ShearProfile& profile);
/// sweep,energy
std::string trace_csv(const std::vector<double>& energies);

/// Contours of psi at Q k / 10 (k = 1..9), the walls and the free boundaries.
std::string field_svg(const DiscreteField& field, const FreeBoundaryCurves* curves);

/// Segments (x1a, x2a, x1b, x2b) of the level set {psi = level}, by marching
/// squares over the mapped grid cells.
struct Segment {
    double x1a, x2a, x1b, x2b;
};
std::vector<Segment> contour_segments(const DiscreteField& field, double level);

} // namespace nozzle
