#pragma once

// Stagnation-region boundaries of a converged field. Per column, the lower
// free boundary is the top of the set {psi = 0} and the upper one the bottom
// of {psi = Q}; both are located with sub-cell accuracy.

#include "nozzle/minimizer.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace nozzle {

/// max(1e-6 Q, 10 tol).
double default_eps_fb(const FlowConstants& consts, double tol);
/// 10 tol + Q hsigma^2.
double default_eps_mono(const CurvilinearGrid& grid, const FlowConstants& consts, double tol);

struct FreeBoundaryCurves {
    std::vector<double> x1;
    std::vector<double> wall_lower;  ///< h0
    std::vector<double> wall_upper;  ///< h1
    std::vector<double> lower;       ///< top of {psi <= eps_fb}
    std::vector<double> upper;       ///< bottom of {psi >= Q - eps_fb}
    std::vector<bool> lower_contact;  ///< lower within one cell of h0
    std::vector<bool> upper_contact;
    std::vector<double> cell;        ///< physical row spacing per column
    double eps_fb = 0.0;
    double half_length = 0.0;

    std::size_t size() const { return x1.size(); }
    /// Column lies at least one unit inside the lateral cuts.
    bool interior_column(std::size_t i) const;
};

/// Throws DiagnosticError naming the column when psi decreases upward by more
/// than eps_mono.
FreeBoundaryCurves extract_free_boundaries(const DiscreteField& field, double eps_fb, double eps_mono);

struct ProbeRadii {
    double min = 0.02;
    double max = 0.2;
};

struct GrowthSample {
    double x1 = 0.0;
    double z = 0.0;        ///< free-boundary height
    bool lower = true;     ///< lower (psi -> 0) or upper (psi -> Q) boundary
    std::size_t points = 0;
    double exponent = 0.0;  ///< p in psi ~ C d^p
    double constant = 0.0;  ///< C
    double residual = 0.0;  ///< RMS of the log-log fit
    double min_ratio = 0.0; ///< min psi / d^2 over the probes
    double max_ratio = 0.0;
};

struct GrowthDiagnostics {
    std::vector<GrowthSample> samples;
    std::vector<std::string> notices;
    double exponent_min = 0.0;
    double exponent_max = 0.0;
    double ratio_min = 0.0;
    double ratio_max = 0.0;

    bool empty() const { return samples.empty(); }
};

/// Log-log fit of psi (or Q - psi) against the normal distance to the free
/// boundary along each detached interior column. Columns count as detached
/// when they and both neighbours sit at least two cells off the wall.
GrowthDiagnostics growth_fit(const DiscreteField& field, const FreeBoundaryCurves& curves,
                             const ProbeRadii& radii = {});

struct SlopeReport {
    std::vector<double> lower_slopes;  ///< divided differences on [x1_i, x1_{i+1}]
    std::vector<double> upper_slopes;
    double lower_max_jump = 0.0;       ///< adjacent intervals, interior columns only
    double upper_max_jump = 0.0;
    /// Same, for slopes taken over `window` columns (about sqrt(hxi) in length).
    std::size_t window = 1;
    double lower_window_jump = 0.0;
    double upper_window_jump = 0.0;
    double max_tangency_gap = 0.0;     ///< |windowed slope - wall slope| at contact transitions
    std::size_t transitions = 0;
};

/// Number of columns in the slope window for column spacing hxi.
std::size_t slope_window(double hxi);

SlopeReport slope_profile(const FreeBoundaryCurves& curves);

struct StagnationSummary {
    double area = 0.0;        ///< measure of interior nodes with psi <= eps or psi >= Q - eps
    std::size_t dry_nodes = 0;
    std::vector<bool> mask;   ///< nodes whose whole stencil is dry
};

StagnationSummary stagnation(const DiscreteField& field, double eps_fb);

} // namespace nozzle
