#pragma once

// Physical quantities recovered from a stream function and the checks built
// on them: velocity, vorticity, flux, far-field relaxation and the excess
// energy zeta(N) over an N-sweep.

#include "nozzle/freeboundary.hpp"
#include "nozzle/minimizer.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace nozzle {

struct VelocityField {
    std::vector<double> u1;         ///< d psi / d x2
    std::vector<double> u2;         ///< -d psi / d x1
    std::vector<double> vorticity;  ///< discrete Laplacian of psi; NaN off the wet set
    std::vector<double> vorticity_residual;  ///< vorticity - f(psi); NaN off the wet set
    double max_vorticity_residual = 0.0;
    double max_divergence = 0.0;    ///< over interior wet nodes with a fully wet 5x5 patch
    double min_u1 = 0.0;            ///< over interior nodes
    double eps_fb = 0.0;
};

VelocityField velocity_field(const DiscreteField& field, double eps_fb);

/// Trapezoid integral of u1 over each column [h0, h1].
std::vector<double> flux_per_column(const DiscreteField& field, const VelocityField& velocity);

/// max |u| over a node mask (e.g. StagnationSummary::mask); 0 for an empty mask.
double max_speed_on(const VelocityField& velocity, const std::vector<bool>& mask);

/// Minimum per-length energy of x1-independent discrete fields on a flat
/// channel of the given height, on the same row layout (ns rows) the 2-D
/// solver uses. Tends to the shear energy J of that height as ns grows.
double discrete_shear_energy(double height, std::size_t ns, const FlowConstants& consts);

struct FarFieldEntry {
    double half_length = 0.0;
    double energy = 0.0;
    double zeta = 0.0;            ///< E - N e_h(1) - N e_h(b - a), discrete shear energies
    double zeta_continuum = 0.0;  ///< E - N J(1) - N J(b - a)
    std::vector<double> left_x1;
    std::vector<double> left_deviation;   ///< max_j |psi - phi_1(x2)| per upstream column
    std::vector<double> right_x1;
    std::vector<double> right_deviation;  ///< max_j |psi - phi_{b-a}(x2 - a)| per downstream column
};

struct FarFieldReport {
    std::vector<FarFieldEntry> entries;  ///< in increasing N
    double tol_energy = 0.0;
    bool zeta_nonincreasing = false;
    double zeta_spread = 0.0;  ///< max - min of zeta
};

/// Fields must share one geometry and be ordered by increasing N; throws
/// DomainError otherwise. Columns within 2 cells of the lateral cuts are skipped.
FarFieldReport far_field_report(std::span<const DiscreteField> fields, const FlowConstants& consts,
                                double tol_energy);

/// Largest spread over columns of psi along any grid row. Straight geometry only.
double strip_liouville_check(const DiscreteField& field);

} // namespace nozzle
