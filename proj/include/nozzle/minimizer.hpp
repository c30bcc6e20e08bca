#pragma once

// Box-constrained minimisation of the truncated energy
//     E_N(psi) = integral over Omega_N of |grad psi|^2 / 2 + F(psi)
// over fields with psi = g_N on the boundary and 0 <= psi <= Q.

#include "nozzle/grid.hpp"
#include "nozzle/profile1d.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nozzle {

/// Stream-function values on a grid. Boundary nodes carry g_N.
class DiscreteField {
public:
    DiscreteField(std::shared_ptr<const CurvilinearGrid> grid, FlowConstants consts,
                  std::vector<double> values);

    const CurvilinearGrid& grid() const { return *grid_; }
    std::shared_ptr<const CurvilinearGrid> grid_ptr() const { return grid_; }
    const FlowConstants& consts() const { return consts_; }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    double operator()(std::size_t i, std::size_t j) const { return values_[grid_->index(i, j)]; }

private:
    std::shared_ptr<const CurvilinearGrid> grid_;
    FlowConstants consts_;
    std::vector<double> values_;
};

/// Physical gradient (d/dx1, d/dx2) at a node from second-order differences in
/// the mapped coordinates (one-sided on the boundary).
struct NodalGradient {
    double dx1 = 0.0;
    double dx2 = 0.0;
};
NodalGradient gradient_at(const DiscreteField& field, std::size_t i, std::size_t j);
NodalGradient mapped_gradient(const CurvilinearGrid& grid, std::span<const double> values,
                              std::size_t i, std::size_t j);

/// Bilinear transfer (in the mapped coordinates) of a field onto a grid over
/// the same geometry and truncation; boundary nodes take the fine grid's data.
DiscreteField prolongate(const DiscreteField& coarse, std::shared_ptr<const CurvilinearGrid> fine,
                         const BoundaryData& fine_boundary);

double discrete_energy(const DiscreteField& field);

/// dE/dpsi at every node; zero rows on Dirichlet nodes. f_hat supplies the
/// one-sided values at psi = 0 and psi = Q.
std::vector<double> energy_gradient(const DiscreteField& field);

/// max over interior nodes of |projected gradient| / node mass. The gradient is
/// zeroed where a bound is active and the descent direction points outward.
double projected_gradient_norm(const DiscreteField& field);

enum class SweepOrder { lexicographic, red_black };
enum class InitialGuess { column_profile, sigma_linear, harmonic };

std::string to_string(SweepOrder order);
std::string to_string(InitialGuess guess);

struct SolverConfig {
    double tol = 1e-6;          ///< projected-gradient stopping threshold
    int max_iter = 40000;       ///< sweeps
    SweepOrder sweep = SweepOrder::lexicographic;
    std::optional<double> omega;  ///< relaxation in (0,2); estimated from the grid when empty
    InitialGuess init = InitialGuess::column_profile;

    void validate() const;
};

struct SolveReport {
    int iterations = 0;
    double energy = 0.0;
    double projected_gradient = 0.0;
    double omega = 1.0;
    bool converged = false;
    std::vector<double> energy_trace;  ///< energy after each sweep, starting with the initial field
};

struct SolveResult {
    DiscreteField field;
    SolveReport report;
};

/// Feasible starting field with boundary values from `boundary`.
DiscreteField initial_field(std::shared_ptr<const CurvilinearGrid> grid, const BoundaryData& boundary,
                            const FlowConstants& consts, InitialGuess guess);

/// Over-relaxation factor the solver uses when SolverConfig::omega is empty.
double estimate_omega(const CurvilinearGrid& grid);

/// Projected nonlinear Gauss-Seidel with guarded over-relaxation. Each node
/// update is the exact minimiser of the node-local energy over [0,Q]; an
/// over-relaxed value is kept only if it does not raise the local energy.
/// Every tenth sweep (and the last) is plain Gauss-Seidel, and the stopping
/// test runs after those sweeps only.
/// When max_iter is reached the result carries converged = false.
SolveResult solve_minimizer(std::shared_ptr<const CurvilinearGrid> grid, const BoundaryData& boundary,
                            const FlowConstants& consts, const SolverConfig& config);

/// Same, starting from a caller-supplied feasible field.
SolveResult solve_minimizer_from(DiscreteField start, const SolverConfig& config);

struct ElResidualReport {
    std::vector<double> residual;  ///< Delta_h psi - f(psi); NaN off the wet set
    double max_abs = 0.0;
    double l2 = 0.0;               ///< mass-weighted RMS over the wet set
    std::size_t wet_nodes = 0;
    double collar_gradient_max = 0.0;  ///< max |grad psi| at wet nodes touching a dry node
    std::size_t collar_nodes = 0;
};

/// Residual of  Delta psi = f(psi)  (discrete Laplacian from the energy stencil)
/// on interior nodes with eps_fb < psi < Q - eps_fb.
ElResidualReport el_residual(const DiscreteField& field, double eps_fb);

} // namespace nozzle
