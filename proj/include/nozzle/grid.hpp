#pragma once

// Boundary-fitted structured grid over the truncated nozzle |x1| < N.
//
// Node (i, j) sits at x1 = -N + i * hxi and x2 = h0(x1) + sigma_j (h1 - h0)(x1)
// with sigma_j = j * hsigma. The Dirichlet energy is discretised in the mapped
// coordinates (xi, sigma) with a corner rule: on every cell, each of the four
// corners contributes a quarter of the cell measure, using the two cell edges
// that meet at that corner as its gradient. The resulting quadratic form is a
// nine-point stencil per node, stored here together with the lumped node masses.

#include "nozzle/geometry.hpp"
#include "nozzle/profile1d.hpp"

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

namespace nozzle {

/// Nine-point stencil, entry (di+1)*3 + (dj+1) couples node (i,j) with (i+di, j+dj).
using Stencil = std::array<double, 9>;

class CurvilinearGrid {
public:
    CurvilinearGrid(std::shared_ptr<const NozzleGeometry> geometry, double half_length,
                    std::size_t nx, std::size_t ns);

    const NozzleGeometry& geometry() const { return *geometry_; }
    std::shared_ptr<const NozzleGeometry> geometry_ptr() const { return geometry_; }

    double half_length() const { return half_length_; }
    std::size_t nx() const { return nx_; }
    std::size_t ns() const { return ns_; }
    std::size_t size() const { return nx_ * ns_; }
    double hxi() const { return hxi_; }
    double hsigma() const { return hsigma_; }

    std::size_t index(std::size_t i, std::size_t j) const { return i * ns_ + j; }
    bool is_boundary(std::size_t i, std::size_t j) const {
        return i == 0 || j == 0 || i + 1 == nx_ || j + 1 == ns_;
    }

    double x1(std::size_t i) const { return -half_length_ + hxi_ * static_cast<double>(i); }
    double sigma(std::size_t j) const { return hsigma_ * static_cast<double>(j); }
    double x2(std::size_t i, std::size_t j) const { return lower_[i] + sigma(j) * height_[i]; }

    double lower(std::size_t i) const { return lower_[i]; }
    double upper(std::size_t i) const { return lower_[i] + height_[i]; }
    /// Column height h1 - h0, the Jacobian of the sigma map.
    double height(std::size_t i) const { return height_[i]; }
    double lower_slope(std::size_t i) const { return lower_slope_[i]; }
    double height_slope(std::size_t i) const { return height_slope_[i]; }
    /// d sigma / d x1 at node (i, j).
    double sigma_x1(std::size_t i, std::size_t j) const {
        return -(lower_slope_[i] + sigma(j) * height_slope_[i]) / height_[i];
    }

    /// Lumped quadrature weight of node p (physical measure).
    double mass(std::size_t p) const { return mass_[p]; }
    const std::vector<double>& masses() const { return mass_; }
    const Stencil& stencil(std::size_t p) const { return stencil_[p]; }
    double area() const;

    /// Same geometry object and identical node layout.
    bool same_layout(const CurvilinearGrid& other) const;

private:
    void assemble();

    std::shared_ptr<const NozzleGeometry> geometry_;
    double half_length_;
    std::size_t nx_;
    std::size_t ns_;
    double hxi_;
    double hsigma_;
    std::vector<double> lower_;
    std::vector<double> height_;
    std::vector<double> lower_slope_;
    std::vector<double> height_slope_;
    std::vector<double> mass_;
    std::vector<Stencil> stencil_;
};

/// Builds the grid; throws DomainError when N < min_truncation() or nx, ns < 8.
std::shared_ptr<const CurvilinearGrid> build_grid(const NozzleGeometry& geometry, double half_length,
                                                  std::size_t nx, std::size_t ns);

/// Dirichlet data g_N on every boundary node (interior entries are zero):
/// 0 on the lower wall, Q on the upper wall and the shear flow of the local
/// channel height on the two lateral cuts.
struct BoundaryData {
    std::vector<double> values;
};

BoundaryData boundary_data(const CurvilinearGrid& grid, const FlowConstants& consts);

} // namespace nozzle
