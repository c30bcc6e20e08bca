#include "nozzle/grid.hpp"

#include "nozzle/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace nozzle {

CurvilinearGrid::CurvilinearGrid(std::shared_ptr<const NozzleGeometry> geometry,
                                 double half_length, std::size_t nx, std::size_t ns)
    : geometry_(std::move(geometry)),
      half_length_(half_length),
      nx_(nx),
      ns_(ns),
      hxi_(2.0 * half_length / static_cast<double>(nx - 1)),
      hsigma_(1.0 / static_cast<double>(ns - 1)) {
    lower_.resize(nx_);
    height_.resize(nx_);
    lower_slope_.resize(nx_);
    height_slope_.resize(nx_);
    for (std::size_t i = 0; i < nx_; ++i) {
        const double x = x1(i);
        const WallPoint p0 = geometry_->lower(x);
        const WallPoint p1 = geometry_->upper(x);
        lower_[i] = p0.value;
        height_[i] = p1.value - p0.value;
        lower_slope_[i] = p0.slope;
        height_slope_[i] = p1.slope - p0.slope;
        if (!(height_[i] > 0.0)) {
            throw ValidationError("non-positive channel height at x1=" + std::to_string(x));
        }
    }
    assemble();
}

void CurvilinearGrid::assemble() {
    mass_.assign(size(), 0.0);
    stencil_.assign(size(), Stencil{});
    const double quarter = 0.25 * hxi_ * hsigma_;

    struct Term {
        std::size_t i, j;
        double u, v;  // coefficients in (D_xi + a D_sigma) and D_sigma / H
    };
    for (std::size_t i = 0; i + 1 < nx_; ++i) {
        for (std::size_t j = 0; j + 1 < ns_; ++j) {
            for (std::size_t corner = 0; corner < 4; ++corner) {
                const std::size_t ic = i + (corner & 1U);
                const std::size_t jc = j + ((corner >> 1U) & 1U);
                const double a = sigma_x1(ic, jc);
                const double h = height_[ic];
                const double w = quarter * h;
                mass_[index(ic, jc)] += w;

                std::array<Term, 4> raw = {Term{i, jc, -1.0 / hxi_, 0.0},
                                           Term{i + 1, jc, 1.0 / hxi_, 0.0},
                                           Term{ic, j, -a / hsigma_, -1.0 / (hsigma_ * h)},
                                           Term{ic, j + 1, a / hsigma_, 1.0 / (hsigma_ * h)}};
                for (const Term& s : raw) {
                    for (const Term& t : raw) {
                        const double coupling = w * (s.u * t.u + s.v * t.v);
                        const int di = static_cast<int>(t.i) - static_cast<int>(s.i);
                        const int dj = static_cast<int>(t.j) - static_cast<int>(s.j);
                        stencil_[index(s.i, s.j)][static_cast<std::size_t>((di + 1) * 3 + dj + 1)] +=
                            coupling;
                    }
                }
            }
        }
    }
}

double CurvilinearGrid::area() const {
    return std::accumulate(mass_.begin(), mass_.end(), 0.0);
}

bool CurvilinearGrid::same_layout(const CurvilinearGrid& other) const {
    return geometry_ == other.geometry_ && half_length_ == other.half_length_ && nx_ == other.nx_ &&
           ns_ == other.ns_;
}

std::shared_ptr<const CurvilinearGrid> build_grid(const NozzleGeometry& geometry, double half_length,
                                                  std::size_t nx, std::size_t ns) {
    if (nx < 8 || ns < 8) throw DomainError("build_grid: nx and ns must be at least 8");
    const double l0 = geometry.min_truncation();
    if (!(half_length >= l0)) {
        throw DomainError("build_grid: truncation N=" + std::to_string(half_length) +
                          " is below L0=" + std::to_string(l0));
    }
    return std::make_shared<const CurvilinearGrid>(
        std::make_shared<const NozzleGeometry>(geometry), half_length, nx, ns);
}

BoundaryData boundary_data(const CurvilinearGrid& grid, const FlowConstants& consts) {
    BoundaryData out;
    out.values.assign(grid.size(), 0.0);
    const std::size_t nx = grid.nx();
    const std::size_t ns = grid.ns();
    const double q = consts.flux();
    for (std::size_t i = 0; i < nx; ++i) out.values[grid.index(i, ns - 1)] = q;

    for (std::size_t i : {std::size_t{0}, nx - 1}) {
        const double h = grid.height(i);
        const ShearFunction lateral(h, consts);
        for (std::size_t j = 1; j + 1 < ns; ++j) {
            out.values[grid.index(i, j)] = lateral(grid.sigma(j) * h);
        }
    }
    return out;
}

} // namespace nozzle
