#include "nozzle/minimizer.hpp"

#include "nozzle/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nozzle {
namespace {

constexpr std::array<std::pair<int, int>, 9> kOffsets = {
    std::pair{-1, -1}, std::pair{-1, 0}, std::pair{-1, 1}, std::pair{0, -1}, std::pair{0, 0},
    std::pair{0, 1},   std::pair{1, -1}, std::pair{1, 0},  std::pair{1, 1}};
constexpr std::size_t kCentre = 4;

// (K psi)_p restricted to the off-diagonal entries.
double neighbour_action(const CurvilinearGrid& grid, const std::vector<double>& psi, std::size_t i,
                        std::size_t j) {
    const Stencil& s = grid.stencil(grid.index(i, j));
    double acc = 0.0;
    for (std::size_t k = 0; k < 9; ++k) {
        if (k == kCentre || s[k] == 0.0) continue;
        const auto [di, dj] = kOffsets[k];
        acc += s[k] * psi[grid.index(i + di, j + dj)];
    }
    return acc;
}

double stiffness_action(const CurvilinearGrid& grid, const std::vector<double>& psi, std::size_t i,
                        std::size_t j) {
    const std::size_t p = grid.index(i, j);
    return neighbour_action(grid, psi, i, j) + grid.stencil(p)[kCentre] * psi[p];
}

// Node-local energy g(t) = A t^2 / 2 - b t + m F(t) on [0, Q].
struct LocalEnergy {
    double A;
    double b;
    double m;
    double q;

    double at(double t, const FlowConstants& consts) const {
        return 0.5 * A * t * t - b * t + m * big_f(t, consts);
    }

    // g(to) - g(from), arranged to avoid cancellation for close arguments.
    double change(double from, double to, const FlowConstants& consts) const {
        const double k0 = kappa(from, consts);
        const double k1 = kappa(to, consts);
        // to - from = Q (k1 - k0) (3 (k1 + k0) - 2 (k1^2 + k1 k0 + k0^2))
        const double rate = q * (3.0 * (k1 + k0) - 2.0 * (k1 * k1 + k1 * k0 + k0 * k0));
        const double dk = rate > 0.0 ? (to - from) / rate : k1 - k0;
        // F = u^2 / 2 with u = 6Q k (1 - k).
        const double u_diff = 6.0 * q * dk * (1.0 - k1 - k0);
        const double u_sum = 6.0 * q * (k1 * (1.0 - k1) + k0 * (1.0 - k0));
        return (to - from) * (0.5 * A * (to + from) - b) + 0.5 * m * u_diff * u_sum;
    }

    // Exact global minimiser over [0,Q]. In the kappa variable the stationarity
    // condition is a cubic; g is concave near both bounds and convex between
    // kappa_lo and kappa_hi, so the minimiser is 0, Q or the convex-range root.
    double argmin() const {
        double best_t = 0.0;
        double best_g = 0.0;
        const double g_top = 0.5 * A * q * q - b * q;
        if (g_top < best_g) {
            best_t = q;
            best_g = g_top;
        }
        if (m == 0.0) {
            const double t = std::clamp(b / A, 0.0, q);
            return 0.5 * A * t * t - b * t < best_g ? t : best_t;
        }
        const double r = 2.0 * m / A;
        if (r >= 0.25) return best_t;
        const double k_lo = 0.5 * (1.0 - std::sqrt(1.0 - 4.0 * r));
        const double k_hi = 1.0 - k_lo;
        auto stream = [&](double k) { return q * k * k * (3.0 - 2.0 * k); };
        auto slope = [&](double k) { return A * stream(k) - b + 6.0 * q * m * (1.0 - 2.0 * k); };
        auto slope_rate = [&](double k) { return 6.0 * q * (A * k * (1.0 - k) - 2.0 * m); };
        double k_star;
        if (slope(k_lo) >= 0.0) {
            k_star = k_lo;
        } else if (slope(k_hi) <= 0.0) {
            k_star = k_hi;
        } else {
            double lo = k_lo;
            double hi = k_hi;
            double k = 0.5 * (lo + hi);
            for (int it = 0; it < 100; ++it) {
                const double s = slope(k);
                if (s > 0.0) hi = k;
                else lo = k;
                const double ds = slope_rate(k);
                double next = ds > 0.0 ? k - s / ds : 0.5 * (lo + hi);
                if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
                if (std::abs(next - k) <= 1e-16 || hi - lo <= 1e-16) {
                    k = next;
                    break;
                }
                k = next;
            }
            k_star = k;
        }
        const double t = stream(k_star);
        const double u = 6.0 * q * k_star * (1.0 - k_star);
        const double g = 0.5 * A * t * t - b * t + 0.5 * m * u * u;
        return g < best_g ? t : best_t;
    }
};

std::vector<std::size_t> sweep_order(const CurvilinearGrid& grid, SweepOrder order) {
    std::vector<std::size_t> nodes;
    nodes.reserve(grid.size());
    const std::size_t nx = grid.nx();
    const std::size_t ns = grid.ns();
    if (order == SweepOrder::lexicographic) {
        for (std::size_t i = 1; i + 1 < nx; ++i)
            for (std::size_t j = 1; j + 1 < ns; ++j) nodes.push_back(grid.index(i, j));
        return nodes;
    }
    // The stencil couples diagonal neighbours, so the colouring uses the parity
    // of both indices: nodes of one colour never share a stencil.
    for (std::size_t colour = 0; colour < 4; ++colour) {
        for (std::size_t i = 1; i + 1 < nx; ++i) {
            if (i % 2 != (colour & 1U)) continue;
            for (std::size_t j = 1; j + 1 < ns; ++j) {
                if (j % 2 != ((colour >> 1U) & 1U)) continue;
                nodes.push_back(grid.index(i, j));
            }
        }
    }
    return nodes;
}

double projected_norm(const DiscreteField& field, bool with_potential) {
    const auto& grid = field.grid();
    const auto& psi = field.values();
    const double q = field.consts().flux();
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < grid.nx(); ++i) {
        for (std::size_t j = 1; j + 1 < grid.ns(); ++j) {
            const std::size_t p = grid.index(i, j);
            double g = stiffness_action(grid, psi, i, j);
            if (with_potential) g += grid.mass(p) * f_hat(psi[p], field.consts());
            if (psi[p] <= 0.0 && g > 0.0) g = 0.0;
            if (psi[p] >= q && g < 0.0) g = 0.0;
            worst = std::max(worst, std::abs(g) / grid.mass(p));
        }
    }
    return worst;
}

long double quadratic_energy_ld(const DiscreteField& field) {
    const auto& grid = field.grid();
    const auto& psi = field.values();
    const double hx = grid.hxi();
    const double hs = grid.hsigma();
    const double quarter = 0.25 * hx * hs;
    long double total = 0.0L;
    for (std::size_t i = 0; i + 1 < grid.nx(); ++i) {
        for (std::size_t j = 0; j + 1 < grid.ns(); ++j) {
            for (std::size_t corner = 0; corner < 4; ++corner) {
                const std::size_t ic = i + (corner & 1U);
                const std::size_t jc = j + ((corner >> 1U) & 1U);
                const double d_xi = (psi[grid.index(i + 1, jc)] - psi[grid.index(i, jc)]) / hx;
                const double d_sigma = (psi[grid.index(ic, j + 1)] - psi[grid.index(ic, j)]) / hs;
                const double h = grid.height(ic);
                const long double u = d_xi + static_cast<long double>(grid.sigma_x1(ic, jc)) * d_sigma;
                const long double v = d_sigma / static_cast<long double>(h);
                total += quarter * h * 0.5L * (u * u + v * v);
            }
        }
    }
    return total;
}

double quadratic_energy(const DiscreteField& field) { return static_cast<double>(quadratic_energy_ld(field)); }

// Every kPlainEvery-th sweep is unrelaxed; convergence is tested after those.
constexpr int kPlainEvery = 10;

// One relaxation run; `with_potential` false solves the harmonic problem.
SolveReport relax(DiscreteField& field, const SolverConfig& config, bool with_potential) {
    const auto& grid = field.grid();
    const FlowConstants& consts = field.consts();
    const double q = consts.flux();
    auto& psi = field.values();
    const double omega = config.omega.value_or(estimate_omega(grid));
    const auto order = sweep_order(grid, config.sweep);
    const std::size_t ns = grid.ns();

    auto energy = [&] {
        return with_potential ? discrete_energy(field) : quadratic_energy(field);
    };
    SolveReport report;
    report.omega = omega;
    report.energy_trace.push_back(energy());
    report.projected_gradient = projected_norm(field, with_potential);
    if (report.projected_gradient <= config.tol) {
        report.converged = true;
        report.energy = report.energy_trace.back();
        return report;
    }

    for (int sweep = 1; sweep <= config.max_iter; ++sweep) {
        const bool plain = omega == 1.0 || sweep % kPlainEvery == 0 || sweep == config.max_iter;
        for (std::size_t p : order) {
            const std::size_t i = p / ns;
            const std::size_t j = p % ns;
            const double diag = grid.stencil(p)[kCentre];
            const LocalEnergy local{diag, -neighbour_action(grid, psi, i, j),
                                    with_potential ? grid.mass(p) : 0.0, q};
            const double old = psi[p];
            const double best = local.argmin();
            double next = best;
            if (!plain && best > 0.0 && best < q) {
                const double trial = std::clamp(old + omega * (best - old), 0.0, q);
                if (local.change(old, trial, consts) <= 0.0) next = trial;
            }
            if (next != old && local.change(old, next, consts) > 0.0) next = old;
            psi[p] = next;
        }
        report.iterations = sweep;
        report.energy_trace.push_back(energy());
        if (!plain) continue;
        report.projected_gradient = projected_norm(field, with_potential);
        if (report.projected_gradient <= config.tol) {
            report.converged = true;
            break;
        }
    }
    report.energy = report.energy_trace.back();
    return report;
}

} // namespace

DiscreteField::DiscreteField(std::shared_ptr<const CurvilinearGrid> grid, FlowConstants consts,
                             std::vector<double> values)
    : grid_(std::move(grid)), consts_(consts), values_(std::move(values)) {
    if (!grid_) throw DomainError("DiscreteField requires a grid");
    if (values_.size() != grid_->size()) throw DomainError("DiscreteField: value count mismatch");
}

NodalGradient mapped_gradient(const CurvilinearGrid& grid, std::span<const double> values,
                              std::size_t i, std::size_t j) {
    const std::size_t nx = grid.nx();
    const std::size_t ns = grid.ns();
    auto v = [&](std::size_t a, std::size_t b) { return values[grid.index(a, b)]; };
    double d_xi;
    if (i == 0) d_xi = (-3.0 * v(0, j) + 4.0 * v(1, j) - v(2, j)) / (2.0 * grid.hxi());
    else if (i + 1 == nx) d_xi = (3.0 * v(i, j) - 4.0 * v(i - 1, j) + v(i - 2, j)) / (2.0 * grid.hxi());
    else d_xi = (v(i + 1, j) - v(i - 1, j)) / (2.0 * grid.hxi());
    double d_sigma;
    if (j == 0) d_sigma = (-3.0 * v(i, 0) + 4.0 * v(i, 1) - v(i, 2)) / (2.0 * grid.hsigma());
    else if (j + 1 == ns) d_sigma = (3.0 * v(i, j) - 4.0 * v(i, j - 1) + v(i, j - 2)) / (2.0 * grid.hsigma());
    else d_sigma = (v(i, j + 1) - v(i, j - 1)) / (2.0 * grid.hsigma());
    return {d_xi + grid.sigma_x1(i, j) * d_sigma, d_sigma / grid.height(i)};
}

NodalGradient gradient_at(const DiscreteField& field, std::size_t i, std::size_t j) {
    return mapped_gradient(field.grid(), field.values(), i, j);
}

DiscreteField prolongate(const DiscreteField& coarse, std::shared_ptr<const CurvilinearGrid> fine,
                         const BoundaryData& fine_boundary) {
    const auto& cg = coarse.grid();
    if (cg.half_length() != fine->half_length()) {
        throw DomainError("prolongate: grids cover different truncations");
    }
    std::vector<double> values(fine->size());
    for (std::size_t i = 0; i < fine->nx(); ++i) {
        const double xi = (fine->x1(i) + cg.half_length()) / cg.hxi();
        const auto ic = std::min(static_cast<std::size_t>(xi), cg.nx() - 2);
        const double tx = xi - static_cast<double>(ic);
        for (std::size_t j = 0; j < fine->ns(); ++j) {
            const std::size_t p = fine->index(i, j);
            if (fine->is_boundary(i, j)) {
                values[p] = fine_boundary.values[p];
                continue;
            }
            const double s = fine->sigma(j) / cg.hsigma();
            const auto jc = std::min(static_cast<std::size_t>(s), cg.ns() - 2);
            const double ts = s - static_cast<double>(jc);
            values[p] = (1 - tx) * (1 - ts) * coarse(ic, jc) + tx * (1 - ts) * coarse(ic + 1, jc) +
                        (1 - tx) * ts * coarse(ic, jc + 1) + tx * ts * coarse(ic + 1, jc + 1);
        }
    }
    return DiscreteField(std::move(fine), coarse.consts(), std::move(values));
}

double discrete_energy(const DiscreteField& field) {
    const auto& grid = field.grid();
    long double potential = 0.0L;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        potential += static_cast<long double>(grid.mass(p)) * big_f(field.values()[p], field.consts());
    }
    return static_cast<double>(quadratic_energy_ld(field) + potential);
}

std::vector<double> energy_gradient(const DiscreteField& field) {
    const auto& grid = field.grid();
    std::vector<double> grad(grid.size(), 0.0);
    for (std::size_t i = 1; i + 1 < grid.nx(); ++i) {
        for (std::size_t j = 1; j + 1 < grid.ns(); ++j) {
            const std::size_t p = grid.index(i, j);
            grad[p] = stiffness_action(grid, field.values(), i, j) +
                      grid.mass(p) * f_hat(field.values()[p], field.consts());
        }
    }
    return grad;
}

double projected_gradient_norm(const DiscreteField& field) { return projected_norm(field, true); }

std::string to_string(SweepOrder order) {
    return order == SweepOrder::lexicographic ? "lexicographic" : "red-black";
}

std::string to_string(InitialGuess guess) {
    switch (guess) {
    case InitialGuess::column_profile: return "column-profile";
    case InitialGuess::sigma_linear: return "sigma-linear";
    case InitialGuess::harmonic: return "harmonic";
    }
    return "unknown";
}

void SolverConfig::validate() const {
    if (!(tol > 0.0)) throw ValidationError("solver tol must be positive");
    if (max_iter < 1) throw ValidationError("solver max_iter must be at least 1");
    if (omega && !(*omega > 0.0 && *omega < 2.0)) {
        throw ValidationError("solver omega must lie in (0, 2)");
    }
}

double estimate_omega(const CurvilinearGrid& grid) {
    // Jacobi spectral radius for the slowest mode. Along x2 the linearised
    // operator has a (near) zero mode, so only the x1 wavelength 2N counts.
    double mean_height = 0.0;
    for (std::size_t i = 0; i < grid.nx(); ++i) mean_height += grid.height(i);
    mean_height /= static_cast<double>(grid.nx());
    const double hy = grid.hsigma() * mean_height;
    const double diag = 2.0 / (grid.hxi() * grid.hxi()) + 2.0 / (hy * hy);
    const double lowest = std::pow(std::numbers::pi / (2.0 * grid.half_length()), 2);
    const double rho = 1.0 - lowest / diag;
    return 2.0 / (1.0 + std::sqrt(1.0 - rho * rho));
}

DiscreteField initial_field(std::shared_ptr<const CurvilinearGrid> grid, const BoundaryData& boundary,
                            const FlowConstants& consts, InitialGuess guess) {
    const std::size_t nx = grid->nx();
    const std::size_t ns = grid->ns();
    const double q = consts.flux();
    std::vector<double> values(grid->size(), 0.0);
    if (guess == InitialGuess::column_profile) {
        for (std::size_t i = 1; i + 1 < nx; ++i) {
            const double h = grid->height(i);
            const ShearFunction column(h, consts);
            for (std::size_t j = 1; j + 1 < ns; ++j) {
                values[grid->index(i, j)] = column(grid->sigma(j) * h);
            }
        }
    } else {
        for (std::size_t i = 1; i + 1 < nx; ++i)
            for (std::size_t j = 1; j + 1 < ns; ++j) values[grid->index(i, j)] = q * grid->sigma(j);
    }
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ns; ++j) {
            if (grid->is_boundary(i, j)) values[grid->index(i, j)] = boundary.values[grid->index(i, j)];
        }
    }
    DiscreteField field(std::move(grid), consts, std::move(values));
    if (guess == InitialGuess::harmonic) {
        SolverConfig linear;
        linear.tol = 1e-9 * q;
        linear.max_iter = 20000;
        relax(field, linear, false);
    }
    return field;
}

SolveResult solve_minimizer(std::shared_ptr<const CurvilinearGrid> grid, const BoundaryData& boundary,
                            const FlowConstants& consts, const SolverConfig& config) {
    config.validate();
    if (boundary.values.size() != grid->size()) {
        throw DomainError("solve_minimizer: boundary data does not match the grid");
    }
    return solve_minimizer_from(initial_field(std::move(grid), boundary, consts, config.init), config);
}

SolveResult solve_minimizer_from(DiscreteField start, const SolverConfig& config) {
    config.validate();
    const double q = start.consts().flux();
    for (double& v : start.values()) {
        if (!(v >= 0.0 && v <= q)) throw DomainError("solve_minimizer: start field leaves [0, Q]");
    }
    SolveReport report = relax(start, config, true);
    return {std::move(start), std::move(report)};
}

ElResidualReport el_residual(const DiscreteField& field, double eps_fb) {
    const auto& grid = field.grid();
    const double q = field.consts().flux();
    const auto& psi = field.values();
    ElResidualReport out;
    out.residual.assign(grid.size(), std::nan(""));
    auto wet = [&](std::size_t p) { return psi[p] > eps_fb && psi[p] < q - eps_fb; };
    double weighted = 0.0;
    double measure = 0.0;
    for (std::size_t i = 1; i + 1 < grid.nx(); ++i) {
        for (std::size_t j = 1; j + 1 < grid.ns(); ++j) {
            const std::size_t p = grid.index(i, j);
            if (!wet(p)) continue;
            const double laplacian = -stiffness_action(grid, psi, i, j) / grid.mass(p);
            const double r = laplacian - f_of_psi(psi[p], field.consts());
            out.residual[p] = r;
            out.max_abs = std::max(out.max_abs, std::abs(r));
            weighted += grid.mass(p) * r * r;
            measure += grid.mass(p);
            ++out.wet_nodes;

            bool touches_dry = false;
            for (const auto& [di, dj] : kOffsets) {
                const std::size_t n = grid.index(i + di, j + dj);
                if (!grid.is_boundary(i + di, j + dj) && !wet(n)) touches_dry = true;
            }
            if (touches_dry) {
                const NodalGradient g = gradient_at(field, i, j);
                out.collar_gradient_max = std::max(out.collar_gradient_max, std::hypot(g.dx1, g.dx2));
                ++out.collar_nodes;
            }
        }
    }
    out.l2 = measure > 0.0 ? std::sqrt(weighted / measure) : 0.0;
    return out;
}

} // namespace nozzle
