#include "nozzle/diagnostics.hpp"

#include "nozzle/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nozzle {

namespace {

bool wet(double v, double q, double eps) { return v > eps && v < q - eps; }

// Solves a symmetric tridiagonal system in place (Thomas algorithm).
void solve_tridiagonal(std::vector<double> diag, double off, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t k = 1; k < n; ++k) {
        const double m = off / diag[k - 1];
        diag[k] -= m * off;
        rhs[k] -= m * rhs[k - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) rhs[k] = (rhs[k] - off * rhs[k + 1]) / diag[k];
}

} // namespace

VelocityField velocity_field(const DiscreteField& field, double eps_fb) {
    const auto& grid = field.grid();
    const double q = field.consts().flux();
    const std::size_t nx = grid.nx();
    const std::size_t ns = grid.ns();
    VelocityField out;
    out.eps_fb = eps_fb;
    out.u1.resize(grid.size());
    out.u2.resize(grid.size());
    out.min_u1 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ns; ++j) {
            const auto g = gradient_at(field, i, j);
            const std::size_t p = grid.index(i, j);
            out.u1[p] = g.dx2;
            out.u2[p] = -g.dx1;
            if (!grid.is_boundary(i, j)) out.min_u1 = std::min(out.min_u1, g.dx2);
        }
    }

    const auto el = el_residual(field, eps_fb);
    out.vorticity_residual = el.residual;
    out.max_vorticity_residual = el.max_abs;
    out.vorticity.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t p = 0; p < grid.size(); ++p) {
        if (!std::isnan(el.residual[p])) {
            out.vorticity[p] = el.residual[p] + f_of_psi(field.values()[p], field.consts());
        }
    }

    for (std::size_t i = 2; i + 2 < nx; ++i) {
        for (std::size_t j = 2; j + 2 < ns; ++j) {
            bool patch = true;
            for (std::size_t a = i - 2; a <= i + 2 && patch; ++a) {
                for (std::size_t b = j - 2; b <= j + 2 && patch; ++b) patch = wet(field(a, b), q, eps_fb);
            }
            if (!patch) continue;
            const double div = mapped_gradient(grid, out.u1, i, j).dx1 + mapped_gradient(grid, out.u2, i, j).dx2;
            out.max_divergence = std::max(out.max_divergence, std::abs(div));
        }
    }
    return out;
}

std::vector<double> flux_per_column(const DiscreteField& field, const VelocityField& velocity) {
    const auto& grid = field.grid();
    std::vector<double> out(grid.nx());
    for (std::size_t i = 0; i < grid.nx(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < grid.ns(); ++j) {
            const double w = (j == 0 || j + 1 == grid.ns()) ? 0.5 : 1.0;
            acc += w * velocity.u1[grid.index(i, j)];
        }
        out[i] = acc * grid.hsigma() * grid.height(i);
    }
    return out;
}

double max_speed_on(const VelocityField& velocity, const std::vector<bool>& mask) {
    double out = 0.0;
    for (std::size_t p = 0; p < mask.size(); ++p) {
        if (mask[p]) out = std::max(out, std::hypot(velocity.u1[p], velocity.u2[p]));
    }
    return out;
}

double discrete_shear_energy(double height, std::size_t ns, const FlowConstants& consts) {
    if (!(height > 0.0 && height <= 1.0) || ns < 3) {
        throw DomainError("discrete_shear_energy: need 0 < height <= 1 and at least 3 rows");
    }
    const double q = consts.flux();
    const double h = height / static_cast<double>(ns - 1);
    const ShearFunction start(height, consts);
    std::vector<double> psi(ns);
    for (std::size_t j = 0; j < ns; ++j) psi[j] = start(h * static_cast<double>(j));
    psi.front() = 0.0;
    psi.back() = q;

    auto residual = [&](const std::vector<double>& v) {
        std::vector<double> r(ns - 2);
        for (std::size_t j = 1; j + 1 < ns; ++j) {
            r[j - 1] = (2.0 * v[j] - v[j - 1] - v[j + 1]) / h + h * f_of_psi(v[j], consts);
        }
        return r;
    };
    auto norm = [](const std::vector<double>& r) {
        double m = 0.0;
        for (double x : r) m = std::max(m, std::abs(x));
        return m;
    };

    std::vector<double> r = residual(psi);
    double rn = norm(r);
    for (int it = 0; it < 100 && rn > 1e-14 * q; ++it) {
        std::vector<double> diag(ns - 2);
        for (std::size_t j = 1; j + 1 < ns; ++j) {
            const double k = kappa(psi[j], consts);
            diag[j - 1] = 2.0 / h - h * 2.0 / (k * (1.0 - k));
        }
        std::vector<double> step = r;
        solve_tridiagonal(diag, -1.0 / h, step);
        double lambda = 1.0;
        bool accepted = false;
        for (int half = 0; half < 40; ++half, lambda *= 0.5) {
            std::vector<double> trial = psi;
            bool inside = true;
            for (std::size_t j = 1; j + 1 < ns; ++j) {
                trial[j] -= lambda * step[j - 1];
                inside = inside && trial[j] > 0.0 && trial[j] < q;
            }
            if (!inside) continue;
            const auto tr = residual(trial);
            const double tn = norm(tr);
            if (tn < rn) {
                psi = std::move(trial);
                r = tr;
                rn = tn;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    if (rn > 1e-9 * q) throw InternalError("discrete_shear_energy: Newton iteration did not converge");

    long double e = 0.0L;
    for (std::size_t j = 0; j + 1 < ns; ++j) {
        const double d = psi[j + 1] - psi[j];
        e += 0.5L * d * d / h;
    }
    for (std::size_t j = 1; j + 1 < ns; ++j) e += static_cast<long double>(h) * big_f(psi[j], consts);
    return static_cast<double>(e);
}

FarFieldReport far_field_report(std::span<const DiscreteField> fields, const FlowConstants& consts,
                                double tol_energy) {
    if (fields.size() < 2) throw DomainError("far_field_report: need at least two solves");
    const auto& geom = fields.front().grid().geometry();
    for (const auto& f : fields) {
        const auto& g = f.grid().geometry();
        if (&g != &geom && (g.name != geom.name || g.outlet_lower != geom.outlet_lower ||
                            g.outlet_upper != geom.outlet_upper)) {
            throw DomainError("far_field_report: solves use different geometries");
        }
        for (std::size_t i = 0; i < f.grid().nx(); ++i) {
            const double x = f.grid().x1(i);
            if (std::abs(g.lower.value(x) - geom.lower.value(x)) > 1e-14 ||
                std::abs(g.upper.value(x) - geom.upper.value(x)) > 1e-14) {
                throw DomainError("far_field_report: solves use different geometries");
            }
        }
        if (!(f.consts() == consts)) throw DomainError("far_field_report: flux mismatch");
    }
    for (std::size_t k = 1; k < fields.size(); ++k) {
        if (!(fields[k].grid().half_length() > fields[k - 1].grid().half_length())) {
            throw DomainError("far_field_report: truncations must increase");
        }
    }

    const double a = geom.outlet_lower;
    const double out_height = geom.outlet_height();
    const ShearFunction inlet(1.0, consts);
    const ShearFunction outlet(out_height, consts);
    const double j_in = shear_energy(1.0, consts);
    const double j_out = shear_energy(out_height, consts);

    FarFieldReport report;
    report.tol_energy = tol_energy;
    for (const auto& f : fields) {
        const auto& grid = f.grid();
        FarFieldEntry e;
        e.half_length = grid.half_length();
        e.energy = discrete_energy(f);
        const double n = grid.half_length();
        e.zeta = e.energy - n * discrete_shear_energy(1.0, grid.ns(), consts) -
                 n * discrete_shear_energy(out_height, grid.ns(), consts);
        e.zeta_continuum = e.energy - n * j_in - n * j_out;
        for (std::size_t i = 2; i + 2 < grid.nx(); ++i) {
            const double x = grid.x1(i);
            if (x <= geom.flat_left) {
                double dev = 0.0;
                for (std::size_t j = 0; j < grid.ns(); ++j) dev = std::max(dev, std::abs(f(i, j) - inlet(grid.x2(i, j))));
                e.left_x1.push_back(x);
                e.left_deviation.push_back(dev);
            } else if (x >= geom.flat_right) {
                double dev = 0.0;
                for (std::size_t j = 0; j < grid.ns(); ++j) {
                    dev = std::max(dev, std::abs(f(i, j) - outlet(grid.x2(i, j) - a)));
                }
                e.right_x1.push_back(x);
                e.right_deviation.push_back(dev);
            }
        }
        report.entries.push_back(std::move(e));
    }
    report.zeta_nonincreasing = true;
    double lo = report.entries.front().zeta;
    double hi = lo;
    for (std::size_t k = 1; k < report.entries.size(); ++k) {
        const double z = report.entries[k].zeta;
        if (z > report.entries[k - 1].zeta + tol_energy) report.zeta_nonincreasing = false;
        lo = std::min(lo, z);
        hi = std::max(hi, z);
    }
    report.zeta_spread = hi - lo;
    return report;
}

double strip_liouville_check(const DiscreteField& field) {
    const auto& grid = field.grid();
    if (!grid.geometry().is_straight()) {
        throw DomainError("strip_liouville_check: geometry '" + grid.geometry().name + "' is not straight");
    }
    double out = 0.0;
    for (std::size_t j = 0; j < grid.ns(); ++j) {
        double lo = field(0, j);
        double hi = lo;
        for (std::size_t i = 1; i < grid.nx(); ++i) {
            lo = std::min(lo, field(i, j));
            hi = std::max(hi, field(i, j));
        }
        out = std::max(out, hi - lo);
    }
    return out;
}

} // namespace nozzle
