#include "nozzle/freeboundary.hpp"

#include "nozzle/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nozzle {

namespace {

// Position, in row units measured from the wall, of the edge of the zero set
// of a column sequence that starts at 0 on the wall; rows at or below eps
// count as dry. kappa of the sequence is extrapolated linearly to zero from
// the first two wet rows; the result may fall below the last dry row but not
// above the first wet one.
double crossing(const std::vector<double>& w, double eps, const FlowConstants& consts) {
    const std::size_t n = w.size();
    std::size_t k = 0;
    while (k + 1 < n && w[k + 1] <= eps) ++k;
    if (k + 1 >= n) return static_cast<double>(n - 1);
    const double kd = static_cast<double>(k);
    double t;
    if (k + 2 < n && w[k + 2] > w[k + 1]) {
        const double s1 = kappa(w[k + 1], consts);
        const double s2 = kappa(w[k + 2], consts);
        t = kd + 1.0 - s1 / (s2 - s1);
    } else {
        t = kd + (eps - w[k]) / (w[k + 1] - w[k]);
    }
    return std::clamp(t, 0.0, kd + 1.0);
}

// Centred divided difference of a column-indexed curve.
double curve_slope(const std::vector<double>& y, std::size_t i, double h) {
    if (i == 0) return (y[1] - y[0]) / h;
    if (i + 1 == y.size()) return (y[i] - y[i - 1]) / h;
    return (y[i + 1] - y[i - 1]) / (2.0 * h);
}

struct Fit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms = 0.0;
};

Fit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sx += xs[k];
        sy += ys[k];
        sxx += xs[k] * xs[k];
        sxy += xs[k] * ys[k];
    }
    Fit fit;
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double r = ys[k] - fit.intercept - fit.slope * xs[k];
        ss += r * r;
    }
    fit.rms = std::sqrt(ss / n);
    return fit;
}

} // namespace

double default_eps_fb(const FlowConstants& consts, double tol) {
    return std::max(1e-6 * consts.flux(), 10.0 * tol);
}

double default_eps_mono(const CurvilinearGrid& grid, const FlowConstants& consts, double tol) {
    return 10.0 * tol + consts.flux() * grid.hsigma() * grid.hsigma();
}

bool FreeBoundaryCurves::interior_column(std::size_t i) const {
    return std::abs(x1[i]) <= half_length - 1.0 + 1e-12;
}

FreeBoundaryCurves extract_free_boundaries(const DiscreteField& field, double eps_fb, double eps_mono) {
    if (!(eps_fb > 0.0) || !(eps_mono >= 0.0)) {
        throw DomainError("extract_free_boundaries: thresholds must be positive");
    }
    const auto& grid = field.grid();
    const double q = field.consts().flux();
    const std::size_t nx = grid.nx();
    const std::size_t ns = grid.ns();

    FreeBoundaryCurves out;
    out.eps_fb = eps_fb;
    out.half_length = grid.half_length();
    std::vector<double> up(ns);
    std::vector<double> down(ns);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j + 1 < ns; ++j) {
            const double drop = field(i, j) - field(i, j + 1);
            if (drop > eps_mono) {
                std::ostringstream msg;
                msg << "column " << i << " (x1=" << grid.x1(i) << ") is not monotone: psi drops by "
                    << drop << " between rows " << j << " and " << j + 1;
                throw DiagnosticError(msg.str());
            }
        }
        for (std::size_t j = 0; j < ns; ++j) {
            up[j] = field(i, j);
            down[j] = q - field(i, ns - 1 - j);
        }
        const double cell = grid.hsigma() * grid.height(i);
        const double lo = grid.lower(i) + crossing(up, eps_fb, field.consts()) * cell;
        const double hi = grid.upper(i) - crossing(down, eps_fb, field.consts()) * cell;
        out.x1.push_back(grid.x1(i));
        out.wall_lower.push_back(grid.lower(i));
        out.wall_upper.push_back(grid.upper(i));
        out.lower.push_back(lo);
        out.upper.push_back(hi);
        out.lower_contact.push_back(lo - grid.lower(i) <= cell);
        out.upper_contact.push_back(grid.upper(i) - hi <= cell);
        out.cell.push_back(cell);
    }
    return out;
}

GrowthDiagnostics growth_fit(const DiscreteField& field, const FreeBoundaryCurves& curves,
                             const ProbeRadii& radii) {
    if (!(radii.min >= 0.0) || !(radii.max > radii.min)) {
        throw DomainError("growth_fit: probe radii must satisfy 0 <= min < max");
    }
    const auto& grid = field.grid();
    const double q = field.consts().flux();
    GrowthDiagnostics out;
    out.exponent_min = std::numeric_limits<double>::infinity();
    out.exponent_max = -std::numeric_limits<double>::infinity();
    out.ratio_min = std::numeric_limits<double>::infinity();
    out.ratio_max = -std::numeric_limits<double>::infinity();

    auto detached = [&](std::size_t i, bool lower) {
        const double gap = lower ? curves.lower[i] - curves.wall_lower[i]
                                 : curves.wall_upper[i] - curves.upper[i];
        return gap >= 2.0 * curves.cell[i];
    };

    for (std::size_t i = 1; i + 1 < curves.size(); ++i) {
        if (!curves.interior_column(i)) continue;
        for (bool lower : {true, false}) {
            if (!detached(i - 1, lower) || !detached(i, lower) || !detached(i + 1, lower)) continue;
            const auto& curve = lower ? curves.lower : curves.upper;
            const double z = curve[i];
            const double slope = curve_slope(curve, i, grid.hxi());
            const double normal = 1.0 / std::sqrt(1.0 + slope * slope);
            std::vector<double> logd;
            std::vector<double> logv;
            double rmin = std::numeric_limits<double>::infinity();
            double rmax = 0.0;
            for (std::size_t j = 1; j + 1 < grid.ns(); ++j) {
                const double x2 = grid.x2(i, j);
                const double offset = lower ? x2 - z : z - x2;
                const double v = lower ? field(i, j) : q - field(i, j);
                const double d = offset * normal;
                if (d < radii.min || d > radii.max || v <= curves.eps_fb) continue;
                logd.push_back(std::log(d));
                logv.push_back(std::log(v));
                rmin = std::min(rmin, v / (d * d));
                rmax = std::max(rmax, v / (d * d));
            }
            if (logd.size() < 4) {
                std::ostringstream msg;
                msg << "skipped " << (lower ? "lower" : "upper") << " point x1=" << grid.x1(i) << ": "
                    << logd.size() << " probe points";
                out.notices.push_back(msg.str());
                continue;
            }
            const Fit fit = least_squares(logd, logv);
            GrowthSample s;
            s.x1 = grid.x1(i);
            s.z = z;
            s.lower = lower;
            s.points = logd.size();
            s.exponent = fit.slope;
            s.constant = std::exp(fit.intercept);
            s.residual = fit.rms;
            s.min_ratio = rmin;
            s.max_ratio = rmax;
            out.exponent_min = std::min(out.exponent_min, s.exponent);
            out.exponent_max = std::max(out.exponent_max, s.exponent);
            out.ratio_min = std::min(out.ratio_min, rmin);
            out.ratio_max = std::max(out.ratio_max, rmax);
            out.samples.push_back(s);
        }
    }
    if (out.samples.empty()) {
        out.exponent_min = out.exponent_max = out.ratio_min = out.ratio_max = 0.0;
    }
    return out;
}

std::size_t slope_window(double hxi) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(1.0 / std::sqrt(hxi))));
}

SlopeReport slope_profile(const FreeBoundaryCurves& curves) {
    SlopeReport out;
    const std::size_t n = curves.size();
    if (n < 2) return out;
    const double h = curves.x1[1] - curves.x1[0];
    for (std::size_t i = 0; i + 1 < n; ++i) {
        out.lower_slopes.push_back((curves.lower[i + 1] - curves.lower[i]) / h);
        out.upper_slopes.push_back((curves.upper[i + 1] - curves.upper[i]) / h);
    }
    auto interior = [&](std::size_t a, std::size_t b) {
        return curves.interior_column(a) && curves.interior_column(b);
    };
    for (std::size_t i = 0; i + 2 < n; ++i) {
        if (!interior(i, i + 2)) continue;
        out.lower_max_jump = std::max(out.lower_max_jump, std::abs(out.lower_slopes[i + 1] - out.lower_slopes[i]));
        out.upper_max_jump = std::max(out.upper_max_jump, std::abs(out.upper_slopes[i + 1] - out.upper_slopes[i]));
    }

    const std::size_t w = slope_window(h);
    out.window = w;
    if (n <= w + 1) return out;
    const double span = static_cast<double>(w) * h;
    auto windowed = [&](const std::vector<double>& y, std::size_t i) { return (y[i + w] - y[i]) / span; };
    for (std::size_t i = 0; i + w + 1 < n; ++i) {
        if (!interior(i, i + w + 1)) continue;
        out.lower_window_jump = std::max(
            out.lower_window_jump, std::abs(windowed(curves.lower, i + 1) - windowed(curves.lower, i)));
        out.upper_window_jump = std::max(
            out.upper_window_jump, std::abs(windowed(curves.upper, i + 1) - windowed(curves.upper, i)));
    }
    // transition between columns i and i+1; compare over the window centred there
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const bool lo = curves.lower_contact[i] != curves.lower_contact[i + 1];
        const bool hi = curves.upper_contact[i] != curves.upper_contact[i + 1];
        if (!lo && !hi) continue;
        const std::size_t half = w / 2;
        if (i < half || i - half + w >= n || !interior(i - half, i - half + w)) continue;
        const std::size_t a = i - half;
        if (lo) {
            out.max_tangency_gap = std::max(
                out.max_tangency_gap, std::abs(windowed(curves.lower, a) - windowed(curves.wall_lower, a)));
            ++out.transitions;
        }
        if (hi) {
            out.max_tangency_gap = std::max(
                out.max_tangency_gap, std::abs(windowed(curves.upper, a) - windowed(curves.wall_upper, a)));
            ++out.transitions;
        }
    }
    return out;
}

StagnationSummary stagnation(const DiscreteField& field, double eps_fb) {
    const auto& grid = field.grid();
    const double q = field.consts().flux();
    const std::size_t nx = grid.nx();
    const std::size_t ns = grid.ns();
    auto dry = [&](std::size_t i, std::size_t j) {
        const double v = field(i, j);
        return v <= eps_fb || v >= q - eps_fb;
    };
    StagnationSummary out;
    out.mask.assign(grid.size(), false);
    for (std::size_t i = 1; i + 1 < nx; ++i) {
        for (std::size_t j = 1; j + 1 < ns; ++j) {
            if (!dry(i, j)) continue;
            ++out.dry_nodes;
            out.area += grid.mass(grid.index(i, j));
            bool all = true;
            for (int di = -1; di <= 1 && all; ++di) {
                for (int dj = -1; dj <= 1 && all; ++dj) {
                    all = dry(i + di, j + dj);
                }
            }
            out.mask[grid.index(i, j)] = all;
        }
    }
    return out;
}

} // namespace nozzle
