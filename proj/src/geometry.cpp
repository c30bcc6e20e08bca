#include "nozzle/geometry.hpp"

#include "nozzle/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>

namespace nozzle {
namespace {

std::string at_x(double x) {
    std::ostringstream os;
    os.precision(10);
    os << " at x1=" << x;
    return os.str();
}

double param(const GeometryParams& p, const std::string& key, double fallback) {
    const auto it = p.scalars.find(key);
    return it == p.scalars.end() ? fallback : it->second;
}

void reject_unknown(const GeometryParams& p, const std::string& preset,
                    std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : p.scalars) {
        if (!ok.contains(key)) {
            throw ValidationError("geometry preset '" + preset + "': unknown parameter '" + key + "'");
        }
    }
    if (preset != "sampled" &&
        !(p.table_x.empty() && p.table_lower.empty() && p.table_upper.empty())) {
        throw ValidationError("geometry preset '" + preset + "' does not take wall tables");
    }
}

} // namespace

WallCurve WallCurve::constant(double level) {
    return WallCurve([level](double) { return WallPoint{level, 0.0, 0.0}; });
}

WallCurve WallCurve::cosine_bump(double amplitude, double centre, double half_width) {
    if (!(half_width > 0.0)) throw ValidationError("bump width must be positive");
    return WallCurve([=](double x) {
        const double t = (x - centre) / half_width;
        if (std::abs(t) >= 1.0) return WallPoint{};
        const double k = 0.5 * std::numbers::pi / half_width;
        const double c = std::cos(0.5 * std::numbers::pi * t);
        const double s = std::sin(0.5 * std::numbers::pi * t);
        return WallPoint{amplitude * c * c * c * c, -4.0 * amplitude * k * c * c * c * s,
                         amplitude * k * k * (12.0 * c * c * s * s - 4.0 * c * c * c * c)};
    });
}

WallCurve WallCurve::smooth_step(double from, double to, double start, double length) {
    if (!(length > 0.0)) throw ValidationError("step length must be positive");
    const double jump = to - from;
    return WallCurve([=](double x) {
        const double t = (x - start) / length;
        if (t <= 0.0) return WallPoint{from, 0.0, 0.0};
        if (t >= 1.0) return WallPoint{to, 0.0, 0.0};
        const double t2 = t * t;
        const double t3 = t2 * t;
        return WallPoint{from + jump * t3 * (10.0 - 15.0 * t + 6.0 * t2),
                         jump * 30.0 * t2 * (1.0 - t) * (1.0 - t) / length,
                         jump * 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / (length * length)};
    });
}

WallCurve WallCurve::spline(std::vector<double> xs, std::vector<double> ys) {
    const std::size_t n = xs.size();
    if (n < 2 || ys.size() != n) throw ValidationError("wall table needs >= 2 matching rows");
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!(xs[i + 1] > xs[i])) {
            throw ValidationError("wall table abscissae must increase" + at_x(xs[i + 1]));
        }
    }
    // Second derivatives of the clamped spline (zero slopes at both ends),
    // Thomas algorithm on the usual tridiagonal system.
    std::vector<double> diag(n), upper(n), rhs(n), second(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double hl = i > 0 ? xs[i] - xs[i - 1] : 0.0;
        const double hr = i + 1 < n ? xs[i + 1] - xs[i] : 0.0;
        diag[i] = (hl + hr) / 3.0;
        upper[i] = hr / 6.0;
        const double sl = i > 0 ? (ys[i] - ys[i - 1]) / hl : 0.0;
        const double sr = i + 1 < n ? (ys[i + 1] - ys[i]) / hr : 0.0;
        rhs[i] = sr - sl;
    }
    for (std::size_t i = 1; i < n; ++i) {
        const double lower = (xs[i] - xs[i - 1]) / 6.0;
        const double m = lower / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    second[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) second[i] = (rhs[i] - upper[i] * second[i + 1]) / diag[i];

    auto data = std::make_shared<const std::array<std::vector<double>, 3>>(
        std::array<std::vector<double>, 3>{std::move(xs), std::move(ys), std::move(second)});
    return WallCurve([data](double x) {
        const auto& [px, py, pm] = *data;
        if (x <= px.front()) return WallPoint{py.front(), 0.0, 0.0};
        if (x >= px.back()) return WallPoint{py.back(), 0.0, 0.0};
        const auto it = std::upper_bound(px.begin(), px.end(), x);
        const auto i = static_cast<std::size_t>(it - px.begin()) - 1;
        const double h = px[i + 1] - px[i];
        const double a = (px[i + 1] - x) / h;
        const double b = (x - px[i]) / h;
        const double value = a * py[i] + b * py[i + 1] +
                             ((a * a * a - a) * pm[i] + (b * b * b - b) * pm[i + 1]) * h * h / 6.0;
        const double slope = (py[i + 1] - py[i]) / h +
                             ((1.0 - 3.0 * a * a) * pm[i] + (3.0 * b * b - 1.0) * pm[i + 1]) * h / 6.0;
        return WallPoint{value, slope, a * pm[i] + b * pm[i + 1]};
    });
}

WallCurve WallCurve::operator+(const WallCurve& other) const {
    return WallCurve([lhs = eval_, rhs = other.eval_](double x) {
        const WallPoint p = lhs(x);
        const WallPoint q = rhs(x);
        return WallPoint{p.value + q.value, p.slope + q.slope, p.curvature + q.curvature};
    });
}

WallCurve WallCurve::operator*(double scale) const {
    return WallCurve([f = eval_, scale](double x) {
        const WallPoint p = f(x);
        return WallPoint{scale * p.value, scale * p.slope, scale * p.curvature};
    });
}

WallCurve WallCurve::reflected() const {
    return WallCurve([f = eval_](double x) {
        const WallPoint p = f(x);
        return WallPoint{1.0 - p.value, -p.slope, -p.curvature};
    });
}

double NozzleGeometry::min_truncation() const { return std::max(flat_right, -flat_left); }

void NozzleGeometry::validate() const {
    if (!(flat_left < 0.0 && flat_right > 0.0)) {
        throw ValidationError("flatness thresholds must satisfy flat_left < 0 < flat_right");
    }
    if (!(outlet_lower >= 0.0 && outlet_lower < outlet_upper && outlet_upper <= 1.0)) {
        throw ValidationError("outlet heights must satisfy 0 <= a < b <= 1");
    }
    constexpr double kFlatTol = 1e-12;
    constexpr int kSamples = 4000;
    const double lo = flat_left - 1.0;
    const double hi = flat_right + 1.0;
    for (int k = 0; k <= kSamples; ++k) {
        const double x = lo + (hi - lo) * k / kSamples;
        const WallPoint p0 = lower(x);
        const WallPoint p1 = upper(x);
        for (const WallPoint& p : {p0, p1}) {
            if (!std::isfinite(p.value) || !std::isfinite(p.slope) || !std::isfinite(p.curvature)) {
                throw ValidationError("wall curve is not C^2 (non-finite derivative)" + at_x(x));
            }
        }
        if (!(p1.value > p0.value)) throw ValidationError("h1 <= h0" + at_x(x));
        if (x <= flat_left &&
            (std::abs(p0.value) > kFlatTol || std::abs(p1.value - 1.0) > kFlatTol)) {
            throw ValidationError("walls not flat (0,1) upstream of flat_left" + at_x(x));
        }
        if (x >= flat_right && (std::abs(p0.value - outlet_lower) > kFlatTol ||
                                std::abs(p1.value - outlet_upper) > kFlatTol)) {
            throw ValidationError("walls not flat (a,b) downstream of flat_right" + at_x(x));
        }
    }
}

NozzleGeometry preset_geometry(const std::string& name, const GeometryParams& params) {
    NozzleGeometry g;
    g.name = name;
    if (name == "straight") {
        reject_unknown(params, name, {});
        g.lower = WallCurve::constant(0.0);
        g.upper = WallCurve::constant(1.0);
        g.top_flat = true;
        g.mirror_symmetric = true;
    } else if (name == "symmetric-bump") {
        reject_unknown(params, name, {"amplitude", "center", "width"});
        const double amp = param(params, "amplitude", 0.2);
        const double centre = param(params, "center", 0.0);
        const double width = param(params, "width", 1.0);
        // Positive amplitude widens the channel on both sides.
        g.lower = WallCurve::cosine_bump(-amp, centre, width);
        g.upper = g.lower.reflected();
        g.mirror_symmetric = true;
        g.flat_left = std::min(centre - width, -1.0);
        g.flat_right = std::max(centre + width, 1.0);
    } else if (name == "top-flat-bottom-bump") {
        reject_unknown(params, name, {"amplitude", "center", "width"});
        const double amp = param(params, "amplitude", -0.2);
        const double centre = param(params, "center", 0.0);
        const double width = param(params, "width", 1.0);
        g.lower = WallCurve::cosine_bump(amp, centre, width);
        g.upper = WallCurve::constant(1.0);
        g.top_flat = true;
        g.flat_left = std::min(centre - width, -1.0);
        g.flat_right = std::max(centre + width, 1.0);
    } else if (name == "bottom-bump") {
        reject_unknown(params, name,
                       {"amplitude", "center", "width", "a", "b", "step_start", "step_length"});
        const double amp = param(params, "amplitude", -0.2);
        const double centre = param(params, "center", 0.0);
        const double width = param(params, "width", 1.0);
        const double a = param(params, "a", 0.0);
        const double b = param(params, "b", 1.0);
        const double start = param(params, "step_start", centre + width);
        const double length = param(params, "step_length", 1.0);
        g.lower = WallCurve::cosine_bump(amp, centre, width) + WallCurve::smooth_step(0.0, a, start, length);
        g.upper = WallCurve::smooth_step(1.0, b, start, length);
        g.outlet_lower = a;
        g.outlet_upper = b;
        g.top_flat = (b == 1.0);
        const bool stepped = (a != 0.0 || b != 1.0);
        g.flat_left = std::min({centre - width, stepped ? start : 0.0, -1.0});
        g.flat_right = std::max({centre + width, stepped ? start + length : 0.0, 1.0});
    } else if (name == "sampled") {
        reject_unknown(params, name, {});
        const auto& xs = params.table_x;
        if (xs.size() < 2 || params.table_lower.size() != xs.size() ||
            params.table_upper.size() != xs.size()) {
            throw ValidationError("sampled geometry needs x, h0, h1 tables of equal length >= 2");
        }
        constexpr double kTol = 1e-12;
        if (std::abs(params.table_lower.front()) > kTol ||
            std::abs(params.table_upper.front() - 1.0) > kTol) {
            throw ValidationError("sampled geometry must start at (h0,h1) = (0,1)" + at_x(xs.front()));
        }
        g.lower = WallCurve::spline(xs, params.table_lower);
        g.upper = WallCurve::spline(xs, params.table_upper);
        g.outlet_lower = params.table_lower.back();
        g.outlet_upper = params.table_upper.back();
        g.flat_left = std::min(xs.front(), -1.0);
        g.flat_right = std::max(xs.back(), 1.0);
    } else {
        throw ValidationError("unknown geometry preset '" + name + "'");
    }
    g.validate();
    return g;
}

} // namespace nozzle
