#include "nozzle/profile1d.hpp"

#include "nozzle/error.hpp"
#include "nozzle/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace nozzle {
namespace {

constexpr double kClampTol = 1e-12;
// Distance from 0 or Q inside which the Cauchy march uses the Taylor branch.
constexpr double kTaylorBand = 1e-6;

double checked_unit(double t, const FlowConstants& consts) {
    const double q = consts.flux();
    if (!(t >= -kClampTol * q && t <= q + kClampTol * q)) {
        throw DomainError("stream value " + std::to_string(t) + " outside [0, Q]");
    }
    return std::clamp(t / q, 0.0, 1.0);
}

// Solve 3k^2 - 2k^3 = s for k in [0,1].
double invert_cubic(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    double k = 0.5 + std::sin(std::asin(2.0 * s - 1.0) / 3.0);
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        const double r = k * k * (3.0 - 2.0 * k) - s;
        if (std::abs(r) <= 4e-16 * s) break;
        if (r > 0.0) hi = std::min(hi, k);
        else lo = std::max(lo, k);
        const double dr = 6.0 * k * (1.0 - k);
        const double step = dr > 0.0 ? r / dr : 0.0;
        if (dr > 0.0 && std::abs(step) <= 1e-17) break;
        double next = k - step;
        if (!(dr > 0.0 && next >= lo && next <= hi)) next = 0.5 * (lo + hi);
        if (next == k) break;
        k = next;
    }
    return k;
}

// Taylor distance from a wall: solves c x + 3Q x^2 = gap for x >= 0.
double taylor_distance(double gap, double c, double q) {
    return (std::sqrt(c * c + 12.0 * q * gap) - c) / (6.0 * q);
}

double hermite_value(double x0, double x1, double v0, double v1, double s0, double s1,
                     double x) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * v0 + (t3 - 2 * t2 + t) * h * s0 + (-2 * t3 + 3 * t2) * v1 +
           (t3 - t2) * h * s1;
}

double hermite_slope(double x0, double x1, double v0, double v1, double s0, double s1,
                     double x) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * v0 + (-6 * t2 + 6 * t) * v1) / h + (3 * t2 - 4 * t + 1) * s0 +
           (3 * t2 - 2 * t) * s1;
}

} // namespace

FlowConstants::FlowConstants(double flux) : flux_(flux) {
    if (!(flux > 0.0) || !std::isfinite(flux)) {
        throw DomainError("flux Q must be positive and finite");
    }
}

double kappa(double t, const FlowConstants& consts) {
    return invert_cubic(checked_unit(t, consts));
}

double f_of_psi(double t, const FlowConstants& consts) {
    return 6.0 * consts.flux() * (1.0 - 2.0 * kappa(t, consts));
}

double f_hat(double t, const FlowConstants& consts) {
    const double q = consts.flux();
    if (t < 0.0 || t > q) return 0.0;
    return 6.0 * q * (1.0 - 2.0 * invert_cubic(t / q));
}

double big_f(double t, const FlowConstants& consts) {
    const double q = consts.flux();
    if (!(t > 0.0 && t < q)) return 0.0;
    const double k = invert_cubic(t / q);
    const double u = 6.0 * q * k * (1.0 - k);
    return 0.5 * u * u;
}

double height_of_slope(double c, const FlowConstants& consts) {
    if (!(c >= 0.0)) throw DomainError("slope c must be nonnegative");
    if (c == 0.0) return 1.0;
    auto integrand = [&](double x) {
        const double u = consts.poiseuille(x);
        return u / std::hypot(u, c);
    };
    return quad::gauss_kronrod(integrand, 0.0, 1.0, 1e-15).value;
}

double c_of_d(double d, const FlowConstants& consts) {
    if (!(d > 0.0 && d <= 1.0)) throw DomainError("height d must lie in (0, 1]");
    if (d == 1.0) return 0.0;
    // height_of_slope(c) <= Q / c, so c = 2Q/d already gives a height below d.
    double lo = 0.0;
    double hi = 2.0 * consts.flux() / d;
    if (height_of_slope(hi, consts) > d) {
        throw InternalError("c_of_d: bisection bracket does not enclose the root");
    }
    for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (height_of_slope(mid, consts) > d) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double shear_energy(double d, const FlowConstants& consts) {
    const double c = c_of_d(d, consts);
    // Pull back to the Poiseuille variable: dy = u / sqrt(u^2 + c^2) dx and
    // phi'^2/2 + F(phi) = u^2 + c^2/2 there.
    auto integrand = [&](double x) {
        const double u = consts.poiseuille(x);
        if (c == 0.0) return u * u;
        return (u * u + 0.5 * c * c) * u / std::hypot(u, c);
    };
    const double q = consts.flux();
    return quad::gauss_kronrod(integrand, 0.0, 1.0, 1e-13 * q * q).value;
}

// ---------------------------------------------------------------------------
// ShearProfile

double ShearProfile::value_at(double x) const {
    if (nodes.empty() || x <= nodes.front()) return 0.0;
    if (x >= nodes.back()) return reaches_flux ? consts.flux() : values.back();
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    const auto k = static_cast<std::size_t>(it - nodes.begin()) - 1;
    return hermite_value(nodes[k], nodes[k + 1], values[k], values[k + 1], slopes[k],
                         slopes[k + 1], x);
}

double ShearProfile::slope_at(double x) const {
    if (nodes.empty() || x < nodes.front() || x > nodes.back()) return 0.0;
    if (x == nodes.back()) return slopes.back();
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    const auto k = static_cast<std::size_t>(it - nodes.begin()) - 1;
    return hermite_slope(nodes[k], nodes[k + 1], values[k], values[k + 1], slopes[k],
                         slopes[k + 1], x);
}

double ShearProfile::energy_identity_residual() const {
    double worst = 0.0;
    const double c2 = slope_at_wall * slope_at_wall;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const double r = slopes[k] * slopes[k] - 2.0 * big_f(values[k], consts) - c2;
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

double ShearProfile::symmetry_residual(std::size_t samples) const {
    double worst = 0.0;
    const double q = consts.flux();
    for (std::size_t k = 0; k < samples; ++k) {
        const double x = height * static_cast<double>(k) / static_cast<double>(samples - 1);
        worst = std::max(worst, std::abs(value_at(x) - (q - value_at(height - x))));
    }
    return worst;
}

ShearProfile build_shear_profile(double d, const FlowConstants& consts, std::size_t n_nodes) {
    if (n_nodes < 3) throw DomainError("build_shear_profile needs at least 3 nodes");
    const double c = c_of_d(d, consts);
    ShearProfile p;
    p.consts = consts;
    p.height = d;
    p.slope_at_wall = c;
    p.nodes.resize(n_nodes);
    p.values.resize(n_nodes);
    p.slopes.resize(n_nodes);
    const double q = consts.flux();
    auto theta_rate = [&](double x) {
        const double u = consts.poiseuille(x);
        return c == 0.0 ? 1.0 : u / std::hypot(u, c);
    };
    const double last = static_cast<double>(n_nodes - 1);
    double position = 0.0;
    for (std::size_t k = 0; k < n_nodes; ++k) {
        const double x = static_cast<double>(k) / last;
        if (k > 0) {
            const double x_prev = static_cast<double>(k - 1) / last;
            position += c == 0.0 ? x - x_prev
                                 : quad::gauss_kronrod(theta_rate, x_prev, x, 1e-16).value;
        }
        const double u = consts.poiseuille(x);
        p.nodes[k] = position;
        p.values[k] = consts.poiseuille_stream(x);
        p.slopes[k] = std::hypot(u, c);
    }
    // Pin the ends exactly; accumulated quadrature drift is far below 1e-14.
    p.nodes.back() = d;
    p.values.front() = 0.0;
    p.values.back() = q;
    p.energy = energy_1d(p);
    return p;
}

ShearProfile cauchy_solve(double c, const FlowConstants& consts, double step, double x_max) {
    if (!(c >= 0.0)) throw DomainError("cauchy_solve: slope c must be nonnegative");
    if (!(step > 0.0)) throw DomainError("cauchy_solve: step must be positive");
    const double q = consts.flux();
    const double band = kTaylorBand * q;
    auto rate = [&](double v) { return std::sqrt(c * c + 2.0 * big_f(v, consts)); };
    auto rk4 = [&](double v, double h) {
        const double k1 = rate(v);
        const double k2 = rate(v + 0.5 * h * k1);
        const double k3 = rate(v + 0.5 * h * k2);
        const double k4 = rate(v + h * k3);
        return v + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
    };

    ShearProfile p;
    p.consts = consts;
    p.slope_at_wall = c;
    auto push = [&](double x, double v, double s) {
        p.nodes.push_back(x);
        p.values.push_back(v);
        p.slopes.push_back(s);
    };
    push(0.0, 0.0, c);

    double x = taylor_distance(band, c, q);
    double v = band;
    if (x >= x_max) {
        p.reaches_flux = false;
        p.height = x_max;
        p.energy = energy_1d(p);
        return p;
    }
    push(x, v, rate(v));
    p.reaches_flux = false;
    while (x < x_max) {
        const double h = std::min(step, x_max - x);
        const double next = rk4(v, h);
        if (next >= q - band) {
            // Shorten the last step to land on Q - band, then finish with the
            // Taylor branch at the top wall.
            double lo = 0.0;
            double hi = h;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + x); ++it) {
                const double mid = 0.5 * (lo + hi);
                if (rk4(v, mid) < q - band) lo = mid;
                else hi = mid;
            }
            x += hi;
            v = q - band;
            push(x, v, rate(v));
            x += taylor_distance(band, c, q);
            push(x, q, c);
            p.reaches_flux = true;
            break;
        }
        x += h;
        v = next;
        push(x, v, rate(v));
    }
    p.height = p.nodes.back();
    p.energy = energy_1d(p);
    return p;
}

double energy_1d(const ShearProfile& profile) {
    const auto& xs = profile.nodes;
    double total = 0.0;
    auto density = [&](std::size_t k) {
        return 0.5 * profile.slopes[k] * profile.slopes[k] + big_f(profile.values[k], profile.consts);
    };
    auto density_rate = [&](std::size_t k) {
        return 2.0 * f_hat(profile.values[k], profile.consts) * profile.slopes[k];
    };
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        const double h = xs[k + 1] - xs[k];
        total += 0.5 * h * (density(k) + density(k + 1)) +
                 h * h / 12.0 * (density_rate(k) - density_rate(k + 1));
    }
    return total;
}

int intersection_count(const ShearProfile& p1, const ShearProfile& p2, double shift) {
    if (!(p1.consts == p2.consts)) {
        throw DomainError("intersection_count: profiles built with different flux");
    }
    if (!(shift >= 0.0)) throw DomainError("intersection_count: shift must be nonnegative");
    const double q = p1.consts.flux();
    std::vector<double> xs;
    xs.reserve(2 * (p1.nodes.size() + p2.nodes.size()));
    for (double x : p2.nodes) xs.push_back(x);
    for (double x : p1.nodes) xs.push_back(x + shift);
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    for (std::size_t k = 0; k + 1 < n; ++k) xs.push_back(0.5 * (xs[k] + xs[k + 1]));
    std::sort(xs.begin(), xs.end());

    int crossings = 0;
    int last_sign = 0;
    for (double x : xs) {
        const double a = p1.value_at(x - shift);
        const double b = p2.value_at(x);
        if (!(a > 0.0 && a < q && b > 0.0 && b < q)) continue;
        const double diff = a - b;
        if (std::abs(diff) <= 1e-13 * q) continue;
        const int sign = diff > 0.0 ? 1 : -1;
        if (last_sign != 0 && sign != last_sign) ++crossings;
        last_sign = sign;
    }
    return crossings;
}

// ---------------------------------------------------------------------------
// ShearFunction

ShearFunction::ShearFunction(double height, const FlowConstants& consts)
    : consts_(consts), height_(height) {
    if (!(height > 0.0)) throw DomainError("ShearFunction: height must be positive");
    if (height >= 1.0) {
        slope_ = 0.0;
        pad_ = 0.5 * (height - 1.0);
        return;
    }
    slope_ = c_of_d(height, consts);
    constexpr std::size_t kTable = 256;
    table_x_.resize(kTable + 1);
    table_theta_.resize(kTable + 1);
    double acc = 0.0;
    for (std::size_t k = 0; k <= kTable; ++k) {
        table_x_[k] = static_cast<double>(k) / kTable;
        if (k > 0) acc += theta_between(table_x_[k - 1], table_x_[k]);
        table_theta_[k] = acc;
    }
    // Normalise the tiny quadrature drift so theta(1) = height exactly.
    const double scale = height_ / acc;
    for (double& t : table_theta_) t *= scale;
}

double ShearFunction::theta_between(double x0, double x1) const {
    auto rate = [&](double x) {
        const double u = consts_.poiseuille(x);
        return u / std::hypot(u, slope_);
    };
    return quad::gauss_kronrod(rate, x0, x1, 1e-16).value;
}

double ShearFunction::preimage(double y) const {
    const auto it = std::upper_bound(table_theta_.begin(), table_theta_.end(), y);
    std::size_t k = static_cast<std::size_t>(it - table_theta_.begin());
    k = std::clamp<std::size_t>(k, 1, table_theta_.size() - 1) - 1;
    double lo = table_x_[k];
    double hi = table_x_[k + 1];
    const double base = table_theta_[k];
    double x = lo + (hi - lo) * (y - base) / (table_theta_[k + 1] - base);
    for (int it = 0; it < 60; ++it) {
        const double r = base + theta_between(table_x_[k], x) - y;
        if (r > 0.0) hi = x;
        else lo = x;
        const double u = consts_.poiseuille(x);
        const double rate = u / std::hypot(u, slope_);
        double next = rate > 0.0 ? x - r / rate : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-15 || hi - lo <= 1e-15) return next;
        x = next;
    }
    return x;
}

double ShearFunction::operator()(double y) const {
    const double q = consts_.flux();
    if (height_ >= 1.0) {
        const double s = y - pad_;
        if (s <= 0.0) return 0.0;
        if (s >= 1.0) return q;
        return consts_.poiseuille_stream(s);
    }
    if (y <= 0.0) return 0.0;
    if (y >= height_) return q;
    return consts_.poiseuille_stream(preimage(y));
}

double ShearFunction::derivative(double y) const {
    if (height_ >= 1.0) {
        const double s = y - pad_;
        if (s <= 0.0 || s >= 1.0) return 0.0;
        return consts_.poiseuille(s);
    }
    if (y < 0.0 || y > height_) return 0.0;
    return std::hypot(consts_.poiseuille(preimage(y)), slope_);
}

} // namespace nozzle
