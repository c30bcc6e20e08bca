#pragma once

// Test-side reference computations, written independently of the library.

#include <cmath>
#include <functional>

namespace oracle {

/// Composite Simpson on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& fn, double a, double b, int n = 20000) {
    const double h = (b - a) / n;
    double acc = fn(a) + fn(b);
    for (int k = 1; k < n; ++k) acc += fn(a + k * h) * (k % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

/// Root of the Poiseuille cubic Q (3k^2 - 2k^3) = t by plain bisection.
inline double kappa(double t, double q) {
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (q * mid * mid * (3.0 - 2.0 * mid) < t) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

inline double poiseuille(double s, double q) { return 6.0 * q * s * (1.0 - s); }

/// Height reached by the shear flow launched with slope c.
inline double height_for(double c, double q) {
    return simpson([&](double s) {
        const double u = poiseuille(s, q);
        return u / std::sqrt(u * u + c * c);
    }, 0.0, 1.0);
}

/// c(d) by bisection on [0, 2Q/d].
inline double c_of_d(double d, double q) {
    if (d == 1.0) return 0.0;
    double lo = 0.0;
    double hi = 2.0 * q / d;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (height_for(mid, q) > d) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// 1-D energy of the shear flow of height d, via x2 = theta(s):
/// phi' = sqrt(u^2 + c^2), F(phi) = u^2 / 2, dx2 = u / sqrt(u^2 + c^2) ds.
inline double shear_energy(double d, double q) {
    const double c = c_of_d(d, q);
    return simpson([&](double s) {
        const double u = poiseuille(s, q);
        const double w = u * u + c * c;
        if (w == 0.0) return 0.0;
        return (0.5 * w + 0.5 * u * u) * u / std::sqrt(w);
    }, 0.0, 1.0);
}

inline double phi1(double x2, double q) {
    if (x2 <= 0.0) return 0.0;
    if (x2 >= 1.0) return q;
    return q * x2 * x2 * (3.0 - 2.0 * x2);
}

} // namespace oracle
