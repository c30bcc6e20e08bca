#pragma once

#include <functional>

namespace nozzle::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
};

/// Adaptive 7/15-point Gauss-Kronrod integration of `fn` over [a, b].
/// Subdivides until the Kronrod/Gauss difference of every accepted panel
/// sums below `abs_tol`. Throws InternalError if `max_depth` is exhausted.
Result gauss_kronrod(const std::function<double(double)>& fn, double a, double b,
                     double abs_tol, int max_depth = 50);

/// Fixed 8-point Gauss-Legendre rule on [a, b].
double gauss_legendre8(const std::function<double(double)>& fn, double a, double b);

} // namespace nozzle::quad
