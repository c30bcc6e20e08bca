#pragma once

// Nozzle walls x2 = h0(x1) (lower) and x2 = h1(x1) (upper), flat outside
// [flat_left, flat_right] where they equal (0,1) upstream and (a,b) downstream.

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace nozzle {

struct WallPoint {
    double value = 0.0;
    double slope = 0.0;
    double curvature = 0.0;  ///< second derivative
};

/// C^2 wall curve with analytic first and second derivatives.
class WallCurve {
public:
    using Evaluator = std::function<WallPoint(double)>;

    WallCurve() : WallCurve(constant(0.0)) {}
    explicit WallCurve(Evaluator eval) : eval_(std::move(eval)) {}

    static WallCurve constant(double level);
    /// amplitude * cos^4(pi (x - centre) / (2 half_width)) on |x - centre| < half_width.
    static WallCurve cosine_bump(double amplitude, double centre, double half_width);
    /// Quintic smoothstep from `from` to `to` over [start, start + length].
    static WallCurve smooth_step(double from, double to, double start, double length);
    /// Clamped cubic spline through (xs, ys) with zero end slopes, constant outside.
    static WallCurve spline(std::vector<double> xs, std::vector<double> ys);

    WallPoint operator()(double x) const { return eval_(x); }
    double value(double x) const { return eval_(x).value; }

    WallCurve operator+(const WallCurve& other) const;
    WallCurve operator*(double scale) const;
    WallCurve reflected() const;  ///< 1 - h

private:
    Evaluator eval_;
};

struct NozzleGeometry {
    std::string name;
    WallCurve lower;            ///< h0
    WallCurve upper;            ///< h1
    double flat_left = -1.0;    ///< walls are (0,1) for x1 <= flat_left (< 0)
    double flat_right = 1.0;    ///< walls are (a,b) for x1 >= flat_right (> 0)
    double outlet_lower = 0.0;  ///< a
    double outlet_upper = 1.0;  ///< b
    bool mirror_symmetric = false;  ///< h1 = 1 - h0 identically
    bool top_flat = false;          ///< h1 = 1 identically

    double outlet_height() const { return outlet_upper - outlet_lower; }
    /// max(flat_right, -flat_left): smallest admissible truncation half-length.
    double min_truncation() const;
    bool is_straight() const { return name == "straight"; }

    /// Throws ValidationError naming the violated condition and the offending x1.
    void validate() const;
};

/// Scalar parameters plus, for the "sampled" preset, wall tables.
struct GeometryParams {
    std::map<std::string, double> scalars;
    std::vector<double> table_x;
    std::vector<double> table_lower;
    std::vector<double> table_upper;
};

/// Presets: straight, symmetric-bump, bottom-bump, top-flat-bottom-bump, sampled.
NozzleGeometry preset_geometry(const std::string& name, const GeometryParams& params = {});

} // namespace nozzle
