#pragma once

// One-dimensional shear flows: the vorticity nonlinearity f, its primitive F,
// and the family of solutions of  phi'' = f(phi), phi(0) = 0, phi(d) = Q.

#include <cstddef>
#include <vector>

namespace nozzle {

/// Flux carried by the channel and the upstream Poiseuille profile it induces.
class FlowConstants {
public:
    explicit FlowConstants(double flux = 1.0);

    double flux() const { return flux_; }

    /// Poiseuille velocity 6 Q s (1 - s).
    double poiseuille(double s) const { return 6.0 * flux_ * s * (1.0 - s); }

    /// Stream function of the Poiseuille flow, Q (3 s^2 - 2 s^3).
    double poiseuille_stream(double s) const { return flux_ * s * s * (3.0 - 2.0 * s); }

    bool operator==(const FlowConstants&) const = default;

private:
    double flux_;
};

/// Inverse of the Poiseuille stream function: the height kappa in [0,1] whose
/// Poiseuille stream value equals t. Inputs within 1e-12 Q outside [0,Q] are
/// clamped; anything further out raises DomainError.
double kappa(double t, const FlowConstants& consts);

/// Vorticity as a function of the stream value, 6Q (1 - 2 kappa(t)).
double f_of_psi(double t, const FlowConstants& consts);

/// f extended by zero outside [0,Q]. At the endpoints the one-sided values
/// 6Q (t = 0) and -6Q (t = Q) are returned.
double f_hat(double t, const FlowConstants& consts);

/// Primitive of f_hat: zero outside (0,Q), equal to poiseuille(kappa(t))^2 / 2 inside.
double big_f(double t, const FlowConstants& consts);

/// Inlet slope c(d) of the shear flow of height d. Zero for d = 1, strictly
/// decreasing in d.
double c_of_d(double d, const FlowConstants& consts);

/// Height of the shear flow launched with slope c, i.e. the inverse of c_of_d.
double height_of_slope(double c, const FlowConstants& consts);

/// Minimal 1-D energy of the shear flow of height d (closed quadrature).
double shear_energy(double d, const FlowConstants& consts);

/// Sampled shear flow with slope and energy metadata.
struct ShearProfile {
    FlowConstants consts;
    double height = 0.0;          ///< d: extent of the profile (where Q is reached)
    double slope_at_wall = 0.0;   ///< c: phi'(0)
    bool reaches_flux = true;     ///< false when a Cauchy march stopped at x_max
    std::vector<double> nodes;    ///< strictly increasing, starts at 0
    std::vector<double> values;   ///< phi at nodes
    std::vector<double> slopes;   ///< phi' at nodes
    double energy = 0.0;          ///< integral of phi'^2/2 + F(phi) over the nodes

    /// Cubic Hermite interpolation of phi; extended by 0 / Q outside the nodes.
    double value_at(double x) const;
    double slope_at(double x) const;

    /// max_k |phi'^2 - 2F(phi) - c^2|
    double energy_identity_residual() const;
    /// max over sample points of |phi(x) - (Q - phi(d - x))|
    double symmetry_residual(std::size_t samples = 257) const;
};

/// Samples the shear flow of height d through the change of variables that
/// maps the Poiseuille profile onto [0,d].
ShearProfile build_shear_profile(double d, const FlowConstants& consts,
                                 std::size_t n_nodes = 2001);

/// Marches phi' = sqrt(c^2 + 2F(phi)) from phi(0) = 0 until phi reaches Q or
/// x reaches x_max.
ShearProfile cauchy_solve(double c, const FlowConstants& consts, double step,
                          double x_max = 10.0);

/// Composite cubic-Hermite quadrature of phi'^2/2 + F(phi) over the profile,
/// using phi'' = f(phi) for the integrand derivative.
double energy_1d(const ShearProfile& profile);

/// Number of sign changes of p1(x - shift) - p2(x) over points where both
/// values lie strictly inside (0,Q).
int intersection_count(const ShearProfile& p1, const ShearProfile& p2, double shift);

/// Pointwise evaluator for the shear flow of height d in (0,1]. Heights above
/// one are served by the centred Poiseuille profile padded with 0 and Q.
class ShearFunction {
public:
    ShearFunction(double height, const FlowConstants& consts);

    double height() const { return height_; }
    double slope_at_wall() const { return slope_; }

    /// phi(y) for y in [0, height]; 0 below, Q above.
    double operator()(double y) const;
    /// phi'(y)
    double derivative(double y) const;

private:
    // Inverse of the height map theta(x): y -> x in [0,1].
    double preimage(double y) const;
    double theta_between(double x0, double x1) const;

    FlowConstants consts_;
    double height_;
    double slope_;
    double pad_ = 0.0;
    std::vector<double> table_x_;
    std::vector<double> table_theta_;
};

} // namespace nozzle
