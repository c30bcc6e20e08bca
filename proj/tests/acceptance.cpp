// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "oracles.hpp"

#include "nozzle/diagnostics.hpp"
#include "nozzle/freeboundary.hpp"
#include "nozzle/geometry.hpp"
#include "nozzle/grid.hpp"
#include "nozzle/minimizer.hpp"
#include "nozzle/profile1d.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace nozzle;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

// Invariants of criterion 4, gathered over every 2-D solve in this run.
struct InvariantLedger {
    std::size_t solves = 0;
    std::size_t not_converged = 0;
    double box_violation = 0.0;
    double trace_increase = 0.0;
    double mono_violation = 0.0;  // max of (-increment - eps_mono), <= 0 when fine
    std::vector<std::string> offenders;
} ledger;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

SolveResult run(const NozzleGeometry& geom, double n, std::size_t nx, std::size_t ns, const FlowConstants& c,
                SolverConfig cfg = {}, const DiscreteField* warm = nullptr) {
    const auto grid = build_grid(geom, n, nx, ns);
    const auto bd = boundary_data(*grid, c);
    SolveResult r = warm ? solve_minimizer_from(prolongate(*warm, grid, bd), cfg) : solve_minimizer(grid, bd, c, cfg);

    const double q = c.flux();
    const double eps_mono = default_eps_mono(*grid, c, cfg.tol);
    double box = 0.0;
    for (double v : r.field.values()) box = std::max({box, -v, v - q});
    double inc = 0.0;
    const auto& tr = r.report.energy_trace;
    for (std::size_t k = 1; k < tr.size(); ++k) inc = std::max(inc, tr[k] - tr[k - 1]);
    double mono = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid->nx(); ++i) {
        for (std::size_t j = 0; j + 1 < grid->ns(); ++j) {
            mono = std::max(mono, -(r.field(i, j + 1) - r.field(i, j)) - eps_mono);
        }
    }
    ++ledger.solves;
    const bool bad = !r.report.converged || box > 0.0 || inc > 0.0 || mono > 0.0;
    if (!r.report.converged) ++ledger.not_converged;
    ledger.box_violation = std::max(ledger.box_violation, box);
    ledger.trace_increase = std::max(ledger.trace_increase, inc);
    ledger.mono_violation = std::max(ledger.mono_violation, mono);
    if (bad) {
        std::ostringstream s;
        s << geom.name << " N=" << n << " " << nx << "x" << ns;
        ledger.offenders.push_back(s.str());
    }
    return r;
}

double max_flux_deviation(const DiscreteField& f) {
    const double q = f.consts().flux();
    const auto vel = velocity_field(f, default_eps_fb(f.consts(), 1e-6));
    double dev = 0.0;
    for (double v : flux_per_column(f, vel)) dev = std::max(dev, std::abs(v - q) / q);
    return dev;
}

double max_diff(const DiscreteField& a, const DiscreteField& b) {
    double out = 0.0;
    for (std::size_t p = 0; p < a.values().size(); ++p) out = std::max(out, std::abs(a.values()[p] - b.values()[p]));
    return out;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
    Outcome o;
    double round_trip = 0.0;
    double antisym = 0.0;
    double f_half = 0.0;
    double fd = 0.0;
    for (double q : {1.0, 1.7}) {
        const FlowConstants c(q);
        for (int k = 0; k < 1000; ++k) {
            const double t = q * (k + 0.5) / 1000.0;
            const double x = kappa(t, c);
            round_trip = std::max(round_trip, std::abs(q * x * x * (3.0 - 2.0 * x) - t) / q);
            antisym = std::max(antisym, std::abs(f_of_psi(t, c) + f_of_psi(q - t, c)) / q);
        }
        f_half = std::max(f_half, std::abs(big_f(0.5 * q, c) - 9.0 / 8.0 * q * q) / (q * q));
        const double h = 1e-5 * q;
        for (int k = 0; k <= 1000; ++k) {
            const double t = q * (0.01 + 0.98 * k / 1000.0);
            const double d = (big_f(t + h, c) - big_f(t - h, c)) / (2.0 * h);
            const double f = f_of_psi(t, c);
            if (std::abs(f) < 1e-3 * q) continue;  // relative error is meaningless at the zero of f
            fd = std::max(fd, std::abs(d - f) / std::abs(f));
        }
    }
    o.detail << "kappa round trip " << round_trip << "Q, f antisymmetry " << antisym << "Q, |F(Q/2) - 9/8 Q^2| "
             << f_half << "Q^2, F' vs f " << fd;
    o.require(round_trip <= 1e-12, "kappa round trip");
    o.require(antisym <= 1e-12, "f antisymmetry");
    o.require(f_half <= 1e-10, "F(Q/2)");
    o.require(fd <= 1e-5, "F' = f");
    return o;
}

Outcome criterion2() {
    Outcome o;
    const FlowConstants c(1.0);
    const double q = c.flux();
    std::vector<double> cs;
    std::vector<double> js;
    double identity = 0.0;
    double oracle_c = 0.0;
    for (int k = 2; k <= 10; ++k) {
        const double d = k / 10.0;
        cs.push_back(c_of_d(d, c));
        js.push_back(shear_energy(d, c));
        identity = std::max(identity, build_shear_profile(d, c).energy_identity_residual());
        oracle_c = std::max(oracle_c, std::abs(cs.back() - oracle::c_of_d(d, q)));
    }
    bool decreasing = true;
    for (std::size_t k = 1; k < cs.size(); ++k) decreasing = decreasing && cs[k] < cs[k - 1] && js[k] < js[k - 1];
    const double j1 = std::abs(js.back() - 6.0 / 5.0 * q * q);

    const ShearFunction half(0.5, c);
    bool ordered = true;
    for (int k = 1; k < 500; ++k) {
        const double x = 0.5 * k / 500.0;
        ordered = ordered && half(x) > oracle::phi1(x, q);
    }
    o.detail << "c(1) = " << c_of_d(1.0, c) << ", J_1 error " << j1 << ", identity residual " << identity
             << ", |c - oracle| " << oracle_c;
    o.require(c_of_d(1.0, c) == 0.0, "c(1) = 0");
    o.require(decreasing, "c, J strictly decreasing");
    o.require(j1 <= 1e-8, "J_1 = 6Q^2/5");
    o.require(identity <= 1e-8 * q * q, "energy identity");
    o.require(ordered, "phi_0.5 > phi_1 on (0, 0.5)");
    o.require(oracle_c <= 1e-6, "c(d) against bisection oracle");
    return o;
}

Outcome criterion3() {
    Outcome o;
    const FlowConstants c(1.0);
    const auto geom = preset_geometry("straight");
    SolverConfig cfg;
    std::vector<DiscreteField> fields;
    for (auto init : {InitialGuess::column_profile, InitialGuess::sigma_linear, InitialGuess::harmonic}) {
        cfg.init = init;
        fields.push_back(run(geom, 5.0, 161, 41, c, cfg).field);
    }
    const auto& g = fields[0].grid();
    double dev = 0.0;
    for (const auto& f : fields) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
            for (std::size_t j = 0; j < g.ns(); ++j) dev = std::max(dev, std::abs(f(i, j) - oracle::phi1(g.x2(i, j), 1.0)));
        }
    }
    double row = 0.0;
    for (const auto& f : fields) {
        for (std::size_t j = 0; j < g.ns(); ++j) {
            double lo = f(0, j);
            double hi = f(0, j);
            for (std::size_t i = 0; i < g.nx(); ++i) {
                lo = std::min(lo, f(i, j));
                hi = std::max(hi, f(i, j));
            }
            row = std::max(row, hi - lo);
        }
    }
    const double spread = std::max({max_diff(fields[0], fields[1]), max_diff(fields[0], fields[2]),
                                    max_diff(fields[1], fields[2])});
    o.detail << "max |psi - phi_1| " << dev << ", row variation " << row << ", init spread " << spread;
    o.require(dev <= 5e-3, "|psi - phi_1| <= 5e-3");
    o.require(row <= 5e-3, "row variation <= 5e-3");
    o.require(spread <= 10.0 * cfg.tol, "initialisations agree within 10 tol");
    return o;
}

// Flux part of criterion 4; the invariants are read from the ledger at the end.
struct FluxRefinement {
    double coarse = 0.0;
    double fine = 0.0;
};

FluxRefinement flux_refinement(const DiscreteField& coarse) {
    const FlowConstants c(1.0);
    const auto geom = preset_geometry("symmetric-bump", [] {
        GeometryParams p;
        p.scalars["amplitude"] = 0.2;
        return p;
    }());
    const auto fine = run(geom, 5.0, 321, 81, c, {}, &coarse).field;
    return {max_flux_deviation(coarse), max_flux_deviation(fine)};
}

struct StagnationCheck {
    double area = 0.0;
    double min_over_dip = 0.0;
    double dip_threshold = 0.0;
    double barrier_excess = 0.0;
    std::string region;
};

StagnationCheck stagnation_check(const DiscreteField& f, const NozzleGeometry& geom, double tol) {
    const auto& g = f.grid();
    const double eps_fb = default_eps_fb(f.consts(), tol);
    StagnationCheck s;
    s.area = stagnation(f, eps_fb).area;
    const auto curves = extract_free_boundaries(f, eps_fb, default_eps_mono(g, f.consts(), tol));
    s.min_over_dip = std::numeric_limits<double>::infinity();
    double cell = 0.0;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        cell = std::max(cell, curves.cell[i]);
        if (curves.wall_lower[i] < 0.0) s.min_over_dip = std::min(s.min_over_dip, curves.lower[i]);
    }
    s.dip_threshold = -2.0 * cell;
    // symmetric nozzles: the barrier holds on the lower half; top-flat: everywhere
    const bool half = geom.mirror_symmetric && !geom.top_flat;
    s.region = half ? "x2 <= 1/2" : "all nodes";
    s.barrier_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.nx(); ++i) {
        for (std::size_t j = 0; j < g.ns(); ++j) {
            const double x2 = g.x2(i, j);
            if (half && x2 > 0.5) continue;
            s.barrier_excess = std::max(s.barrier_excess, f(i, j) - oracle::phi1(x2, f.consts().flux()));
        }
    }
    return s;
}

Outcome criterion5(std::unique_ptr<DiscreteField>& bump_field) {
    Outcome o;
    const FlowConstants c(1.0);
    SolverConfig cfg;
    GeometryParams sym;
    sym.scalars["amplitude"] = 0.2;
    const auto geoms = {preset_geometry("symmetric-bump", sym), preset_geometry("top-flat-bottom-bump")};
    for (const auto& geom : geoms) {
        const auto r = run(geom, 5.0, 161, 41, c, cfg);
        const auto s = stagnation_check(r.field, geom, cfg.tol);
        o.detail << geom.name << ": area " << s.area << ", min lower fb over dip " << s.min_over_dip << " (>= "
                 << s.dip_threshold << "), barrier excess " << s.barrier_excess << " on " << s.region << "; ";
        o.require(s.area > 0.0, geom.name + " stagnation area > 0");
        o.require(s.min_over_dip >= s.dip_threshold, geom.name + " lower free boundary >= -2h");
        o.require(s.barrier_excess <= 10.0 * cfg.tol, geom.name + " barrier");
        if (geom.mirror_symmetric) bump_field = std::make_unique<DiscreteField>(r.field);
    }
    return o;
}

Outcome criterion6() {
    Outcome o;
    const FlowConstants c(1.0);
    GeometryParams sym;
    sym.scalars["amplitude"] = 0.2;
    const auto geom = preset_geometry("symmetric-bump", sym);
    const double n = 2.0;
    std::vector<double> jumps;
    std::unique_ptr<DiscreteField> prev;
    for (std::size_t m : {16, 32, 64}) {
        const std::size_t nx = 4 * m + 1;
        const std::size_t ns = 40 * m / 16 + 1;
        const auto r = run(geom, n, nx, ns, c, {}, prev.get());
        prev = std::make_unique<DiscreteField>(r.field);
        const double eps_fb = default_eps_fb(c, 1e-6);
        const auto curves = extract_free_boundaries(r.field, eps_fb, default_eps_mono(r.field.grid(), c, 1e-6));
        const auto growth = growth_fit(r.field, curves);
        const auto slopes = slope_profile(curves);
        jumps.push_back(slopes.lower_window_jump);
        o.detail << "h=1/" << m << ": p in [" << growth.exponent_min << ", " << growth.exponent_max << "], ratio >= "
                 << growth.ratio_min << ", slope jump " << slopes.lower_window_jump << "; ";
        if (m >= 32) {
            const std::string at = " at h=1/" + std::to_string(m);
            o.require(!growth.empty(), "growth samples" + at);
            o.require(growth.exponent_min >= 1.8 && growth.exponent_max <= 2.2, "p in [1.8, 2.2]" + at);
            o.require(growth.ratio_min >= c.flux() / 400.0, "ratio >= Q/400" + at);
        }
    }
    o.require(jumps[1] < jumps[0] && jumps[2] < jumps[1], "slope jumps decrease");
    return o;
}

Outcome criterion7() {
    Outcome o;
    const FlowConstants c(1.0);
    const double tol_energy = 1e-8;
    struct Case {
        NozzleGeometry geom;
        std::vector<double> ns;
        bool constant;
    };
    GeometryParams sym;
    sym.scalars["amplitude"] = 0.2;
    const std::vector<Case> cases{{preset_geometry("symmetric-bump", sym), {6, 8, 10}, false},
                                  {preset_geometry("top-flat-bottom-bump"), {6, 8, 10}, false},
                                  {preset_geometry("straight"), {4, 6, 8}, true}};
    for (const auto& cs : cases) {
        std::vector<DiscreteField> fields;
        for (double n : cs.ns) fields.push_back(run(cs.geom, n, static_cast<std::size_t>(32 * n) + 1, 41, c).field);
        const auto rep = far_field_report(fields, c, tol_energy);
        o.detail << cs.geom.name << " zeta:";
        for (const auto& e : rep.entries) o.detail << " " << e.zeta;
        o.detail << "; ";
        if (cs.constant) {
            o.require(rep.zeta_spread <= tol_energy, cs.geom.name + " zeta constant");
        } else {
            o.require(rep.zeta_nonincreasing, cs.geom.name + " zeta nonincreasing");
        }
    }
    return o;
}

Outcome criterion8() {
    Outcome o;
    const FlowConstants c(1.0);
    const auto grid = build_grid(preset_geometry("symmetric-bump"), 2.0, 65, 21);
    DiscreteField field = initial_field(grid, boundary_data(*grid, c), c, InitialGuess::sigma_linear);
    // interior values strictly inside (0, Q), where F is smooth
    for (std::size_t i = 1; i + 1 < grid->nx(); ++i) {
        for (std::size_t j = 1; j + 1 < grid->ns(); ++j) {
            field.values()[grid->index(i, j)] = 0.05 + 0.9 * grid->sigma(j) + 0.03 * std::sin(2.0 * grid->x1(i));
        }
    }
    const auto grad = energy_gradient(field);
    std::mt19937 rng(20261017);
    std::normal_distribution<double> gauss;
    const double eps = 1e-5;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> eta(grid->size(), 0.0);
        long double dot = 0.0L;
        for (std::size_t i = 1; i + 1 < grid->nx(); ++i) {
            for (std::size_t j = 1; j + 1 < grid->ns(); ++j) {
                const std::size_t p = grid->index(i, j);
                eta[p] = gauss(rng);
                dot += static_cast<long double>(grad[p]) * eta[p];
            }
        }
        auto energy_at = [&](double s) {
            DiscreteField f = field;
            for (std::size_t p = 0; p < eta.size(); ++p) f.values()[p] += s * eta[p];
            return discrete_energy(f);
        };
        const double fd = (energy_at(eps) - energy_at(-eps)) / (2.0 * eps);
        worst = std::max(worst, std::abs(fd - static_cast<double>(dot)) / std::abs(static_cast<double>(dot)));
    }
    o.detail << "worst relative error " << worst << " over 20 directions";
    o.require(worst <= 1e-6, "relative error <= 1e-6");
    return o;
}

std::string line(int k, const Outcome& o, bool pass, double seconds, double target) {
    std::ostringstream s;
    s.precision(3);
    const bool in_time = target <= 0.0 || seconds < target;
    s << (pass ? "PASS" : "FAIL") << " criterion " << k << ": " << o.detail.str() << " | " << seconds << " s";
    if (target > 0.0) s << " (target < " << target << " s" << (in_time ? "" : ", exceeded") << ")";
    return s.str();
}

} // namespace

int main() {
    std::vector<std::string> lines(9);
    bool all = true;
    auto record = [&](int k, Outcome&& o, Clock::time_point t0, double target) {
        const double sec = seconds_since(t0);
        const bool pass = o.pass && (target <= 0.0 || sec < target);
        all = all && pass;
        lines[k] = line(k, o, pass, sec, target);
        std::fprintf(stderr, "%s\n", lines[k].c_str());
    };
    auto guarded = [](auto&& fn) {
        try {
            return fn();
        } catch (const std::exception& e) {
            Outcome o;
            o.require(false, std::string("exception: ") + e.what());
            return o;
        }
    };

    auto t = Clock::now();
    record(1, guarded(criterion1), t, 1.0);
    t = Clock::now();
    record(2, guarded(criterion2), t, 5.0);
    t = Clock::now();
    record(3, guarded(criterion3), t, 60.0);

    t = Clock::now();
    std::unique_ptr<DiscreteField> bump;
    record(5, guarded([&] { return criterion5(bump); }), t, 120.0);
    t = Clock::now();
    record(6, guarded(criterion6), t, 180.0);
    t = Clock::now();
    record(7, guarded(criterion7), t, 240.0);
    t = Clock::now();
    record(8, guarded(criterion8), t, 0.0);

    // criterion 4 closes over every solve above plus the flux refinement
    t = Clock::now();
    record(4, guarded([&] {
               Outcome o;
               if (!bump) throw std::runtime_error("no symmetric-bump field from criterion 5");
               const auto fr = flux_refinement(*bump);
               const double order = std::log2(fr.coarse / fr.fine);
               o.detail << ledger.solves << " solves, not converged " << ledger.not_converged << ", box violation "
                        << ledger.box_violation << ", max trace increase " << ledger.trace_increase
                        << ", monotonicity margin " << ledger.mono_violation << "; flux deviation " << fr.coarse
                        << " at 161x41, " << fr.fine << " at 321x81, observed order " << order;
               o.require(ledger.not_converged == 0, "all solves converged");
               o.require(ledger.box_violation <= 0.0, "0 <= psi <= Q");
               o.require(ledger.trace_increase <= 0.0, "monotone energy trace");
               o.require(ledger.mono_violation <= 0.0, "d psi / d x2 >= -eps_mono");
               o.require(fr.coarse <= 0.01, "flux within 1%");
               o.require(order >= 1.8, "second-order flux improvement");
               for (const auto& s : ledger.offenders) o.detail << " [offender: " << s << "]";
               return o;
           }),
           t, 0.0);

    std::printf("acceptance summary\n");
    for (int k = 1; k <= 8; ++k) std::printf("%s\n", lines[k].c_str());
    std::printf("%s\n", all ? "ALL PASS" : "SOME CRITERIA FAILED");
    return all ? 0 : 1;
}
