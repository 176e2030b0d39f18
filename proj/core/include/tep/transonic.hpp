#pragma once

// Fitting a steady transonic shock: integrate the supersonic branch from the
// inlet, place a trial jump at position a, continue subsonically to the
// outlet, and bisect a until the exit density matches the prescribed value.
// The exit-density map a -> g(a) is strictly decreasing as long as the field
// at the shock stays positive and b stays below the sonic density.

#include <string>
#include <vector>

#include "tep/charge.hpp"
#include "tep/jump.hpp"
#include "tep/steady.hpp"

namespace tep {

// Inlet data (supersonic side) and the prescribed outlet density.
struct BoundaryData {
    double rho_l = 0.0;
    double E_l = 0.0;
    double rho_r = 0.0;
};

struct TransonicSolution {
    SteadyProfile left;   // supersonic branch on [0, x0]
    SteadyProfile right;  // subsonic branch on [x0, L]
    double x0 = 0.0;
    double J = 0.0;
    double exit_density = 0.0;
    double field_at_shock = 0.0;

    double L() const { return right.x_max(); }
    // Piecewise evaluation; at x0 the subsonic side wins.
    double rho_at(double x) const { return x < x0 ? left.rho_at(x) : right.rho_at(x); }
    double E_at(double x) const { return x < x0 ? left.E_at(x) : right.E_at(x); }
};

struct FitOptions {
    double exit_tol = 1e-10;   // |g(a) - rho_r| at termination
    double pos_tol = 1e-12;    // bracket width at termination
    int scan_points = 64;      // uniform candidates in (0, L) for the bracket
    double bracket_lo = -1.0;  // optional externally supplied bracket
    double bracket_hi = -1.0;  // (both positive to take effect)
    SteadyOptions steady = SteadyOptions{1e-12, 1e-8, 513};
    int max_bisections = 200;
};

// Supersonic branch from the inlet data, integrated as far toward `to_x` as
// the sonic guard allows. The returned profile may stop short of `to_x`.
SteadyProfile supersonic_branch(const PressureLaw& law, double J, const BackgroundCharge& b,
                                double to_x, double rho_l, double E_l,
                                const SteadyOptions& opts = {});

// One evaluation of the exit-density map g: jump at `a`, integrate the
// subsonic branch to L, return rho(L). Throws InfeasibleShockPosition if the
// subsonic branch hits the sonic band before L.
double exit_density_map(const PressureLaw& law, double J, const BackgroundCharge& b, double L,
                        const SteadyProfile& supersonic_base, double a,
                        const SteadyOptions& opts = {});

struct ExitMapRecord {
    double a = 0.0;
    double g = 0.0;            // exit density, valid when feasible
    double E_at_shock = 0.0;
    double rho_sup = 0.0;      // supersonic density just before the jump
    bool feasible = false;
};

// Evaluates g on a uniform grid of `n` positions in (0, L); infeasible
// positions (outside the supersonic branch, or with no subsonic
// continuation) are recorded with feasible = false.
std::vector<ExitMapRecord> scan_exit_map(const PressureLaw& law, double J,
                                         const BackgroundCharge& b, double L,
                                         const SteadyProfile& supersonic_base, int n,
                                         const SteadyOptions& opts = {});

// Monotone bisection for the shock position matching boundary.rho_r.
// Throws NoSolution when rho_r lies outside the attainable exit-density
// range, HypothesisViolation when the scanned map fails to decrease.
TransonicSolution fit_shock(const PressureLaw& law, double J, const BackgroundCharge& b,
                            const BoundaryData& boundary, double L, const FitOptions& opts = {});

enum class PerturbationShape { constant_offset, bump, sinusoid };

const char* perturbation_shape_name(PerturbationShape s);

struct StabilityRow {
    double eps = 0.0;
    double x0_shift = 0.0;           // fitted x0 minus base x0, signed
    double ratio = 0.0;              // |x0_shift| / eps, 0 for eps = 0
    double jump_density_dev = 0.0;   // downstream density change at the shock
    double field_at_shock_dev = 0.0;
};

struct StabilityReport {
    double x0_base = 0.0;
    PerturbationShape shape = PerturbationShape::constant_offset;
    std::vector<StabilityRow> rows;
    bool ratios_stable = false;  // nonzero-eps ratios agree within factor 3
    int shift_direction = 0;     // sign of the shift at the largest eps
};

// Refits the shock under C0-norm-eps perturbations of the background charge
// and reports how far the shock moves, for each eps in `eps_list`.
StabilityReport structural_stability_experiment(const PressureLaw& law, double J,
                                                const BackgroundCharge& base_b,
                                                const BoundaryData& boundary, double L,
                                                const std::vector<double>& eps_list,
                                                PerturbationShape shape,
                                                const FitOptions& opts = {});

}  // namespace tep
