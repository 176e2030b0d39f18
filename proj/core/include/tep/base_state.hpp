#pragma once

// Frozen background for the free-boundary dynamics: the subsonic steady
// branch with its coefficient tables on a uniform grid, short extensions of
// both branches past the shock so slightly displaced shocks stay inside
// tabulated territory, and the shock-response coefficients of the
// linearized jump relations.

#include <vector>

#include "tep/transonic.hpp"

namespace tep {

// Linearized jump-relation coefficients at the base shock. d1_0 and e1_0
// close the boundary condition dY/dx = d1_0 dY/dt + e1_0 Y at x0.
struct ShockResponseCoefficients {
    double dA1_drho = 0.0;
    double dA1_dshift = 0.0;
    double dA2_drho = 0.0;
    double dA2_dshift = 0.0;
    double dA3_dY = 0.0;
    double dA4_dYx = 0.0;
    double dA4_dY = 0.0;
    double d1_0 = 0.0;
    double e1_0 = 0.0;
};

// Coefficient tables of the linearized interior operator on the grid:
//   Y_tt = d/dx(-a11 Y_x) - d/dx(2 a01 Y_t) ... arranged as
//   a01 = a10 = u_plus, a11 = -(p'(rho_plus) - J^2/rho_plus^2),
//   b0 = d/dx(2 J / rho_plus), b1 = -d/dx(p' - J^2/rho^2) + E_plus,
//   g = rho_plus,
// with every x-derivative evaluated through the steady ODE.
struct BaseTables {
    std::vector<double> xs;
    std::vector<double> a01, a11, b0, b1, g;
};

struct BaseStateOptions {
    int n_grid = 257;               // nodes of the dynamics grid on [x0, L]
    double extension_fraction = 0.25;  // of min(x0, L - x0), shrunk on breach
    double min_extension = 1e-7;
    SteadyOptions steady = SteadyOptions{1e-12, 1e-8, 129};
};

class BaseState {
public:
    BaseState(const TransonicSolution& solution, const BackgroundCharge& charge,
              const BaseStateOptions& opts = {});

    const PressureLaw& law() const { return law_; }
    double J() const { return J_; }
    double x0() const { return x0_; }
    double L() const { return L_; }
    double dx() const { return dx_; }
    int n() const { return static_cast<int>(tables_.xs.size()); }
    const BaseTables& tables() const { return tables_; }
    const ShockResponseCoefficients& shock_response() const { return response_; }
    const TransonicSolution& solution() const { return solution_; }
    const BackgroundCharge& charge() const { return charge_; }

    // How far past the shock each branch was extended.
    double extension_behind() const { return ext_behind_; }   // subsonic, x < x0
    double extension_ahead() const { return ext_ahead_; }     // supersonic, x > x0

    // Subsonic-side evaluation on [x0 - extension_behind, L].
    double rho_plus(double x) const;
    double drho_plus(double x) const;
    double E_plus(double x) const;
    double u_plus(double x) const { return J_ / rho_plus(x); }
    // kappa = p'(rho_plus) - J^2/rho_plus^2 = c^2 - u^2 > 0 on the branch.
    double kappa(double x) const;
    double kappa_prime(double x) const;

    // Supersonic-side evaluation on [0, x0 + extension_ahead].
    double rho_minus(double x) const;
    double drho_minus(double x) const;
    double E_minus(double x) const;

    // Field gap between the branches at shock position x0 + sigma:
    //   h(sigma) = E_minus - E_plus at x0 + sigma,
    // normalized so h(0) = 0 exactly. Strictly decreasing.
    double h_shift(double sigma) const;
    double dh_shift(double sigma) const;
    double ddh_shift(double sigma) const;

    // Inverts h: the shock displacement matching a boundary value Y0 of the
    // potential. Newton from `guess`; throws StateInvalid when the result
    // leaves the extended neighborhood.
    double sigma_from_boundary(double Y0, double guess = 0.0) const;

    // Steady momentum-flux gap between the branches at position s, with the
    // assembly defect at x0 subtracted so the value vanishes identically at
    // the base shock.
    double flux_gap(double s) const;

    // Momentum flux of the frozen supersonic branch at position s, shifted by
    // the assembly defect; the jump relations in the dynamics measure the
    // perturbed downstream flux against this value.
    double supersonic_flux(double s) const;

private:
    double clamp_plus(double x) const;
    double clamp_minus(double x) const;

    PressureLaw law_;
    BackgroundCharge charge_;
    TransonicSolution solution_;
    double J_ = 0.0, x0_ = 0.0, L_ = 0.0, dx_ = 0.0;
    double ext_behind_ = 0.0, ext_ahead_ = 0.0;
    SteadyProfile sub_ext_;  // subsonic branch on [x0 - ext_behind, x0]
    SteadyProfile sup_ext_;  // supersonic branch on [x0, x0 + ext_ahead]
    double h_defect_ = 0.0;
    double flux_defect_ = 0.0;
    BaseTables tables_;
    ShockResponseCoefficients response_;
};

// Coefficient tables and extensions for a fitted solution; the grid spans
// [x0, L] with opts.n_grid nodes.
BaseState build_base(const TransonicSolution& solution, const BackgroundCharge& charge,
                     const BaseStateOptions& opts = {});

}  // namespace tep
