#pragma once

// Jump relations across a shock: the steady conjugate-state map, the speed
// of an unsteady jump from the mass condition, and the Lax geometric
// entropy test.

#include "tep/pressure_law.hpp"

namespace tep {

// States on either side of a jump together with its propagation speed.
// Upstream is the supersonic (left) side for the shocks of interest.
struct JumpPair {
    FlowPoint upstream;
    FlowPoint downstream;
    double shock_speed = 0.0;
};

// Momentum flux p(rho) + J^2/rho carried by a steady stream.
double momentum_flux(const PressureLaw& law, double J, double rho);

// Subsonic density carrying the same momentum flux as `rho_sup`:
// p(s) + J^2/s = p(rho_sup) + J^2/rho_sup with s > rho_s. The bracket
// starts at (rho_s, 2 rho_s] and doubles until the flux excess changes
// sign. Residual certified to 1e-12 relative to the flux.
double conjugate_state(const PressureLaw& law, double J, double rho_sup);

// d(conjugate)/d(rho) = (p'(rho) - J^2/rho^2) / (p'(s) - J^2/s^2),
// negative for strictly supersonic rho.
double conjugate_derivative(const PressureLaw& law, double J, double rho_sup);

struct ShockSpeedResult {
    double speed = 0.0;              // [rho u] / [rho]
    double momentum_mismatch = 0.0;  // [p + rho u^2] - [rho u] * speed
};

// Speed of the jump between two states from the mass condition, plus the
// residual of the momentum condition at that speed. A genuine shock of the
// system has mismatch ~ 0; a generic state pair does not.
ShockSpeedResult shock_speed(const PressureLaw& law, const FlowPoint& left,
                             const FlowPoint& right);

// Lax geometric entropy condition for the second characteristic family:
// (u - c)_left > speed > (u - c)_right and (u + c)_right > speed, with
// strict inequalities and no tolerance.
bool is_entropy_admissible(const PressureLaw& law, const FlowPoint& left, const FlowPoint& right,
                           double speed);

// Steady transonic jump at fixed position: downstream density from the
// conjugate map, field continuous across the jump.
JumpPair steady_jump(const PressureLaw& law, double J, const FlowPoint& upstream);

}  // namespace tep
