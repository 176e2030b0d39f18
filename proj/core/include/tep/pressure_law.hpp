#pragma once

// Equations of state for the barotropic gas: p(rho) with first and second
// derivatives, sound speed, the sonic density for a given mass flux, and
// flow-regime classification.

#include <string>

#include "tep/errors.hpp"

namespace tep {

enum class PressureKind { gamma_law, isothermal };

// Barotropic pressure law. `gamma_law` is p = k rho^gamma with gamma >= 1;
// `isothermal` is p = k rho. The admissibility assumptions are p' > 0 and
// p'' >= 0 for rho > 0 with p unbounded; the additional origin condition
// p'(0) = 0 fails for the isothermal law (and for gamma == 1), which is
// recorded in `relaxed_origin` so callers can restrict experiments that
// depend on it.
struct PressureLaw {
    PressureKind kind = PressureKind::gamma_law;
    double k = 1.0;
    double gamma = 2.0;       // ignored for isothermal
    bool relaxed_origin = false;

    static PressureLaw make_gamma(double k, double gamma);
    static PressureLaw make_isothermal(double k);

    double p(double rho) const;
    double dp(double rho) const;
    double ddp(double rho) const;
    double sound_speed(double rho) const;  // c = sqrt(p'(rho))

    std::string describe() const;
};

enum class Regime { supersonic, sonic, subsonic };

// A pointwise flow state. The velocity is slaved to the mass flux, u = J/rho.
struct FlowPoint {
    double rho = 1.0;  // density, positive
    double E = 0.0;    // electric field
    double J = 1.0;    // mass flux, positive and constant in x

    double u() const { return J / rho; }
};

// Unique density where the flow speed equals the sound speed:
// p'(rho_s) = J^2 / rho_s^2. Solved by a bracketed bisection-Newton on the
// strictly increasing map rho -> rho^2 p'(rho) - J^2; residual certified to
// 1e-12 * J^2.
double sonic_density(const PressureLaw& law, double J);

// Classifies a state relative to the sonic density with an absolute band
// half-width `tol_sonic`; pass a negative value to use the default
// 1e-8 * rho_s. Integrators stop inside the band rather than risk the
// coefficient singularity.
Regime regime(const PressureLaw& law, const FlowPoint& point, double tol_sonic = -1.0);

const char* regime_name(Regime r);

}  // namespace tep
