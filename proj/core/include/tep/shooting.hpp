#pragma once

// Exponentially growing modes Y = e^{lambda t} Z of the linearized dynamics,
// which exist when the base field at the shock is strongly negative. The
// substitution turns the linearized wave equation into a second-order ODE in
// x with a Robin initial slope at the shock; an unstable mode is a growth
// rate lambda whose shot profile lands with Z_x(L) = 0. The mode finder
// scans the growth-rate bracket for a terminal-slope sign change and
// bisects; the length finder realizes a requested negative shock field via
// the inlet field strength and then picks a domain length admitting a
// converged mode.

#include <utility>
#include <vector>

#include "tep/base_state.hpp"

namespace tep {

struct ShootingResult {
    double lambda = 0.0;
    double alpha = 1.0;          // normalization Z(x0) = alpha > 0
    std::vector<double> xs, Z, Zx;
    double terminal_slope = 0.0;  // Z_x at the last sample
    double residual = 0.0;        // relative sup-norm defect on a doubled grid
    bool converged = false;
};

struct ShootOptions {
    double shoot_tol = 1e-8;  // converged when |Z_x(L)| <= shoot_tol * alpha
    int scan_points = 128;    // bracket subdivisions scanned before bisection
    int n_samples = 0;        // profile samples; 0 means the base grid nodes
    double ode_tol = 1e-10;
};

// Integrates the mode ODE
//   kappa Z'' + (kappa' - 2 u lambda - E) Z' - (lambda^2 + 2 lambda u' + rho) Z = 0
// on [x0, L] with Z(x0) = alpha and the shock-coupled slope
//   Z'(x0) = (E(x0) + 2 u(x0) lambda) / kappa(x0) * alpha,
// all coefficients from the subsonic base tables. Throws StateInvalid if the
// profile leaves the subsonic regime (kappa <= 0) and UsageError for
// lambda < 0 or alpha <= 0.
ShootingResult shoot(const BaseState& base, double lambda, double alpha = 1.0,
                     const ShootOptions& opts = {});

struct SlopeScan {
    std::vector<double> lambdas;
    std::vector<double> slopes;  // terminal slope per growth rate
};

// Terminal slopes on an even growth-rate grid over [bracket.first,
// bracket.second]; n_points subdivisions, so n_points + 1 shots. Shots run
// concurrently.
SlopeScan scan_terminal_slopes(const BaseState& base, std::pair<double, double> bracket,
                               int n_points, const ShootOptions& opts = {});

// Relative sup-norm of the mode equation residual when the profile is
// re-integrated at doubled sampling density and the second derivative is
// recovered from the slope samples by finite differences.
double eigen_residual(const BaseState& base, const ShootingResult& mode,
                      const ShootOptions& opts = {});

// Scans the bracket for a terminal-slope sign change and bisects it down to
// |Z_x(L)| <= shoot_tol * alpha. No sign change returns the scan's smallest
// terminal slope with converged = false: the stable regime's report.
ShootingResult find_unstable_mode(const BaseState& base, std::pair<double, double> bracket,
                                  const ShootOptions& opts = {});

// Same with the natural bracket (0, |E(x0)| / u(x0)); the upper endpoint is
// where the initial slope has the sign opposite to its lambda = 0 value in
// the unstable regime.
ShootingResult find_unstable_mode(const BaseState& base, const ShootOptions& opts = {});

struct UnstableLengthOptions {
    double x0 = 0.1;           // shock position of the constructed solution
    double L_cap = 2.0;        // never scan domains longer than this
    double breach_margin = 0.97;  // keep this fraction of the span to a sonic breach
    int n_lengths = 16;        // candidate lengths below the guaranteed one
    double realize_tol = 1e-11;  // |E(x0) - target| after the inlet solve
    double residual_tol = 1e-6;  // eigen-residual a candidate mode must meet
    ShootOptions shoot;
    BaseStateOptions base;
};

struct UnstableLengthResult {
    bool found = false;
    TransonicSolution solution;  // transonic shock solution on [0, L]
    double L = 0.0;
    double E_at_shock = 0.0;   // realized field at the shock (the target)
    double inlet_field = 0.0;  // field strength at x = 0 realizing it
    double lambda_cap = 0.0;   // bracket top |E(x0)| / u(x0)
    double scan_lo = 0.0;      // length range examined
    double scan_hi = 0.0;
    ShootingResult mode;       // converged mode on [x0, L] when found
};

// Builds a transonic shock solution whose subsonic field at the shock equals
// target_E_at_shock (< 0, strongly negative for instability): the inlet
// field strength is solved for by a secant iteration on the supersonic
// branch, the subsonic branch is continued until a sonic breach or L_cap
// caps the domain, and candidate lengths are scanned from the longest one on
// which both extreme shots keep their slope sign (where a sign change over
// the bracket is guaranteed) downward until a converged mode appears.
UnstableLengthResult find_unstable_length(const PressureLaw& law, double J,
                                          const BackgroundCharge& b, double rho_l,
                                          double target_E_at_shock,
                                          const UnstableLengthOptions& opts = {});

}  // namespace tep
