#pragma once

// Steady field system away from shocks:
//   rho' = rho E / (p'(rho) - J^2/rho^2),   E' = rho - b(x).
// The denominator vanishes at the sonic density, so integration carries a
// guard band and refuses to approach the singularity.

#include <cstddef>
#include <vector>

#include "tep/charge.hpp"
#include "tep/numerics.hpp"
#include "tep/pressure_law.hpp"

namespace tep {

struct SteadyOptions {
    double tol = 1e-10;       // ODE local error tolerance
    double tol_sonic = 1e-8;  // guard: stop when |p'(rho) - J^2/rho^2| < tol_sonic * p'(rho_s)
    int n_out = 513;          // output grid resolution (points, including ends)
};

struct SteadyDerivs {
    double drho_dx = 0.0;
    double dE_dx = 0.0;
};

// Right-hand side of the steady system with the sonic guard applied.
// `x` is only used to label a guard breach in the thrown error.
SteadyDerivs steady_rhs(const PressureLaw& law, double J, double b_at_x, const FlowPoint& point,
                        double x = 0.0, double tol_sonic = 1e-8);

// A steady (rho, E) branch sampled on an increasing grid, with the exact ODE
// derivatives stored alongside so evaluation between nodes is cubic Hermite.
class SteadyProfile {
public:
    SteadyProfile() = default;
    SteadyProfile(PressureLaw law, double J, Regime regime, std::vector<double> xs,
                  std::vector<double> rho, std::vector<double> E, std::vector<double> drho,
                  std::vector<double> dE);

    double x_min() const { return xs_.front(); }
    double x_max() const { return xs_.back(); }
    std::size_t size() const { return xs_.size(); }
    const std::vector<double>& xs() const { return xs_; }
    const std::vector<double>& rho() const { return rho_; }
    const std::vector<double>& E() const { return E_; }
    const std::vector<double>& drho() const { return drho_; }
    const std::vector<double>& dE() const { return dE_; }
    double J() const { return J_; }
    Regime regime() const { return regime_; }
    const PressureLaw& law() const { return law_; }

    double rho_at(double x) const { return rho_spline_.value(x); }
    double E_at(double x) const { return E_spline_.value(x); }
    double drho_at(double x) const { return rho_spline_.derivative(x); }
    double dE_at(double x) const { return E_spline_.derivative(x); }
    double u_at(double x) const { return J_ / rho_at(x); }
    FlowPoint at(double x) const { return FlowPoint{rho_at(x), E_at(x), J_}; }

    // max |E(end) - E(start) - integral of (rho - b)| discrepancy, trapezoid
    // on the stored grid; small for any correctly integrated profile.
    double poisson_residual(const BackgroundCharge& b) const;

private:
    PressureLaw law_;
    double J_ = 1.0;
    Regime regime_ = Regime::subsonic;
    std::vector<double> xs_, rho_, E_, drho_, dE_;
    HermiteSpline rho_spline_, E_spline_;
};

// Integrates the steady system from `from_x` to `to_x` (either direction;
// the stored grid is always ascending). Throws SonicBreach if the
// trajectory approaches the sonic band, StateInvalid on vacuum.
SteadyProfile integrate_steady(const PressureLaw& law, double J, const BackgroundCharge& b,
                               double from_x, double to_x, const FlowPoint& initial,
                               const SteadyOptions& opts = {});

struct PerturbationGrowth {
    double sup_dev = 0.0;  // sup |rho - rho_base|
    double c1_dev = 0.0;   // sup |rho' - rho_base'| with derivatives from the ODE
};

// Measures how far `perturbed` drifts from `base` in C^0 and in the
// derivative. Profiles must share grid, regime, law, and flux.
PerturbationGrowth perturbation_growth(const SteadyProfile& base, const SteadyProfile& perturbed);

}  // namespace tep
