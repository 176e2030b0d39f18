#pragma once

// Linearized dynamics of the subsonic potential about the steady state:
// frozen-coefficient wave operator on the fixed interval [x0, L] with the
// impedance relation Y_x = d1_0 Y_t + e1_0 Y at x0 and a Neumann outlet.
// Alongside the evolution the module assembles the energy ledger (the
// quadratic functionals phi_m, the boundary dissipation D0, and the discrete
// residual of the identity phi_0(t) + D0(t) = phi_0(0)) and fits contraction
// windows and the exponential decay rate.

#include <cstddef>
#include <vector>

#include "tep/base_state.hpp"

namespace tep {

struct LinearOptions {
    double cfl = 0.8;
    // Explicit time step; 0 derives the step from the CFL fraction. A value
    // above the stability bound is rejected.
    double dt = 0.0;
    int m_max = 2;  // highest time-derivative order tracked in the ledger
    // Same role and scaling as the nonlinear filter, applied to the velocity
    // equation only so the kinematic pair (Y, Yt) stays exact.
    double dissipation = 0.02;
    int state_stride = 0;  // record every k-th state; 0 keeps only endpoints
};

struct LinearState {
    double t = 0.0;
    std::vector<double> Y;
    std::vector<double> Yt;
};

struct EnergyLedger {
    std::vector<double> times;
    // phi[m][k]: boundary-weighted quadratic functional of the m-th time
    // derivative at times[k], m = 0..m_max
    std::vector<std::vector<double>> phi;
    std::vector<double> D0_cumulative;      // boundary dissipation up to t
    std::vector<double> identity_residual;  // phi_0(t) + D0(t) - phi_0(0)
    std::vector<double> boundary_Y;         // traces at x0 for observability
    std::vector<double> boundary_Yt;
    std::vector<double> boundary_Yx;
    std::vector<double> outlet_Yt;  // trace at L entering D0

    double phi_hat1(std::size_t k) const { return phi[0][k] + phi[1][k]; }
};

class LinearSim {
public:
    explicit LinearSim(const BaseState& base, const LinearOptions& opts = {});

    const BaseState& base() const { return *base_; }
    int n() const { return base_->n(); }
    double dx() const { return base_->dx(); }

    // Largest admissible step under the configured CFL fraction.
    double max_dt() const { return opts_.cfl * dx() / v_fast_; }

    // Frozen-coefficient acceleration: A = d/dx(kappa dY/dx - beta Yt)
    // - E Y_x - rho Y with the implicit shock-side closure.
    void accelerate(const std::vector<double>& Y, const std::vector<double>& V,
                    std::vector<double>& A) const;

    LinearState step(const LinearState& s, double dt) const;

    // Adjusts the outermost nodes so the one-sided slopes satisfy the
    // boundary relations; both closures are linear and solved directly.
    LinearState project(LinearState s) const;

    // phi_m for m = 0..m_max via the time-derivative chain of the state.
    std::vector<double> phi_chain(const LinearState& s) const;

    // Integrand of D0 at time t: twice the weighted squared traces of Yt.
    double boundary_dissipation_rate(const LinearState& s) const;

    // Boundary slope at x0 implied by the impedance relation.
    double boundary_slope(const LinearState& s) const;

private:
    const BaseState* base_;
    LinearOptions opts_;
    std::vector<double> kap_mid_, beta_mid_;        // midpoint coefficients
    std::vector<double> kap_, beta_, bp_, E_, rho_;  // node coefficients
    double d1_ = 0.0, e1_ = 0.0;  // impedance coefficients at x0
    double kapp0_ = 0.0;          // kappa'(x0)
    double v_fast_ = 0.0;
};

struct LinearRun {
    std::vector<LinearState> states;
    LinearState final_state;
    EnergyLedger ledger;
    double dt = 0.0;
    int steps = 0;
};

// Projects (h1, h2), marches to T, and assembles the ledger with one row per
// step; D0 is accumulated by the trapezoid rule at step resolution.
LinearRun evolve_linear(const BaseState& base, const std::vector<double>& h1,
                        const std::vector<double>& h2, double T,
                        const LinearOptions& opts = {});

struct DecayReport {
    // Log-slope of the tail of phi_hat_1 = phi_0 + phi_1 (the quadratic
    // functional itself; amplitudes decay at half this rate).
    double lambda0 = 0.0;
    double r_squared = 0.0;
    double window = 0.0;          // contraction window length
    std::vector<double> alpha0;   // per-window ratios of phi_hat_1
    bool unstable = false;
};

// Fits the decay rate and per-window contraction ratios from a ledger. The
// window is the smallest sample multiple whose tail ratios are all below one
// and mutually consistent, with at least five windows spanned.
DecayReport fit_decay_rate(const EnergyLedger& ledger);

}  // namespace tep
