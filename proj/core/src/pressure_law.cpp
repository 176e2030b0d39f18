#include "tep/pressure_law.hpp"

#include <cmath>

#include "tep/numerics.hpp"

namespace tep {

PressureLaw PressureLaw::make_gamma(double k, double gamma) {
    if (!(k > 0.0)) throw DomainError("gamma_law pressure needs k > 0");
    if (!(gamma >= 1.0)) throw DomainError("gamma_law pressure needs gamma >= 1");
    PressureLaw law;
    law.kind = PressureKind::gamma_law;
    law.k = k;
    law.gamma = gamma;
    law.relaxed_origin = (gamma == 1.0);  // p'(0) = k != 0 in that case
    return law;
}

PressureLaw PressureLaw::make_isothermal(double k) {
    if (!(k > 0.0)) throw DomainError("isothermal pressure needs k > 0");
    PressureLaw law;
    law.kind = PressureKind::isothermal;
    law.k = k;
    law.gamma = 1.0;
    law.relaxed_origin = true;
    return law;
}

double PressureLaw::p(double rho) const {
    if (kind == PressureKind::isothermal) return k * rho;
    return k * std::pow(rho, gamma);
}

double PressureLaw::dp(double rho) const {
    if (kind == PressureKind::isothermal) return k;
    return k * gamma * std::pow(rho, gamma - 1.0);
}

double PressureLaw::ddp(double rho) const {
    if (kind == PressureKind::isothermal) return 0.0;
    if (gamma == 1.0) return 0.0;
    return k * gamma * (gamma - 1.0) * std::pow(rho, gamma - 2.0);
}

double PressureLaw::sound_speed(double rho) const { return std::sqrt(dp(rho)); }

std::string PressureLaw::describe() const {
    if (kind == PressureKind::isothermal) return "isothermal(k=" + std::to_string(k) + ")";
    return "gamma_law(k=" + std::to_string(k) + ", gamma=" + std::to_string(gamma) + ")";
}

double sonic_density(const PressureLaw& law, double J) {
    if (!(J > 0.0)) throw DomainError("sonic_density needs J > 0");

    // rho^2 p'(rho) - J^2 is strictly increasing from 0 (at rho -> 0) to
    // infinity, so one sign change exists. Grow/shrink a bracket around an
    // initial guess, then polish with safeguarded Newton.
    auto f = [&](double rho) { return rho * rho * law.dp(rho) - J * J; };
    double hi = 1.0;
    while (f(hi) < 0.0) hi *= 2.0;
    double lo = hi * 0.5;
    while (f(lo) > 0.0) lo *= 0.5;

    auto f_df = [&](double rho) {
        const double val = f(rho);
        const double dval = 2.0 * rho * law.dp(rho) + rho * rho * law.ddp(rho);
        return std::pair<double, double>{val, dval};
    };
    RootOptions opts;
    opts.x_tol = 1e-15;
    opts.f_tol = 1e-13 * J * J;
    const double rho_s = newton_bisect(f_df, lo, hi, opts);
    if (std::abs(f(rho_s)) > 1e-12 * J * J)
        throw SolverFailure("sonic_density: residual above certification threshold; bracket [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return rho_s;
}

Regime regime(const PressureLaw& law, const FlowPoint& point, double tol_sonic) {
    if (!(point.rho > 0.0)) throw DomainError("regime: density must be positive");
    const double rho_s = sonic_density(law, point.J);
    const double tol = (tol_sonic < 0.0) ? 1e-8 * rho_s : tol_sonic;
    if (point.rho < rho_s - tol) return Regime::supersonic;
    if (point.rho > rho_s + tol) return Regime::subsonic;
    return Regime::sonic;
}

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::supersonic: return "supersonic";
        case Regime::sonic: return "sonic";
        case Regime::subsonic: return "subsonic";
    }
    return "?";
}

}  // namespace tep
