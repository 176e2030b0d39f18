#include "tep/jump.hpp"

#include <cmath>

#include "tep/numerics.hpp"

namespace tep {

double momentum_flux(const PressureLaw& law, double J, double rho) {
    return law.p(rho) + J * J / rho;
}

double conjugate_state(const PressureLaw& law, double J, double rho_sup) {
    if (!(rho_sup > 0.0)) throw DomainError("conjugate state: density must be positive");
    const double rho_s = sonic_density(law, J);
    if (rho_sup > rho_s)
        throw DomainError("conjugate state: input density exceeds the sonic density");
    if (rho_sup == rho_s) return rho_s;

    const double target = momentum_flux(law, J, rho_sup);
    auto excess = [&](double rho) { return momentum_flux(law, J, rho) - target; };

    // The flux decreases to its minimum at rho_s then increases without
    // bound, so excess(rho_s) < 0 and a doubling upper bound must cross.
    double hi = 2.0 * rho_s;
    int doublings = 0;
    while (excess(hi) < 0.0) {
        hi *= 2.0;
        if (++doublings > 600) throw SolverFailure("conjugate state: bracket growth failed");
    }

    auto f_df = [&](double rho) {
        return std::pair<double, double>(excess(rho), law.dp(rho) - J * J / (rho * rho));
    };
    RootOptions ropts;
    ropts.x_tol = 1e-15;
    ropts.f_tol = 1e-13 * std::abs(target);
    const double s = newton_bisect(f_df, rho_s, hi, ropts);
    if (std::abs(excess(s)) > 1e-12 * std::abs(target))
        throw SolverFailure("conjugate state: flux residual above certification threshold");
    return s;
}

double conjugate_derivative(const PressureLaw& law, double J, double rho_sup) {
    if (regime(law, FlowPoint{rho_sup, 0.0, J}) != Regime::supersonic)
        throw SonicBreach("conjugate derivative: input must be strictly supersonic", rho_sup);
    const double s = conjugate_state(law, J, rho_sup);
    const double num = law.dp(rho_sup) - J * J / (rho_sup * rho_sup);
    const double den = law.dp(s) - J * J / (s * s);
    return num / den;
}

ShockSpeedResult shock_speed(const PressureLaw& law, const FlowPoint& left,
                             const FlowPoint& right) {
    if (left.rho == right.rho)
        throw DomainError("shock speed: equal densities give a degenerate jump");
    const double m_l = left.rho * left.u(), m_r = right.rho * right.u();
    ShockSpeedResult out;
    out.speed = (m_r - m_l) / (right.rho - left.rho);
    const double flux_l = law.p(left.rho) + left.rho * left.u() * left.u();
    const double flux_r = law.p(right.rho) + right.rho * right.u() * right.u();
    out.momentum_mismatch = (flux_r - flux_l) - (m_r - m_l) * out.speed;
    return out;
}

bool is_entropy_admissible(const PressureLaw& law, const FlowPoint& left, const FlowPoint& right,
                           double speed) {
    const double cl = law.sound_speed(left.rho);
    const double cr = law.sound_speed(right.rho);
    return (left.u() - cl > speed) && (speed > right.u() - cr) && (right.u() + cr > speed);
}

JumpPair steady_jump(const PressureLaw& law, double J, const FlowPoint& upstream) {
    if (upstream.J != J) throw UsageError("steady jump: upstream flux disagrees with J");
    JumpPair pair;
    pair.upstream = upstream;
    pair.downstream = FlowPoint{conjugate_state(law, J, upstream.rho), upstream.E, J};
    pair.shock_speed = 0.0;
    return pair;
}

}  // namespace tep
