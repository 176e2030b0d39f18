#include "tep/steady.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tep {

SteadyDerivs steady_rhs(const PressureLaw& law, double J, double b_at_x, const FlowPoint& point,
                        double x, double tol_sonic) {
    if (!(point.rho > 0.0))
        throw StateInvalid("steady rhs: non-positive density at x = " + std::to_string(x));
    const double rho_s = sonic_density(law, J);
    const double denom = law.dp(point.rho) - (J * J) / (point.rho * point.rho);
    const double guard = tol_sonic * law.dp(rho_s);
    if (std::abs(denom) < guard)
        throw SonicBreach("steady rhs: sonic band entered at x = " + std::to_string(x), x);
    return SteadyDerivs{point.rho * point.E / denom, point.rho - b_at_x};
}

SteadyProfile::SteadyProfile(PressureLaw law, double J, Regime regime, std::vector<double> xs,
                             std::vector<double> rho, std::vector<double> E,
                             std::vector<double> drho, std::vector<double> dE)
    : law_(law),
      J_(J),
      regime_(regime),
      xs_(std::move(xs)),
      rho_(std::move(rho)),
      E_(std::move(E)),
      drho_(std::move(drho)),
      dE_(std::move(dE)) {
    if (xs_.size() < 2 || rho_.size() != xs_.size() || E_.size() != xs_.size() ||
        drho_.size() != xs_.size() || dE_.size() != xs_.size())
        throw UsageError("steady profile: inconsistent sample arrays");
    rho_spline_ = HermiteSpline(xs_, rho_, drho_);
    E_spline_ = HermiteSpline(xs_, E_, dE_);
}

double SteadyProfile::poisson_residual(const BackgroundCharge& b) const {
    double worst = 0.0;
    double acc = 0.0;
    for (std::size_t i = 1; i < xs_.size(); ++i) {
        const double dx = xs_[i] - xs_[i - 1];
        acc += 0.5 * dx * ((rho_[i - 1] - b(xs_[i - 1])) + (rho_[i] - b(xs_[i])));
        worst = std::max(worst, std::abs(E_[i] - E_[0] - acc));
    }
    return worst;
}

SteadyProfile integrate_steady(const PressureLaw& law, double J, const BackgroundCharge& b,
                               double from_x, double to_x, const FlowPoint& initial,
                               const SteadyOptions& opts) {
    if (from_x == to_x) throw UsageError("steady integrate: empty interval");
    if (initial.J != J) throw UsageError("steady integrate: initial point carries a different flux");
    const Regime reg = regime(law, initial);
    if (reg == Regime::sonic)
        throw SonicBreach("steady integrate: initial point is sonic", from_x);

    const int n = std::max(opts.n_out, 2);
    std::vector<double> grid(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        grid[static_cast<std::size_t>(i)] = from_x + (to_x - from_x) * static_cast<double>(i) / (n - 1);
    grid.back() = to_x;

    std::vector<double> xs, rho, E, drho, dE;
    xs.reserve(grid.size());
    rho.reserve(grid.size());
    E.reserve(grid.size());
    drho.reserve(grid.size());
    dE.reserve(grid.size());

    // The sonic guard threshold is fixed for the whole trajectory; resolving
    // rho_s once keeps the rhs cheap inside the adaptive loop.
    const double rho_s = sonic_density(law, J);
    const double guard = opts.tol_sonic * law.dp(rho_s);
    const double x_lo = std::min(from_x, to_x), x_hi = std::max(from_x, to_x);
    auto derivs = [&](double x, const std::array<double, 2>& y) -> SteadyDerivs {
        if (!(y[0] > 0.0))
            throw StateInvalid("steady integrate: density lost positivity at x = " +
                               std::to_string(x));
        const double denom = law.dp(y[0]) - (J * J) / (y[0] * y[0]);
        if (std::abs(denom) < guard)
            throw SonicBreach("steady integrate: sonic band entered at x = " + std::to_string(x),
                              x);
        return SteadyDerivs{y[0] * y[1] / denom, y[0] - b(std::clamp(x, x_lo, x_hi))};
    };
    double last_x = from_x;
    double last_rho = initial.rho;
    auto f = [&](double x, const std::array<double, 2>& y) -> std::array<double, 2> {
        last_x = x;
        last_rho = y[0];
        const SteadyDerivs d = derivs(x, y);
        return {d.drho_dx, d.dE_dx};
    };
    auto observe = [&](double x, const std::array<double, 2>& y) {
        const SteadyDerivs d = derivs(x, y);
        xs.push_back(x);
        rho.push_back(y[0]);
        E.push_back(y[1]);
        drho.push_back(d.drho_dx);
        dE.push_back(d.dE_dx);
    };

    OdeOptions ode;
    ode.tol = opts.tol;
    ode.h_init = std::min(1e-4, 1e-2 * std::abs(to_x - from_x));
    try {
        integrate_ode<2>(f, from_x, to_x, {initial.rho, initial.E}, grid, observe, ode);
    } catch (const SonicBreach&) {
        throw;
    } catch (const SolverFailure& failure) {
        // A step-size collapse right next to the sonic band is the square
        // root blow-up of the trajectory, not a controller defect; report
        // it as a breach so callers can back away.
        const double denom = law.dp(last_rho) - (J * J) / (last_rho * last_rho);
        if (std::abs(denom) < 1e-3 * law.dp(rho_s))
            throw SonicBreach("steady integrate: trajectory stalled against the sonic band "
                              "at x = " + std::to_string(last_x), last_x);
        throw failure;
    }

    if (to_x < from_x) {
        std::reverse(xs.begin(), xs.end());
        std::reverse(rho.begin(), rho.end());
        std::reverse(E.begin(), E.end());
        std::reverse(drho.begin(), drho.end());
        std::reverse(dE.begin(), dE.end());
    }

    SteadyProfile out(law, J, reg, std::move(xs), std::move(rho), std::move(E), std::move(drho),
                      std::move(dE));
    for (std::size_t i = 0; i < out.size(); ++i) {
        const Regime ri = regime(law, FlowPoint{out.rho()[i], out.E()[i], J});
        if (ri != reg)
            throw SonicBreach("steady integrate: regime lost at x = " +
                                  std::to_string(out.xs()[i]),
                              out.xs()[i]);
    }
    return out;
}

PerturbationGrowth perturbation_growth(const SteadyProfile& base, const SteadyProfile& perturbed) {
    if (base.size() != perturbed.size())
        throw UsageError("perturbation growth: profiles use different grids");
    for (std::size_t i = 0; i < base.size(); ++i)
        if (std::abs(base.xs()[i] - perturbed.xs()[i]) > 1e-12 * (1.0 + std::abs(base.xs()[i])))
            throw UsageError("perturbation growth: profiles use different grids");
    if (base.regime() != perturbed.regime())
        throw UsageError("perturbation growth: profiles have different regimes");
    if (base.J() != perturbed.J())
        throw UsageError("perturbation growth: profiles carry different fluxes");
    if (base.law().kind != perturbed.law().kind || base.law().k != perturbed.law().k ||
        base.law().gamma != perturbed.law().gamma)
        throw UsageError("perturbation growth: profiles use different pressure laws");

    PerturbationGrowth out;
    for (std::size_t i = 0; i < base.size(); ++i) {
        out.sup_dev = std::max(out.sup_dev, std::abs(perturbed.rho()[i] - base.rho()[i]));
        out.c1_dev = std::max(out.c1_dev, std::abs(perturbed.drho()[i] - base.drho()[i]));
    }
    return out;
}

}  // namespace tep
