#include "tep/base_state.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "tep/errors.hpp"

namespace tep {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// Integrates one branch away from the shock, halving the span whenever the
// sonic guard trips, so the extension reaches as far as the branch allows.
SteadyProfile extend_branch(const PressureLaw& law, double J, const BackgroundCharge& b,
                            double from_x, double direction, double span, double min_span,
                            const FlowPoint& initial, const SteadyOptions& opts,
                            double* achieved) {
    while (true) {
        try {
            SteadyProfile p = integrate_steady(law, J, b, from_x, from_x + direction * span,
                                               initial, opts);
            *achieved = span;
            return p;
        } catch (const SolverFailure&) {
            span *= 0.5;
            if (span < min_span) throw;
        }
    }
}

}  // namespace

BaseState::BaseState(const TransonicSolution& solution, const BackgroundCharge& charge,
                     const BaseStateOptions& opts)
    : law_(solution.right.law()),
      charge_(charge),
      solution_(solution),
      J_(solution.J),
      x0_(solution.x0),
      L_(solution.L()) {
    if (opts.n_grid < 16) {
        throw UsageError("base-state grid needs at least 16 nodes, got " +
                         std::to_string(opts.n_grid));
    }
    if (!(opts.extension_fraction > 0.0) || opts.extension_fraction > 1.0) {
        throw UsageError("extension fraction must lie in (0, 1], got " +
                         fmt(opts.extension_fraction));
    }
    const double room = std::min(x0_, L_ - x0_);
    if (!(room > 0.0)) {
        throw UsageError("shock at x0 = " + fmt(x0_) + " leaves no room on one side");
    }

    const double span0 = opts.extension_fraction * room;
    const FlowPoint sub_launch{solution_.right.rho().front(), solution_.right.E().front(), J_};
    const FlowPoint sup_launch{solution_.left.rho().back(), solution_.left.E().back(), J_};
    sub_ext_ = extend_branch(law_, J_, charge_, x0_, -1.0, span0, opts.min_extension, sub_launch,
                             opts.steady, &ext_behind_);
    sup_ext_ = extend_branch(law_, J_, charge_, x0_, +1.0, span0, opts.min_extension, sup_launch,
                             opts.steady, &ext_ahead_);

    h_defect_ = solution_.left.E().back() - solution_.right.E().front();
    {
        const double rp = solution_.right.rho().front();
        const double rm = solution_.left.rho().back();
        flux_defect_ = (law_.p(rp) + J_ * J_ / rp) - (law_.p(rm) + J_ * J_ / rm);
    }

    const int n = opts.n_grid;
    tables_.xs.resize(n);
    tables_.a01.resize(n);
    tables_.a11.resize(n);
    tables_.b0.resize(n);
    tables_.b1.resize(n);
    tables_.g.resize(n);
    dx_ = (L_ - x0_) / (n - 1);
    for (int i = 0; i < n; ++i) {
        const double x = (i == n - 1) ? L_ : x0_ + dx_ * i;
        const double rho = solution_.right.rho_at(x);
        const double E = solution_.right.E_at(x);
        const double kap = law_.dp(rho) - J_ * J_ / (rho * rho);
        const double drho = rho * E / kap;  // steady ODE, no differencing
        const double dkap = (law_.ddp(rho) + 2.0 * J_ * J_ / (rho * rho * rho)) * drho;
        tables_.xs[i] = x;
        tables_.a01[i] = J_ / rho;
        tables_.a11[i] = -kap;
        tables_.b0[i] = -2.0 * J_ * drho / (rho * rho);
        tables_.b1[i] = -dkap + E;
        tables_.g[i] = rho;
    }

    const double rp = solution_.right.rho().front();
    const double rm = solution_.left.rho().back();
    const double E0 = solution_.right.E().front();
    const double u = J_ / rp;
    const double kap0 = law_.dp(rp) - J_ * J_ / (rp * rp);
    response_.dA1_drho = -kap0 / (2.0 * u);
    response_.dA1_dshift = -(rp - rm) * E0 / (2.0 * u);
    response_.dA2_drho = -kap0 / (2.0 * u * (rp - rm));
    response_.dA2_dshift = -E0 / (2.0 * u);
    response_.dA3_dY = 1.0 / (rm - rp);
    response_.dA4_dYx = kap0 / (2.0 * u);
    response_.dA4_dY = -E0 / (2.0 * u);
    response_.d1_0 = 2.0 * u / kap0;
    response_.e1_0 = E0 / kap0;
}

// The stretch map between the computational and physical frames reproduces
// the interval ends only up to roundoff; absorb one-ulp overshoots so the
// branch splines are never asked for points outside their tables.
double BaseState::clamp_plus(double x) const {
    const double lo = x0_ - ext_behind_, hi = L_;
    const double slack = 1e-9 * (hi - lo);
    if (x > hi && x <= hi + slack) return hi;
    if (x < lo && x >= lo - slack) return lo;
    return x;
}

double BaseState::clamp_minus(double x) const {
    const double lo = solution_.left.x_min(), hi = x0_ + ext_ahead_;
    const double slack = 1e-9 * (hi - lo);
    if (x > hi && x <= hi + slack) return hi;
    if (x < lo && x >= lo - slack) return lo;
    return x;
}

double BaseState::rho_plus(double x) const {
    x = clamp_plus(x);
    return x < x0_ ? sub_ext_.rho_at(x) : solution_.right.rho_at(x);
}

double BaseState::E_plus(double x) const {
    x = clamp_plus(x);
    return x < x0_ ? sub_ext_.E_at(x) : solution_.right.E_at(x);
}

double BaseState::drho_plus(double x) const {
    const double rho = rho_plus(x);
    return rho * E_plus(x) / (law_.dp(rho) - J_ * J_ / (rho * rho));
}

double BaseState::kappa(double x) const {
    const double rho = rho_plus(x);
    return law_.dp(rho) - J_ * J_ / (rho * rho);
}

double BaseState::kappa_prime(double x) const {
    const double rho = rho_plus(x);
    return (law_.ddp(rho) + 2.0 * J_ * J_ / (rho * rho * rho)) * drho_plus(x);
}

double BaseState::rho_minus(double x) const {
    x = clamp_minus(x);
    return x <= x0_ ? solution_.left.rho_at(x) : sup_ext_.rho_at(x);
}

double BaseState::E_minus(double x) const {
    x = clamp_minus(x);
    return x <= x0_ ? solution_.left.E_at(x) : sup_ext_.E_at(x);
}

double BaseState::drho_minus(double x) const {
    const double rho = rho_minus(x);
    return rho * E_minus(x) / (law_.dp(rho) - J_ * J_ / (rho * rho));
}

double BaseState::h_shift(double sigma) const {
    if (sigma > ext_ahead_ || sigma < -ext_behind_) {
        throw StateInvalid("shock displacement " + fmt(sigma) +
                           " leaves the extended neighborhood [" + fmt(-ext_behind_) + ", " +
                           fmt(ext_ahead_) + "]");
    }
    const double x = x0_ + sigma;
    return E_minus(x) - E_plus(x) - h_defect_;
}

double BaseState::dh_shift(double sigma) const {
    const double x = x0_ + sigma;
    return rho_minus(x) - rho_plus(x);
}

double BaseState::ddh_shift(double sigma) const {
    const double x = x0_ + sigma;
    return drho_minus(x) - drho_plus(x);
}

double BaseState::sigma_from_boundary(double Y0, double guess) const {
    double sigma = guess;
    if (sigma > ext_ahead_ || sigma < -ext_behind_) sigma = 0.0;
    for (int it = 0; it < 60; ++it) {
        const double f = h_shift(sigma) - Y0;
        if (f == 0.0) return sigma;
        const double df = dh_shift(sigma);
        double next = sigma - f / df;
        if (next > ext_ahead_) next = ext_ahead_;
        if (next < -ext_behind_) next = -ext_behind_;
        const double move = std::abs(next - sigma);
        sigma = next;
        if (move <= 1e-15 * std::max(1.0, std::abs(sigma))) {
            const double res = h_shift(sigma) - Y0;
            if (std::abs(res) <= 1e-12 * std::max(1.0, std::abs(Y0))) return sigma;
        }
    }
    const double res = h_shift(sigma) - Y0;
    if (std::abs(res) <= 1e-10 * std::max(1.0, std::abs(Y0))) return sigma;
    throw StateInvalid("no shock displacement matches boundary value " + fmt(Y0) +
                       " inside the extended neighborhood");
}

double BaseState::flux_gap(double s) const {
    const double rp = rho_plus(s);
    const double rm = rho_minus(s);
    return (law_.p(rp) + J_ * J_ / rp) - (law_.p(rm) + J_ * J_ / rm) - flux_defect_;
}

double BaseState::supersonic_flux(double s) const {
    const double rm = rho_minus(s);
    return law_.p(rm) + J_ * J_ / rm + flux_defect_;
}

BaseState build_base(const TransonicSolution& solution, const BackgroundCharge& charge,
                     const BaseStateOptions& opts) {
    return BaseState(solution, charge, opts);
}

}  // namespace tep
