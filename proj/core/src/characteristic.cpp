#include "tep/characteristic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "tep/errors.hpp"
#include "tep/numerics.hpp"

namespace tep {

namespace {

// Richardson-extrapolated Simpson value of f over one grid cell: the
// 2-panel and 4-panel composite rules combine to an O(h^7) cell error,
// far below the 1e-10 tabulation target at any supported resolution.
double cell_integral(const std::function<double(double)>& f, double a, double b) {
    const double m = 0.5 * (a + b);
    const double h = b - a;
    const double fa = f(a), fm = f(m), fb = f(b);
    const double s2 = h / 6.0 * (fa + 4.0 * fm + fb);
    const double f1 = f(a + 0.25 * h), f3 = f(a + 0.75 * h);
    const double s4 = h / 12.0 * (fa + 4.0 * f1 + 2.0 * fm + 4.0 * f3 + fb);
    return s4 + (s4 - s2) / 15.0;
}

}  // namespace

CharacteristicFrame characteristic_transform(const BaseState& base) {
    const auto& law = base.law();
    const auto& xs = base.tables().xs;
    const int nn = base.n();

    CharacteristicFrame fr;
    fr.xs = xs;
    fr.zeta.resize(nn);
    fr.tau.resize(nn);
    fr.M.resize(nn);
    fr.N.resize(nn);

    // Half sum/difference of the reciprocal characteristic speeds u +- c.
    auto zeta_density = [&](double x) {
        const double u = base.u_plus(x);
        const double c = law.sound_speed(base.rho_plus(x));
        return 0.5 * (1.0 / (u + c) - 1.0 / (u - c));
    };
    auto tau_density = [&](double x) {
        const double u = base.u_plus(x);
        const double c = law.sound_speed(base.rho_plus(x));
        return 0.5 * (1.0 / (u + c) + 1.0 / (u - c));
    };

    fr.zeta[0] = 0.0;
    fr.tau[0] = 0.0;
    for (int i = 1; i < nn; ++i) {
        fr.zeta[i] = fr.zeta[i - 1] + cell_integral(zeta_density, xs[i - 1], xs[i]);
        fr.tau[i] = fr.tau[i - 1] + cell_integral(tau_density, xs[i - 1], xs[i]);
    }
    fr.zeta_L = fr.zeta.back();

    for (int i = 0; i < nn; ++i) {
        const double rho = base.rho_plus(xs[i]);
        const double kap = base.kappa(xs[i]);
        const double dp = law.dp(rho);
        const double c = law.sound_speed(rho);
        fr.M[i] = kap * (2.0 * dp - law.ddp(rho) * rho) / (2.0 * c * c * c * rho) *
                  base.drho_plus(xs[i]);
        fr.N[i] = kap * rho / dp;
    }

    // Smallest integer tilt passing both positivity conditions with the
    // coefficients inflated by 10%.
    for (int k = 1;; ++k) {
        double m1 = std::numeric_limits<double>::infinity();
        double m2 = std::numeric_limits<double>::infinity();
        for (int i = 0; i < nn; ++i) {
            m1 = std::min(m1, 2.0 * k - 1.1 * fr.M[i]);
            m2 = std::min(m2, k * k - 1.1 * (k * fr.M[i] + fr.N[i]));
        }
        if (m1 > 0.0 && m2 > 0.0) {
            fr.k = k;
            fr.margin_first = m1;
            fr.margin_second = m2;
            break;
        }
    }
    return fr;
}

namespace {

// Trapezoid of sampled series y(t) over [lo, hi] with linear interpolation
// at the cut points. Samples must be increasing in t.
double integrate_series(const std::vector<double>& t, const std::vector<double>& y,
                        double lo, double hi) {
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        const double a = t[k], b = t[k + 1];
        if (b <= lo || a >= hi) continue;
        const double ca = std::max(a, lo), cb = std::min(b, hi);
        const double w = (b > a) ? 1.0 / (b - a) : 0.0;
        const double ya = y[k] + (y[k + 1] - y[k]) * (ca - a) * w;
        const double yb = y[k] + (y[k + 1] - y[k]) * (cb - a) * w;
        sum += 0.5 * (ya + yb) * (cb - ca);
    }
    return sum;
}

}  // namespace

ObservabilityReport observability_check(const BaseState& base, const LinearRun& run,
                                        double T_obs) {
    const auto& led = run.ledger;
    if (led.times.size() < 2) throw UsageError("observability: run has no samples");
    if (!(T_obs > 0.0)) throw UsageError("observability: horizon must be positive");
    if (T_obs > led.times.back() * (1.0 + 1e-12)) {
        throw UsageError("observability: horizon " + std::to_string(T_obs) +
                         " exceeds the run length " + std::to_string(led.times.back()));
    }

    const CharacteristicFrame fr = characteristic_transform(base);
    if (T_obs < 2.0 * fr.zeta_L) {
        throw UsageError("observability: horizon " + std::to_string(T_obs) +
                         " is below two channel crossings (" +
                         std::to_string(2.0 * fr.zeta_L) + ")");
    }

    ObservabilityReport rep;
    rep.T = T_obs;
    rep.zeta_L = fr.zeta_L;
    rep.window_lo = 0.5 * T_obs - T_obs / 8.0;
    rep.window_hi = 0.5 * T_obs + T_obs / 8.0;

    const std::size_t ns = led.times.size();
    std::vector<double> trace(ns);
    double peak = 0.0;
    for (std::size_t k = 0; k < ns; ++k) {
        trace[k] = led.boundary_Yt[k] * led.boundary_Yt[k] +
                   led.boundary_Yx[k] * led.boundary_Yx[k] +
                   led.boundary_Y[k] * led.boundary_Y[k];
        peak = std::max({peak, trace[k], led.phi[0][k]});
    }
    if (peak == 0.0) {
        rep.zero_data = true;
        rep.ratio = 1.0;
        return rep;
    }

    rep.lhs = integrate_series(led.times, trace, 0.0, T_obs);
    rep.rhs = integrate_series(led.times, led.phi[0], rep.window_lo, rep.window_hi);
    rep.ratio = (rep.rhs > 0.0) ? rep.lhs / rep.rhs
                                : std::numeric_limits<double>::infinity();
    return rep;
}

}  // namespace tep
