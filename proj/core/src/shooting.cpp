#include "tep/shooting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <exception>
#include <thread>
#include <utility>
#include <vector>

#include "tep/errors.hpp"
#include "tep/jump.hpp"
#include "tep/numerics.hpp"
#include "tep/steady.hpp"

namespace tep {

ShootingResult shoot(const BaseState& base, double lambda, double alpha,
                     const ShootOptions& opts) {
    if (lambda < 0.0) throw UsageError("shoot: growth rate must be nonnegative");
    if (!(alpha > 0.0)) throw UsageError("shoot: normalization must be positive");
    const double x0 = base.x0(), L = base.L();

    std::vector<double> pts;
    if (opts.n_samples > 0) {
        if (opts.n_samples < 2) throw UsageError("shoot: need at least two samples");
        pts.resize(opts.n_samples);
        for (int i = 0; i < opts.n_samples; ++i)
            pts[i] = x0 + (L - x0) * i / (opts.n_samples - 1.0);
        pts.back() = L;
    } else {
        pts = base.tables().xs;
    }

    auto rhs = [&](double x, const std::array<double, 2>& y) -> std::array<double, 2> {
        const double kap = base.kappa(x);
        if (kap <= 0.0) throw StateInvalid("shoot: base profile leaves the subsonic regime");
        const double rho = base.rho_plus(x);
        const double du = -base.J() * base.drho_plus(x) / (rho * rho);
        const double drift = base.kappa_prime(x) - 2.0 * base.u_plus(x) * lambda - base.E_plus(x);
        const double load = lambda * lambda + 2.0 * lambda * du + rho;
        return {y[1], (load * y[0] - drift * y[1]) / kap};
    };

    ShootingResult out;
    out.lambda = lambda;
    out.alpha = alpha;
    out.xs.reserve(pts.size());
    out.Z.reserve(pts.size());
    out.Zx.reserve(pts.size());

    // Shock-coupled slope: the boundary condition of the linearized dynamics
    // with d/dt replaced by lambda.
    std::array<double, 2> y{alpha,
                            (base.E_plus(x0) + 2.0 * base.u_plus(x0) * lambda) /
                                base.kappa(x0) * alpha};
    OdeOptions oo;
    oo.tol = opts.ode_tol;
    integrate_ode<2>(
        rhs, x0, L, y, pts,
        [&](double x, const std::array<double, 2>& v) {
            out.xs.push_back(x);
            out.Z.push_back(v[0]);
            out.Zx.push_back(v[1]);
        },
        oo);
    out.terminal_slope = out.Zx.back();
    return out;
}

SlopeScan scan_terminal_slopes(const BaseState& base, std::pair<double, double> bracket,
                               int n_points, const ShootOptions& opts) {
    if (n_points < 1) throw UsageError("scan_terminal_slopes: need at least one subdivision");
    if (!(bracket.first >= 0.0) || !(bracket.second > bracket.first))
        throw UsageError("scan_terminal_slopes: bracket must satisfy 0 <= lo < hi");

    SlopeScan scan;
    scan.lambdas.resize(n_points + 1);
    scan.slopes.assign(n_points + 1, 0.0);
    for (int i = 0; i <= n_points; ++i)
        scan.lambdas[i] = bracket.first + (bracket.second - bracket.first) * i / n_points;

    const int workers = static_cast<int>(
        std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()), 8));
    if (workers <= 1 || static_cast<int>(scan.lambdas.size()) < 2 * workers) {
        for (std::size_t i = 0; i < scan.lambdas.size(); ++i)
            scan.slopes[i] = shoot(base, scan.lambdas[i], 1.0, opts).terminal_slope;
        return scan;
    }

    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < scan.lambdas.size(); i += workers)
                    scan.slopes[i] = shoot(base, scan.lambdas[i], 1.0, opts).terminal_slope;
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return scan;
}

double eigen_residual(const BaseState& base, const ShootingResult& mode,
                      const ShootOptions& opts) {
    if (mode.xs.size() < 3) throw UsageError("eigen_residual: mode profile too short");

    ShootOptions dbl = opts;
    dbl.n_samples = static_cast<int>(2 * mode.xs.size() - 1);
    dbl.ode_tol = std::min(opts.ode_tol, 1e-12);
    const ShootingResult fine = shoot(base, mode.lambda, mode.alpha, dbl);

    const int m = static_cast<int>(fine.xs.size());
    const double h = (fine.xs.back() - fine.xs.front()) / (m - 1);
    double worst = 0.0, scale = 0.0;
    for (int i = 2; i + 2 < m; ++i) {
        // Second derivative from the sampled slopes; dividing by h only once
        // keeps the sample noise below the truncation budget.
        const double zpp = (fine.Zx[i - 2] - 8.0 * fine.Zx[i - 1] + 8.0 * fine.Zx[i + 1] -
                            fine.Zx[i + 2]) /
                           (12.0 * h);
        const double x = fine.xs[i];
        const double rho = base.rho_plus(x);
        const double du = -base.J() * base.drho_plus(x) / (rho * rho);
        const double drift =
            base.kappa_prime(x) - 2.0 * base.u_plus(x) * mode.lambda - base.E_plus(x);
        const double load = mode.lambda * mode.lambda + 2.0 * mode.lambda * du + rho;
        const double t1 = base.kappa(x) * zpp;
        const double t2 = drift * fine.Zx[i];
        const double t3 = load * fine.Z[i];
        worst = std::max(worst, std::abs(t1 + t2 - t3));
        scale = std::max({scale, std::abs(t1), std::abs(t2), std::abs(t3)});
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

ShootingResult find_unstable_mode(const BaseState& base, std::pair<double, double> bracket,
                                  const ShootOptions& opts) {
    const SlopeScan scan = scan_terminal_slopes(base, bracket, opts.scan_points, opts);

    int j = -1;
    for (std::size_t i = 0; i + 1 < scan.slopes.size(); ++i) {
        const double a = scan.slopes[i], c = scan.slopes[i + 1];
        if (a * c <= 0.0 && (a != 0.0 || c != 0.0)) {
            j = static_cast<int>(i);
            break;
        }
    }

    if (j < 0) {
        // Stable regime: no terminal-slope sign change anywhere on the
        // bracket. Report the closest approach for diagnostics.
        std::size_t best = 0;
        for (std::size_t i = 1; i < scan.slopes.size(); ++i)
            if (std::abs(scan.slopes[i]) < std::abs(scan.slopes[best])) best = i;
        ShootingResult out = shoot(base, scan.lambdas[best], 1.0, opts);
        out.converged = std::abs(out.terminal_slope) <= opts.shoot_tol * out.alpha;
        return out;
    }

    RootOptions ro;
    ro.f_tol = opts.shoot_tol;
    ro.x_tol = 1e-15;
    ro.max_iters = 200;
    const double lam =
        bisect([&](double l) { return shoot(base, l, 1.0, opts).terminal_slope; },
               scan.lambdas[j], scan.lambdas[j + 1], ro);

    ShootingResult out = shoot(base, lam, 1.0, opts);
    out.converged = std::abs(out.terminal_slope) <= opts.shoot_tol * out.alpha;
    out.residual = eigen_residual(base, out, opts);
    return out;
}

ShootingResult find_unstable_mode(const BaseState& base, const ShootOptions& opts) {
    const double cap = std::abs(base.E_plus(base.x0())) / base.u_plus(base.x0());
    if (!(cap > 0.0))
        throw UsageError("find_unstable_mode: field at the shock vanishes, no bracket");
    return find_unstable_mode(base, {0.0, cap}, opts);
}

UnstableLengthResult find_unstable_length(const PressureLaw& law, double J,
                                          const BackgroundCharge& b, double rho_l,
                                          double target_E_at_shock,
                                          const UnstableLengthOptions& opts) {
    if (!(target_E_at_shock < 0.0))
        throw UsageError("find_unstable_length: target field at the shock must be negative");
    if (!(opts.x0 > 0.0) || !(opts.L_cap > opts.x0))
        throw UsageError("find_unstable_length: need 0 < x0 < L_cap");
    if (opts.n_lengths < 1) throw UsageError("find_unstable_length: need at least one length");

    const double x0 = opts.x0;
    SteadyOptions so;
    so.tol = 1e-12;
    so.n_out = 513;

    // Inlet field strength realizing the requested field at the shock; the
    // field drifts by the integral of (density - charge) along the
    // supersonic branch, so the map is close to a unit-slope line.
    auto field_at_shock = [&](double E_l) {
        return integrate_steady(law, J, b, 0.0, x0, FlowPoint{rho_l, E_l, J}, so).E_at(x0);
    };
    double e0 = target_E_at_shock, f0 = field_at_shock(e0) - target_E_at_shock;
    double e1 = e0 - f0, f1 = field_at_shock(e1) - target_E_at_shock;
    for (int it = 0; it < 40 && std::abs(f1) > opts.realize_tol; ++it) {
        const double denom = f1 - f0;
        double e2 = (denom != 0.0) ? e1 - f1 * (e1 - e0) / denom : e1 - f1;
        e0 = e1;
        f0 = f1;
        e1 = e2;
        f1 = field_at_shock(e1) - target_E_at_shock;
    }
    if (std::abs(f1) > opts.realize_tol)
        throw SolverFailure("find_unstable_length: inlet field solve did not converge");

    const SteadyProfile left =
        integrate_steady(law, J, b, 0.0, x0, FlowPoint{rho_l, e1, J}, so);
    const double E_sh = left.E_at(x0);
    const double rho_p = conjugate_state(law, J, left.rho_at(x0));
    const FlowPoint start{rho_p, E_sh, J};

    // The negative field drives the subsonic density down toward the sonic
    // line; the breach caps the domain.
    double L_max = opts.L_cap;
    double margin = opts.breach_margin;
    SteadyProfile right = [&] {
        for (int attempt = 0; attempt < 6; ++attempt) {
            try {
                return integrate_steady(law, J, b, x0, L_max, start, so);
            } catch (const SonicBreach& br) {
                L_max = x0 + margin * (br.x - x0);
                margin *= 0.97;
            }
        }
        throw SolverFailure("find_unstable_length: subsonic branch kept breaching the sonic line");
    }();

    auto make_solution = [&](double Lc, SteadyProfile rb) {
        TransonicSolution s;
        s.left = left;
        s.right = std::move(rb);
        s.x0 = x0;
        s.J = J;
        s.exit_density = s.right.rho_at(Lc);
        s.field_at_shock = E_sh;
        return s;
    };

    TransonicSolution sol_full = make_solution(L_max, std::move(right));
    BaseState base_full(sol_full, b, opts.base);

    UnstableLengthResult out;
    out.E_at_shock = E_sh;
    out.inlet_field = e1;
    out.lambda_cap = std::abs(E_sh) * rho_p / J;

    // Longest length on which both extreme shots keep their slope sign: for
    // any shorter domain the terminal slopes at the bracket ends still have
    // opposite signs, so a root in the growth rate is guaranteed.
    auto first_flip = [](const ShootingResult& s) {
        const double s0 = s.Zx.front();
        for (std::size_t i = 1; i < s.Zx.size(); ++i)
            if (s.Zx[i] * s0 <= 0.0) return s.xs[i - 1];
        return s.xs.back();
    };
    const ShootingResult lo_shot = shoot(base_full, 0.0, 1.0, opts.shoot);
    const ShootingResult hi_shot = shoot(base_full, out.lambda_cap, 1.0, opts.shoot);
    double L_star = std::min(first_flip(lo_shot), first_flip(hi_shot));
    if (L_star - x0 < 1e-3 * (L_max - x0)) L_star = L_max;

    out.scan_hi = L_star;
    out.scan_lo = L_star;
    ShootingResult last_mode;
    for (int i = 0; i < opts.n_lengths; ++i) {
        const double Lc = x0 + (L_star - x0) * (opts.n_lengths - i) / opts.n_lengths;
        out.scan_lo = Lc;
        SteadyProfile rb = integrate_steady(law, J, b, x0, Lc, start, so);
        TransonicSolution sol = make_solution(Lc, std::move(rb));
        BaseState bs(sol, b, opts.base);
        ShootingResult mode = find_unstable_mode(bs, opts.shoot);
        // Lengths hugging the sonic breach produce steep profiles whose
        // re-substitution defect exceeds the budget; step down until clean.
        if (mode.converged && mode.residual <= opts.residual_tol && mode.lambda > 0.0 &&
            mode.lambda < out.lambda_cap) {
            out.found = true;
            out.solution = std::move(sol);
            out.L = Lc;
            out.mode = std::move(mode);
            return out;
        }
        last_mode = std::move(mode);
    }

    out.found = false;
    out.solution = std::move(sol_full);
    out.L = L_max;
    out.mode = std::move(last_mode);
    return out;
}

}  // namespace tep
