#include "tep/transonic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tep {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

SteadyProfile supersonic_branch(const PressureLaw& law, double J, const BackgroundCharge& b,
                                double to_x, double rho_l, double E_l,
                                const SteadyOptions& opts) {
    const FlowPoint inlet{rho_l, E_l, J};
    if (regime(law, inlet) != Regime::supersonic)
        throw UsageError("supersonic branch: inlet state is not supersonic");
    double target = to_x;
    for (int tries = 0; tries < 200; ++tries) {
        try {
            return integrate_steady(law, J, b, 0.0, target, inlet, opts);
        } catch (const SonicBreach& breach) {
            // Back off below the breach point and retry on the shorter span.
            double next = std::min(target, breach.x) * (1.0 - 1e-6);
            if (!(next > 0.0) || next >= target)
                throw SonicBreach("supersonic branch: no extent before the sonic band", breach.x);
            target = next;
        }
    }
    throw SolverFailure("supersonic branch: could not back away from the sonic band");
}

double exit_density_map(const PressureLaw& law, double J, const BackgroundCharge& b, double L,
                        const SteadyProfile& supersonic_base, double a,
                        const SteadyOptions& opts) {
    if (a <= supersonic_base.x_min() || a > supersonic_base.x_max())
        throw UsageError("exit-density map: position outside the supersonic branch");
    if (a >= L) throw UsageError("exit-density map: shock position must lie before the outlet");
    const double rho_sup = supersonic_base.rho_at(a);
    const double E_a = supersonic_base.E_at(a);
    const double rho_sub = conjugate_state(law, J, rho_sup);
    try {
        const SteadyProfile right =
            integrate_steady(law, J, b, a, L, FlowPoint{rho_sub, E_a, J}, opts);
        return right.rho().back();
    } catch (const SonicBreach& breach) {
        throw InfeasibleShockPosition("exit-density map: subsonic branch from a = " + fmt(a) +
                                          " hits the sonic band at x = " + fmt(breach.x),
                                      a);
    }
}

std::vector<ExitMapRecord> scan_exit_map(const PressureLaw& law, double J,
                                         const BackgroundCharge& b, double L,
                                         const SteadyProfile& supersonic_base, int n,
                                         const SteadyOptions& opts) {
    if (n < 2) throw UsageError("exit-density scan: need at least two positions");
    std::vector<ExitMapRecord> records;
    records.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        ExitMapRecord rec;
        rec.a = L * static_cast<double>(i + 1) / static_cast<double>(n + 1);
        if (rec.a > supersonic_base.x_max()) {
            records.push_back(rec);
            continue;
        }
        rec.rho_sup = supersonic_base.rho_at(rec.a);
        rec.E_at_shock = supersonic_base.E_at(rec.a);
        try {
            rec.g = exit_density_map(law, J, b, L, supersonic_base, rec.a, opts);
            rec.feasible = true;
        } catch (const InfeasibleShockPosition&) {
            rec.feasible = false;
        }
        records.push_back(rec);
    }
    return records;
}

namespace {

TransonicSolution assemble_solution(const PressureLaw& law, double J, const BackgroundCharge& b,
                                    const SteadyProfile& supersonic_base, double a, double L,
                                    const BoundaryData& boundary, const FitOptions& opts) {
    const double rho_sup = supersonic_base.rho_at(a);
    const double E_a = supersonic_base.E_at(a);
    const double rho_sub = conjugate_state(law, J, rho_sup);

    TransonicSolution sol;
    sol.J = J;
    sol.x0 = a;
    sol.field_at_shock = E_a;
    // Same integration path as the exit-density map, so the stored exit
    // density is bit-identical to g(x0).
    sol.right = integrate_steady(law, J, b, a, L, FlowPoint{rho_sub, E_a, J}, opts.steady);
    sol.exit_density = sol.right.rho().back();
    sol.left = integrate_steady(law, J, b, 0.0, a, FlowPoint{boundary.rho_l, boundary.E_l, J},
                                opts.steady);

    const FlowPoint up{sol.left.rho().back(), sol.left.E().back(), J};
    const FlowPoint down{sol.right.rho().front(), sol.right.E().front(), J};
    const double flux_gap = std::abs(momentum_flux(law, J, up.rho) - momentum_flux(law, J, down.rho));
    if (flux_gap > 1e-8 * std::abs(momentum_flux(law, J, down.rho)))
        throw SolverFailure("shock fit: assembled jump violates the momentum-flux identity");
    if (!is_entropy_admissible(law, up, down, 0.0))
        throw SolverFailure("shock fit: assembled jump fails the entropy condition");
    return sol;
}

}  // namespace

TransonicSolution fit_shock(const PressureLaw& law, double J, const BackgroundCharge& b,
                            const BoundaryData& boundary, double L, const FitOptions& opts) {
    if (!(L > 0.0)) throw UsageError("shock fit: domain length must be positive");
    if (std::abs(b.L() - L) > 1e-12 * (1.0 + L))
        throw UsageError("shock fit: background charge declared on a different domain");
    const double rho_s = sonic_density(law, J);
    const double b_min = b.min_on(0.0, L);
    const double b_max = b.max_on(0.0, L);
    if (!(b_min > 0.0))
        throw HypothesisViolation("shock fit: background charge must be strictly positive");
    if (!(b_max < rho_s))
        throw HypothesisViolation("shock fit: background charge must stay below the sonic density " +
                                  fmt(rho_s));
    if (regime(law, FlowPoint{boundary.rho_l, boundary.E_l, J}) != Regime::supersonic)
        throw UsageError("shock fit: inlet state must be supersonic");
    if (regime(law, FlowPoint{boundary.rho_r, 0.0, J}) != Regime::subsonic)
        throw UsageError("shock fit: prescribed exit density must be subsonic");

    const SteadyProfile base = supersonic_branch(law, J, b, L, boundary.rho_l, boundary.E_l,
                                                 opts.steady);
    auto g_of = [&](double a) { return exit_density_map(law, J, b, L, base, a, opts.steady); };

    double lo = 0.0, hi = 0.0, g_lo = 0.0, g_hi = 0.0;
    if (opts.bracket_lo > 0.0 && opts.bracket_hi > opts.bracket_lo) {
        lo = opts.bracket_lo;
        hi = opts.bracket_hi;
        g_lo = g_of(lo);
        g_hi = g_of(hi);
        if (!(g_lo >= boundary.rho_r && boundary.rho_r >= g_hi))
            throw UsageError("shock fit: supplied bracket does not contain the target exit density");
    } else {
        const auto records = scan_exit_map(law, J, b, L, base, opts.scan_points, opts.steady);

        const ExitMapRecord* prev = nullptr;
        bool bracket_found = false;
        double attain_lo = 0.0, attain_hi = 0.0;
        bool any_feasible = false;
        double bad_E_at = 0.0;
        bool e_violated = false;
        for (const auto& rec : records) {
            if (!rec.feasible) {
                prev = nullptr;  // feasibility gap breaks the monotone chain
                continue;
            }
            if (!(rec.E_at_shock > 0.0) && !e_violated) {
                e_violated = true;
                bad_E_at = rec.a;
            }
            if (!any_feasible) {
                attain_lo = attain_hi = rec.g;
                any_feasible = true;
            } else {
                attain_lo = std::min(attain_lo, rec.g);
                attain_hi = std::max(attain_hi, rec.g);
            }
            if (prev != nullptr) {
                if (rec.g >= prev->g) {
                    std::string msg = "shock fit: exit-density map failed to decrease between a = " +
                                      fmt(prev->a) + " and a = " + fmt(rec.a);
                    msg += e_violated ? ("; field at shock not positive at a = " + fmt(bad_E_at))
                                      : " despite a positive field at every scanned position";
                    throw HypothesisViolation(msg);
                }
                if (!bracket_found && prev->g >= boundary.rho_r && boundary.rho_r >= rec.g) {
                    lo = prev->a;
                    hi = rec.a;
                    g_lo = prev->g;
                    g_hi = rec.g;
                    bracket_found = true;
                }
            }
            prev = &rec;
        }
        if (!any_feasible)
            throw InfeasibleShockPosition("shock fit: no scanned shock position admits a subsonic "
                                          "continuation to the outlet",
                                          0.0);
        if (!bracket_found)
            throw NoSolution("shock fit: target exit density " + fmt(boundary.rho_r) +
                                 " outside the attainable range [" + fmt(attain_lo) + ", " +
                                 fmt(attain_hi) + "]",
                             attain_lo, attain_hi);
    }

    // Monotone bisection: g decreases, so the sign of g(mid) - rho_r picks
    // the half interval directly.
    double a_best = 0.5 * (lo + hi);
    double dev_best = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opts.max_bisections && (hi - lo) > opts.pos_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double g_mid = g_of(mid);
        const double dev = std::abs(g_mid - boundary.rho_r);
        if (dev < dev_best) {
            dev_best = dev;
            a_best = mid;
        }
        if (g_mid >= boundary.rho_r) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
    }
    if ((hi - lo) > opts.pos_tol)
        throw SolverFailure("shock fit: bisection budget exhausted before bracket width " +
                            fmt(opts.pos_tol));
    if (dev_best > opts.exit_tol) {
        const double mid = 0.5 * (lo + hi);
        const double dev = std::abs(g_of(mid) - boundary.rho_r);
        if (dev < dev_best) {
            dev_best = dev;
            a_best = mid;
        }
        if (dev_best > opts.exit_tol)
            throw SolverFailure("shock fit: exit density residual " + fmt(dev_best) +
                                " above tolerance " + fmt(opts.exit_tol));
    }

    return assemble_solution(law, J, b, base, a_best, L, boundary, opts);
}

const char* perturbation_shape_name(PerturbationShape s) {
    switch (s) {
        case PerturbationShape::constant_offset: return "constant_offset";
        case PerturbationShape::bump: return "bump";
        case PerturbationShape::sinusoid: return "sinusoid";
    }
    return "unknown";
}

namespace {

BackgroundCharge perturb_charge(const BackgroundCharge& base, PerturbationShape shape, double eps,
                                double L) {
    switch (shape) {
        case PerturbationShape::constant_offset:
            return base.shifted(eps);
        case PerturbationShape::bump: {
            const double center = 0.5 * L, width = L / 8.0;
            return base.perturbed_by([&](double x) {
                const double t = (x - center) / width;
                return eps * std::exp(-t * t);
            });
        }
        case PerturbationShape::sinusoid:
            return base.perturbed_by([&](double x) { return eps * std::sin(2.0 * M_PI * x / L); });
    }
    throw Error("perturb charge: corrupt shape");
}

}  // namespace

StabilityReport structural_stability_experiment(const PressureLaw& law, double J,
                                                const BackgroundCharge& base_b,
                                                const BoundaryData& boundary, double L,
                                                const std::vector<double>& eps_list,
                                                PerturbationShape shape, const FitOptions& opts) {
    const TransonicSolution base = fit_shock(law, J, base_b, boundary, L, opts);
    if (!(base.field_at_shock > 0.0))
        throw HypothesisViolation("stability experiment: field at the base shock must be positive");

    StabilityReport report;
    report.x0_base = base.x0;
    report.shape = shape;

    const double base_jump_density = base.right.rho().front();
    for (double eps : eps_list) {
        StabilityRow row;
        row.eps = eps;
        if (eps == 0.0) {
            report.rows.push_back(row);
            continue;
        }
        const BackgroundCharge bp = perturb_charge(base_b, shape, eps, L);
        const TransonicSolution sol = fit_shock(law, J, bp, boundary, L, opts);
        row.x0_shift = sol.x0 - base.x0;
        row.ratio = std::abs(row.x0_shift) / eps;
        row.jump_density_dev = std::abs(sol.right.rho().front() - base_jump_density);
        row.field_at_shock_dev = std::abs(sol.field_at_shock - base.field_at_shock);
        report.rows.push_back(row);
    }

    double r_min = std::numeric_limits<double>::infinity(), r_max = 0.0;
    double eps_max = 0.0;
    for (const auto& row : report.rows) {
        if (row.eps == 0.0) continue;
        r_min = std::min(r_min, row.ratio);
        r_max = std::max(r_max, row.ratio);
        if (row.eps > eps_max) {
            eps_max = row.eps;
            report.shift_direction = (row.x0_shift > 0.0) - (row.x0_shift < 0.0);
        }
    }
    if (r_max == 0.0)
        report.ratios_stable = true;  // no measurable response at any size
    else
        report.ratios_stable = (r_min > 0.0) && (r_max <= 3.0 * r_min);
    return report;
}

}  // namespace tep
