#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "bench_configs.hpp"
#include "tep/dynamics.hpp"
#include "tep/errors.hpp"
#include "tep/jump.hpp"
#include "tep/linear.hpp"
#include "tep/shooting.hpp"
#include "tep/spectrum.hpp"
#include "tep/steady.hpp"

using namespace tep;

namespace {

const UnstableLengthResult& unstable_case() {
    static auto* res = [] {
        auto c = bench::negative_field();
        return new UnstableLengthResult(
            find_unstable_length(c.law, c.J, c.b, c.boundary.rho_l, c.boundary.E_l));
    }();
    return *res;
}

const BaseState& unstable_base() {
    static auto* base = [] {
        auto c = bench::negative_field();
        return new BaseState(unstable_case().solution, c.b);
    }();
    return *base;
}

const BaseState& stable_base() {
    static auto* base = [] {
        auto c = bench::g2();
        c.boundary.rho_r = 1.5627;
        auto sol = fit_shock(c.law, c.J, c.b, c.boundary, c.L);
        return new BaseState(sol, c.b);
    }();
    return *base;
}

// Transonic solution with the requested subsonic field at the shock, fixed
// shock position and domain length; inlet field found by a secant iteration.
BaseState field_controlled_base(double target, double L) {
    auto c = bench::negative_field();
    const double x0 = 0.1;
    SteadyOptions so;
    so.tol = 1e-12;
    so.n_out = 513;
    auto gap = [&](double E_l) {
        return integrate_steady(c.law, c.J, c.b, 0.0, x0, FlowPoint{0.4, E_l, c.J}, so)
                   .E_at(x0) -
               target;
    };
    double e0 = target, f0 = gap(e0), e1 = e0 - f0, f1 = gap(e1);
    for (int i = 0; i < 30 && std::abs(f1) > 1e-12; ++i) {
        const double e2 = e1 - f1 * (e1 - e0) / (f1 - f0);
        e0 = e1;
        f0 = f1;
        e1 = e2;
        f1 = gap(e1);
    }
    auto left = integrate_steady(c.law, c.J, c.b, 0.0, x0, FlowPoint{0.4, e1, c.J}, so);
    const FlowPoint start{conjugate_state(c.law, c.J, left.rho_at(x0)), left.E_at(x0), c.J};
    TransonicSolution s;
    s.right = integrate_steady(c.law, c.J, c.b, x0, L, start, so);
    s.left = std::move(left);
    s.x0 = x0;
    s.J = c.J;
    s.exit_density = s.right.rho_at(L);
    s.field_at_shock = s.left.E_at(x0);
    return BaseState(s, c.b);
}

}  // namespace

TEST_CASE("initial shooting slope tracks the shock-coupled boundary condition") {
    const BaseState& ub = unstable_base();
    const double x0 = ub.x0();
    const double E0 = ub.E_plus(x0), u0 = ub.u_plus(x0), kap0 = ub.kappa(x0);
    REQUIRE(E0 < 0.0);

    // lambda = 0 starts downhill, the bracket top starts uphill, and the
    // midpoint -E/(2u) starts flat.
    CHECK(shoot(ub, 0.0).Zx.front() < 0.0);
    const double cap = -E0 / u0;
    CHECK(shoot(ub, cap).Zx.front() > 0.0);
    CHECK(std::abs(shoot(ub, 0.5 * cap).Zx.front()) < 1e-14);

    for (double lam : {0.0, 0.3, 1.1}) {
        const auto res = shoot(ub, lam, 2.5);
        CHECK(res.Zx.front() ==
              doctest::Approx((E0 + 2.0 * u0 * lam) / kap0 * 2.5).epsilon(1e-12));
        CHECK(res.Z.front() == 2.5);
        CHECK(res.xs.front() == doctest::Approx(x0).epsilon(1e-12));
        CHECK(res.xs.back() == doctest::Approx(ub.L()).epsilon(1e-12));
    }

    // A positive field at the shock starts uphill already at lambda = 0.
    CHECK(stable_base().E_plus(stable_base().x0()) > 0.0);
    CHECK(shoot(stable_base(), 0.0).Zx.front() > 0.0);

    CHECK_THROWS_AS((void)shoot(ub, -0.1), UsageError);
    CHECK_THROWS_AS((void)shoot(ub, 0.5, 0.0), UsageError);
    CHECK_THROWS_AS((void)shoot(ub, 0.5, -1.0), UsageError);
}

TEST_CASE("terminal slope is linear in the normalization") {
    const BaseState& ub = unstable_base();
    ShootOptions so;
    so.ode_tol = 1e-12;
    const double s1 = shoot(ub, 0.7, 1.0, so).terminal_slope;
    const double s2 = shoot(ub, 0.7, 2.0, so).terminal_slope;
    const double s3 = shoot(ub, 0.7, 3.5, so).terminal_slope;
    CHECK(std::abs(s2 - 2.0 * s1) < 1e-10);
    CHECK(std::abs(s3 - 3.5 * s1) < 1e-10);
}

TEST_CASE("length finder constructs a converged unstable mode") {
    const UnstableLengthResult& res = unstable_case();
    CHECK(res.found);
    CHECK(res.E_at_shock == doctest::Approx(-1.2).epsilon(1e-9));
    CHECK(res.inlet_field == doctest::Approx(-1.19044947).epsilon(1e-6));
    CHECK(res.L == doctest::Approx(0.690691).epsilon(1e-3));
    CHECK(res.scan_hi >= res.scan_lo);
    CHECK(res.solution.x0 == 0.1);

    const ShootingResult& m = res.mode;
    CHECK(m.converged);
    CHECK(m.lambda == doctest::Approx(0.2154958).epsilon(1e-4));
    CHECK(m.lambda > 0.0);
    CHECK(m.lambda < res.lambda_cap);
    CHECK(std::abs(m.terminal_slope) <= 1e-8 * m.alpha);
    CHECK(m.residual <= 1e-6);
    CHECK(m.Z.front() == m.alpha);
    CHECK(m.xs.front() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(m.xs.back() == doctest::Approx(res.L).epsilon(1e-12));

    // Re-derived residual agrees with the recorded one.
    CHECK(eigen_residual(unstable_base(), m) == doctest::Approx(m.residual).epsilon(0.3));
}

TEST_CASE("terminal slopes vary continuously and monotonically over the bracket") {
    const BaseState& ub = unstable_base();
    const auto scan = scan_terminal_slopes(ub, {0.0, unstable_case().lambda_cap}, 64);
    REQUIRE(scan.lambdas.size() == 65);
    CHECK(scan.slopes.front() < 0.0);
    CHECK(scan.slopes.back() > 0.0);
    int flips = 0;
    double jump = 0.0;
    const auto [lo, hi] = std::minmax_element(scan.slopes.begin(), scan.slopes.end());
    for (std::size_t i = 0; i + 1 < scan.slopes.size(); ++i) {
        CHECK(scan.slopes[i + 1] > scan.slopes[i]);
        if (scan.slopes[i] * scan.slopes[i + 1] < 0.0) ++flips;
        jump = std::max(jump, scan.slopes[i + 1] - scan.slopes[i]);
    }
    CHECK(flips == 1);
    CHECK(jump < 0.2 * (*hi - *lo));

    CHECK_THROWS_AS((void)scan_terminal_slopes(ub, {-0.1, 1.0}, 8), UsageError);
    CHECK_THROWS_AS((void)scan_terminal_slopes(ub, {1.0, 0.5}, 8), UsageError);
    CHECK_THROWS_AS((void)scan_terminal_slopes(ub, {0.0, 1.0}, 0), UsageError);
}

TEST_CASE("stable benchmark admits no unstable mode") {
    const BaseState& sb = stable_base();
    const ShootingResult rep = find_unstable_mode(sb);
    CHECK(!rep.converged);

    const auto scan = scan_terminal_slopes(sb, {0.0, 2.0}, 32);
    for (double s : scan.slopes) CHECK(s > 0.0);
}

TEST_CASE("growth rate shrinks and the mode disappears as the field weakens") {
    // Fixed domain length; only the field at the shock varies.
    double prev = 1e300;
    for (double target : {-1.2, -0.9, -0.7, -0.5}) {
        const BaseState bs = field_controlled_base(target, 0.45);
        const ShootingResult m = find_unstable_mode(bs);
        CHECK(m.converged);
        CHECK(m.lambda > 0.0);
        CHECK(m.lambda < prev);
        CHECK(m.residual <= 1e-6);
        prev = m.lambda;
    }
    CHECK(prev == doctest::Approx(0.018427).epsilon(1e-3));
    for (double target : {-0.4, -0.2}) {
        const BaseState bs = field_controlled_base(target, 0.45);
        CHECK(!find_unstable_mode(bs).converged);
    }
}

TEST_CASE("linear evolution from the mode grows at the shooting rate") {
    const ShootingResult& m = unstable_case().mode;
    const BaseState& ub = unstable_base();
    std::vector<double> h2(m.Z.size());
    for (std::size_t i = 0; i < m.Z.size(); ++i) h2[i] = m.lambda * m.Z[i];

    const double T = 3.0 / m.lambda;  // three e-folds
    const LinearRun run = evolve_linear(ub, m.Z, h2, T);
    const DecayReport rep = fit_decay_rate(run.ledger);
    CHECK(rep.unstable);
    // The quadratic ledger grows at twice the mode rate.
    CHECK(-rep.lambda0 == doctest::Approx(2.0 * m.lambda).epsilon(0.05));
    CHECK(rep.r_squared > 0.999);

    // The state itself grows like e^{lambda t}.
    double sup0 = 0.0, supT = 0.0;
    for (double v : m.Z) sup0 = std::max(sup0, std::abs(v));
    for (double v : run.final_state.Y) supT = std::max(supT, std::abs(v));
    CHECK(supT / sup0 == doctest::Approx(std::exp(3.0)).epsilon(0.05));
}

TEST_CASE("nonlinear evolution from the scaled mode is reported as a blow-up") {
    const ShootingResult& m = unstable_case().mode;
    auto c = bench::negative_field();
    BaseStateOptions bo;
    bo.n_grid = 129;
    const BaseState bs(unstable_case().solution, c.b, bo);

    // Resample the mode on the coarser grid through its own samples.
    PerturbationState init;
    init.Y.resize(bs.n());
    init.Yt.resize(bs.n());
    for (int i = 0; i < bs.n(); ++i) {
        init.Y[i] = 1e-3 * m.Z[2 * i];
        init.Yt[i] = m.lambda * init.Y[i];
    }

    const EvolutionReport rep = evolve_and_measure(bs, init, 18.0, DynamicsOptions{}, 201);
    CHECK(rep.blew_up);
    REQUIRE(rep.samples.size() > 10);
    // Fitted amplitude rate is negative (growth) and matches the mode.
    CHECK(rep.lambda_fit < 0.0);
    CHECK(-rep.lambda_fit == doctest::Approx(m.lambda).epsilon(0.1));
    CHECK(rep.samples.back().sup_Y > 10.0 * rep.samples.front().sup_Y);
}

TEST_CASE("solution operator expands at the mode rate in the unstable regime") {
    const BaseState& ub = unstable_base();
    const double lam = unstable_case().mode.lambda;

    SpectrumOptions sp;
    const SpectrumReport rep = solution_operator_spectrum(ub, 1.0, sp);
    CHECK(rep.dominant_modulus > 1.0);
    CHECK(rep.dominant_modulus == doctest::Approx(std::exp(lam)).epsilon(1e-3));
    CHECK(rep.norm_shifted);  // negative boundary weight makes the form indefinite

    SpectrumOptions strict = sp;
    strict.strict_norm = true;
    CHECK_THROWS_AS((void)solution_operator_spectrum(ub, 1.0, strict), NormDegenerate);
}
