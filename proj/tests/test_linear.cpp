#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "bench_configs.hpp"
#include "tep/dynamics.hpp"
#include "tep/errors.hpp"
#include "tep/linear.hpp"

using namespace tep;

namespace {

const TransonicSolution& g2_solution() {
    static auto* sol = [] {
        auto c = bench::g2();
        c.boundary.rho_r = 1.5627;
        return new TransonicSolution(fit_shock(c.law, c.J, c.b, c.boundary, c.L));
    }();
    return *sol;
}

const BaseState& base_n(int n_grid) {
    static std::vector<std::pair<int, const BaseState*>>* cache =
        new std::vector<std::pair<int, const BaseState*>>();
    for (const auto& [n, b] : *cache) {
        if (n == n_grid) return *b;
    }
    auto c = bench::g2();
    BaseStateOptions bo;
    bo.n_grid = n_grid;
    auto* charge = new BackgroundCharge(c.b);
    const auto* b = new BaseState(build_base(g2_solution(), *charge, bo));
    cache->push_back({n_grid, b});
    return *b;
}

// Mid-channel quartic bump, supported away from both boundaries.
std::vector<double> bump_data(const BaseState& b, double amp) {
    const double x0 = b.x0(), span = b.L() - b.x0();
    std::vector<double> h1(b.n());
    for (int i = 0; i < b.n(); ++i) {
        const double z = (b.tables().xs[i] - x0 - 0.5 * span) / (0.2 * span);
        const double w = std::max(0.0, 1.0 - z * z);
        h1[i] = amp * w * w * w * w;
    }
    return h1;
}

// Half-cosine profile reaching both boundaries; compatible with the outlet
// Neumann condition and well aligned with the slowest mode.
std::vector<double> cosine_data(const BaseState& b, double amp) {
    const double x0 = b.x0(), span = b.L() - b.x0();
    std::vector<double> h1(b.n());
    for (int i = 0; i < b.n(); ++i) {
        const double z = (b.tables().xs[i] - x0) / span;
        h1[i] = amp * 0.5 * (1.0 + std::cos(M_PI * z));
    }
    return h1;
}

}  // namespace

TEST_CASE("zero data produces an identically zero ledger") {
    const BaseState& b = base_n(65);
    const std::vector<double> z(b.n(), 0.0);
    const LinearRun run = evolve_linear(b, z, z, 0.5);
    REQUIRE(run.ledger.times.size() == static_cast<std::size_t>(run.steps + 1));
    for (std::size_t k = 0; k < run.ledger.times.size(); ++k) {
        for (const auto& phi : run.ledger.phi) CHECK(phi[k] == 0.0);
        CHECK(run.ledger.D0_cumulative[k] == 0.0);
        CHECK(run.ledger.identity_residual[k] == 0.0);
        CHECK(run.ledger.boundary_Y[k] == 0.0);
        CHECK(run.ledger.boundary_Yt[k] == 0.0);
        CHECK(run.ledger.boundary_Yx[k] == 0.0);
        CHECK(run.ledger.outlet_Yt[k] == 0.0);
    }
    for (double v : run.final_state.Y) CHECK(v == 0.0);
    CHECK_THROWS_AS((void)fit_decay_rate(run.ledger), UsageError);
}

TEST_CASE("energy identity residual vanishes at second order under refinement") {
    // The ledger integrates the boundary dissipation alongside the interior
    // energy; their sum should be conserved up to discretization error that
    // shrinks by ~4x when both the grid and the step are halved.
    double prev = 0.0;
    const struct {
        int n;
        double expect;
    } rows[] = {{65, 5.717870e-07}, {129, 1.455146e-07}, {257, 3.651030e-08}};
    for (const auto& row : rows) {
        const BaseState& b = base_n(row.n);
        const std::vector<double> h1 = bump_data(b, 1e-3);
        const std::vector<double> h2(b.n(), 0.0);
        const LinearRun run = evolve_linear(b, h1, h2, 3.0);
        double res = 0.0;
        for (double r : run.ledger.identity_residual) res = std::max(res, std::abs(r));
        CHECK(res == doctest::Approx(row.expect).epsilon(0.02));
        if (prev > 0.0) {
            const double ratio = prev / res;
            CHECK(ratio > 3.3);
            CHECK(ratio < 4.7);
        }
        prev = res;
    }
}

TEST_CASE("boundary dissipation accumulates monotonically and drains the energy") {
    const BaseState& b = base_n(129);
    const LinearRun run = evolve_linear(b, bump_data(b, 1e-3), std::vector<double>(b.n(), 0.0), 8.0);
    const auto& D = run.ledger.D0_cumulative;
    for (std::size_t k = 1; k < D.size(); ++k) CHECK(D[k] >= D[k - 1]);
    CHECK(D.back() > 0.0);
    // Nearly all of the initial energy leaves through the boundaries.
    CHECK(run.ledger.phi[0].back() < 1e-8 * run.ledger.phi[0].front());
    // Conservation up to the scheme's discretization error; the refinement
    // case above pins the second-order convergence of this residual.
    CHECK(std::abs(run.ledger.phi[0].front() - (run.ledger.phi[0].back() + D.back())) <
          5e-3 * run.ledger.phi[0].front());
    // Higher-order energies decay as well.
    for (const auto& phi : run.ledger.phi) CHECK(phi.back() < 1e-6 * phi.front());
}

TEST_CASE("fitted decay rate recovers a synthetic exponential ledger") {
    EnergyLedger led;
    led.phi.resize(2);
    for (int k = 0; k <= 200; ++k) {
        const double t = 0.025 * k;
        led.times.push_back(t);
        led.phi[0].push_back(std::exp(-2.0 * t));
        led.phi[1].push_back(0.0);
    }
    const DecayReport rep = fit_decay_rate(led);
    CHECK(rep.lambda0 == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(rep.r_squared > 1.0 - 1e-12);
    CHECK(!rep.unstable);
    CHECK(rep.window > 0.0);
    REQUIRE(rep.alpha0.size() >= 5);
    const auto [lo, hi] = std::minmax_element(rep.alpha0.begin(), rep.alpha0.end());
    CHECK(*hi < 1.0);
    CHECK(*hi <= 1.1 * *lo);
    // All window ratios of a pure exponential coincide.
    CHECK(*hi == doctest::Approx(*lo).epsilon(1e-12));
}

TEST_CASE("growing ledger is reported unstable") {
    EnergyLedger led;
    led.phi.resize(2);
    for (int k = 0; k <= 100; ++k) {
        const double t = 0.05 * k;
        led.times.push_back(t);
        led.phi[0].push_back(std::exp(0.8 * t));
        led.phi[1].push_back(0.0);
    }
    const DecayReport rep = fit_decay_rate(led);
    CHECK(rep.unstable);
    CHECK(rep.lambda0 == doctest::Approx(-0.8).epsilon(1e-6));
    CHECK(rep.alpha0.empty());
}

TEST_CASE("evolved energy decays at the dominant-mode rate") {
    const BaseState& b = base_n(129);
    const LinearRun run =
        evolve_linear(b, cosine_data(b, 1e-3), std::vector<double>(b.n(), 0.0), 16.0);
    const DecayReport rep = fit_decay_rate(run.ledger);
    // Twice the real part of the slowest mode of the semi-discrete operator
    // (-0.985 +/- 0.759i), seen through a finite fitting horizon.
    CHECK(rep.lambda0 > 1.85);
    CHECK(rep.lambda0 < 2.1);
    CHECK(rep.r_squared > 0.98);
    CHECK(!rep.unstable);
    REQUIRE(rep.alpha0.size() >= 5);
    const auto [lo, hi] = std::minmax_element(rep.alpha0.begin(), rep.alpha0.end());
    CHECK(*hi < 1.0);
    CHECK(*hi <= 1.1 * *lo);
}

TEST_CASE("nonlinear evolution stays within the linear regime at small amplitude") {
    const BaseState& b = base_n(129);
    FreeBoundarySim nl(b);
    LinearSim lin(b);

    PerturbationState ps;
    ps.Y = cosine_data(b, 1e-6);
    ps.Yt.assign(b.n(), 0.0);
    ps = nl.project(ps);
    LinearState ls;
    ls.Y = ps.Y;
    ls.Yt = ps.Yt;
    ls.t = 0.0;

    const double dt = 0.9 * nl.max_dt(ps);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        ps = nl.step(ps, dt);
        ls = lin.step(ls, dt);
        double diff = 0.0, scale = 0.0;
        for (int i = 0; i < b.n(); ++i) {
            diff = std::max({diff, std::abs(ps.Y[i] - ls.Y[i]),
                             std::abs(ps.Yt[i] - ls.Yt[i])});
            scale = std::max({scale, std::abs(ls.Y[i]), std::abs(ls.Yt[i])});
        }
        worst = std::max(worst, diff / scale);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("linear projection enforces the boundary closures and is idempotent") {
    const BaseState& b = base_n(65);
    LinearSim sim(b);
    const double h = sim.dx();

    LinearState st;
    st.Y = bump_data(b, 1.0);
    st.Yt = cosine_data(b, 0.5);
    for (int i = 0; i < b.n(); ++i) st.Y[i] += 0.3 * std::sin(7.0 * i);

    const LinearState p = sim.project(st);
    const int N = b.n() - 1;
    // One-sided second-order slopes satisfy the boundary conditions.
    const double slope0 = (-3.0 * p.Y[0] + 4.0 * p.Y[1] - p.Y[2]) / (2.0 * h);
    CHECK(slope0 == doctest::Approx(sim.boundary_slope(p)).epsilon(1e-12));
    const double slopeN = (3.0 * p.Y[N] - 4.0 * p.Y[N - 1] + p.Y[N - 2]) / (2.0 * h);
    CHECK(std::abs(slopeN) < 1e-12);

    const LinearState pp = sim.project(p);
    for (int i = 0; i <= N; ++i) {
        CHECK(pp.Y[i] == doctest::Approx(p.Y[i]).epsilon(1e-14));
        CHECK(pp.Yt[i] == doctest::Approx(p.Yt[i]).epsilon(1e-14));
    }
}

TEST_CASE("states are recorded at the requested stride") {
    const BaseState& b = base_n(65);
    LinearOptions opts;
    opts.state_stride = 10;
    const LinearRun run =
        evolve_linear(b, bump_data(b, 1e-3), std::vector<double>(b.n(), 0.0), 0.5, opts);
    REQUIRE(run.states.size() == static_cast<std::size_t>(1 + run.steps / 10));
    CHECK(run.states.front().t == 0.0);
    for (std::size_t k = 1; k < run.states.size(); ++k) {
        CHECK(run.states[k].t - run.states[k - 1].t ==
              doctest::Approx(10.0 * run.dt).epsilon(1e-12));
    }
}

TEST_CASE("linear time step bound scales with the grid and options are validated") {
    const BaseState& b65 = base_n(65);
    const BaseState& b129 = base_n(129);
    const double ratio = LinearSim(b65).max_dt() / LinearSim(b129).max_dt();
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.05));

    LinearOptions bad;
    bad.cfl = 0.0;
    CHECK_THROWS_AS(LinearSim(b65, bad), UsageError);
    bad.cfl = 1.5;
    CHECK_THROWS_AS(LinearSim(b65, bad), UsageError);
    bad = LinearOptions{};
    bad.m_max = -1;
    CHECK_THROWS_AS(LinearSim(b65, bad), UsageError);

    const std::vector<double> z(b65.n(), 0.0);
    CHECK_THROWS_AS((void)evolve_linear(b65, z, z, -1.0), UsageError);
    CHECK_THROWS_AS((void)evolve_linear(b65, std::vector<double>(3, 0.0), z, 1.0),
                    UsageError);
    LinearOptions fast;
    fast.dt = 1.0;  // far above the stability bound
    CHECK_THROWS_AS((void)evolve_linear(b65, z, z, 1.0, fast), UsageError);

    EnergyLedger stub;
    stub.phi.resize(1);
    CHECK_THROWS_AS((void)fit_decay_rate(stub), UsageError);
    stub.phi.resize(2);
    for (int k = 0; k < 5; ++k) {
        stub.times.push_back(0.1 * k);
        stub.phi[0].push_back(1.0);
        stub.phi[1].push_back(0.0);
    }
    CHECK_THROWS_AS((void)fit_decay_rate(stub), UsageError);
}
