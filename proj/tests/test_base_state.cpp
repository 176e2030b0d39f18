#include <cmath>
#include <functional>

#include "doctest.h"
#include "bench_configs.hpp"
#include "tep/base_state.hpp"
#include "tep/errors.hpp"

using namespace tep;

namespace {

struct Fixture {
    bench::Config cfg;
    TransonicSolution sol;
    BaseState base;

    explicit Fixture(bench::Config c)
        : cfg(std::move(c)),
          sol(fit_shock(cfg.law, cfg.J, cfg.b, cfg.boundary, cfg.L)),
          base(build_base(sol, cfg.b)) {}
};

const Fixture& fx() {
    static Fixture f = [] {
        auto c = bench::g2();
        c.boundary.rho_r = 1.5627;
        return Fixture(std::move(c));
    }();
    return f;
}

double d4(const std::function<double(double)>& f, double x, double h) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

}  // namespace

TEST_CASE("base tables cover [x0, L] and reproduce the profile") {
    const auto& b = fx().base;
    const auto& t = b.tables();
    CHECK(t.xs.front() == doctest::Approx(b.x0()).epsilon(1e-15));
    CHECK(t.xs.back() == doctest::Approx(b.L()).epsilon(1e-15));
    for (std::size_t i = 0; i < t.xs.size(); ++i) {
        CHECK(t.g[i] == fx().sol.right.rho_at(t.xs[i]));
        CHECK(t.a11[i] < 0.0);
        CHECK(t.a01[i] == doctest::Approx(b.J() / t.g[i]).epsilon(1e-15));
    }
}

TEST_CASE("tabulated derivatives agree with numerical differentiation") {
    const auto& b = fx().base;
    const double h = 5e-4;
    for (int k = 1; k < 40; ++k) {
        const double x = b.x0() + (b.L() - b.x0()) * (0.05 + 0.9 * k / 40.0);
        auto a01 = [&](double y) { return b.J() / b.rho_plus(y); };
        auto a11 = [&](double y) { return -b.kappa(y); };
        auto g = [&](double y) { return b.rho_plus(y); };
        const double b0 = -2.0 * b.J() * b.drho_plus(x) / (g(x) * g(x));
        const double b1 = -b.kappa_prime(x) + b.E_plus(x);
        CHECK(std::abs(b0 - d4(a01, x, h) * 2.0) <= 1e-8);
        CHECK(std::abs(b1 - d4(a11, x, h) - b.E_plus(x)) <= 1e-8);
        // compatibility identities: b0/g = (a01/g)', b1/g = (a11/g)'
        auto r0 = [&](double y) { return a01(y) / g(y); };
        auto r1 = [&](double y) { return a11(y) / g(y); };
        CHECK(std::abs(b0 / g(x) - d4(r0, x, h)) <= 1e-8);
        CHECK(std::abs(b1 / g(x) - d4(r1, x, h)) <= 1e-8);
    }
}

TEST_CASE("branch extensions straddle the shock on the correct sides") {
    const auto& b = fx().base;
    CHECK(b.extension_behind() > 0.0);
    CHECK(b.extension_ahead() > 0.0);
    const double rho_s = sonic_density(b.law(), b.J());
    CHECK(b.rho_plus(b.x0() - 0.99 * b.extension_behind()) > rho_s);
    CHECK(b.rho_minus(b.x0() + 0.99 * b.extension_ahead()) < rho_s);
    // continuity across the matching point
    CHECK(b.rho_plus(b.x0() - 1e-12) == doctest::Approx(b.rho_plus(b.x0())).epsilon(1e-9));
    CHECK(b.rho_minus(b.x0() + 1e-12) == doctest::Approx(b.rho_minus(b.x0())).epsilon(1e-9));
}

TEST_CASE("field gap h vanishes exactly at the base shock and decreases") {
    const auto& b = fx().base;
    CHECK(b.h_shift(0.0) == 0.0);
    CHECK(b.sigma_from_boundary(0.0, 0.0) == 0.0);
    CHECK(b.dh_shift(0.0) < 0.0);

    const double d = 0.5 * std::min(b.extension_behind(), b.extension_ahead());
    CHECK(b.h_shift(-d) > 0.0);
    CHECK(b.h_shift(d) < 0.0);

    const double h = 1e-5;
    const double fd = (b.h_shift(h) - b.h_shift(-h)) / (2 * h);
    CHECK(b.dh_shift(0.0) == doctest::Approx(fd).epsilon(1e-6));
    const double fdd = (b.dh_shift(h) - b.dh_shift(-h)) / (2 * h);
    CHECK(b.ddh_shift(0.0) == doctest::Approx(fdd).epsilon(1e-5));
}

TEST_CASE("slaving inverts the field gap") {
    const auto& b = fx().base;
    const double target_sigma = 0.3 * std::min(b.extension_behind(), b.extension_ahead());
    const double Y0 = b.h_shift(target_sigma);
    CHECK(b.sigma_from_boundary(Y0) == doctest::Approx(target_sigma).epsilon(1e-12));
    const double Y0n = b.h_shift(-target_sigma);
    CHECK(b.sigma_from_boundary(Y0n) == doctest::Approx(-target_sigma).epsilon(1e-12));
    // a boundary value no displacement can produce
    CHECK_THROWS_AS((void)b.sigma_from_boundary(10.0 * b.h_shift(-0.9 * b.extension_behind())),
                    StateInvalid);
}

TEST_CASE("flux gap is normalized at the base shock") {
    const auto& b = fx().base;
    CHECK(b.flux_gap(b.x0()) == 0.0);
    const double rp = b.rho_plus(b.x0());
    CHECK(b.law().p(rp) + b.J() * b.J() / rp - b.supersonic_flux(b.x0()) == 0.0);
    // growth rate of the gap along the branches: E (rho_plus - rho_minus)
    const double h = 1e-5;
    const double fd = (b.flux_gap(b.x0() + h) - b.flux_gap(b.x0() - h)) / (2 * h);
    const double expected =
        b.E_plus(b.x0()) * (b.rho_plus(b.x0()) - b.rho_minus(b.x0()));
    CHECK(fd == doctest::Approx(expected).epsilon(1e-5));
}

TEST_CASE("shock response coefficients satisfy the closed-form relations") {
    const auto& b = fx().base;
    const auto& r = b.shock_response();
    const double rp = b.rho_plus(b.x0());
    const double rm = b.rho_minus(b.x0());
    const double E0 = b.E_plus(b.x0());
    const double u = b.J() / rp;
    const double kap = b.kappa(b.x0());

    CHECK(r.d1_0 == doctest::Approx(2.0 * u / kap).epsilon(1e-14));
    CHECK(r.e1_0 == doctest::Approx(E0 / kap).epsilon(1e-14));
    CHECK(r.dA3_dY == doctest::Approx(1.0 / (rm - rp)).epsilon(1e-14));
    CHECK(r.dA4_dYx == doctest::Approx(kap / (2.0 * u)).epsilon(1e-14));
    CHECK(r.dA4_dY == doctest::Approx(-E0 / (2.0 * u)).epsilon(1e-14));
    CHECK(r.dA1_drho == doctest::Approx(-kap / (2.0 * u)).epsilon(1e-14));
    CHECK(r.dA1_dshift == doctest::Approx(-(rp - rm) * E0 / (2.0 * u)).epsilon(1e-14));
    CHECK(r.dA2_drho == doctest::Approx(-kap / (2.0 * u * (rp - rm))).epsilon(1e-14));
    CHECK(r.dA2_dshift == doctest::Approx(-E0 / (2.0 * u)).epsilon(1e-14));

    // internal consistency
    CHECK(r.d1_0 * r.dA4_dYx == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(-r.d1_0 * r.dA4_dY == doctest::Approx(r.e1_0).epsilon(1e-14));
    CHECK(r.dA3_dY == doctest::Approx(1.0 / b.dh_shift(0.0)).epsilon(1e-14));
    CHECK(r.d1_0 > 0.0);
    CHECK(r.dA3_dY < 0.0);

    // slaving slope of the boundary map: d sigma / d Y0 at 0
    const double h = 1e-6;
    const double fd = (b.sigma_from_boundary(h) - b.sigma_from_boundary(-h)) / (2 * h);
    CHECK(fd == doctest::Approx(r.dA3_dY).epsilon(1e-6));
}

TEST_CASE("build_base validates its options") {
    const auto& f = fx();
    BaseStateOptions bad;
    bad.n_grid = 8;
    CHECK_THROWS_AS((void)build_base(f.sol, f.cfg.b, bad), UsageError);
    BaseStateOptions bad2;
    bad2.extension_fraction = 0.0;
    CHECK_THROWS_AS((void)build_base(f.sol, f.cfg.b, bad2), UsageError);
}
