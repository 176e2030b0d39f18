#include "tep/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tep/errors.hpp"

namespace tep {

double nonlinear_flux(const BaseState& base, double x, double Y_t, double Y_x) {
    const double rho_bar = base.rho_plus(x);
    const double rho = rho_bar + Y_x;
    const double rho_s = sonic_density(base.law(), base.J());
    if (!(rho > rho_s)) {
        throw StateInvalid("perturbed density " + std::to_string(rho) +
                           " is not strictly subsonic");
    }
    const double m = base.J() - Y_t;
    return base.law().p(rho) + m * m / rho;
}

FreeBoundarySim::FreeBoundarySim(const BaseState& base, const DynamicsOptions& opts)
    : base_(&base), opts_(opts), jac_{base.x0(), base.L()} {
    if (!(opts_.cfl > 0.0) || opts_.cfl > 1.0) {
        throw UsageError("cfl must lie in (0, 1], got " + std::to_string(opts_.cfl));
    }
    rho_sonic_ = sonic_density(base.law(), base.J());
    const auto& t = base.tables();
    for (std::size_t i = 0; i < t.xs.size(); ++i) {
        v_fast_ = std::max(v_fast_, t.a01[i] + std::sqrt(t.a01[i] * t.a01[i] - t.a11[i]));
    }
}

// Boundary slope W_x(x0) from the exact jump relations. With the shock at
// s = x0 + sigma and downstream state (rho_plus(s) + Y_x, J - Y_t), mass and
// momentum conservation across the front reduce to the quadratic
//   A - B Y_t + C Y_t^2 = 0,
//   A = (flux(rho) - flux_minus(s)) (rho - rho_minus),
//   B = 2 J (rho - rho_minus) / rho,  C = -rho_minus / rho,
// where Y_t and Y_x are both affine in the computational slope xi.
double FreeBoundarySim::boundary_slope(double W0, double V0, double sigma,
                                       double sigma_dot) const {
    const BaseState& b = *base_;
    const PressureLaw& law = b.law();
    const double J = b.J();
    const double q2 = jac_.q2(sigma);
    const double s = b.x0() + sigma;
    const double rho_p_bar = b.rho_plus(s);
    const double rho_m = b.rho_minus(s);
    const double sup_flux = b.supersonic_flux(s);

    auto eval = [&](double xi, double* F, double* dF) -> bool {
        const double Yx = q2 * xi;
        const double Yt = V0 - sigma_dot * q2 * xi;
        const double rho = rho_p_bar + Yx;
        if (!(rho > rho_sonic_)) return false;
        const double phi = law.p(rho) + J * J / rho - sup_flux;
        const double gap = rho - rho_m;
        const double A = gap * phi;
        const double B = 2.0 * J * gap / rho;
        const double C = -rho_m / rho;
        *F = A - B * Yt + C * Yt * Yt;
        if (dF) {
            const double dphi = (law.dp(rho) - J * J / (rho * rho)) * q2;
            const double dA = q2 * phi + gap * dphi;
            const double dB = 2.0 * J * q2 * rho_m / (rho * rho);
            const double dC = rho_m * q2 / (rho * rho);
            const double dYt = -sigma_dot * q2;
            *dF = dA - dB * Yt - B * dYt + dC * Yt * Yt + 2.0 * C * Yt * dYt;
        }
        return true;
    };

    const auto& r = b.shock_response();
    double xi = (r.d1_0 * V0 + r.e1_0 * W0) / (q2 * (1.0 + r.d1_0 * sigma_dot));
    double F = 0.0, dF = 0.0;
    if (!eval(xi, &F, &dF)) {
        xi = 0.0;
        if (!eval(xi, &F, &dF)) {
            throw StateInvalid("downstream state at the shock is not subsonic");
        }
    }
    const double scale = std::max({1.0, std::abs(W0), std::abs(V0)});
    for (int it = 0; it < opts_.newton_max; ++it) {
        if (std::abs(F) <= opts_.newton_tol * scale) return xi;
        if (dF == 0.0) break;
        double step = -F / dF;
        double next = xi + step;
        double nF = 0.0, nD = 0.0;
        int halvings = 0;
        while (halvings < 40 && (!eval(next, &nF, &nD) || !(std::abs(nF) <= std::abs(F)))) {
            step *= 0.5;
            next = xi + step;
            ++halvings;
        }
        if (halvings >= 40) break;
        if (next == xi) return xi;  // step underflow at the solution
        xi = next;
        F = nF;
        dF = nD;
    }
    if (std::abs(F) <= opts_.newton_tol * scale) return xi;
    throw BoundarySolverError("jump-relation solve at the shock stalled with residual " +
                              std::to_string(F));
}

void FreeBoundarySim::rhs(const std::vector<double>& W, const std::vector<double>& V,
                          std::vector<double>& dW, std::vector<double>& dV,
                          Stage* stage_out) const {
    const BaseState& b = *base_;
    const PressureLaw& law = b.law();
    const int N = n() - 1;
    const double h = dx();
    const double x0 = b.x0();
    const double L = b.L();
    const double J = b.J();
    const auto& grid = b.tables().xs;
    dW = V;
    dV.resize(N + 1);

    if (opts_.wave_only) {
        // frozen pure wave part d/dx(kappa dW/dx) with Neumann ends; the
        // right-hand side depends on W only, so the flow is time reversible
        for (int i = 0; i <= N; ++i) {
            const double kl = b.kappa(grid[i] - 0.5 * h * (i > 0 ? 1.0 : -1.0));
            const double kr = b.kappa(grid[i] + 0.5 * h * (i < N ? 1.0 : -1.0));
            const double Wl = (i > 0) ? W[i - 1] : W[1];
            const double Wr = (i < N) ? W[i + 1] : W[N - 1];
            dV[i] = (kr * (Wr - W[i]) - kl * (W[i] - Wl)) / (h * h);
        }
        if (stage_out) *stage_out = Stage{};
        return;
    }

    const double sigma = b.sigma_from_boundary(W[0], 0.0);
    const double hp = b.dh_shift(sigma);
    const double sigma_dot = V[0] / hp;
    const double q2 = jac_.q2(sigma);
    const double denomL = L - x0 - sigma;
    const double s = x0 + sigma;
    const double xi0 = boundary_slope(W[0], V[0], sigma, sigma_dot);

    // node 0: chain-rule expansion with the exact boundary slope; the shock
    // acceleration enters its own right-hand side through sigma_ddot, an
    // affine dependence resolved in closed form
    const double Wxx0 = 2.0 * (W[1] - W[0] - h * xi0) / (h * h);
    const double Vx0 = (-3.0 * V[0] + 4.0 * V[1] - V[2]) / (2.0 * h);
    const double rho_b0 = b.rho_plus(s);
    const double drho_b0 = b.drho_plus(s);
    const double E_b0 = b.E_plus(s);
    const double Yx0 = q2 * xi0;
    const double Yt0 = V[0] - sigma_dot * q2 * xi0;
    const double rho0 = rho_b0 + Yx0;
    if (!(rho0 > rho_sonic_)) {
        throw StateInvalid("downstream density at the shock reached the sonic value");
    }
    const double m0 = J - Yt0;
    const double kap_bar0 = law.dp(rho_b0) - J * J / (rho_b0 * rho_b0);
    const double kap_pert0 = law.dp(rho0) - m0 * m0 / (rho0 * rho0);
    const double Gx0 = (kap_bar0 - kap_pert0) * drho_b0;
    const double dYx_dx = q2 * q2 * Wxx0;
    const double dYt_dx = q2 * (Vx0 + sigma_dot * xi0 / denomL - sigma_dot * q2 * Wxx0);
    const double dxG = Gx0 + (2.0 * m0 / rho0) * dYt_dx - kap_pert0 * dYx_dx;
    const double a_part = -(sigma_dot * q2) * (sigma_dot * q2) * Wxx0 +
                          2.0 * sigma_dot * q2 * Vx0 +
                          2.0 * sigma_dot * sigma_dot * q2 * xi0 / denomL - dxG - E_b0 * Yx0 -
                          rho_b0 * W[0] - W[0] * Yx0;
    const double b_coef = q2 * xi0;
    const double hpp = b.ddh_shift(sigma);
    const double A0 = (a_part - b_coef * hpp * sigma_dot * sigma_dot / hp) /
                      (1.0 - b_coef / hp);
    const double sigma_ddot = (A0 - hpp * sigma_dot * sigma_dot) / hp;
    dV[0] = A0;

    // conservative interface fluxes of G = steady flux - perturbed flux
    std::vector<double> Ghat(N);
    for (int i = 0; i < N; ++i) {
        const double xt = grid[i] + 0.5 * h;
        const double q1h = (L - xt) / denomL;
        const double xp = s + (xt - x0) / q2;
        const double Wx = (W[i + 1] - W[i]) / h;
        const double Vh = 0.5 * (V[i] + V[i + 1]);
        const double Yx = q2 * Wx;
        const double Yt = Vh - sigma_dot * q1h * Wx;
        const double rho_bar = b.rho_plus(xp);
        const double rho = rho_bar + Yx;
        if (!(rho > rho_sonic_)) {
            throw StateInvalid("perturbed density crossed the sonic value inside the channel");
        }
        const double m = J - Yt;
        Ghat[i] = (law.p(rho_bar) + J * J / rho_bar) - (law.p(rho) + m * m / rho);
    }

    for (int i = 1; i < N; ++i) {
        const double q1i = (L - grid[i]) / denomL;
        const double xp = s + (grid[i] - x0) / q2;
        const double rho_bar = b.rho_plus(xp);
        const double E_bar = b.E_plus(xp);
        const double Wxx = (W[i + 1] - 2.0 * W[i] + W[i - 1]) / (h * h);
        const double Wx = (W[i + 1] - W[i - 1]) / (2.0 * h);
        const double Vx = (V[i + 1] - V[i - 1]) / (2.0 * h);
        dV[i] = -(sigma_dot * q1i) * (sigma_dot * q1i) * Wxx + 2.0 * sigma_dot * q1i * Vx +
                q1i * (2.0 * sigma_dot * sigma_dot / denomL) * Wx -
                q2 * (Ghat[i] - Ghat[i - 1]) / h - E_bar * q2 * Wx - rho_bar * W[i] -
                W[i] * q2 * Wx + sigma_ddot * q1i * Wx;
    }

    // node N: x = L is a fixed point of the transform and the slope vanishes
    // there, so only the flux and zeroth-order terms survive
    {
        const double mN = J - V[N];
        const double rho_bar = b.rho_plus(L);
        const double drho_bar = b.drho_plus(L);
        const double WxxN = 2.0 * (W[N - 1] - W[N]) / (h * h);
        const double kap_pert = law.dp(rho_bar) - mN * mN / (rho_bar * rho_bar);
        const double kap_bar = law.dp(rho_bar) - J * J / (rho_bar * rho_bar);
        const double GxN = (kap_bar - kap_pert) * drho_bar;
        // outgoing characteristic: close the momentum coupling with a one-sided
        // slope (the boundary slope itself vanishes, so this is an O(h)
        // relaxation toward the boundary condition rather than a model change)
        const double VxN = (V[N] - V[N - 1]) / h;
        dV[N] = -GxN + kap_pert * q2 * q2 * WxxN -
                (2.0 * mN / rho_bar) * q2 * VxN - rho_bar * W[N];
    }

    // Spectral damping on the velocity equation only, so the kinematic
    // relation dY/dt = Yt stays exact for energy bookkeeping.
    if (opts_.dissipation > 0.0) {
        const double nu = opts_.dissipation * q2 * (v_fast_ + std::abs(sigma_dot)) / (16.0 * h);
        for (int i = 2; i <= N - 2; ++i) {
            dV[i] -= nu * (V[i - 2] - 4.0 * V[i - 1] + 6.0 * V[i] - 4.0 * V[i + 1] + V[i + 2]);
        }
        // reduced second-difference stencil beside each boundary
        dV[1] -= nu * (-V[0] + 2.0 * V[1] - V[2]);
        dV[N - 1] -= nu * (-V[N - 2] + 2.0 * V[N - 1] - V[N]);
    }

    if (stage_out) *stage_out = Stage{sigma, sigma_dot, sigma_ddot, xi0};
}

FreeBoundarySim::BoundaryStatus FreeBoundarySim::boundary_status(
    const PerturbationState& st) const {
    if (static_cast<int>(st.Y.size()) != n() || static_cast<int>(st.Yt.size()) != n()) {
        throw UsageError("state size does not match the base grid");
    }
    std::vector<double> dW, dV;
    Stage stage;
    rhs(st.Y, st.Yt, dW, dV, &stage);
    return BoundaryStatus{stage.sigma, stage.sigma_dot, stage.sigma_ddot, stage.xi0};
}

double FreeBoundarySim::max_dt(const PerturbationState& st) const {
    const BaseState& b = *base_;
    const double sigma = opts_.wave_only ? 0.0 : b.sigma_from_boundary(st.Y[0], st.sigma);
    const double sigma_dot = opts_.wave_only ? 0.0 : st.Yt[0] / b.dh_shift(sigma);
    const double q2 = jac_.q2(sigma);
    const auto& grid = b.tables().xs;
    double vmax = 0.0;
    for (int i = 0; i < n(); ++i) {
        const double xp = b.x0() + sigma + (grid[i] - b.x0()) / q2;
        const double rho = b.rho_plus(xp);
        const double c = b.law().sound_speed(rho);
        const double u = b.J() / rho;
        const double v = q2 * (c + u) + std::abs(sigma_dot) * jac_.q1(grid[i], sigma);
        vmax = std::max(vmax, v);
    }
    return opts_.cfl * dx() / vmax;
}

PerturbationState FreeBoundarySim::project(PerturbationState st) const {
    const int N = n() - 1;
    if (static_cast<int>(st.Y.size()) != N + 1 || static_cast<int>(st.Yt.size()) != N + 1) {
        throw UsageError("state size does not match the base grid");
    }
    const double h = dx();
    st.Y[N] = (4.0 * st.Y[N - 1] - st.Y[N - 2]) / 3.0;
    st.Yt[N] = (4.0 * st.Yt[N - 1] - st.Yt[N - 2]) / 3.0;
    double sigma = 0.0, sigma_dot = 0.0;
    for (int pass = 0; pass < 3; ++pass) {
        sigma = base_->sigma_from_boundary(st.Y[0], sigma);
        sigma_dot = st.Yt[0] / base_->dh_shift(sigma);
        const double xi0 = boundary_slope(st.Y[0], st.Yt[0], sigma, sigma_dot);
        const double Y0 = (4.0 * st.Y[1] - st.Y[2] - 2.0 * h * xi0) / 3.0;
        const double moved = std::abs(Y0 - st.Y[0]);
        st.Y[0] = Y0;
        if (moved <= 1e-14 * std::max(1.0, std::abs(Y0))) break;
    }
    sigma = base_->sigma_from_boundary(st.Y[0], sigma);
    st.sigma = sigma;
    st.sigma_dot = st.Yt[0] / base_->dh_shift(sigma);
    return st;
}

PerturbationState FreeBoundarySim::step(const PerturbationState& st, double dt) const {
    const int nn = n();
    if (static_cast<int>(st.Y.size()) != nn || static_cast<int>(st.Yt.size()) != nn) {
        throw UsageError("state size does not match the base grid");
    }
    if (!(dt > 0.0)) throw UsageError("step: dt must be positive");

    std::vector<double> w1, w2, w3, w4, a1, a2, a3, a4;
    std::vector<double> W(nn), V(nn);
    Stage stage;

    rhs(st.Y, st.Yt, w1, a1, &stage);
    for (int i = 0; i < nn; ++i) {
        W[i] = st.Y[i] + 0.5 * dt * w1[i];
        V[i] = st.Yt[i] + 0.5 * dt * a1[i];
    }
    rhs(W, V, w2, a2, nullptr);
    for (int i = 0; i < nn; ++i) {
        W[i] = st.Y[i] + 0.5 * dt * w2[i];
        V[i] = st.Yt[i] + 0.5 * dt * a2[i];
    }
    rhs(W, V, w3, a3, nullptr);
    for (int i = 0; i < nn; ++i) {
        W[i] = st.Y[i] + dt * w3[i];
        V[i] = st.Yt[i] + dt * a3[i];
    }
    rhs(W, V, w4, a4, nullptr);

    PerturbationState out;
    out.t = st.t + dt;
    out.Y.resize(nn);
    out.Yt.resize(nn);
    for (int i = 0; i < nn; ++i) {
        out.Y[i] = st.Y[i] + dt / 6.0 * (w1[i] + 2.0 * w2[i] + 2.0 * w3[i] + w4[i]);
        out.Yt[i] = st.Yt[i] + dt / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
    }
    if (opts_.wave_only) {
        out.sigma = 0.0;
        out.sigma_dot = 0.0;
    } else {
        out.sigma = base_->sigma_from_boundary(out.Y[0], stage.sigma);
        out.sigma_dot = out.Yt[0] / base_->dh_shift(out.sigma);
    }
    return out;
}

double FreeBoundarySim::energy(const PerturbationState& st) const {
    const BaseState& b = *base_;
    const int N = n() - 1;
    const double h = dx();
    double sigma = 0.0, sigma_dot = 0.0, xi0 = 0.0;
    if (!opts_.wave_only) {
        sigma = b.sigma_from_boundary(st.Y[0], st.sigma);
        sigma_dot = st.Yt[0] / b.dh_shift(sigma);
        xi0 = boundary_slope(st.Y[0], st.Yt[0], sigma, sigma_dot);
    }
    const double q2 = jac_.q2(sigma);
    const double s = b.x0() + sigma;
    const auto& grid = b.tables().xs;
    double sum = 0.0;
    for (int i = 0; i <= N; ++i) {
        double Wx;
        if (i == 0) {
            Wx = xi0;
        } else if (i == N) {
            Wx = 0.0;
        } else {
            Wx = (st.Y[i + 1] - st.Y[i - 1]) / (2.0 * h);
        }
        const double q1i = jac_.q1(grid[i], sigma);
        const double xp = s + (grid[i] - b.x0()) / q2;
        const double rho = b.rho_plus(xp);
        const double kap = b.kappa(xp);
        const double Yx = q2 * Wx;
        const double Yt = st.Yt[i] - sigma_dot * q1i * Wx;
        const double density =
            (Yt * Yt + kap * Yx * Yx + rho * st.Y[i] * st.Y[i]) / rho;
        sum += (i == 0 || i == N) ? 0.5 * density : density;
    }
    const double boundary = b.E_plus(s) / b.rho_plus(s) * st.Y[0] * st.Y[0];
    return boundary + sum * h / q2;
}

double FreeBoundarySim::sup_slope(const PerturbationState& st) const {
    const BaseState& b = *base_;
    const int N = n() - 1;
    const double h = dx();
    double sigma = 0.0;
    if (!opts_.wave_only) sigma = b.sigma_from_boundary(st.Y[0], st.sigma);
    const double q2 = jac_.q2(sigma);
    double sup = 0.0;
    for (int i = 1; i < N; ++i) {
        sup = std::max(sup, std::abs(q2 * (st.Y[i + 1] - st.Y[i - 1]) / (2.0 * h)));
    }
    if (!opts_.wave_only) {
        const double sigma_dot = st.Yt[0] / b.dh_shift(sigma);
        sup = std::max(sup, std::abs(q2 * boundary_slope(st.Y[0], st.Yt[0], sigma, sigma_dot)));
    }
    return sup;
}

PerturbationState step(const PerturbationState& s, double dt, const BaseState& base,
                       const TransformJacobian& jac, const DynamicsOptions& opts) {
    if (jac.x0 != base.x0() || jac.L != base.L()) {
        throw UsageError("transform does not match the base state interval");
    }
    FreeBoundarySim sim(base, opts);
    return sim.step(s, dt);
}

EvolutionReport evolve_and_measure(const BaseState& base, const PerturbationState& initial,
                                   double T, const DynamicsOptions& opts, int n_samples) {
    if (!(T > 0.0)) throw UsageError("evolve: final time must be positive");
    if (n_samples < 2) throw UsageError("evolve: need at least 2 samples");

    FreeBoundarySim sim(base, opts);
    PerturbationState st = sim.project(initial);

    const double dt0 = sim.max_dt(st);
    const int steps = static_cast<int>(std::ceil(T / dt0));
    const double dt = T / steps;

    EvolutionReport rep;
    rep.dt = dt;
    rep.steps = steps;

    auto measure = [&](const PerturbationState& s) {
        EvolutionSample out;
        out.t = s.t;
        for (std::size_t i = 0; i < s.Y.size(); ++i) {
            out.sup_Y = std::max(out.sup_Y, std::abs(s.Y[i]));
            out.sup_Yt = std::max(out.sup_Yt, std::abs(s.Yt[i]));
        }
        out.sup_Yx = sim.sup_slope(s);
        out.sigma = s.sigma;
        out.sigma_dot = s.sigma_dot;
        out.energy = sim.energy(s);
        return out;
    };

    rep.samples.push_back(measure(st));
    const double amp0 = rep.samples.front().sup_Y + std::abs(rep.samples.front().sigma);
    const double threshold = opts.blowup_factor * amp0;

    const int stride = std::max(1, steps / (n_samples - 1));
    for (int k = 1; k <= steps; ++k) {
        try {
            st = sim.step(st, dt);
        } catch (const StateInvalid&) {
            // The state left the admissible region; growing trajectories hit
            // this (or the guards below) once the shock displacement or the
            // perturbed density leaves tabulated territory.
            rep.blew_up = true;
            break;
        } catch (const DomainError&) {
            rep.blew_up = true;
            break;
        } catch (const BoundarySolverError&) {
            rep.blew_up = true;
            break;
        }
        double sup = 0.0;
        for (double v : st.Y) sup = std::max(sup, std::abs(v));
        bool exceeded = amp0 > 0.0 && sup + std::abs(st.sigma) > threshold;
        if (exceeded || k % stride == 0 || k == steps) {
            try {
                rep.samples.push_back(measure(st));
            } catch (const DomainError&) {
                // diagnostics already need values off the tabulated branches
                exceeded = true;
            } catch (const StateInvalid&) {
                exceeded = true;
            }
            if (exceeded) {
                rep.blew_up = true;
                break;
            }
        }
    }
    rep.final_state = st;

    // tail decay fit on log(sup|Y| + |sigma|)
    const double t_end = rep.samples.back().t;
    std::vector<double> ts, ls;
    for (const auto& smp : rep.samples) {
        if (smp.t < 0.5 * t_end) continue;
        const double a = smp.sup_Y + std::abs(smp.sigma);
        if (a > 0.0) {
            ts.push_back(smp.t);
            ls.push_back(std::log(a));
        }
    }
    if (ts.size() >= 3) {
        const LineFit fit = fit_line(ts, ls);
        rep.lambda_fit = -fit.slope;
        rep.r_squared = fit.r_squared;
    }
    return rep;
}

PerturbationState bump_state(const BaseState& base, double amplitude, double center,
                             double width) {
    if (!(width > 0.0)) throw UsageError("bump width must be positive");
    PerturbationState st;
    const auto& xs = base.tables().xs;
    st.Y.resize(xs.size());
    st.Yt.assign(xs.size(), 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double z = (xs[i] - center) / width;
        const double w = std::max(0.0, 1.0 - z * z);
        st.Y[i] = amplitude * w * w * w * w;
    }
    return st;
}

}  // namespace tep
