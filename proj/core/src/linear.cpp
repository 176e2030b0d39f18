#include "tep/linear.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tep/errors.hpp"
#include "tep/numerics.hpp"

namespace tep {

LinearSim::LinearSim(const BaseState& base, const LinearOptions& opts)
    : base_(&base), opts_(opts) {
    if (!(opts_.cfl > 0.0) || opts_.cfl > 1.0) {
        throw UsageError("cfl must lie in (0, 1], got " + std::to_string(opts_.cfl));
    }
    if (opts_.m_max < 0) throw UsageError("m_max must be nonnegative");
    const auto& t = base.tables();
    const int nn = n();
    const double h = dx();
    kap_.resize(nn);
    beta_.resize(nn);
    bp_.resize(nn);
    E_.resize(nn);
    rho_.resize(nn);
    for (int i = 0; i < nn; ++i) {
        kap_[i] = -t.a11[i];
        beta_[i] = 2.0 * t.a01[i];
        bp_[i] = t.b0[i];
        E_[i] = base.E_plus(t.xs[i]);
        rho_[i] = t.g[i];
        v_fast_ = std::max(v_fast_, t.a01[i] + std::sqrt(t.a01[i] * t.a01[i] - t.a11[i]));
    }
    kap_mid_.resize(nn - 1);
    beta_mid_.resize(nn - 1);
    for (int i = 0; i + 1 < nn; ++i) {
        const double xm = t.xs[i] + 0.5 * h;
        kap_mid_[i] = base.kappa(xm);
        beta_mid_[i] = 2.0 * base.u_plus(xm);
    }
    const auto& r = base.shock_response();
    d1_ = r.d1_0;
    e1_ = r.e1_0;
    kapp0_ = base.kappa_prime(base.x0());
}

void LinearSim::accelerate(const std::vector<double>& Y, const std::vector<double>& V,
                           std::vector<double>& A) const {
    const int N = n() - 1;
    const double h = dx();
    A.resize(N + 1);

    // shock side: the impedance relation fixes the slope; the mixed
    // derivative is closed with the same one-sided difference as the
    // nonlinear scheme so both operators coincide on generic data
    const double xi0 = d1_ * V[0] + e1_ * Y[0];
    const double Wxx0 = 2.0 * (Y[1] - Y[0] - h * xi0) / (h * h);
    const double Vx0 = (-3.0 * V[0] + 4.0 * V[1] - V[2]) / (2.0 * h);
    A[0] = kapp0_ * xi0 + kap_[0] * Wxx0 - bp_[0] * V[0] - beta_[0] * Vx0 -
           E_[0] * xi0 - rho_[0] * Y[0];

    for (int i = 1; i < N; ++i) {
        const double Fr = kap_mid_[i] * (Y[i + 1] - Y[i]) / h -
                          beta_mid_[i] * 0.5 * (V[i] + V[i + 1]);
        const double Fl = kap_mid_[i - 1] * (Y[i] - Y[i - 1]) / h -
                          beta_mid_[i - 1] * 0.5 * (V[i - 1] + V[i]);
        A[i] = (Fr - Fl) / h - E_[i] * (Y[i + 1] - Y[i - 1]) / (2.0 * h) -
               rho_[i] * Y[i];
    }

    // outlet: mirror closure for the Neumann condition, one-sided slope for
    // the outgoing velocity characteristic (same treatment as the nonlinear
    // scheme; the true slope vanishes so this is an O(h) relaxation)
    const double WxxN = 2.0 * (Y[N - 1] - Y[N]) / (h * h);
    A[N] = kap_[N] * WxxN - beta_[N] * (V[N] - V[N - 1]) / h - bp_[N] * V[N] -
           rho_[N] * Y[N];

    if (opts_.dissipation > 0.0) {
        const double nu = opts_.dissipation * v_fast_ / (16.0 * h);
        for (int i = 2; i <= N - 2; ++i) {
            A[i] -= nu * (V[i - 2] - 4.0 * V[i - 1] + 6.0 * V[i] - 4.0 * V[i + 1] +
                          V[i + 2]);
        }
        A[1] -= nu * (-V[0] + 2.0 * V[1] - V[2]);
        A[N - 1] -= nu * (-V[N - 2] + 2.0 * V[N - 1] - V[N]);
    }
}

LinearState LinearSim::step(const LinearState& s, double dt) const {
    const int nn = n();
    if (static_cast<int>(s.Y.size()) != nn || static_cast<int>(s.Yt.size()) != nn) {
        throw UsageError("state size does not match the base grid");
    }
    if (!(dt > 0.0)) throw UsageError("step: dt must be positive");

    std::vector<double> a1, a2, a3, a4;
    std::vector<double> Y(nn), V(nn);
    const std::vector<double>& w1 = s.Yt;
    accelerate(s.Y, s.Yt, a1);
    for (int i = 0; i < nn; ++i) {
        Y[i] = s.Y[i] + 0.5 * dt * w1[i];
        V[i] = s.Yt[i] + 0.5 * dt * a1[i];
    }
    std::vector<double> w2 = V;
    accelerate(Y, V, a2);
    for (int i = 0; i < nn; ++i) {
        Y[i] = s.Y[i] + 0.5 * dt * w2[i];
        V[i] = s.Yt[i] + 0.5 * dt * a2[i];
    }
    std::vector<double> w3 = V;
    accelerate(Y, V, a3);
    for (int i = 0; i < nn; ++i) {
        Y[i] = s.Y[i] + dt * w3[i];
        V[i] = s.Yt[i] + dt * a3[i];
    }
    std::vector<double> w4 = V;
    accelerate(Y, V, a4);

    LinearState out;
    out.t = s.t + dt;
    out.Y.resize(nn);
    out.Yt.resize(nn);
    for (int i = 0; i < nn; ++i) {
        out.Y[i] = s.Y[i] + dt / 6.0 * (w1[i] + 2.0 * w2[i] + 2.0 * w3[i] + w4[i]);
        out.Yt[i] = s.Yt[i] + dt / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
    }
    return out;
}

LinearState LinearSim::project(LinearState s) const {
    const int N = n() - 1;
    if (static_cast<int>(s.Y.size()) != N + 1 || static_cast<int>(s.Yt.size()) != N + 1) {
        throw UsageError("state size does not match the base grid");
    }
    const double h = dx();
    s.Y[N] = (4.0 * s.Y[N - 1] - s.Y[N - 2]) / 3.0;
    s.Yt[N] = (4.0 * s.Yt[N - 1] - s.Yt[N - 2]) / 3.0;
    // one-sided second-order slope equal to d1 Yt + e1 Y, linear in Y[0]
    s.Y[0] = (4.0 * s.Y[1] - s.Y[2] - 2.0 * h * d1_ * s.Yt[0]) / (3.0 + 2.0 * h * e1_);
    return s;
}

double LinearSim::boundary_slope(const LinearState& s) const {
    return d1_ * s.Yt[0] + e1_ * s.Y[0];
}

std::vector<double> LinearSim::phi_chain(const LinearState& s) const {
    const int N = n() - 1;
    const double h = dx();
    std::vector<std::vector<double>> d;
    d.push_back(s.Y);
    d.push_back(s.Yt);
    for (int m = 2; m <= opts_.m_max + 1; ++m) {
        std::vector<double> next;
        accelerate(d[m - 2], d[m - 1], next);
        d.push_back(std::move(next));
    }
    const double bweight = E_[0] / rho_[0];
    std::vector<double> out(opts_.m_max + 1);
    for (int m = 0; m <= opts_.m_max; ++m) {
        const auto& um = d[m];
        const auto& up = d[m + 1];
        double sum = 0.0;
        for (int i = 0; i <= N; ++i) {
            double Yx;
            if (i == 0) {
                Yx = d1_ * up[0] + e1_ * um[0];
            } else if (i == N) {
                Yx = 0.0;
            } else {
                Yx = (um[i + 1] - um[i - 1]) / (2.0 * h);
            }
            const double density =
                (up[i] * up[i] + kap_[i] * Yx * Yx + rho_[i] * um[i] * um[i]) / rho_[i];
            sum += (i == 0 || i == N) ? 0.5 * density : density;
        }
        out[m] = bweight * um[0] * um[0] + sum * h;
    }
    return out;
}

double LinearSim::boundary_dissipation_rate(const LinearState& s) const {
    const int N = n() - 1;
    const double J = base_->J();
    const double w0 = J / (rho_[0] * rho_[0]);
    const double wL = J / (rho_[N] * rho_[N]);
    return 2.0 * (wL * s.Yt[N] * s.Yt[N] + w0 * s.Yt[0] * s.Yt[0]);
}

LinearRun evolve_linear(const BaseState& base, const std::vector<double>& h1,
                        const std::vector<double>& h2, double T,
                        const LinearOptions& opts) {
    if (!(T > 0.0)) throw UsageError("evolve_linear: final time must be positive");
    LinearSim sim(base, opts);
    const int nn = sim.n();
    if (static_cast<int>(h1.size()) != nn || static_cast<int>(h2.size()) != nn) {
        throw UsageError("initial data size does not match the base grid");
    }

    const double bound = sim.max_dt();
    double dt;
    int steps;
    if (opts.dt > 0.0) {
        if (opts.dt > bound) {
            throw UsageError("time step " + std::to_string(opts.dt) +
                             " violates the stability bound " + std::to_string(bound));
        }
        dt = opts.dt;
        steps = static_cast<int>(std::ceil(T / dt - 1e-9));
    } else {
        steps = static_cast<int>(std::ceil(T / bound));
        dt = T / steps;
    }

    LinearState st;
    st.t = 0.0;
    st.Y = h1;
    st.Yt = h2;
    st = sim.project(std::move(st));

    LinearRun run;
    run.dt = dt;
    run.steps = steps;
    auto& led = run.ledger;
    led.phi.resize(opts.m_max + 1);

    double D0 = 0.0;
    double rate_prev = sim.boundary_dissipation_rate(st);
    double phi0_init = 0.0;

    auto record = [&](const LinearState& s, bool first) {
        const std::vector<double> phis = sim.phi_chain(s);
        if (first) phi0_init = phis[0];
        led.times.push_back(s.t);
        for (int m = 0; m <= opts.m_max; ++m) led.phi[m].push_back(phis[m]);
        led.D0_cumulative.push_back(D0);
        led.identity_residual.push_back(phis[0] + D0 - phi0_init);
        led.boundary_Y.push_back(s.Y[0]);
        led.boundary_Yt.push_back(s.Yt[0]);
        led.boundary_Yx.push_back(sim.boundary_slope(s));
        led.outlet_Yt.push_back(s.Yt[nn - 1]);
    };

    record(st, true);
    if (opts.state_stride > 0) run.states.push_back(st);

    for (int k = 1; k <= steps; ++k) {
        const double step_dt = (opts.dt > 0.0 && k == steps) ? (T - st.t) : dt;
        if (step_dt <= 0.0) break;
        st = sim.step(st, step_dt);
        const double rate = sim.boundary_dissipation_rate(st);
        D0 += 0.5 * step_dt * (rate_prev + rate);
        rate_prev = rate;
        record(st, false);
        if (opts.state_stride > 0 && k % opts.state_stride == 0) {
            run.states.push_back(st);
        }
    }
    run.final_state = std::move(st);
    return run;
}

DecayReport fit_decay_rate(const EnergyLedger& ledger) {
    if (ledger.phi.size() < 2) {
        throw UsageError("ledger does not carry phi_0 and phi_1");
    }
    const std::size_t n = ledger.times.size();
    if (n < 11) throw UsageError("ledger too short to span five contraction windows");

    std::vector<double> a(n);
    double peak = 0.0, trough = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        a[k] = ledger.phi_hat1(k);
        peak = std::max(peak, a[k]);
        trough = std::min(trough, a[k]);
    }
    if (peak <= 0.0 && trough < 0.0) {
        // A negative field at the shock makes the boundary-weighted form
        // indefinite; the whole series sits below zero there. Fit the
        // magnitude, which still carries the growth rate.
        for (auto& v : a) v = -v;
        peak = -trough;
    }
    if (peak <= 0.0) throw UsageError("ledger has no signal to fit");

    const double t_end = ledger.times.back();
    std::size_t tail = 0;
    while (tail < n && ledger.times[tail] < 0.5 * t_end) ++tail;
    if (n - tail < 11) tail = n - 11;

    DecayReport rep;
    std::vector<double> ts, ls;
    for (std::size_t k = tail; k < n; ++k) {
        if (a[k] > 0.0) {
            ts.push_back(ledger.times[k]);
            ls.push_back(std::log(a[k]));
        }
    }
    if (ts.size() < 3) throw UsageError("tail of the ledger has no signal to fit");
    const LineFit fit = fit_line(ts, ls);
    rep.lambda0 = -fit.slope;
    rep.r_squared = fit.r_squared;
    rep.unstable = !(rep.lambda0 > 0.0);

    // contraction window: smallest sample multiple whose tail ratios are all
    // below one and mutually within 10%, spanning at least five windows
    const std::size_t len = n - tail;
    const double ds = (ledger.times.back() - ledger.times[tail]) / (len - 1);
    std::vector<double> best;
    double best_window = 0.0;
    for (std::size_t k = 1; 5 * k <= len - 1; ++k) {
        std::vector<double> ratios;
        bool contracting = true;
        for (std::size_t j = tail; j + k < n; j += k) {
            if (!(a[j] > 0.0)) {
                contracting = false;
                break;
            }
            const double r = a[j + k] / a[j];
            if (!(r < 1.0)) {
                contracting = false;
                break;
            }
            ratios.push_back(r);
        }
        if (!contracting || ratios.size() < 5) continue;
        const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
        if (best.empty()) {
            best = ratios;
            best_window = k * ds;
        }
        if (*hi <= 1.1 * *lo) {
            rep.alpha0 = std::move(ratios);
            rep.window = k * ds;
            return rep;
        }
    }
    rep.alpha0 = std::move(best);
    rep.window = best_window;
    return rep;
}

}  // namespace tep
