#include "tep/spectrum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "tep/errors.hpp"
#include "tep/linear.hpp"

namespace tep {

namespace {

// Second-order derivative of the first component: one-sided at both ends,
// centered inside. Matches the slopes the projection enforces, so the form
// reproduces the ledger energy on projected states.
void first_derivative(const std::vector<double>& f, double h, std::vector<double>& out) {
    const int N = static_cast<int>(f.size()) - 1;
    out.resize(N + 1);
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    for (int i = 1; i < N; ++i) out[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    out[N] = (3.0 * f[N] - 4.0 * f[N - 1] + f[N - 2]) / (2.0 * h);
}

}  // namespace

EnergyForm::EnergyForm(const BaseState& base, bool allow_shift) : base_(&base) {
    const auto& t = base.tables();
    const int nn = base.n();
    if (nn < 3) throw UsageError("energy form needs at least three grid nodes");
    const double h = base.dx();
    kap_.resize(nn);
    rho_.resize(nn);
    weight_.resize(nn);
    for (int i = 0; i < nn; ++i) {
        kap_[i] = -t.a11[i];
        rho_[i] = t.g[i];
        weight_[i] = (i == 0 || i == nn - 1) ? 0.5 * h : h;
    }
    w0_ = base.E_plus(base.x0()) / rho_[0];
    w0_used_ = w0_;

    // Gram matrix of the first-component part of the form; the largest value
    // of h1(x0)^2 against it is e0^T A^{-1} e0.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nn, nn);
    auto add_slope = [&](int i, const int idx[3], const double c[3]) {
        const double scale = weight_[i] * kap_[i] / rho_[i];
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) A(idx[a], idx[b]) += scale * c[a] * c[b];
    };
    {
        const int idx[3] = {0, 1, 2};
        const double c[3] = {-1.5 / h, 2.0 / h, -0.5 / h};
        add_slope(0, idx, c);
    }
    for (int i = 1; i + 1 < nn; ++i) {
        const int idx[3] = {i - 1, i, i + 1};
        const double c[3] = {-0.5 / h, 0.0, 0.5 / h};
        add_slope(i, idx, c);
    }
    {
        const int idx[3] = {nn - 3, nn - 2, nn - 1};
        const double c[3] = {0.5 / h, -2.0 / h, 1.5 / h};
        add_slope(nn - 1, idx, c);
    }
    for (int i = 0; i < nn; ++i) A(i, i) += weight_[i];

    Eigen::VectorXd e0 = Eigen::VectorXd::Zero(nn);
    e0(0) = 1.0;
    trace_constant_ = e0.dot(A.ldlt().solve(e0));

    if (w0_ < 0.0 && 1.0 + w0_ * trace_constant_ <= 1e-10) {
        if (!allow_shift) {
            throw NormDegenerate(
                "boundary weight " + std::to_string(w0_) +
                " defeats positivity (measured trace constant " +
                std::to_string(trace_constant_) + "); the energy form is not a norm");
        }
        shifted_ = true;
        w0_used_ = 0.0;
    }
}

double EnergyForm::dot(const std::vector<double>& g1, const std::vector<double>& g2,
                       const std::vector<double>& h1,
                       const std::vector<double>& h2) const {
    const int nn = base_->n();
    if (static_cast<int>(g1.size()) != nn || static_cast<int>(g2.size()) != nn ||
        static_cast<int>(h1.size()) != nn || static_cast<int>(h2.size()) != nn) {
        throw UsageError("energy form: vector size does not match the base grid");
    }
    const double h = base_->dx();
    std::vector<double> dg, dh;
    first_derivative(g1, h, dg);
    first_derivative(h1, h, dh);
    double sum = w0_used_ * g1[0] * h1[0];
    for (int i = 0; i < nn; ++i) {
        sum += weight_[i] *
               ((g2[i] * h2[i] + kap_[i] * dg[i] * dh[i]) / rho_[i] + g1[i] * h1[i]);
    }
    return sum;
}

double EnergyForm::norm(const std::vector<double>& h1,
                        const std::vector<double>& h2) const {
    return std::sqrt(std::max(0.0, dot(h1, h2, h1, h2)));
}

namespace {

// Fixed-domain linear evolution over [0, T]. The map is the raw step
// operator: re-projecting between applications would compress the generator
// onto the boundary-compatible subspace, and that compression carries
// spurious boundary eigenvalues that the actual evolution never excites.
// Only the seed vector is projected, once.
class SolutionMap {
public:
    SolutionMap(const BaseState& base, double T, const SpectrumOptions& o)
        : sim_(base, wrap(o)) {
        steps_ = std::max(1, static_cast<int>(std::ceil(T / sim_.max_dt() - 1e-12)));
        dt_ = T / steps_;
    }

    void apply(std::vector<double>& Y, std::vector<double>& V) const {
        LinearState st;
        st.t = 0.0;
        st.Y = std::move(Y);
        st.Yt = std::move(V);
        for (int k = 0; k < steps_; ++k) st = sim_.step(st, dt_);
        Y = std::move(st.Y);
        V = std::move(st.Yt);
    }

    void project_only(std::vector<double>& Y, std::vector<double>& V) const {
        LinearState st;
        st.Y = std::move(Y);
        st.Yt = std::move(V);
        st = sim_.project(std::move(st));
        Y = std::move(st.Y);
        V = std::move(st.Yt);
    }

    double dt() const { return dt_; }
    int steps() const { return steps_; }

private:
    static LinearOptions wrap(const SpectrumOptions& o) {
        LinearOptions lo;
        lo.cfl = o.cfl;
        lo.dissipation = o.dissipation;
        return lo;
    }

    LinearSim sim_;
    int steps_ = 0;
    double dt_ = 0.0;
};

struct Pair {
    std::vector<double> Y, V;
};

void axpy(Pair& y, double a, const Pair& x) {
    for (std::size_t i = 0; i < y.Y.size(); ++i) {
        y.Y[i] += a * x.Y[i];
        y.V[i] += a * x.V[i];
    }
}

void scale(Pair& y, double a) {
    for (std::size_t i = 0; i < y.Y.size(); ++i) {
        y.Y[i] *= a;
        y.V[i] *= a;
    }
}

std::array<std::complex<double>, 2> eig2(double b00, double b01, double b10, double b11) {
    const double tr = b00 + b11;
    const double det = b00 * b11 - b01 * b10;
    const double disc = 0.25 * tr * tr - det;
    if (disc >= 0.0) {
        const double r = std::sqrt(disc);
        return {std::complex<double>(0.5 * tr + r, 0.0),
                std::complex<double>(0.5 * tr - r, 0.0)};
    }
    const double im = std::sqrt(-disc);
    return {std::complex<double>(0.5 * tr, im), std::complex<double>(0.5 * tr, -im)};
}

Pair random_pair(int nn, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Pair p;
    p.Y.resize(nn);
    p.V.resize(nn);
    for (int i = 0; i < nn; ++i) p.Y[i] = nd(rng);
    for (int i = 0; i < nn; ++i) p.V[i] = nd(rng);
    return p;
}

SpectrumReport power_iteration(const SolutionMap& map, const EnergyForm& form, int nn,
                               const SpectrumOptions& opts, SpectrumReport rep) {
    Pair v = random_pair(nn, opts.seed);
    map.project_only(v.Y, v.V);
    scale(v, 1.0 / form.norm(v.Y, v.V));

    // Bootstrap apply so the two-term recurrence below always has S u = r v.
    Pair prev = v;
    map.apply(v.Y, v.V);
    double r_cur = form.norm(v.Y, v.V);
    scale(v, 1.0 / r_cur);

    double est_prev = 0.0;
    int calm = 0;
    for (int it = 1; it <= opts.max_iters; ++it) {
        Pair w = v;
        map.apply(w.Y, w.V);
        const double gw = form.norm(w.Y, w.V);

        // Two-step estimate: eigenvalues of the map compressed onto
        // span{previous iterate, current iterate}. This captures a complex
        // dominant pair without waiting for the rotation to average out.
        const double c = form.dot(prev.Y, prev.V, v.Y, v.V);
        Pair q2 = v;
        axpy(q2, -c, prev);
        const double s = form.norm(q2.Y, q2.V);
        double est;
        std::array<std::complex<double>, 2> pair{};
        if (s > 1e-12) {
            scale(q2, 1.0 / s);
            const double w_q1 = form.dot(prev.Y, prev.V, w.Y, w.V);
            const double w_q2 = form.dot(q2.Y, q2.V, w.Y, w.V);
            // Compression onto span{q1, q2}: S q1 = r (c q1 + s q2) and
            // S q2 = (S v - c S q1) / s with S v = w.
            pair = eig2(r_cur * c, (w_q1 - r_cur * c * c) / s, r_cur * s,
                        (w_q2 - r_cur * c * s) / s);
            est = std::max(std::abs(pair[0]), std::abs(pair[1]));
            Pair leak = w;
            axpy(leak, -w_q1, prev);
            axpy(leak, -w_q2, q2);
            rep.residual = form.norm(leak.Y, leak.V) / gw;
        } else {
            // Iterate direction already converged: a real dominant mode.
            pair[0] = std::complex<double>(gw, 0.0);
            pair[1] = 0.0;
            est = gw;
            rep.residual = 0.0;
        }
        rep.history.push_back(est);
        rep.iterations = it;

        calm = (std::abs(est - est_prev) <= opts.tol * std::max(est, 1e-300)) ? calm + 1
                                                                              : 0;
        est_prev = est;
        rep.dominant_modulus = est;
        rep.eigenvalues.assign(1, std::abs(pair[0]) >= std::abs(pair[1])
                                      ? (pair[0].imag() < 0.0 ? std::conj(pair[0]) : pair[0])
                                      : (pair[1].imag() < 0.0 ? std::conj(pair[1]) : pair[1]));
        if (calm >= 3) break;

        prev = v;
        r_cur = gw;
        v = std::move(w);
        scale(v, 1.0 / gw);
    }
    return rep;
}

SpectrumReport krylov_iteration(const SolutionMap& map, const EnergyForm& form, int nn,
                                const SpectrumOptions& opts, SpectrumReport rep) {
    const int m = std::min(std::max(opts.krylov_dim, opts.n_modes + 2), 2 * nn);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    std::vector<Pair> basis;
    basis.reserve(m + 1);

    Pair v = random_pair(nn, opts.seed);
    map.project_only(v.Y, v.V);
    scale(v, 1.0 / form.norm(v.Y, v.V));
    basis.push_back(std::move(v));

    int m_eff = m;
    bool breakdown = false;
    for (int j = 0; j < m; ++j) {
        Pair w = basis[j];
        map.apply(w.Y, w.V);
        // Modified Gram-Schmidt, two passes for orthogonality in the
        // energy inner product.
        for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i <= j; ++i) {
                const double hij = form.dot(basis[i].Y, basis[i].V, w.Y, w.V);
                axpy(w, -hij, basis[i]);
                H(i, j) += hij;
            }
        }
        const double hjj = form.norm(w.Y, w.V);
        H(j + 1, j) = hjj;

        Eigen::EigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(j + 1, j + 1));
        double est = 0.0;
        for (int i = 0; i <= j; ++i) est = std::max(est, std::abs(es.eigenvalues()[i]));
        rep.history.push_back(est);
        rep.iterations = j + 1;

        if (hjj <= 1e-13) {
            m_eff = j + 1;
            breakdown = true;
            break;
        }
        scale(w, 1.0 / hjj);
        basis.push_back(std::move(w));
    }

    Eigen::EigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(m_eff, m_eff));
    std::vector<int> order(m_eff);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(es.eigenvalues()[a]) > std::abs(es.eigenvalues()[b]);
    });
    const int keep = std::min(opts.n_modes, m_eff);
    for (int i = 0; i < keep; ++i) rep.eigenvalues.push_back(es.eigenvalues()[order[i]]);
    rep.dominant_modulus = std::abs(es.eigenvalues()[order[0]]);

    if (breakdown) {
        rep.residual = 0.0;
    } else {
        const auto y = es.eigenvectors().col(order[0]);
        rep.residual = H(m_eff, m_eff - 1) * std::abs(y(m_eff - 1)) /
                       std::max(rep.dominant_modulus, 1e-300);
    }
    return rep;
}

}  // namespace

SpectrumReport solution_operator_spectrum(const BaseState& base, double T,
                                          const SpectrumOptions& opts) {
    if (!(T > 0.0)) throw UsageError("spectrum: horizon T must be positive");
    if (opts.n_modes < 1) throw UsageError("spectrum: n_modes must be at least 1");
    if (opts.max_iters < 5) throw UsageError("spectrum: max_iters must be at least 5");
    if (!(opts.tol > 0.0)) throw UsageError("spectrum: tol must be positive");

    EnergyForm form(base, !opts.strict_norm);
    SolutionMap map(base, T, opts);

    SpectrumReport rep;
    rep.norm_shifted = form.shifted();
    rep.T = T;
    rep.dt = map.dt();
    rep.steps_per_apply = map.steps();

    if (opts.n_modes == 1) return power_iteration(map, form, base.n(), opts, rep);
    return krylov_iteration(map, form, base.n(), opts, rep);
}

}  // namespace tep
