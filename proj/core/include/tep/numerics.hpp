#pragma once

// Small numerical building blocks shared across the library: an adaptive
// Dormand-Prince 5(4) integrator for low-dimensional ODE systems, cubic
// Hermite interpolation, composite quadrature, scalar root finding, and a
// least-squares line fit.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "tep/errors.hpp"

namespace tep {

// ---------------------------------------------------------------------------
// Adaptive Runge-Kutta
// ---------------------------------------------------------------------------

struct OdeOptions {
    double tol = 1e-10;        // local error tolerance (mixed abs/rel)
    double h_init = 1e-4;      // initial step magnitude
    double h_min = 1e-14;      // below this the step controller gives up
    double h_max = 0.0;        // 0 means no cap
    std::size_t max_steps = 50'000'000;
};

// Integrates y' = f(x, y) from x0 to x1 (either direction), calling
// `observe(x, y)` at x0, at every requested output point, and at x1.
// Output points must be sorted in integration direction; steps are clipped
// so observations land exactly on them. The right-hand side may throw to
// abort integration (used for singularity guards).
template <std::size_t N>
void integrate_ode(const std::function<std::array<double, N>(double, const std::array<double, N>&)>& f,
                   double x0, double x1, std::array<double, N> y,
                   const std::vector<double>& output_points,
                   const std::function<void(double, const std::array<double, N>&)>& observe,
                   const OdeOptions& opts = {}) {
    // Dormand-Prince 5(4) tableau.
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const double dir = (x1 >= x0) ? 1.0 : -1.0;
    const double span = std::abs(x1 - x0);
    if (span == 0.0) {
        observe(x0, y);
        return;
    }

    double x = x0;
    double h = dir * std::min(opts.h_init, span);
    if (opts.h_max > 0.0) h = dir * std::min(std::abs(h), opts.h_max);

    std::size_t next_out = 0;
    observe(x, y);
    while (next_out < output_points.size() && dir * (output_points[next_out] - x) <= 0.0)
        ++next_out;

    std::array<double, N> k1 = f(x, y);
    bool k1_fresh = true;

    for (std::size_t step = 0; step < opts.max_steps; ++step) {
        if (dir * (x - x1) >= 0.0) return;

        // Clip the executed step to the next output point or the interval
        // end, but keep `h` as the controller's working size so landing on
        // an output node does not collapse subsequent steps.
        double target = x1;
        if (next_out < output_points.size() && dir * (output_points[next_out] - x1) < 0.0)
            target = output_points[next_out];
        double hs = h;
        bool clipped = false;
        if (dir * (x + hs - target) >= 0.0) {
            hs = target - x;
            clipped = true;
        }

        if (!k1_fresh) {
            k1 = f(x, y);
            k1_fresh = true;
        }

        std::array<double, N> yt;
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * a21 * k1[i];
        auto k2 = f(x + c2 * hs, yt);
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
        auto k3 = f(x + c3 * hs, yt);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        auto k4 = f(x + c4 * hs, yt);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        auto k5 = f(x + c5 * hs, yt);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                 a65 * k5[i]);
        auto k6 = f(x + hs, yt);

        std::array<double, N> y5;
        for (std::size_t i = 0; i < N; ++i)
            y5[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        auto k7 = f(x + hs, y5);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            double ei = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                              e7 * k7[i]);
            double scale = opts.tol * (1.0 + std::max(std::abs(y[i]), std::abs(y5[i])));
            err = std::max(err, std::abs(ei) / scale);
        }

        double grow = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        grow = std::min(5.0, std::max(0.2, grow));

        if (err <= 1.0) {
            x = clipped ? target : x + hs;  // land exactly on clip targets
            y = y5;
            k1 = k7;  // FSAL
            while (next_out < output_points.size() &&
                   dir * (x - output_points[next_out]) >= 0.0) {
                observe(x, y);
                ++next_out;
            }
            if (dir * (x - x1) >= 0.0) {
                if (next_out >= output_points.size() ||
                    dir * (output_points[next_out] - x1) > 0.0) {
                    // x1 itself was not an output point; still report it.
                    if (output_points.empty() ||
                        std::abs(output_points.back() - x1) > 0.0)
                        observe(x, y);
                }
                return;
            }
            // Grow from the executed step but never shrink the working size
            // merely because the step was clipped.
            if (clipped)
                h = dir * std::max(std::abs(h), std::abs(hs * grow));
            else
                h = hs * grow;
        } else {
            k1_fresh = true;  // k1 still valid at unchanged x
            h = hs * grow;
            if (std::abs(h) < opts.h_min)
                throw SolverFailure("ODE step size underflow at x = " + std::to_string(x));
        }
        if (opts.h_max > 0.0 && std::abs(h) > opts.h_max) h = dir * opts.h_max;
    }
    throw SolverFailure("ODE integration exceeded the step budget");
}

// ---------------------------------------------------------------------------
// Cubic Hermite interpolation on a sampled function with known derivatives
// ---------------------------------------------------------------------------

class HermiteSpline {
public:
    HermiteSpline() = default;
    HermiteSpline(std::vector<double> xs, std::vector<double> ys, std::vector<double> dys)
        : xs_(std::move(xs)), ys_(std::move(ys)), dys_(std::move(dys)) {
        if (xs_.size() != ys_.size() || xs_.size() != dys_.size() || xs_.size() < 2)
            throw UsageError("HermiteSpline: inconsistent sample arrays");
    }

    double x_min() const { return xs_.front(); }
    double x_max() const { return xs_.back(); }

    double value(double x) const { return eval(x).first; }
    double derivative(double x) const { return eval(x).second; }

    std::pair<double, double> eval(double x) const {
        const std::size_t i = locate(x);
        const double h = xs_[i + 1] - xs_[i];
        const double t = (x - xs_[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1;
        const double h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2;
        const double h11 = t3 - t2;
        const double v = h00 * ys_[i] + h * h10 * dys_[i] + h01 * ys_[i + 1] + h * h11 * dys_[i + 1];
        const double dh00 = (6 * t2 - 6 * t) / h;
        const double dh10 = 3 * t2 - 4 * t + 1;
        const double dh01 = (-6 * t2 + 6 * t) / h;
        const double dh11 = 3 * t2 - 2 * t;
        const double d = dh00 * ys_[i] + dh10 * dys_[i] + dh01 * ys_[i + 1] + dh11 * dys_[i + 1];
        return {v, d};
    }

private:
    std::size_t locate(double x) const {
        if (x < xs_.front() || x > xs_.back())
            throw DomainError("HermiteSpline: evaluation outside the sampled interval");
        std::size_t lo = 0, hi = xs_.size() - 1;
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            (xs_[mid] <= x ? lo : hi) = mid;
        }
        return lo;
    }

    std::vector<double> xs_, ys_, dys_;
};

// ---------------------------------------------------------------------------
// Quadrature over uniform grids
// ---------------------------------------------------------------------------

inline double trapezoid(const std::vector<double>& f, double dx) {
    if (f.size() < 2) return 0.0;
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s * dx;
}

// Composite Simpson; falls back to trapezoid on the last panel when the
// sample count is even.
inline double simpson(const std::vector<double>& f, double dx) {
    const std::size_t n = f.size();
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * dx * (f[0] + f[1]);
    double s = 0.0;
    std::size_t i = 0;
    for (; i + 2 < n; i += 2) s += dx / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    if (i + 1 < n) s += 0.5 * dx * (f[i] + f[i + 1]);
    return s;
}

// ---------------------------------------------------------------------------
// Scalar root finding
// ---------------------------------------------------------------------------

struct RootOptions {
    double x_tol = 1e-14;
    double f_tol = 0.0;
    int max_iters = 200;
};

// Bisection on a bracketing interval [lo, hi] with f(lo) and f(hi) of
// opposite (weak) sign. Returns the midpoint of the final bracket.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     const RootOptions& opts = {}) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) throw UsageError("bisect: endpoints do not bracket a root");
    for (int it = 0; it < opts.max_iters; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0 || (opts.f_tol > 0.0 && std::abs(fm) <= opts.f_tol) ||
            hi - lo <= opts.x_tol * (1.0 + std::abs(mid)))
            return mid;
        if (flo * fm < 0.0) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

// Safeguarded Newton: falls back to bisection when the Newton step leaves
// the bracket or the derivative degenerates.
inline double newton_bisect(const std::function<std::pair<double, double>(double)>& f_df,
                            double lo, double hi, const RootOptions& opts = {}) {
    auto [flo, dflo] = f_df(lo);
    auto [fhi, dfhi] = f_df(hi);
    (void)dflo;
    (void)dfhi;
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) throw UsageError("newton_bisect: endpoints do not bracket a root");
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < opts.max_iters; ++it) {
        auto [fx, dfx] = f_df(x);
        if (fx == 0.0 || (opts.f_tol > 0.0 && std::abs(fx) <= opts.f_tol)) return x;
        if (flo * fx < 0.0)
            hi = x;
        else {
            lo = x;
            flo = fx;
        }
        double x_next = (dfx != 0.0) ? x - fx / dfx : std::numeric_limits<double>::quiet_NaN();
        if (!(x_next > lo && x_next < hi)) x_next = 0.5 * (lo + hi);
        if (std::abs(x_next - x) <= opts.x_tol * (1.0 + std::abs(x_next))) return x_next;
        x = x_next;
    }
    return x;
}

// ---------------------------------------------------------------------------
// Least-squares line fit
// ---------------------------------------------------------------------------

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 1.0;
};

inline LineFit fit_line(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() != y.size() || t.size() < 2) throw UsageError("fit_line: need >= 2 samples");
    const double n = static_cast<double>(t.size());
    double st = 0, sy = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sy += y[i];
    }
    const double mt = st / n, my = sy / n;
    double stt = 0, sty = 0, syy = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double dt = t[i] - mt, dy = y[i] - my;
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    LineFit out;
    if (stt == 0.0) throw UsageError("fit_line: degenerate abscissae");
    out.slope = sty / stt;
    out.intercept = my - out.slope * mt;
    double ss_res = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double r = y[i] - (out.intercept + out.slope * t[i]);
        ss_res += r * r;
    }
    out.r_squared = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
    return out;
}

}  // namespace tep
