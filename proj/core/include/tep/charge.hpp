#pragma once

// Background (ion/doping) charge density b(x) on [0, L]. Supported
// representations: constant, finite Fourier series, polynomial, and sampled
// values with linear interpolation. Large variation is allowed; hypotheses
// like b < rho_s are checked by the callers that need them.

#include <vector>

#include "tep/errors.hpp"

namespace tep {

class BackgroundCharge {
public:
    enum class Kind { constant, fourier, polynomial, samples };

    BackgroundCharge() : BackgroundCharge(constant(1.0, 1.0)) {}

    static BackgroundCharge constant(double value, double L);

    // c0 + sum_m (cos_coeffs[m-1] cos(2 pi m x / L) + sin_coeffs[m-1] sin(2 pi m x / L))
    static BackgroundCharge fourier(double c0, std::vector<double> cos_coeffs,
                                    std::vector<double> sin_coeffs, double L);

    // sum_i coeffs[i] * x^i
    static BackgroundCharge polynomial(std::vector<double> coeffs, double L);

    // piecewise-linear through (xs, values); xs must cover [0, L]
    static BackgroundCharge samples(std::vector<double> xs, std::vector<double> values, double L);

    double operator()(double x) const;
    double L() const { return L_; }
    Kind kind() const { return kind_; }

    // Extrema located by dense sampling plus local refinement; used for
    // hypothesis checks such as 0 < min b and max b < rho_s.
    double min_on(double lo, double hi, int samples = 4097) const;
    double max_on(double lo, double hi, int samples = 4097) const;

    // Exact uniform offset b(x) + delta, preserving the representation.
    BackgroundCharge shifted(double delta) const;

    // Returns a copy with value shifted by delta(x); used by the structural
    // stability experiment. The shape callable must be valid on [0, L].
    template <class F>
    BackgroundCharge perturbed_by(F&& delta, int resample = 4097) const {
        std::vector<double> xs(resample), vals(resample);
        for (int i = 0; i < resample; ++i) {
            const double x = L_ * static_cast<double>(i) / (resample - 1);
            xs[i] = x;
            vals[i] = (*this)(x) + delta(x);
        }
        return samples(std::move(xs), std::move(vals), L_);
    }

private:
    BackgroundCharge(Kind kind, double L) : kind_(kind), L_(L) {}

    Kind kind_;
    double L_;
    double value_ = 0.0;                  // constant
    double c0_ = 0.0;                     // fourier
    std::vector<double> cos_coeffs_, sin_coeffs_;
    std::vector<double> poly_;            // polynomial
    std::vector<double> xs_, vals_;       // samples
};

}  // namespace tep
