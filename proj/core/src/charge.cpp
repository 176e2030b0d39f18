#include "tep/charge.hpp"

#include <algorithm>
#include <cmath>

namespace tep {

BackgroundCharge BackgroundCharge::constant(double value, double L) {
    if (L <= 0.0) throw ValidationError("background charge: domain length must be positive");
    BackgroundCharge b(Kind::constant, L);
    b.value_ = value;
    return b;
}

BackgroundCharge BackgroundCharge::fourier(double c0, std::vector<double> cos_coeffs,
                                           std::vector<double> sin_coeffs, double L) {
    if (L <= 0.0) throw ValidationError("background charge: domain length must be positive");
    BackgroundCharge b(Kind::fourier, L);
    b.c0_ = c0;
    b.cos_coeffs_ = std::move(cos_coeffs);
    b.sin_coeffs_ = std::move(sin_coeffs);
    return b;
}

BackgroundCharge BackgroundCharge::polynomial(std::vector<double> coeffs, double L) {
    if (L <= 0.0) throw ValidationError("background charge: domain length must be positive");
    if (coeffs.empty()) throw ValidationError("background charge: polynomial needs coefficients");
    BackgroundCharge b(Kind::polynomial, L);
    b.poly_ = std::move(coeffs);
    return b;
}

BackgroundCharge BackgroundCharge::samples(std::vector<double> xs, std::vector<double> values,
                                           double L) {
    if (L <= 0.0) throw ValidationError("background charge: domain length must be positive");
    if (xs.size() != values.size() || xs.size() < 2)
        throw ValidationError("background charge: need matching sample arrays of length >= 2");
    if (!std::is_sorted(xs.begin(), xs.end()))
        throw ValidationError("background charge: sample abscissae must be increasing");
    if (xs.front() > 0.0 || xs.back() < L)
        throw ValidationError("background charge: samples must cover [0, L]");
    BackgroundCharge b(Kind::samples, L);
    b.xs_ = std::move(xs);
    b.vals_ = std::move(values);
    return b;
}

BackgroundCharge BackgroundCharge::shifted(double delta) const {
    BackgroundCharge b = *this;
    switch (kind_) {
        case Kind::constant: b.value_ += delta; break;
        case Kind::fourier: b.c0_ += delta; break;
        case Kind::polynomial: b.poly_[0] += delta; break;
        case Kind::samples:
            for (double& v : b.vals_) v += delta;
            break;
    }
    return b;
}

double BackgroundCharge::operator()(double x) const {
    switch (kind_) {
        case Kind::constant:
            return value_;
        case Kind::fourier: {
            double out = c0_;
            const double w = 2.0 * M_PI / L_;
            for (std::size_t m = 0; m < cos_coeffs_.size(); ++m)
                out += cos_coeffs_[m] * std::cos(w * static_cast<double>(m + 1) * x);
            for (std::size_t m = 0; m < sin_coeffs_.size(); ++m)
                out += sin_coeffs_[m] * std::sin(w * static_cast<double>(m + 1) * x);
            return out;
        }
        case Kind::polynomial: {
            double out = 0.0;
            for (auto it = poly_.rbegin(); it != poly_.rend(); ++it) out = out * x + *it;
            return out;
        }
        case Kind::samples: {
            auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
            if (it == xs_.begin()) return vals_.front();
            if (it == xs_.end()) return vals_.back();
            const std::size_t hi = static_cast<std::size_t>(it - xs_.begin());
            const std::size_t lo = hi - 1;
            const double t = (x - xs_[lo]) / (xs_[hi] - xs_[lo]);
            return vals_[lo] + t * (vals_[hi] - vals_[lo]);
        }
    }
    throw Error("background charge: corrupt kind");
}

namespace {

template <class Cmp>
double scan_extremum(const BackgroundCharge& b, double lo, double hi, int samples, Cmp better) {
    if (!(hi > lo)) throw UsageError("background charge: empty extremum interval");
    if (samples < 3) samples = 3;
    double best = b(lo);
    int best_i = 0;
    for (int i = 1; i < samples; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / (samples - 1);
        const double v = b(x);
        if (better(v, best)) {
            best = v;
            best_i = i;
        }
    }
    // golden-section refinement around the best sample
    const double h = (hi - lo) / (samples - 1);
    double a = std::max(lo, lo + (best_i - 1) * h);
    double c = std::min(hi, lo + (best_i + 1) * h);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = c - gr * (c - a), x2 = a + gr * (c - a);
    double f1 = b(x1), f2 = b(x2);
    for (int it = 0; it < 80 && (c - a) > 1e-14 * (1.0 + std::abs(a)); ++it) {
        if (better(f1, f2)) {
            c = x2; x2 = x1; f2 = f1;
            x1 = c - gr * (c - a); f1 = b(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (c - a); f2 = b(x2);
        }
    }
    return better(f1, best) ? f1 : best;
}

}  // namespace

double BackgroundCharge::min_on(double lo, double hi, int samples) const {
    return scan_extremum(*this, lo, hi, samples, [](double a, double b) { return a < b; });
}

double BackgroundCharge::max_on(double lo, double hi, int samples) const {
    return scan_extremum(*this, lo, hi, samples, [](double a, double b) { return a > b; });
}

}  // namespace tep
