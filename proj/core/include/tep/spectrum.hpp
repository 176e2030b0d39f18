#pragma once

// Spectral probe of the time-T linear solution map acting on perturbation
// pairs (Y, Yt), measured in the energy inner product of the free-boundary
// problem. Power iteration estimates the dominant modulus; a small Krylov
// variant resolves several leading eigenvalues at once.

#include <complex>
#include <cstdint>
#include <vector>

#include "tep/base_state.hpp"

namespace tep {

// Energy inner product on pairs h = (h1, h2):
//   <g, h> = w0 g1(x0) h1(x0)
//          + integral of (1/rho) [g2 h2 + kappa g1' h1' + rho g1 h1],
// with w0 = E/rho at the shock. For states satisfying the boundary closures
// the induced norm coincides with the ledger energy phi_0. A negative field
// at the shock makes w0 < 0 and can defeat positivity; the measured trace
// constant decides whether the quadratic form is still definite, and when it
// is not the boundary term is dropped, which the trace bound shows is an
// equivalent positive form.
class EnergyForm {
public:
    // allow_shift=false throws NormDegenerate instead of dropping the
    // boundary term when the form is indefinite.
    explicit EnergyForm(const BaseState& base, bool allow_shift = true);

    double dot(const std::vector<double>& g1, const std::vector<double>& g2,
               const std::vector<double>& h1, const std::vector<double>& h2) const;
    double norm(const std::vector<double>& h1, const std::vector<double>& h2) const;

    bool shifted() const { return shifted_; }
    // Boundary weight E/rho at the shock as defined by the base state.
    double boundary_weight() const { return w0_; }
    // Measured sup of h1(x0)^2 over the first-component part of the form;
    // the form is definite iff 1 + w0 * trace_constant > 0.
    double trace_constant() const { return trace_constant_; }

private:
    const BaseState* base_;
    std::vector<double> kap_, rho_, weight_;
    double w0_ = 0.0, w0_used_ = 0.0;
    double trace_constant_ = 0.0;
    bool shifted_ = false;
};

struct SpectrumOptions {
    int n_modes = 1;      // 1: power iteration; > 1: Krylov subspace
    int max_iters = 400;  // power-iteration cap
    int krylov_dim = 24;  // subspace size for n_modes > 1
    double tol = 1e-8;    // stagnation tolerance on the dominant modulus
    double dissipation = 0.02;
    double cfl = 0.8;
    bool strict_norm = false;  // propagate NormDegenerate instead of shifting
    std::uint64_t seed = 2026;
};

struct SpectrumReport {
    double dominant_modulus = 0.0;
    // Leading eigenvalue estimates, sorted by decreasing modulus. Power
    // iteration reports the dominant one (complex pairs carry the member
    // with nonnegative imaginary part).
    std::vector<std::complex<double>> eigenvalues;
    std::vector<double> history;  // dominant-modulus estimate per iteration
    int iterations = 0;
    // Power iteration: relative leakage of the iterate outside the dominant
    // two-dimensional subspace. Krylov: classical subspace residual of the
    // dominant Ritz pair.
    double residual = 0.0;
    bool norm_shifted = false;
    double T = 0.0;
    double dt = 0.0;
    int steps_per_apply = 0;
};

// Estimates the dominant part of the spectrum of the map
//   (Y, Yt)(0) -> (Y, Yt)(T)
// under the linearized evolution on the fixed domain, in the energy norm.
SpectrumReport solution_operator_spectrum(const BaseState& base, double T,
                                          const SpectrumOptions& opts = {});

}  // namespace tep
