#pragma once

// Characteristic-frame form of the fixed-domain linearized equation and the
// boundary observability measurement built on it. In travel-time coordinates
// (theta, zeta) = (t - tau(x), zeta(x)) the equation becomes a Klein-Gordon
// form Y_thth - Y_zz + M Y_z + N Y = 0. An exponential tilt e^{k zeta} turns
// it into one whose energy flux along characteristics has a sign, which is
// what propagates interior energy to the shock-side boundary trace.

#include <vector>

#include "tep/base_state.hpp"
#include "tep/linear.hpp"

namespace tep {

struct CharacteristicFrame {
    std::vector<double> xs;    // grid nodes of the base state
    std::vector<double> zeta;  // travel-time coordinate, zero at the shock
    std::vector<double> tau;   // time offset: theta = t - tau(x)
    std::vector<double> M;     // first-order coefficient at the nodes
    std::vector<double> N;     // zero-order coefficient, positive subsonically
    double zeta_L = 0.0;       // value of zeta at the outlet
    // Smallest integer tilt for which both damping coefficients stay
    // positive with the coefficient fields inflated by 10%.
    int k = 0;
    double margin_first = 0.0;   // min over nodes of 2k - 1.1 M
    double margin_second = 0.0;  // min over nodes of k^2 - 1.1 (k M + N)
};

CharacteristicFrame characteristic_transform(const BaseState& base);

struct ObservabilityReport {
    double lhs = 0.0;    // shock-side trace integral of Yt^2 + Yx^2 + Y^2
    double rhs = 0.0;    // interior energy integrated over the middle window
    double ratio = 1.0;  // lhs / rhs; the measured observability constant
    bool zero_data = false;
    double T = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    double zeta_L = 0.0;
};

// Measures the boundary-trace versus interior-energy ratio of an evolved
// linear run over [0, T_obs]. The horizon must cover two full crossings of
// the channel (T_obs >= 2 zeta_L) and must not exceed the run length.
ObservabilityReport observability_check(const BaseState& base, const LinearRun& run,
                                        double T_obs);

}  // namespace tep
