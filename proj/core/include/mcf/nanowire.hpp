#pragma once

// Sharp-interface quasi-static theory of nanowire growth under a liquid cap:
// triple-point contact angles from the tension ratios, spherical-cap volume
// factors, the volume-conserving droplet radius as the contact line rotates
// by alpha, and the wire profile h(r).  Serves as the analytic oracle for
// the VLS simulations.

#include <vector>

namespace mcf {

enum class CapModel {
    PaperF,     // f(t) = (1+cos t)(2-cos t)/sin^3 t, as printed
    GeometricF, // f(t) = (1-cos t)^2 (2+cos t)/sin^3 t, exact cap volume
};

struct ContactAngles {
    double theta_v = 0.0;
    double theta_s = 0.0;
};

// cos th_V = (b^2 - a^2 - 1)/(2a), cos th_S = (a^2 - b^2 - 1)/(2b);
// Unrealizable when either cosine leaves [-1, 1].
ContactAngles contact_angles(double a, double b);

struct WireParams {
    double a = 1.0;  // sigma_VL / sigma_SV
    double b = 1.0;  // sigma_LS / sigma_SV
    double r0 = 1.0; // initial half-distance between the triple points
    CapModel cap_model = CapModel::PaperF;
    // Reproduces the reciprocal radius ratio exactly as printed; disables
    // the volume-conservation identity check.
    bool use_printed_radius_form = false;

    WireParams() = default;
    WireParams(double a_, double b_, double r0_, CapModel m = CapModel::PaperF);

    ContactAngles angles; // cached at construction
};

// Cap volume is (pi/3) * base_radius^3 * cap_factor(theta).
// CapSingularity within 1e-9 of 0, pi, or 2 pi.
double cap_factor(double theta, CapModel model);
double cap_factor_derivative(double theta, CapModel model);

double alpha_max(const WireParams& w); // min(theta_V, pi - theta_S, pi/2)

// Volume-conserving radius
//   R(alpha) = R0 [ (f(thV) + f(thS)) / (f(thV - alpha) + f(thS + alpha)) ]^(1/3);
// the identity R^3 (f(thV-a)+f(thS+a)) = R0^3 (f(thV)+f(thS)) is re-checked
// to 1e-10 relative on every call.  DomainExceeded outside [0, alpha_max).
double droplet_radius(const WireParams& w, double alpha);
double droplet_radius_derivative(const WireParams& w, double alpha); // analytic dR/dalpha

// Inverse of the radius map on [0, alpha_max): Newton with a bisection
// fallback inside the bracketing interval.  OutOfRange when r is not
// attained; NonMonotone when the sampled radius map is not non-increasing
// (the inverse is then ill-posed and is not silently resolved).
double invert_radius(const WireParams& w, double r);

struct WireProfile {
    struct Sample {
        double r = 0.0, h = 0.0, alpha = 0.0;
    };
    std::vector<Sample> samples; // first sample is (R0, 0, 0)
    double alpha_stop = 0.0;
    bool reached_stationary = false; // alpha_stop made it to pi/2 - 1e-3
};

// Integrates dh/dalpha = -tan(alpha) dR/dalpha from alpha = 0 to
// alpha_stop = min(alpha_max - 1e-3, pi/2 - 1e-3) with adaptive
// fourth-order steps; returns n_samples points along the way.
WireProfile integrate_profile(const WireParams& w, int n_samples = 256);

struct DiameterReduction {
    double value = 0.0; // 1 - R(alpha_stop)/R0
    double alpha_stop = 0.0;
    bool reached_stationary = false; // false: partial-domain result
};

DiameterReduction diameter_reduction(const WireParams& w);

} // namespace mcf
