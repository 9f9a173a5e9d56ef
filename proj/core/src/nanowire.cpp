#include "mcf/nanowire.hpp"

#include "mcf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mcf {

namespace {

constexpr double kPi = std::numbers::pi;

void check_theta(double theta) {
    if (theta < 1e-9 || theta > 2.0 * kPi - 1e-9 || std::abs(theta - kPi) < 1e-9)
        throw CapSingularity("cap factor singular at theta = " + std::to_string(theta));
}

} // namespace

ContactAngles contact_angles(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw ValidationError("contact_angles: tension ratios must be positive");
    const double cv = (b * b - a * a - 1.0) / (2.0 * a);
    const double cs = (a * a - b * b - 1.0) / (2.0 * b);
    if (std::abs(cv) > 1.0 || std::abs(cs) > 1.0)
        throw Unrealizable("tension ratios admit no equilibrium triple point");
    return ContactAngles{std::acos(cv), std::acos(cs)};
}

WireParams::WireParams(double a_, double b_, double r0_, CapModel m)
    : a(a_), b(b_), r0(r0_), cap_model(m) {
    if (!(r0 > 0.0)) throw ValidationError("wire params: R0 must be positive");
    angles = contact_angles(a, b);
}

double cap_factor(double theta, CapModel model) {
    check_theta(theta);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double s3 = s * s * s;
    if (model == CapModel::PaperF) return (1.0 + c) * (2.0 - c) / s3;
    return (1.0 - c) * (1.0 - c) * (2.0 + c) / s3;
}

double cap_factor_derivative(double theta, CapModel model) {
    check_theta(theta);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double s4 = s * s * s * s;
    if (model == CapModel::PaperF) return (c * c * c - 2.0 * c * c - 4.0 * c - 1.0) / s4;
    return 3.0 * (1.0 - c) * (1.0 - c) / s4;
}

double alpha_max(const WireParams& w) {
    return std::min({w.angles.theta_v, kPi - w.angles.theta_s, 0.5 * kPi});
}

namespace {

double cap_sum(const WireParams& w, double alpha) {
    return cap_factor(w.angles.theta_v - alpha, w.cap_model) +
           cap_factor(w.angles.theta_s + alpha, w.cap_model);
}

double cap_sum_derivative(const WireParams& w, double alpha) {
    return -cap_factor_derivative(w.angles.theta_v - alpha, w.cap_model) +
           cap_factor_derivative(w.angles.theta_s + alpha, w.cap_model);
}

void check_alpha(const WireParams& w, double alpha) {
    if (alpha < 0.0 || alpha >= alpha_max(w))
        throw DomainExceeded("alpha = " + std::to_string(alpha) +
                             " outside [0, " + std::to_string(alpha_max(w)) + ")");
}

} // namespace

double droplet_radius(const WireParams& w, double alpha) {
    check_alpha(w, alpha);
    const double f0 = cap_sum(w, 0.0);
    const double fa = cap_sum(w, alpha);
    const double ratio = w.use_printed_radius_form ? fa / f0 : f0 / fa;
    const double r = w.r0 * std::cbrt(ratio);
    if (!w.use_printed_radius_form) {
        // defining property: the droplet volume (pi/3) R^3 (f1 + f2) is
        // invariant under the rotation
        const double lhs = r * r * r * fa;
        const double rhs = w.r0 * w.r0 * w.r0 * f0;
        if (std::abs(lhs - rhs) > 1e-10 * std::abs(rhs))
            throw Error("droplet volume conservation identity violated");
    }
    return r;
}

double droplet_radius_derivative(const WireParams& w, double alpha) {
    check_alpha(w, alpha);
    const double r = droplet_radius(w, alpha);
    const double fa = cap_sum(w, alpha);
    const double dfa = cap_sum_derivative(w, alpha);
    if (w.use_printed_radius_form) return (r / 3.0) * dfa / fa;
    return -(r / 3.0) * dfa / fa;
}

double invert_radius(const WireParams& w, double r) {
    const double amax = alpha_max(w);
    const double hi = amax - 1e-6; // stay clear of the cap singularities

    // dense pre-scan: establishes monotonicity and the bracketing interval
    const int n = 1024;
    std::vector<double> as(n + 1), rs(n + 1);
    for (int i = 0; i <= n; ++i) {
        as[i] = hi * static_cast<double>(i) / n;
        rs[i] = droplet_radius(w, as[i]);
    }
    for (int i = 0; i < n; ++i)
        if (rs[i + 1] > rs[i] + 1e-12 * w.r0)
            throw NonMonotone("radius map is not non-increasing; inverse ill-posed");

    if (r > w.r0 + 1e-12 * w.r0 || r < rs[n])
        throw OutOfRange("radius " + std::to_string(r) + " not attained on [0, alpha_max)");
    if (r >= rs[0]) return 0.0;

    int lo_i = 0;
    for (int i = 0; i < n; ++i)
        if (rs[i] >= r && r >= rs[i + 1]) {
            lo_i = i;
            break;
        }
    double lo = as[lo_i], up = as[lo_i + 1];
    double alpha = 0.5 * (lo + up);
    for (int it = 0; it < 100; ++it) {
        const double val = droplet_radius(w, alpha) - r;
        if (std::abs(val) <= 1e-10 * w.r0) return alpha;
        if (val > 0.0)
            lo = alpha;
        else
            up = alpha;
        const double der = droplet_radius_derivative(w, alpha);
        double next = alpha - val / der;
        if (!(der < 0.0) || next <= lo || next >= up) next = 0.5 * (lo + up); // bisection fallback
        alpha = next;
    }
    throw NonMonotone("radius inversion failed to converge");
}

WireProfile integrate_profile(const WireParams& w, int n_samples) {
    if (n_samples < 2) throw ValidationError("integrate_profile: need at least 2 samples");
    const double stop = std::min(alpha_max(w) - 1e-3, 0.5 * kPi - 1e-3);
    if (stop <= 0.0) {
        WireProfile p;
        p.samples.push_back({w.r0, 0.0, 0.0});
        p.alpha_stop = 0.0;
        return p;
    }

    auto slope = [&](double alpha) {
        return -std::tan(alpha) * droplet_radius_derivative(w, alpha);
    };
    // one adaptive RK4 step with step-doubling error control
    auto rk4 = [&](double alpha, double h_val, double step) {
        const double k1 = slope(alpha);
        const double k2 = slope(alpha + 0.5 * step);
        const double k3 = k2; // autonomous in h: k2 == k3
        const double k4 = slope(alpha + step);
        return h_val + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };

    WireProfile p;
    p.alpha_stop = stop;
    p.reached_stationary = stop >= 0.5 * kPi - 1e-3 - 1e-12;
    p.samples.push_back({w.r0, 0.0, 0.0});

    double alpha = 0.0, h = 0.0;
    for (int i = 1; i < n_samples; ++i) {
        const double target = stop * static_cast<double>(i) / (n_samples - 1);
        while (alpha < target - 1e-15) {
            double step = target - alpha;
            for (;;) {
                const double one = rk4(alpha, h, step);
                const double half = rk4(alpha + 0.5 * step, rk4(alpha, h, 0.5 * step), 0.5 * step);
                if (std::abs(one - half) <= 1e-12 * std::max(1.0, std::abs(half)) || step < 1e-9) {
                    h = half;
                    alpha += step;
                    break;
                }
                step *= 0.5;
            }
        }
        alpha = target;
        p.samples.push_back({droplet_radius(w, alpha), h, alpha});
    }
    return p;
}

DiameterReduction diameter_reduction(const WireParams& w) {
    const double stop = std::min(alpha_max(w) - 1e-3, 0.5 * kPi - 1e-3);
    DiameterReduction out;
    if (stop <= 0.0) {
        out.value = 0.0;
        out.alpha_stop = 0.0;
        out.reached_stationary = false;
        return out;
    }
    out.alpha_stop = stop;
    out.reached_stationary = stop >= 0.5 * kPi - 1e-3 - 1e-12;
    out.value = 1.0 - droplet_radius(w, stop) / w.r0;
    return out;
}

} // namespace mcf
