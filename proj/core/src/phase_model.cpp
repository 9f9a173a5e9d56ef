#include "mcf/phase_model.hpp"

#include "mcf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mcf {

double well_value(double s) {
    double t = s * (1.0 - s);
    return 0.5 * t * t;
}

double well_derivative(double s) {
    return s * (1.0 - s) * (1.0 - 2.0 * s);
}

double sqrt_two_well(double s) {
    return std::abs(s * (1.0 - s));
}

double optimal_profile(double s) {
    // stable logistic evaluation
    if (s >= 0.0) {
        double e = std::exp(-s);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(s));
}

double profile_constant() {
    return 1.0 / 6.0;
}

namespace {

int phases_from_triangle(std::size_t len) {
    for (int n = 2; n <= 16; ++n)
        if (static_cast<std::size_t>(n) * (n - 1) / 2 == len) return n;
    throw ValidationError("pairwise coefficient list has no matching phase count");
}

} // namespace

std::vector<double> upper_triangle(const detail::Mat& m) {
    std::vector<double> tri;
    for (int i = 0; i < m.rows; ++i)
        for (int j = i + 1; j < m.cols; ++j) tri.push_back(m(i, j));
    return tri;
}

detail::Mat from_upper_triangle(int n, const std::vector<double>& tri) {
    detail::Mat m(n, n);
    std::size_t t = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++t) m(i, j) = m(j, i) = tri.at(t);
    return m;
}

std::vector<double> additive_decompose(const std::vector<double>& p) {
    if (p.size() != 3) throw ValidationError("additive_decompose expects (s12, s13, s23)");
    for (double s : p)
        if (!(s >= 0.0)) throw ValidationError("surface tensions must be non-negative");
    const double s12 = p[0], s13 = p[1], s23 = p[2];
    std::vector<double> out{0.5 * (s12 + s13 - s23),
                            0.5 * (s12 + s23 - s13),
                            0.5 * (s13 + s23 - s12)};
    for (double& v : out) {
        if (v < -1e-12)
            throw TriangleViolation("pairwise tensions violate the triangle inequality");
        if (v < 0.0) v = 0.0;
    }
    return out;
}

std::optional<std::vector<double>> harmonic_decompose(const std::vector<double>& p) {
    if (p.size() != 3) throw ValidationError("harmonic_decompose expects (m12, m13, m23)");
    for (double m : p)
        if (!(m >= 0.0)) throw ValidationError("mobilities must be non-negative");

    const bool z12 = p[0] == 0.0, z13 = p[1] == 0.0, z23 = p[2] == 0.0;
    const int zeros = int(z12) + int(z13) + int(z23);
    if (zeros == 3) return std::vector<double>{0.0, 0.0, 0.0};
    if (zeros == 2) {
        // the two vanishing pairs share one phase; that phase is frozen
        if (!z12) return std::vector<double>{2.0 * p[0], 2.0 * p[0], 0.0};
        if (!z13) return std::vector<double>{2.0 * p[1], 0.0, 2.0 * p[1]};
        return std::vector<double>{0.0, 2.0 * p[2], 2.0 * p[2]};
    }
    if (zeros == 1)
        throw InconsistentMobilityPattern(
            "a single vanishing pairwise mobility has no per-phase decomposition");

    const double r12 = 1.0 / p[0], r13 = 1.0 / p[1], r23 = 1.0 / p[2];
    const double x1 = 0.5 * (r12 + r13 - r23);
    const double x2 = 0.5 * (r12 + r23 - r13);
    const double x3 = 0.5 * (r13 + r23 - r12);
    const double scale = std::max({std::abs(x1), std::abs(x2), std::abs(x3)});
    std::vector<double> out(3);
    const double xs[3] = {x1, x2, x3};
    for (int i = 0; i < 3; ++i) {
        if (xs[i] <= 1e-14 * scale) return std::nullopt; // negative or infinite m_i
        out[i] = 1.0 / xs[i];
    }
    return out;
}

double young_angle(double sigma_sv, double sigma_ls, double sigma_vl) {
    if (!(sigma_vl > 0.0)) throw ValidationError("young_angle: sigma_VL must be positive");
    double c = (sigma_sv - sigma_ls) / sigma_vl;
    if (std::abs(c) > 1.0 + 1e-12)
        throw NoWettingEquilibrium("|sigma_SV - sigma_LS| exceeds sigma_VL");
    c = std::clamp(c, -1.0, 1.0);
    return std::acos(c);
}

std::array<double, 3> herring_angles(const std::array<double, 3>& sigma) {
    const double s12 = sigma[0], s13 = sigma[1], s23 = sigma[2];
    for (double s : sigma)
        if (!(s > 0.0)) throw ValidationError("herring_angles: tensions must be positive");
    auto interior = [](double a, double b, double c) {
        // angle between the sides of length a and b, opposite side c
        double arg = (a * a + b * b - c * c) / (2.0 * a * b);
        if (std::abs(arg) > 1.0 + 1e-12)
            throw Unrealizable("tension triangle degenerates; no junction equilibrium");
        return std::acos(std::clamp(arg, -1.0, 1.0));
    };
    const double pi = 3.14159265358979323846;
    return {pi - interior(s12, s13, s23), pi - interior(s12, s23, s13),
            pi - interior(s13, s23, s12)};
}

// --- TensionSet ---

TensionSet TensionSet::from_pairwise(const std::vector<double>& tri, bool strict_triangle) {
    const int n = phases_from_triangle(tri.size());
    for (double s : tri)
        if (!(s >= 0.0) || !std::isfinite(s))
            throw ValidationError("surface tensions must be finite and non-negative");

    TensionSet t;
    t.n_ = n;
    t.pair_ = from_upper_triangle(n, tri);
    if (n == 2) {
        t.per_phase_ = {0.5 * tri[0], 0.5 * tri[0]}; // even split convention
    } else if (n == 3) {
        if (strict_triangle) {
            t.per_phase_ = additive_decompose(tri);
        } else {
            const double s12 = tri[0], s13 = tri[1], s23 = tri[2];
            t.per_phase_ = {0.5 * (s12 + s13 - s23), 0.5 * (s12 + s23 - s13),
                            0.5 * (s13 + s23 - s12)};
            for (double v : t.per_phase_)
                if (v < -1e-12) {
                    std::fprintf(stderr,
                                 "warning: tension triangle inequality violated; "
                                 "running with a negative per-phase coefficient\n");
                    break;
                }
        }
    } else {
        throw ValidationError("per-phase tensions must be supplied for more than 3 phases");
    }
    return t;
}

TensionSet TensionSet::from_pairwise(const std::vector<double>& tri,
                                     const std::vector<double>& per_phase) {
    const int n = phases_from_triangle(tri.size());
    if (static_cast<int>(per_phase.size()) != n)
        throw ValidationError("per-phase tension count does not match pairwise set");
    for (double s : tri)
        if (!(s >= 0.0) || !std::isfinite(s))
            throw ValidationError("surface tensions must be finite and non-negative");
    TensionSet t;
    t.n_ = n;
    t.pair_ = from_upper_triangle(n, tri);
    t.per_phase_ = per_phase;
    return t;
}

double TensionSet::pairwise(int i, int j) const {
    if (i == j) return 0.0;
    return pair_(i, j);
}

// --- MobilitySet ---

MobilitySet MobilitySet::from_per_phase(const std::vector<double>& m) {
    if (m.size() < 2) throw ValidationError("need at least two phases");
    for (double v : m)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ValidationError("mobilities must be finite and non-negative");
    MobilitySet s;
    s.n_ = static_cast<int>(m.size());
    s.kind_ = Kind::HarmonicallyAdditive;
    s.per_phase_ = m;
    s.pair_ = detail::Mat(s.n_, s.n_);
    for (int i = 0; i < s.n_; ++i)
        for (int j = i + 1; j < s.n_; ++j) {
            double mij = (m[i] == 0.0 || m[j] == 0.0) ? 0.0 : 1.0 / (1.0 / m[i] + 1.0 / m[j]);
            s.pair_(i, j) = s.pair_(j, i) = mij;
        }
    return s;
}

MobilitySet MobilitySet::from_pairwise(const std::vector<double>& tri) {
    const int n = phases_from_triangle(tri.size());
    for (double v : tri)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ValidationError("mobilities must be finite and non-negative");
    if (n == 2) {
        if (tri[0] == 0.0) return from_per_phase({0.0, 0.0});
        return from_per_phase({2.0 * tri[0], 2.0 * tri[0]}); // even split convention
    }
    if (n == 3) {
        auto per = harmonic_decompose(tri);
        if (per) return from_per_phase(*per);
    }
    return general_from_pairwise(tri);
}

MobilitySet MobilitySet::general_from_pairwise(const std::vector<double>& tri) {
    const int n = phases_from_triangle(tri.size());
    MobilitySet s;
    s.n_ = n;
    s.kind_ = Kind::General;
    s.pair_ = from_upper_triangle(n, tri);
    s.metric_ = detail::Mat(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (!(s.pair_(i, j) > 0.0))
                throw ValidationError("general mobility sets need positive pairwise entries");
            s.metric_(i, j) = -1.0 / s.pair_(i, j);
        }

    // positive semi-definiteness on the complement of (1,...,1)
    detail::Mat p(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) p(i, j) = (i == j ? 1.0 : 0.0) - 1.0 / n;
    detail::Mat restricted = detail::matmul(p, detail::matmul(s.metric_, p));
    auto eig = detail::sym_eigen(restricted);
    double top = std::max(1.0, std::abs(eig.values.back()));
    // one eigenvalue is the flat direction itself (0 by construction)
    for (double v : eig.values)
        if (v < -1e-10 * top)
            throw NotPositiveSemiDefinite(
                "mobility metric is not positive semi-definite orthogonal to (1,...,1)");
    return s;
}

double MobilitySet::pairwise(int i, int j) const {
    if (i == j) return 0.0;
    return pair_(i, j);
}

const std::vector<double>& MobilitySet::per_phase() const {
    if (kind_ != Kind::HarmonicallyAdditive)
        throw ValidationError("per-phase mobilities undefined for a general set");
    return per_phase_;
}

} // namespace mcf
