#include "doctest.h"

#include "mcf/geometry.hpp"
#include "mcf/phase_model.hpp"

#include <cmath>
#include <vector>

using namespace mcf;

namespace {

constexpr double kPi = 3.14159265358979323846;

Field circle_field(const Grid& g, double eps, Point2 c, double radius) {
    Field f(g);
    for (int i = 0; i < g.size(0); ++i)
        for (int j = 0; j < g.size(1); ++j) {
            const double x = j * g.spacing(1), y = i * g.spacing(0);
            // nearest periodic image, so seam-crossing circles stay circles
            const double dx = std::remainder(x - c.x, g.length(1));
            const double dy = std::remainder(y - c.y, g.length(0));
            const double d = std::hypot(dx, dy) - radius;
            f.at(i, j) = optimal_profile(d / eps);
        }
    return f;
}

// three angular sectors around (0.5, 0.5) with boundaries at the given
// polar angles; the signed distance is measured as arc length
PhaseState sector_state(const Grid& g, double eps, const std::array<double, 3>& bounds) {
    PhaseState s(g, eps, 3);
    auto angdiff = [](double a, double b) {
        double d = std::fmod(a - b + 3.0 * kPi, 2.0 * kPi) - kPi;
        return d;
    };
    for (int i = 0; i < g.size(0); ++i)
        for (int j = 0; j < g.size(1); ++j) {
            const double x = j * g.spacing(1) - 0.5, y = i * g.spacing(0) - 0.5;
            const double r = std::hypot(x, y);
            const double phi = std::atan2(y, x);
            for (int k = 0; k < 3; ++k) {
                const double lo = bounds[k], hi = bounds[(k + 1) % 3];
                // inside the sector both offsets are positive
                const double din = angdiff(phi, lo);
                const double dout = angdiff(hi, phi);
                double d = std::min(din, dout) * std::max(r, 1e-9); // arc-length sdf
                s.fields[k].at(i, j) = optimal_profile(-d / eps);
            }
            // normalize to the partition
            double sum = 0.0;
            for (int k = 0; k < 3; ++k) sum += s.fields[k].at(i, j);
            for (int k = 0; k < 3; ++k) s.fields[k].at(i, j) /= sum;
        }
    return s;
}

} // namespace

TEST_CASE("marching squares recovers a circle") {
    Grid g({128, 128}, {1.0, 1.0});
    Field f = circle_field(g, 1.0 / 64.0, {0.5, 0.5}, 0.3);
    std::vector<Polyline> cs = extract_contour(f, 0.5);
    REQUIRE(cs.size() == 1);
    CHECK(cs[0].closed);

    RadiusStats rs = radius_stats(cs[0], {0.5, 0.5}, g);
    CHECK(std::abs(rs.mean - 0.3) < g.spacing(0));
    CHECK(rs.max - rs.min < 2.0 * g.spacing(0));
    CHECK(cs[0].length() == doctest::Approx(2.0 * kPi * 0.3).epsilon(0.02));
    CHECK(cs[0].area() == doctest::Approx(kPi * 0.09).epsilon(0.01));
}

TEST_CASE("contours crossing the periodic seam stay connected") {
    Grid g({128, 128}, {1.0, 1.0});
    Field f = circle_field(g, 1.0 / 64.0, {0.02, 0.5}, 0.2); // wraps through x = 0
    std::vector<Polyline> cs = extract_contour(f, 0.5);
    REQUIRE(cs.size() == 1);
    CHECK(cs[0].closed);
    CHECK(cs[0].length() == doctest::Approx(2.0 * kPi * 0.2).epsilon(0.02));
    RadiusStats rs = radius_stats(cs[0], {0.02, 0.5}, g);
    CHECK(std::abs(rs.mean - 0.2) < g.spacing(0));
}

TEST_CASE("half-level radius by axis scans") {
    Grid g({256, 256}, {1.0, 1.0});
    Field f = circle_field(g, 1.0 / 128.0, {0.5, 0.5}, 0.23);
    CHECK(std::abs(half_level_radius(f, {0.5, 0.5}) - 0.23) < g.spacing(0));
}

TEST_CASE("10-90 width of the optimal profile is eps ln 81") {
    Grid g({256, 256}, {1.0, 1.0});
    const double eps = 1.0 / 64.0;
    Field f(g);
    for (int i = 0; i < g.size(0); ++i)
        for (int j = 0; j < g.size(1); ++j)
            f.at(i, j) = optimal_profile((i * g.spacing(0) - 0.5) / eps);

    const double expect = eps * std::log(81.0); // q spans 0.9 -> 0.1 over 2 ln 9
    SUBCASE("falling edge") {
        const double w = width_10_90(f, {0.3, 0.3}, {0.0, 1.0}, 0.4);
        CHECK(std::abs(w - expect) < 2.0 * g.spacing(0));
    }
    SUBCASE("rising edge") {
        const double w = width_10_90(f, {0.3, 0.7}, {0.0, -1.0}, 0.4);
        CHECK(std::abs(w - expect) < 2.0 * g.spacing(0));
    }
}

TEST_CASE("directed hausdorff distance between contour sets") {
    Grid g({128, 128}, {1.0, 1.0});
    Field a = circle_field(g, 1.0 / 64.0, {0.5, 0.5}, 0.3);
    Field b = circle_field(g, 1.0 / 64.0, {0.5, 0.5}, 0.22);
    std::vector<Polyline> ca = extract_contour(a), cb = extract_contour(b);
    CHECK(directed_hausdorff(ca, cb, g) == doctest::Approx(0.08).epsilon(0.03));
    CHECK(directed_hausdorff(cb, ca, g) == doctest::Approx(0.08).epsilon(0.03));

    // shortest images count: centers 0.1 apart across the seam
    Field c = circle_field(g, 1.0 / 64.0, {0.05, 0.5}, 0.2);
    Field d = circle_field(g, 1.0 / 64.0, {0.95, 0.5}, 0.2);
    CHECK(directed_hausdorff(extract_contour(c), extract_contour(d), g) ==
          doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("periodic point distance and bilinear sampling") {
    Grid g({64, 64}, {1.0, 1.0});
    CHECK(periodic_distance(g, {0.1, 0.1}, {0.9, 0.9}) ==
          doctest::Approx(std::hypot(0.2, 0.2)).epsilon(1e-12));
    CHECK(periodic_distance(g, {0.2, 0.5}, {0.4, 0.5}) == doctest::Approx(0.2).epsilon(1e-12));

    Field f(g);
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) f.at(i, j) = std::sin(2.0 * kPi * j / 64.0);
    // midpoint between two samples averages them
    const double h = g.spacing(1);
    const double got = sample_periodic(f, {1.5 * h, 0.0});
    CHECK(got == doctest::Approx(0.5 * (f.at(0, 1) + f.at(0, 2))).epsilon(1e-12));
}

TEST_CASE("junction location and sector angles on synthetic sectors") {
    Grid g({256, 256}, {1.0, 1.0});
    const double eps = 1.0 / 128.0;
    // sector k spans bounds[k] .. bounds[k+1]: widths 130, 110, 120 degrees
    const std::array<double, 3> bounds{0.0, 130.0 * kPi / 180.0, 240.0 * kPi / 180.0};
    PhaseState s = sector_state(g, eps, bounds);

    Point2 j = find_junction(s);
    CHECK(periodic_distance(g, j, {0.5, 0.5}) < 3.0 * g.spacing(0));

    SectorAngles sa = measure_angles(s, {0.5, 0.5}, 5.0 * eps);
    CHECK(sa.angle[0] + sa.angle[1] + sa.angle[2] == doctest::Approx(2.0 * kPi).epsilon(1e-12));
    CHECK(sa.sector_of_phase(0) == doctest::Approx(130.0 * kPi / 180.0).epsilon(0.03));
    CHECK(sa.sector_of_phase(1) == doctest::Approx(110.0 * kPi / 180.0).epsilon(0.03));
    CHECK(sa.sector_of_phase(2) == doctest::Approx(120.0 * kPi / 180.0).epsilon(0.03));
}
