#pragma once

// Geometric diagnostics over phase states: marching-squares contours,
// half-level radii, triple-junction location and sector angles, 10-90
// interface widths, and periodic distances between contour sets.
//
// 2D coordinate convention: a point (x, y) has x along axis 1 (contiguous
// storage axis) and y along axis 0, so y is the "vertical" axis used by the
// substrate shapes and the rendered frames.

#include "mcf/solver.hpp"
#include "mcf/spectral.hpp"

#include <array>
#include <vector>

namespace mcf {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct Polyline {
    std::vector<Point2> pts; // unwrapped: consecutive points differ by < one cell
    bool closed = true;

    double length() const;
    Point2 centroid() const;  // vertex average
    double area() const;      // shoelace magnitude (closed polylines)
};

struct RadiusStats {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

// Marching squares at the given level on the periodic grid; every contour on
// a periodic domain is closed unless degenerate.  Saddle cells are split by
// the cell-center average.  Empty result when the field never crosses the
// level.
std::vector<Polyline> extract_contour(const Field& f, double level = 0.5);

// Per-phase overload; 3D states return the per-slice contours (axis-0
// slices) concatenated, with (x, y) = (axis 2, axis 1) within each slice.
std::vector<Polyline> extract_contour(const PhaseState& s, int phase, double level = 0.5);

// Bilinear interpolation with periodic wrap.
double sample_periodic(const Field& f, Point2 p);

// Minimal-image distance between two points.
double periodic_distance(const Grid& g, Point2 a, Point2 b);

// Minimal-image radius statistics of polyline vertices about a center.
RadiusStats radius_stats(const Polyline& pl, Point2 center, const Grid& g);

// max over vertices of `from` of the periodic distance to the segments of
// `to`; the displacement metric used by the figure-reproduction checks.
double directed_hausdorff(const std::vector<Polyline>& from, const std::vector<Polyline>& to,
                          const Grid& g);

// Half-level radius about a center from grid-line scans along the four axis
// directions (linear interpolation between samples); NaN when no crossing is
// found in any direction.
double half_level_radius(const Field& f, Point2 center, double level = 0.5);

// Distance between the 0.1 and 0.9 crossings around the first half-level
// crossing along the ray start + s * dir, s in (0, max_len); NaN if the ray
// meets no complete rise.  dir need not be normalized.
double width_10_90(const Field& f, Point2 start, Point2 dir, double max_len);

// Triple-junction location: the point maximizing min_k u_k, refined below
// grid resolution on a local bilinear fine grid.  Requires exactly three
// phases; NoJunction when the best min_k u_k is below 0.15.  (A relaxed
// interior core carries ~1/3; a contact point pinned against a frozen
// profile can node-sample near 0.2, while plain interfaces stay near zero.)
Point2 find_junction(const PhaseState& s);

// All junctions at least min_separation apart, strongest first.
std::vector<Point2> find_junctions(const PhaseState& s, double min_separation);

struct SectorAngles {
    Point2 junction;
    std::array<double, 3> boundary{}; // polar angles of the interface rays, increasing
    std::array<int, 3> phase{};       // phase dominant in the sector after boundary[i]
    std::array<double, 3> angle{};    // sector widths, radians; sums to 2 pi

    double sector_of_phase(int k) const; // angle of the sector owned by phase k
};

// Sector angles on the circle of the given radius about the junction; the
// interface rays are where the two locally dominant phases tie.  Callers use
// radius = 5 * epsilon to sit outside the junction core.
SectorAngles measure_angles(const PhaseState& s, Point2 junction, double radius);

// Locate-and-measure convenience at radius 5 * epsilon.
SectorAngles measure_angles(const PhaseState& s);

} // namespace mcf
