#pragma once

// Initial-condition builders, the two-stage VLS growth protocol, and the
// scenario runners the CLI drives.
//
// Shapes resolve overlaps by phase order: a later-listed phase carves its
// region out of every earlier one (so the solid substrate, listed last,
// truncates a droplet resting on it), and a single `rest` phase takes the
// complement of everything else.

#include "mcf/geometry.hpp"
#include "mcf/solver.hpp"

#include <string>
#include <vector>

namespace mcf {

struct RunConfig; // config.hpp

struct ShapeSpec {
    enum class Kind { Circle, Slab, Substrate, Droplet, WireSeed, Rest };

    Kind kind = Kind::Rest;
    Point2 center{};   // Circle / Droplet / WireSeed
    double radius = 0; // Circle / Droplet / WireSeed
    char axis = 'y';   // Slab: coordinate the band spans ('x' or 'y')
    double lo = 0, hi = 0;        // Slab range along that coordinate
    std::vector<Point2> heights;  // Substrate: (x, height) knots, x increasing;
                                  // a single knot means constant height
};

// Signed distance of the raw shape (negative inside), before overlap
// resolution.  Substrates are the band between the seam y = 0 and the
// height curve.  Rest has no raw distance and throws.
double shape_distance(const ShapeSpec& sh, Point2 p, const Grid& g);

// Builds u_k = q(d_k / epsilon) from per-phase shapes (overlaps resolved as
// described above), then runs one unit-weight partition projection.
// ValidationError on malformed shapes or missing 4*epsilon seam clearance;
// BadPartition when the post-projection residual exceeds 1e-8.
PhaseState init_from_shapes(const Grid& g, double epsilon, const std::vector<ShapeSpec>& shapes);

// A full simulation: one stage for plain/wetting runs, two for VLS.
struct ScenarioRun {
    PhaseState initial;             // state right after init_from_shapes
    std::vector<RunResult> stages;  // 1 (mcf, wetting) or 2 (vls)
    Diagnostics merged;             // all stages, duplicate seam row dropped

    const PhaseState& final_state() const { return stages.back().state; }
};

// Dispatches on cfg scenario kind (mcf | wetting | vls).  `hooks` supplies
// on_sample / extra_metrics / track_step_energy; cadence and horizon come
// from the config.  Wetting runs require a frozen phase in the mobility
// pattern; VLS runs require exactly three phases ordered (L, V, S).
ScenarioRun run_scenario(const RunConfig& cfg, const RunOptions& hooks = {});

// The two-stage protocol on an already-built state, phases ordered
// (L, V, S).  Stage A (t <= t_growth): equal mobilities, c_s = 0, liquid
// volume held constant.  Stage B (t_growth < t <= t_end): per-phase
// mobilities (1, 1, delta), solid grows / vapor shrinks at rate
// c_s / epsilon * Int(u_L u_S).
struct VlsParams {
    double t_growth = 0.2;
    double t_end = 0.0;
    double c_s = 0.25;
    double delta = 0.0; // 0: defaults to 1 / (2 K) with K the axis-0 size
};

std::vector<RunResult> vls_protocol(PhaseState state, const TensionSet& tensions,
                                    const SolverParams& params, const VlsParams& vp,
                                    const RunOptions& hooks = {});

// Plain run with a frozen-solid mobility pattern; throws ValidationError
// when no phase is frozen (m_k = 0).
RunResult wetting_scenario(PhaseState state, const TensionSet& tensions, const MobilitySet& mob,
                           const SolverParams& params, double t_end, const RunOptions& hooks = {});

} // namespace mcf
