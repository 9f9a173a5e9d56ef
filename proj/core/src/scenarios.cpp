#include "mcf/scenarios.hpp"

#include "mcf/config.hpp"
#include "mcf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

namespace mcf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap_into(double v, double period) {
    double w = std::fmod(v, period);
    return w < 0.0 ? w + period : w;
}

double axis_min_image(double d, double period) {
    d = std::fmod(d, period);
    if (d > 0.5 * period) d -= period;
    if (d < -0.5 * period) d += period;
    return d;
}

double point_segment_dist(Point2 p, Point2 a, Point2 b) {
    double vx = b.x - a.x, vy = b.y - a.y;
    double wx = p.x - a.x, wy = p.y - a.y;
    double vv = vx * vx + vy * vy;
    double t = vv > 0.0 ? std::clamp((wx * vx + wy * vy) / vv, 0.0, 1.0) : 0.0;
    return std::hypot(wx - t * vx, wy - t * vy);
}

// periodic piecewise-linear height curve over x in [0, lx)
struct HeightCurve {
    const std::vector<Point2>& knots;
    double lx;

    double at(double x) const {
        if (knots.size() == 1) return knots[0].y;
        x = wrap_into(x, lx);
        // wrap segment comes first: (last - lx) -> first
        Point2 prev{knots.back().x - lx, knots.back().y};
        for (const auto& k : knots) {
            if (x <= k.x) {
                double span = k.x - prev.x;
                double t = span > 0.0 ? (x - prev.x) / span : 1.0;
                return prev.y + t * (k.y - prev.y);
            }
            prev = k;
        }
        Point2 first{knots.front().x + lx, knots.front().y};
        double span = first.x - prev.x;
        double t = span > 0.0 ? (x - prev.x) / span : 1.0;
        return prev.y + t * (first.y - prev.y);
    }

    double distance(Point2 p) const {
        double d = kInf;
        auto seg = [&](Point2 a, Point2 b) {
            for (int s = -1; s <= 1; ++s)
                d = std::min(d, point_segment_dist({p.x + s * lx, p.y}, a, b));
        };
        for (std::size_t i = 0; i + 1 < knots.size(); ++i) seg(knots[i], knots[i + 1]);
        seg(knots.back(), {knots.front().x + lx, knots.front().y});
        return d;
    }
};

// Raw signed distance (negative inside) in the 2D (x, y) shape plane with
// periods (lx, ly).
double raw_distance(const ShapeSpec& sh, Point2 p, double lx, double ly) {
    switch (sh.kind) {
    case ShapeSpec::Kind::Circle:
    case ShapeSpec::Kind::Droplet:
    case ShapeSpec::Kind::WireSeed: {
        double dx = axis_min_image(p.x - sh.center.x, lx);
        double dy = axis_min_image(p.y - sh.center.y, ly);
        return std::hypot(dx, dy) - sh.radius;
    }
    case ShapeSpec::Kind::Slab: {
        double period = sh.axis == 'x' ? lx : ly;
        double v = sh.axis == 'x' ? p.x : p.y;
        double mid = 0.5 * (sh.lo + sh.hi), halfw = 0.5 * (sh.hi - sh.lo);
        return std::abs(axis_min_image(v - mid, period)) - halfw;
    }
    case ShapeSpec::Kind::Substrate: {
        HeightCurve c{sh.heights, lx};
        double top;
        if (sh.heights.size() == 1) {
            top = p.y - sh.heights[0].y;
        } else {
            double d = c.distance({wrap_into(p.x, lx), p.y});
            top = p.y > c.at(p.x) ? d : -d;
        }
        // the band closes on the y = 0 seam
        double bottom = p.y <= 0.5 * ly ? -p.y : ly - p.y;
        return std::max(top, bottom);
    }
    case ShapeSpec::Kind::Rest:
        break;
    }
    throw ValidationError("rest shape has no signed distance");
}

void validate_shapes(const Grid& g, double eps, const std::vector<ShapeSpec>& shapes, double lx,
                     double ly) {
    int rests = 0;
    const double margin = 4.0 * eps;
    for (const auto& sh : shapes) {
        switch (sh.kind) {
        case ShapeSpec::Kind::Circle:
        case ShapeSpec::Kind::Droplet:
        case ShapeSpec::Kind::WireSeed: {
            if (!(sh.radius > 0.0)) throw ValidationError("circle radius must be positive");
            double pad = sh.radius + margin;
            if (sh.center.x - pad < 0.0 || sh.center.x + pad > lx || sh.center.y - pad < 0.0 ||
                sh.center.y + pad > ly)
                throw ValidationError("circle needs 4*epsilon clearance inside the box");
            break;
        }
        case ShapeSpec::Kind::Slab: {
            if (sh.axis != 'x' && sh.axis != 'y')
                throw ValidationError("slab axis must be 'x' or 'y'");
            if (g.dim() == 1 && sh.axis != 'x')
                throw ValidationError("1D slabs span the only axis, 'x'");
            double period = sh.axis == 'x' ? lx : ly;
            if (!(sh.lo >= 0.0 && sh.lo < sh.hi && sh.hi <= period))
                throw ValidationError("slab range must satisfy 0 <= lo < hi <= L");
            double th = sh.hi - sh.lo;
            if (std::min(th, period - th) < 2.0 * margin)
                throw ValidationError("slab interfaces need 8*epsilon separation");
            break;
        }
        case ShapeSpec::Kind::Substrate: {
            if (sh.heights.empty()) throw ValidationError("substrate needs height knots");
            double prev = -kInf;
            for (const auto& k : sh.heights) {
                if (k.x < 0.0 || k.x > lx || k.x < prev)
                    throw ValidationError("substrate knots need non-decreasing x in [0, L]");
                prev = k.x;
                if (k.y < 2.0 * margin || k.y > ly - 2.0 * margin)
                    throw ValidationError("substrate heights need 8*epsilon seam clearance");
            }
            break;
        }
        case ShapeSpec::Kind::Rest:
            ++rests;
            break;
        }
    }
    if (rests > 1) throw ValidationError("at most one rest phase");
}

} // namespace

double shape_distance(const ShapeSpec& sh, Point2 p, const Grid& g) {
    double lx = g.dim() >= 2 ? g.length(1) : g.length(0);
    double ly = g.length(0);
    return raw_distance(sh, p, lx, ly);
}

PhaseState init_from_shapes(const Grid& g, double epsilon, const std::vector<ShapeSpec>& shapes) {
    const int n = static_cast<int>(shapes.size());
    if (n < 2) throw ValidationError("need at least two phases");
    if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");

    // the 2D shape plane: x = axis 1 (axis 0 in 1D), y = axis 0; 3D states
    // revolve the x >= L1/2 half-plane around the vertical axis
    double lx = g.dim() >= 2 ? g.length(1) : g.length(0);
    double ly = g.length(0);
    validate_shapes(g, epsilon, shapes, lx, ly);

    int rest = -1;
    for (int k = 0; k < n; ++k)
        if (shapes[k].kind == ShapeSpec::Kind::Rest) rest = k;

    PhaseState s(g, epsilon, n);
    std::vector<double> raw(n), eff(n);
    auto fill = [&](std::size_t idx, Point2 p) {
        for (int k = 0; k < n; ++k)
            raw[k] = k == rest ? kInf : raw_distance(shapes[k], p, lx, ly);
        for (int k = 0; k < n; ++k) {
            double d = raw[k];
            for (int j = k + 1; j < n; ++j) // later phases carve earlier ones
                if (j != rest) d = std::max(d, -raw[j]);
            eff[k] = d;
        }
        double others = 0.0;
        for (int k = 0; k < n; ++k) {
            if (k == rest) continue;
            double v = optimal_profile(std::clamp(eff[k] / epsilon, -60.0, 60.0));
            s.fields[k].values[idx] = v;
            others += v;
        }
        // The rest phase takes whatever the others leave.  Along the seam
        // between two carved phases the profiles already sum to one, so the
        // rest field vanishes there; a distance-based rest would instead lay
        // a u = 1/2 film on every buried interface, and the projection would
        // then dent the neighbours (fatal for a frozen substrate, whose dent
        // never heals).
        if (rest >= 0) s.fields[rest].values[idx] = std::max(0.0, 1.0 - others);
    };

    if (g.dim() == 1) {
        for (int i0 = 0; i0 < g.size(0); ++i0) fill(i0, {i0 * g.spacing(0), 0.0});
    } else if (g.dim() == 2) {
        std::size_t idx = 0;
        for (int i0 = 0; i0 < g.size(0); ++i0)
            for (int i1 = 0; i1 < g.size(1); ++i1)
                fill(idx++, {i1 * g.spacing(1), i0 * g.spacing(0)});
    } else {
        double c1 = 0.5 * g.length(1), c2 = 0.5 * g.length(2);
        std::size_t idx = 0;
        for (int i0 = 0; i0 < g.size(0); ++i0)
            for (int i1 = 0; i1 < g.size(1); ++i1)
                for (int i2 = 0; i2 < g.size(2); ++i2) {
                    double rho = std::hypot(i1 * g.spacing(1) - c1, i2 * g.spacing(2) - c2);
                    fill(idx++, {c1 + rho, i0 * g.spacing(0)});
                }
    }

    SolverParams p;
    p.dt = 1.0;
    ProjectionStats stats;
    s = project_partition(s, std::vector<double>(n, 1.0), p, &stats);
    if (stats.max_residual_after > 1e-8)
        throw BadPartition("initial shapes do not partition the box: residual " +
                           std::to_string(stats.max_residual_after));
    s.time = 0.0;
    return s;
}

namespace {

void merge_diagnostics(ScenarioRun& out) {
    Diagnostics& m = out.merged;
    for (const auto& st : out.stages) {
        const Diagnostics& d = st.diag;
        if (m.extra_names.empty()) m.extra_names = d.extra_names;
        for (const auto& row : d.rows) {
            if (!m.rows.empty() && row.t == m.rows.back().t) continue;
            m.rows.push_back(row);
        }
        m.steps += d.steps;
        m.max_partition_residual = std::max(m.max_partition_residual, d.max_partition_residual);
        m.max_fallback_fraction = std::max(m.max_fallback_fraction, d.max_fallback_fraction);
        m.max_volume_error = std::max(m.max_volume_error, d.max_volume_error);
        m.max_increment_error = std::max(m.max_increment_error, d.max_increment_error);
        m.max_step_energy_increase =
            std::max(m.max_step_energy_increase, d.max_step_energy_increase);
        m.out_of_range_cells += d.out_of_range_cells;
    }
}

} // namespace

std::vector<RunResult> vls_protocol(PhaseState state, const TensionSet& tensions,
                                    const SolverParams& params, const VlsParams& vp,
                                    const RunOptions& hooks) {
    if (state.n_phases() != 3)
        throw ValidationError("vls protocol needs exactly three phases (L, V, S)");
    if (!(vp.t_growth >= 0.0) || !(vp.t_end > 0.0))
        throw ValidationError("vls protocol needs t_growth >= 0 and t_end > 0");
    double delta = vp.delta > 0.0 ? vp.delta : 1.0 / (2.0 * state.grid.size(0));

    std::vector<RunResult> stages;

    // Stage A: equal mobilities, liquid volume held, no growth
    MobilitySet ma = MobilitySet::from_per_phase({1.0, 1.0, 1.0});
    VolumeSchedule va = VolumeSchedule::from_state(
        {VolumeMode::Constant, VolumeMode::Free, VolumeMode::Free}, state, 0.0);
    RunOptions oa = hooks;
    oa.t_end = std::min(vp.t_growth, vp.t_end);
    stages.push_back(run(std::move(state), tensions, ma, va, params, oa));

    if (vp.t_end <= vp.t_growth) return stages;

    // Stage B: solid grows at c_s, vapor cedes, liquid rides on top
    std::clog << "vls: stage B from t = " << stages.back().state.time << " (delta = " << delta
              << ", c_s = " << vp.c_s << ")\n";
    MobilitySet mb = MobilitySet::from_per_phase({1.0, 1.0, delta});
    VolumeSchedule vb = VolumeSchedule::from_state(
        {VolumeMode::Constant, VolumeMode::VlsShrink, VolumeMode::VlsGrow}, stages.back().state,
        vp.c_s);
    RunOptions ob = hooks;
    ob.t_end = vp.t_end;
    PhaseState sb = stages.back().state;
    stages.push_back(run(std::move(sb), tensions, mb, vb, params, ob));
    return stages;
}

RunResult wetting_scenario(PhaseState state, const TensionSet& tensions, const MobilitySet& mob,
                           const SolverParams& params, double t_end, const RunOptions& hooks) {
    if (mob.kind() != MobilitySet::Kind::HarmonicallyAdditive)
        throw ValidationError("wetting runs need a harmonically additive mobility set");
    const auto& per = mob.per_phase();
    if (std::none_of(per.begin(), per.end(), [](double m) { return m == 0.0; }))
        throw ValidationError("wetting runs need a frozen phase (some per-phase m_k = 0)");
    RunOptions opt = hooks;
    opt.t_end = t_end;
    return run(std::move(state), tensions, mob, VolumeSchedule::free_run(state.n_phases()), params,
               opt);
}

ScenarioRun run_scenario(const RunConfig& cfg, const RunOptions& hooks) {
    Grid g = cfg.make_grid();
    TensionSet t = cfg.make_tensions();
    SolverParams p = cfg.make_params();

    ScenarioRun out;
    out.initial = init_from_shapes(g, cfg.epsilon, cfg.shapes);

    RunOptions opt = hooks;
    opt.t_end = cfg.t_end;
    opt.sample_dt = cfg.sample_dt;
    opt.track_step_energy = cfg.track_step_energy || hooks.track_step_energy;

    if (cfg.scenario == "vls") {
        VlsParams vp;
        vp.t_growth = cfg.t_growth;
        vp.t_end = cfg.t_end;
        vp.c_s = cfg.c_s;
        vp.delta = cfg.vls_delta;
        out.stages = vls_protocol(out.initial, t, p, vp, opt);
    } else if (cfg.scenario == "wetting") {
        out.stages.push_back(
            wetting_scenario(out.initial, t, cfg.make_mobilities(), p, cfg.t_end, opt));
    } else if (cfg.scenario == "mcf") {
        VolumeSchedule v = cfg.modes.empty()
                               ? VolumeSchedule::free_run(out.initial.n_phases())
                               : VolumeSchedule::from_state(cfg.modes, out.initial, cfg.c_s);
        out.stages.push_back(run(out.initial, t, cfg.make_mobilities(), v, p, opt));
    } else {
        throw ValidationError("unknown scenario kind: " + cfg.scenario);
    }
    merge_diagnostics(out);
    return out;
}

} // namespace mcf
