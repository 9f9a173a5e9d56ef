#include "doctest.h"

#include "mcf/config.hpp"
#include "mcf/errors.hpp"
#include "mcf/geometry.hpp"
#include "mcf/scenarios.hpp"
#include "mcf/solver.hpp"

#include <cmath>
#include <vector>

using namespace mcf;

namespace {

ShapeSpec circle(double cx, double cy, double r) {
    ShapeSpec s;
    s.kind = ShapeSpec::Kind::Circle;
    s.center = {cx, cy};
    s.radius = r;
    return s;
}

ShapeSpec rest() {
    ShapeSpec s;
    s.kind = ShapeSpec::Kind::Rest;
    return s;
}

ShapeSpec flat_substrate(double h) {
    ShapeSpec s;
    s.kind = ShapeSpec::Kind::Substrate;
    s.heights = {{0.0, h}};
    return s;
}

} // namespace

TEST_CASE("raw shape distances") {
    Grid g({64, 64}, {1.0, 1.0});

    ShapeSpec c = circle(0.5, 0.5, 0.2);
    CHECK(shape_distance(c, {0.5, 0.5}, g) == doctest::Approx(-0.2).epsilon(1e-14));
    CHECK(shape_distance(c, {0.8, 0.5}, g) == doctest::Approx(0.1).epsilon(1e-14));

    ShapeSpec slab;
    slab.kind = ShapeSpec::Kind::Slab;
    slab.axis = 'x';
    slab.lo = 0.3;
    slab.hi = 0.7;
    CHECK(shape_distance(slab, {0.5, 0.9}, g) == doctest::Approx(-0.2).epsilon(1e-14));
    CHECK(shape_distance(slab, {0.1, 0.9}, g) == doctest::Approx(0.2).epsilon(1e-14));

    ShapeSpec sub = flat_substrate(0.3);
    CHECK(shape_distance(sub, {0.4, 0.1}, g) == doctest::Approx(-0.1).epsilon(1e-14));
    CHECK(shape_distance(sub, {0.4, 0.5}, g) == doctest::Approx(0.2).epsilon(1e-14));

    CHECK_THROWS_AS(shape_distance(rest(), {0.5, 0.5}, g), ValidationError);
}

TEST_CASE("init_from_shapes builds an exact partition with saturated cores") {
    Grid g({128, 128}, {1.0, 1.0});
    const double eps = 1.0 / 64.0;
    PhaseState s = init_from_shapes(g, eps, {circle(0.5, 0.5, 0.3), rest()});
    CHECK(s.n_phases() == 2);
    CHECK(partition_residual(s) < 1e-8);
    // center deep inside the circle
    CHECK(s.fields[0].at(64, 64) >= 1.0 - 1e-6);
    CHECK(s.fields[1].at(64, 64) <= 1e-6);
    // far outside
    CHECK(s.fields[0].at(4, 4) <= 1e-6);
    for (int k = 0; k < 2; ++k)
        for (double v : s.fields[k].values) {
            CHECK(v > -0.01);
            CHECK(v < 1.01);
        }
}

TEST_CASE("1d states use the axis-0 coordinate") {
    Grid g({256}, {1.0});
    ShapeSpec slab;
    slab.kind = ShapeSpec::Kind::Slab;
    slab.axis = 'x';
    slab.lo = 0.3;
    slab.hi = 0.7;
    PhaseState s = init_from_shapes(g, 1.0 / 64.0, {slab, rest()});
    // profile tail at d/eps = 12.8 is ~3e-6
    CHECK(s.fields[0].values[128] >= 1.0 - 1e-4); // x = 0.5
    CHECK(s.fields[0].values[10] <= 1e-4);
    CHECK(partition_residual(s) < 1e-8);
}

TEST_CASE("substrate seam clearance is enforced") {
    Grid g({64, 64}, {1.0, 1.0});
    // height curve touching the top of the domain leaves no seam room
    CHECK_THROWS_AS(init_from_shapes(g, 1.0 / 16.0,
                                     {flat_substrate(0.99), rest()}),
                    ValidationError);
}

TEST_CASE("wetting scenario needs a frozen phase") {
    Grid g({64, 64}, {1.0, 1.0});
    const double eps = 1.0 / 32.0;
    ShapeSpec droplet;
    droplet.kind = ShapeSpec::Kind::Droplet;
    droplet.center = {0.5, 0.3};
    droplet.radius = 0.15;
    PhaseState s = init_from_shapes(g, eps, {droplet, rest(), flat_substrate(0.3)});
    TensionSet t = TensionSet::from_pairwise({1.0, 1.0, 1.0});
    SolverParams p;
    p.dt = 1e-4;

    MobilitySet moving = MobilitySet::from_per_phase({1.0, 1.0, 1.0});
    CHECK_THROWS_AS(wetting_scenario(s, t, moving, p, 10 * p.dt), ValidationError);

    MobilitySet frozen = MobilitySet::from_pairwise({1.0, 0.0, 0.0});
    RunResult r = wetting_scenario(s, t, frozen, p, 10 * p.dt);
    CHECK(r.diag.steps == 10);
    // the solid never moved
    double drift = 0.0;
    for (std::size_t x = 0; x < g.samples(); ++x)
        drift = std::max(drift,
                         std::abs(r.state.fields[2].values[x] - s.fields[2].values[x]));
    CHECK(drift == 0.0);
}

TEST_CASE("vls protocol holds the liquid and grows the solid on schedule") {
    Grid g({64, 64}, {1.0, 1.0});
    const double eps = 1.0 / 32.0;
    // raw seed circle must keep 4 eps = 1/8 clear of the box walls
    ShapeSpec seed;
    seed.kind = ShapeSpec::Kind::WireSeed;
    seed.center = {0.5, 0.3};
    seed.radius = 0.15;
    PhaseState s = init_from_shapes(g, eps, {seed, rest(), flat_substrate(0.3)});
    TensionSet t = TensionSet::from_pairwise({1.0, 1.0, 1.0});
    SolverParams p;
    p.dt = 1e-4;

    VlsParams vp;
    vp.t_growth = 30 * p.dt;
    vp.t_end = 60 * p.dt;
    vp.c_s = 0.25;

    const double liquid0 = phase_volumes(s)[0];
    std::vector<RunResult> stages = vls_protocol(s, t, p, vp);
    REQUIRE(stages.size() == 2);

    // stage A: conserved liquid, frozen growth pair
    CHECK(stages[0].diag.max_volume_error < 1e-9);
    CHECK(std::abs(phase_volumes(stages[0].state)[0] - liquid0) < 1e-9);

    // stage B: solid up, vapor down, increments on schedule
    const double solid_a = phase_volumes(stages[0].state)[2];
    const double solid_b = phase_volumes(stages[1].state)[2];
    CHECK(solid_b > solid_a);
    CHECK(stages[1].diag.max_increment_error < 1e-8);
    CHECK(std::abs(phase_volumes(stages[1].state)[0] - liquid0) < 1e-9);
}

TEST_CASE("run_scenario dispatches on the config kind") {
    RunConfig cfg;
    cfg.grid_sizes = {64, 64};
    cfg.epsilon = 1.0 / 32.0;
    cfg.dt = 1e-4;
    cfg.t_end = 10e-4;
    cfg.phase_names = {"in", "out"};
    cfg.tensions = {1.0};
    ShapeSpec c = circle(0.5, 0.5, 0.25);
    cfg.shapes = {c, rest()};

    ScenarioRun r = run_scenario(cfg);
    CHECK(r.stages.size() == 1);
    CHECK(r.merged.steps == 10);
    CHECK(r.final_state().time == doctest::Approx(10e-4).epsilon(1e-12));
    CHECK(r.merged.max_partition_residual < 1e-10);
    // the circle shrinks
    CHECK(phase_volumes(r.final_state())[0] < phase_volumes(r.initial)[0]);
}
