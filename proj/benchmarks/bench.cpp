#include "mcf/scenarios.hpp"
#include "mcf/solver.hpp"
#include "mcf/spectral.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace mcf;

namespace {

// three-phase band crossing, same layout as the junction presets
PhaseState bands(int k, double eps) {
    Grid g({k, k}, {1.0, 1.0});
    ShapeSpec a;
    a.kind = ShapeSpec::Kind::Slab;
    a.axis = 'x';
    a.lo = 0.0;
    a.hi = 0.5;
    ShapeSpec b;
    b.kind = ShapeSpec::Kind::Rest;
    ShapeSpec c;
    c.kind = ShapeSpec::Kind::Slab;
    c.axis = 'y';
    c.lo = 0.1;
    c.hi = 0.5;
    return init_from_shapes(g, eps, {a, b, c});
}

SolverParams params_for(double eps) {
    SolverParams p;
    p.dt = eps * eps;
    return p;
}

void BM_TransformRoundTrip(benchmark::State& st) {
    const int k = static_cast<int>(st.range(0));
    Grid g({k, k}, {1.0, 1.0});
    Field f(g);
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = std::sin(0.37 * i);
    for (auto _ : st) {
        Field back = inverse_transform(forward_transform(f));
        benchmark::DoNotOptimize(back.values.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(k) * k);
}
BENCHMARK(BM_TransformRoundTrip)->Arg(128)->Arg(256)->Arg(512);

void BM_StepAdditive(benchmark::State& st) {
    const int k = static_cast<int>(st.range(0));
    const double eps = 1.0 / k;
    PhaseState s = bands(k, eps);
    TensionSet t = TensionSet::from_pairwise({1.0, 1.0, 1.0});
    MobilitySet m = MobilitySet::from_pairwise({1.0, 1.0, 1.0});
    SolverParams p = params_for(eps);
    for (auto _ : st) {
        PhaseState out = step_diffusion(s, t, m, p);
        benchmark::DoNotOptimize(out.fields[0].values.data());
    }
}
BENCHMARK(BM_StepAdditive)->Arg(128)->Arg(256);

void BM_StepGeneralMetric(benchmark::State& st) {
    const int k = static_cast<int>(st.range(0));
    const double eps = 1.0 / k;
    PhaseState s = bands(k, eps);
    TensionSet t = TensionSet::from_pairwise({1.0, 1.0, 1.0});
    // no per-phase representation: exercises the coupled splitting
    MobilitySet m = MobilitySet::from_pairwise({1.0, 1.0, 0.5});
    SolverParams p = params_for(eps);
    for (auto _ : st) {
        PhaseState out = step_diffusion(s, t, m, p);
        benchmark::DoNotOptimize(out.fields[0].values.data());
    }
}
BENCHMARK(BM_StepGeneralMetric)->Arg(128)->Arg(256);

void BM_ProjectPartition(benchmark::State& st) {
    const int k = static_cast<int>(st.range(0));
    const double eps = 1.0 / k;
    PhaseState s = bands(k, eps);
    // leave a residual for the projection to remove
    for (double& v : s.fields[0].values) v += 1e-3;
    SolverParams p = params_for(eps);
    const std::vector<double> mob = {1.0, 1.0, 1.0};
    for (auto _ : st) {
        PhaseState out = project_partition(s, mob, p);
        benchmark::DoNotOptimize(out.fields[0].values.data());
    }
}
BENCHMARK(BM_ProjectPartition)->Arg(128)->Arg(256);

void BM_FullStep(benchmark::State& st) {
    const int k = static_cast<int>(st.range(0));
    const double eps = 1.0 / k;
    PhaseState s = bands(k, eps);
    TensionSet t = TensionSet::from_pairwise({1.0, 1.0, 1.0});
    MobilitySet m = MobilitySet::from_pairwise({1.0, 1.0, 1.0});
    SolverParams p = params_for(eps);
    const std::vector<double> mob = m.per_phase();
    for (auto _ : st) {
        PhaseState out = project_partition(step_diffusion(s, t, m, p), mob, p);
        benchmark::DoNotOptimize(out.fields[0].values.data());
    }
}
BENCHMARK(BM_FullStep)->Arg(256);

} // namespace

BENCHMARK_MAIN();
