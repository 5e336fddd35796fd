#include "poresim/diffusion.hpp"
#include "poresim/integrator.hpp"
#include "poresim/network.hpp"
#include "poresim/scenario.hpp"
#include "poresim/volume.hpp"

#include <benchmark/benchmark.h>

#include <numbers>

using namespace poresim;

namespace {

VolumeImage blob_volume(int n) {
    return synth_volume(SynthSpec::random_blobs({n, n, n}, n / 2, 2.0, 4.5, 2024, 24.0));
}

PoreNetwork chain(int n) {
    PoreNetwork net;
    net.resolution_um = 1.0;
    for (int i = 0; i < n; ++i)
        net.balls.push_back({{2.0 * i, 0.0, 0.0}, 1.2, 4.0 / 3.0 * std::numbers::pi * 1.728});
    for (int i = 0; i + 1 < n; ++i) net.edges.push_back({i, i + 1, 1.0, 2.0, 0.5});
    return net;
}

} // namespace

static void BM_DistanceTransform(benchmark::State& state) {
    const VolumeImage img = blob_volume(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(distance_transform(img));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(img.voxel_count()));
}
BENCHMARK(BM_DistanceTransform)->Arg(32)->Arg(48)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_ExtractNetwork(benchmark::State& state) {
    const VolumeImage img = blob_volume(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(extract_network(img, "bench"));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(img.pore_count()));
}
BENCHMARK(BM_ExtractNetwork)->Arg(32)->Arg(48)->Unit(benchmark::kMillisecond);

static void BM_AssembleOperator(benchmark::State& state) {
    const PoreNetwork net = chain(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(assemble(net));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AssembleOperator)->Range(256, 16384);

static void BM_ImplicitDiffusionSolve(benchmark::State& state) {
    const PoreNetwork net = chain(static_cast<int>(state.range(0)));
    const DiffusionOperator op = assemble(net);
    const DiffusionSolver solver(op, 100.0, 0.01);
    Eigen::VectorXd m = Eigen::VectorXd::LinSpaced(op.size(), 0.0, 1.0);
    for (auto _ : state) {
        m = solver.solve(m);
        benchmark::DoNotOptimize(m.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ImplicitDiffusionSolve)->Range(256, 16384);

static void BM_IntegratorStep(benchmark::State& state) {
    const PoreNetwork net = chain(static_cast<int>(state.range(0)));
    BioParams params;
    params.d_dom = 100.0;
    SolverConfig cfg;
    cfg.dt_days = 0.01;
    ScenarioSpec spec;
    spec.seed = 3;
    SystemState s = generate(net, spec);
    const Stepper stepper(net, params, cfg);
    for (auto _ : state) {
        stepper.advance(s);
        benchmark::DoNotOptimize(s.dom.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IntegratorStep)->Range(256, 4096);
