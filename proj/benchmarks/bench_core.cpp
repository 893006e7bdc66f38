#include <benchmark/benchmark.h>

#include "rbffd/operators.hpp"
#include "rbffd/spectral.hpp"
#include "rbffd/timestepping.hpp"

namespace {

using namespace rbffd;

const NodeSet& torus_nodes(double h) {
    static NodeSet nodes = generate_nodes(0.02, Domain::Torus, 1);
    static double cached_h = 0.02;
    if (h != cached_h) {
        nodes = generate_nodes(h, Domain::Torus, 1);
        cached_h = h;
    }
    return nodes;
}

void BM_FindStencils(benchmark::State& state) {
    const NodeSet& nodes = torus_nodes(0.02);
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(find_stencils(nodes, n));
    }
    state.SetItemsProcessed(state.iterations() * nodes.size());
}
BENCHMARK(BM_FindStencils)->Arg(12)->Arg(30);

void BM_ComputeWeights(benchmark::State& state) {
    const NodeSet& nodes = torus_nodes(0.02);
    const int n = static_cast<int>(state.range(0));
    const StencilTable st = find_stencils(nodes, n);
    const OperatorSpec spec = n >= 30 ? OperatorSpec::hyperviscosity(2, 2, n)
                                      : OperatorSpec::partial_x(3, 2, n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(compute_weights(nodes, st.stencil(7), 7, spec));
    }
}
BENCHMARK(BM_ComputeWeights)->Arg(12)->Arg(30);

void BM_Assemble(benchmark::State& state) {
    const NodeSet& nodes = torus_nodes(0.02);
    const StencilTable st = find_stencils(nodes, 12);
    const OperatorSpec spec = OperatorSpec::partial_x();
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble(nodes, st, spec));
    }
    state.SetItemsProcessed(state.iterations() * nodes.size());
}
BENCHMARK(BM_Assemble);

void BM_EvolutionSolve(benchmark::State& state) {
    const NodeSet& nodes = torus_nodes(0.02);
    const StencilTable st_adv = find_stencils(nodes, 12);
    const StencilTable st_hyp = find_stencils(nodes, 30);
    const SparseOperator d_adv = assemble(nodes, st_adv, OperatorSpec::partial_x());
    const SparseOperator d_hip = assemble(nodes, st_hyp, OperatorSpec::hyperviscosity(2));
    const EvolutionMap map =
        build_evolution(stabilised_operator(d_adv, d_hip, {2, 0.3, nodes.h()}), 1e-4, {});
    Eigen::VectorXd v = Eigen::VectorXd::Random(nodes.size());
    for (auto _ : state) {
        v = map.apply(v);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(BM_EvolutionSolve);

void BM_SpectralRadiusArnoldi(benchmark::State& state) {
    const NodeSet& nodes = torus_nodes(0.03);
    const StencilTable st_adv = find_stencils(nodes, 12);
    const StencilTable st_hyp = find_stencils(nodes, 30);
    const SparseOperator d_adv = assemble(nodes, st_adv, OperatorSpec::partial_x());
    const SparseOperator d_hip = assemble(nodes, st_hyp, OperatorSpec::hyperviscosity(2));
    const EvolutionMap map =
        build_evolution(stabilised_operator(d_adv, d_hip, {2, 0.3, nodes.h()}), 1e-4, {});
    for (auto _ : state) {
        benchmark::DoNotOptimize(spectral_radius(map, 40, EigMethod::Arnoldi));
    }
}
BENCHMARK(BM_SpectralRadiusArnoldi)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
