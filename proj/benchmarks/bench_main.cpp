#include <benchmark/benchmark.h>

#include "mfchain/adjoint.hpp"
#include "mfchain/girsanov.hpp"
#include "mfchain/model.hpp"
#include "mfchain/riccati.hpp"
#include "mfchain/schlogl.hpp"
#include "mfchain/two_state.hpp"

using namespace mfchain;

namespace {

const TimeGrid kGrid(1.0, 256);

MeasureChange ex1_change(double u) {
  auto model = ex1_model(TwoStateSpec{});
  return make_measure_change(model, ControlTable::constant(kGrid, model.states(), u), std::nullopt);
}

void BM_SimulateReferenceTwoState(benchmark::State& state) {
  auto g = two_state_reference(TwoStateSpec{});
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(simulate_reference(g, InitialLaw::point_mass(0), 1.0, n, 1, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateReferenceTwoState)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_SimulateSchlogl(benchmark::State& state) {
  SchloglSpec spec;
  auto model = ex3_model(spec);
  auto table = ControlTable::sample(kGrid, model.states(), [](double, State x) { return x == 0 ? 0.0 : 1.0; });
  auto change = make_measure_change(model, table, MeanCurve::constant(kGrid, spec.x0));
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_paths(change.intensity, change.mean_ptr(), change.control,
                                            InitialLaw::point_mass(spec.x0), 1.0, n, 2, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateSchlogl)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_DensityProduct(benchmark::State& state) {
  auto change = ex1_change(1.5);
  auto ens = simulate_reference(change.reference, InitialLaw::point_mass(0), 1.0, 1000, 3, 1);
  for (auto _ : state)
    for (const auto& p : ens.paths) benchmark::DoNotOptimize(density_product(p, change));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_DensityProduct)->Unit(benchmark::kMillisecond);

void BM_DensityEuler(benchmark::State& state) {
  auto change = ex1_change(1.5);
  auto ens = simulate_reference(change.reference, InitialLaw::point_mass(0), 1.0, 100, 4, 1);
  for (auto _ : state)
    for (const auto& p : ens.paths) benchmark::DoNotOptimize(density_sde_euler(p, change, 1e-3));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_DensityEuler)->Unit(benchmark::kMillisecond);

void BM_RiccatiTable(benchmark::State& state) {
  std::vector<RiccatiCase> cases;
  for (double alpha : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 5.0, 10.0})
    for (double m0 : {0.0, 0.25}) cases.push_back({0, 1, alpha, m0});
  for (auto _ : state) benchmark::DoNotOptimize(riccati_table(cases, 1e-4, 100.0, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cases.size()));
}
BENCHMARK(BM_RiccatiTable)->Unit(benchmark::kMillisecond);

void BM_AdjointSweepSchlogl(benchmark::State& state) {
  SchloglSpec spec;
  auto model = ex3_model(spec);
  AdjointInputs inputs;
  inputs.mean = MeanCurve::constant(kGrid, spec.x0);
  inputs.mean_f = inputs.mean;
  inputs.mean_h = spec.x0;
  std::vector<double> uniform(model.states().size(), 1.0 / static_cast<double>(model.states().size()));
  std::vector<double> probs;
  for (std::size_t k = 0; k <= kGrid.intervals(); ++k) probs.insert(probs.end(), uniform.begin(), uniform.end());
  inputs.marginals = MarginalCurve(kGrid, model.states().size(), probs);
  for (auto _ : state) benchmark::DoNotOptimize(solve_adjoint_ode(smp_driver(model, inputs), model.reference, kGrid));
}
BENCHMARK(BM_AdjointSweepSchlogl)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
