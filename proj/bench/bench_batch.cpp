#include <LocoManip/Batch.h>

#include <benchmark/benchmark.h>

using namespace locomanip;

namespace
{

/** Short in-place stepping runs with different disturbance amplitudes, a typical parameter sweep. */
std::vector<ScenarioConfig> sweep(size_t n)
{
  std::vector<ScenarioConfig> configs;
  for(size_t i = 0; i < n; ++i)
  {
    ScenarioConfig c;
    c.name = "sweep" + std::to_string(i);
    c.duration = 3.0;
    ExternalContact hand;
    hand.position = {0.3, 0.25, 1.0};
    c.contacts.breakpoints.push_back({0.0, {hand}, Interpolation::Hold});
    Disturbance d;
    d.kind = Disturbance::Kind::Sinusoid;
    d.force = {5.0 * static_cast<double>(i + 1), 0.0, 0.0};
    d.period = 2.0;
    c.disturbances.push_back(d);
    configs.push_back(c);
  }
  return configs;
}

void BM_BatchSerial(benchmark::State & state)
{
  const auto configs = sweep(static_cast<size_t>(state.range(0)));
  for(auto _ : state)
  {
    benchmark::DoNotOptimize(runScenariosSerial(configs));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BatchParallel(benchmark::State & state)
{
  const auto configs = sweep(static_cast<size_t>(state.range(0)));
  for(auto _ : state)
  {
    benchmark::DoNotOptimize(runScenarios(configs));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(BM_BatchSerial)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchParallel)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
