#include <LocoManip/Batch.h>

#include <omp.h>

namespace locomanip
{

namespace
{

BatchEntry runOne(const ScenarioConfig & config)
{
  BatchEntry entry;
  try
  {
    entry.result = runScenario(config);
  }
  catch(const std::exception & e)
  {
    entry.error = e.what();
  }
  return entry;
}

} // namespace

std::vector<BatchEntry> runScenarios(const std::vector<ScenarioConfig> & configs, int threads)
{
  std::vector<BatchEntry> entries(configs.size());
  const int n_threads = threads > 0 ? threads : omp_get_max_threads();
  const auto n = static_cast<std::ptrdiff_t>(configs.size());
  // Scenario costs differ by an order of magnitude, hand them out one at a time.
#pragma omp parallel for schedule(dynamic, 1) num_threads(n_threads)
  for(std::ptrdiff_t i = 0; i < n; ++i)
  {
    entries[static_cast<size_t>(i)] = runOne(configs[static_cast<size_t>(i)]);
  }
  return entries;
}

std::vector<BatchEntry> runScenariosSerial(const std::vector<ScenarioConfig> & configs)
{
  std::vector<BatchEntry> entries;
  entries.reserve(configs.size());
  for(const auto & c : configs)
  {
    entries.push_back(runOne(c));
  }
  return entries;
}

} // namespace locomanip
