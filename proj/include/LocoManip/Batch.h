#pragma once

#include <LocoManip/Scenario.h>

#include <optional>
#include <string>
#include <vector>

namespace locomanip
{

/** \brief Outcome of one scenario of a batch; error is set instead of result when the run threw. */
struct BatchEntry
{
  std::optional<ScenarioResult> result;
  std::string error;
};

/** \brief Run independent scenarios across OpenMP threads.
 *
 * Each scenario runs single-threaded, so entry i is bit-identical to runScenariosSerial()[i] whatever the thread
 * count. threads <= 0 keeps the OpenMP default.
 */
std::vector<BatchEntry> runScenarios(const std::vector<ScenarioConfig> & configs, int threads = 0);

/** \brief Reference implementation: one scenario after the other on the calling thread. */
std::vector<BatchEntry> runScenariosSerial(const std::vector<ScenarioConfig> & configs);

} // namespace locomanip
