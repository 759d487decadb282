#pragma once

#include <LocoManip/ClosedLoop.h>
#include <LocoManip/Trace.h>

#include <optional>
#include <string>
#include <vector>

namespace locomanip
{

/** \brief Footstep pattern of a scenario: alternating in-place steps or an explicit list. */
struct SteppingConfig
{
  enum class Mode
  {
    InPlace,
    Footsteps
  };

  Mode mode = Mode::InPlace;
  double foot_spacing = 0.2;
  double single_support = 0.8;
  double double_support = 0.2;
  /** Fraction of each step spent transferring the ZMP from the previous foot. */
  double double_support_fraction = 0.2;
  std::vector<Footstep> footsteps;
  SoleGeometry sole;

  bool operator==(const SteppingConfig &) const = default;
};

struct ControllerConfig
{
  double dt = 0.002;
  double preview_window = 1.6;
  PreviewWeights weights;
  StabilizerGains stabilizer;

  bool operator==(const ControllerConfig &) const = default;
};

struct AblationConfig
{
  /** Plan with kappa = 1 whatever the vertical external forces. */
  bool force_kappa_one = false;
  /** Feed a zero force error to the stabilizer's compensation. */
  bool disable_gamma_compensation = false;

  bool operator==(const AblationConfig &) const = default;
};

/** \brief Bound on one metric, checked after the run. */
struct MetricThreshold
{
  std::string metric;
  std::optional<double> min;
  std::optional<double> max;

  bool operator==(const MetricThreshold &) const = default;
};

struct MetricsConfig
{
  EvalWindow window;
  std::vector<MetricBand> bands;
  std::vector<MetricThreshold> thresholds;

  bool operator==(const MetricsConfig &) const = default;
};

/** \brief Everything needed to reproduce one closed-loop run. */
struct ScenarioConfig
{
  std::string name = "scenario";
  double duration = 10.0;
  RobotParams robot;
  SteppingConfig stepping;
  /** Contacts the planner and the stabilizer expect. */
  ContactSchedule contacts;
  /** Deviations of the true contacts from the desired ones. */
  std::vector<Disturbance> disturbances;
  ControllerConfig controller;
  PlantConfig plant;
  double divergence_threshold = 1.0;
  Eigen::Vector2d initial_com_offset = Eigen::Vector2d::Zero();
  double com_noise = 0.0;
  double force_noise = 0.0;
  uint64_t seed = 0;
  AblationConfig ablation;
  MetricsConfig metrics;
  std::string output_directory = "out";

  bool operator==(const ScenarioConfig &) const = default;
};

/** \brief Parse a scenario from YAML text.
 *
 * Unknown keys are rejected. Errors are reported as ConfigError naming the dotted field path and, when known, the
 * source line. Each override "dotted.key=value" replaces the value at that path before validation; list elements
 * are addressed by index.
 */
ScenarioConfig parseScenario(const std::string & yaml_text, const std::vector<std::string> & overrides = {});

/** \brief Read and parse a scenario file. */
ScenarioConfig loadScenario(const std::string & path, const std::vector<std::string> & overrides = {});

/** \brief Serialize to YAML; parseScenario(toYaml(c)) == c. */
std::string toYaml(const ScenarioConfig & config);

struct CheckResult
{
  MetricThreshold threshold;
  double value = 0.0;
  bool pass = false;
};

struct ScenarioResult
{
  std::string name;
  PreviewGains gains;
  std::vector<DesiredSample> desired;
  TraceLog trace;
  Metrics metrics;
  std::vector<CheckResult> checks;

  bool diverged() const
  {
    return trace.diverged;
  }

  bool allChecksPass() const;
};

/** \brief Plan, stabilize and simulate a scenario.
 *
 * Besides traceMetrics(), the metrics hold rms_implied_zmp_dev: the RMS distance between the reference ZMP and the
 * ZMP the true contacts require to realize the planned CoM motion.
 */
ScenarioResult runScenario(const ScenarioConfig & config);

/** \brief Write "<dir>/<name>.csv" and "<dir>/<name>.metrics"; threshold checks appear as check.<metric>=pass|fail. */
void writeScenarioOutputs(const ScenarioResult & result, const std::string & directory);

void writeScenarioMetrics(const ScenarioResult & result, std::ostream & os);

} // namespace locomanip
