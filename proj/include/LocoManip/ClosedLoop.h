#pragma once

#include <LocoManip/PlantSim.h>
#include <LocoManip/Stabilizer.h>

#include <cstdint>
#include <limits>
#include <vector>

namespace locomanip
{

/** \brief Additive force on one external contact, applied to the plant only (truth side). */
struct Disturbance
{
  enum class Kind
  {
    Constant,
    Sinusoid,
    Step
  };

  size_t contact = 0;
  Kind kind = Kind::Constant;
  /** Force for constant/step, amplitude vector for sinusoids [N]. */
  Eigen::Vector3d force = Eigen::Vector3d::Zero();
  double period = 1.0;
  double start_time = 0.0;
  double end_time = std::numeric_limits<double>::infinity();

  /** \brief Force at time t; zero outside [start_time, end_time). */
  Eigen::Vector3d at(double t) const;

  bool operator==(const Disturbance &) const = default;
};

/** \brief Desired contacts plus every active disturbance. Contacts referenced beyond the list are ignored. */
std::vector<ExternalContact> applyDisturbances(const std::vector<ExternalContact> & desired,
                                               const std::vector<Disturbance> & disturbances,
                                               double t);

struct ClosedLoopOptions
{
  PlantConfig plant;
  bool compensate_gamma = true;
  /** Abort when |c^a - c^d| exceeds this distance [m]. */
  double divergence_threshold = 1.0;
  /** Initial CoM offset of the plant with respect to the desired CoM [m]. */
  Eigen::Vector2d initial_com_offset = Eigen::Vector2d::Zero();
  /** Standard deviation of white noise on the measured CoM [m] and contact forces [N]. */
  double com_noise = 0.0;
  double force_noise = 0.0;
  uint64_t seed = 0;
};

/** \brief One logged control step. */
struct TraceRow
{
  double time = 0.0;
  Eigen::Vector2d com_des = Eigen::Vector2d::Zero();
  Eigen::Vector2d com_act = Eigen::Vector2d::Zero();
  Eigen::Vector2d dcm_des = Eigen::Vector2d::Zero();
  Eigen::Vector2d dcm_act = Eigen::Vector2d::Zero();
  Eigen::Vector2d zmp_des = Eigen::Vector2d::Zero();
  Eigen::Vector2d zmp_cmd = Eigen::Vector2d::Zero();
  Eigen::Vector2d zmp_act = Eigen::Vector2d::Zero();
  Eigen::Vector2d ext_zmp_ref = Eigen::Vector2d::Zero();
  Eigen::Vector2d gamma_err = Eigen::Vector2d::Zero();
  Eigen::Vector2d gamma_high = Eigen::Vector2d::Zero();
  Eigen::Vector2d gamma_low = Eigen::Vector2d::Zero();
  Eigen::Vector3d fext_sum = Eigen::Vector3d::Zero();

  bool operator==(const TraceRow &) const = default;
};

struct TraceLog
{
  double dt = 0.0;
  std::vector<TraceRow> rows;
  bool diverged = false;
  size_t zmp_clamp_events = 0;
  size_t zmp_saturation_events = 0;
};

/** \brief Wire the stabilizer and the plant around a desired trajectory.
 *
 * Each step measures the plant, builds the actual contacts (desired plus disturbances), runs the stabilizer and
 * actuates the plant with the saturated command ZMP. Stops early and marks the log diverged when the CoM drifts
 * further than the divergence threshold from its desired value.
 */
TraceLog runClosedLoop(const std::vector<DesiredSample> & desired,
                       const RobotParams & params,
                       const StabilizerGains & gains,
                       const std::vector<Disturbance> & disturbances,
                       const ClosedLoopOptions & options);

} // namespace locomanip
