#pragma once

#include <LocoManip/ReferenceBuilder.h>

#include <span>

namespace locomanip
{

/** \brief Point-mass plant following the LIPM with the true external contacts. */
struct PlantState
{
  CoMState com;
  Eigen::Vector2d zmp_actual = Eigen::Vector2d::Zero();
  double time = 0.0;
  /** Number of steps where the actual ZMP hit the support region boundary. */
  size_t zmp_clamp_events = 0;
};

struct PlantConfig
{
  double dt = 0.002;
  /** First-order lag of the ZMP deviation from its desired value [1/s]. */
  double rho = 20.0;
  /** Realize the command ZMP without lag. */
  bool direct_zmp = false;
  /** Inflation of the support region used for the hard ZMP clamp [m]. */
  double support_margin = 0.001;

  bool operator==(const PlantConfig &) const = default;
};

/** \brief ZMP actuation over one control step. */
struct ZmpActuation
{
  Eigen::Vector2d command = Eigen::Vector2d::Zero();
  /** Desired (feedforward) ZMP at the start and at the end of the step. */
  Eigen::Vector2d desired = Eigen::Vector2d::Zero();
  Eigen::Vector2d desired_next = Eigen::Vector2d::Zero();
  Rect support_region;
};

/** \brief Advance the plant by one control step.
 *
 * The deviation of the actual ZMP from the desired one relaxes towards the commanded deviation by the exact
 * exponential exp(-rho dt). The CoM is integrated in closed form over the step, with the ext-ZMP of the true
 * contacts linear in time between its start and end values.
 */
PlantState stepPlant(const PlantState & state,
                     const ZmpActuation & actuation,
                     std::span<const ExternalContact> true_contacts,
                     const RobotParams & params,
                     const PlantConfig & config);

} // namespace locomanip
