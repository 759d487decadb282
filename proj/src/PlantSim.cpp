#include <LocoManip/PlantSim.h>

#include <cmath>
#include <stdexcept>

namespace locomanip
{

PlantState stepPlant(const PlantState & state,
                     const ZmpActuation & actuation,
                     std::span<const ExternalContact> true_contacts,
                     const RobotParams & params,
                     const PlantConfig & config)
{
  const double dt = config.dt;
  if(!(dt > 0.0))
  {
    throw std::invalid_argument("plant dt must be positive");
  }

  const Eigen::Vector2d command_dev = actuation.command - actuation.desired;
  Eigen::Vector2d dev_start = state.zmp_actual - actuation.desired;
  Eigen::Vector2d dev_end = command_dev;
  if(config.direct_zmp)
  {
    dev_start = command_dev;
  }
  else
  {
    dev_end = command_dev + (dev_start - command_dev) * std::exp(-config.rho * dt);
  }

  PlantState next = state;
  const Rect region = actuation.support_region.inflated(config.support_margin);
  const Eigen::Vector2d zmp_start = region.clamp(actuation.desired + dev_start);
  const Eigen::Vector2d zmp_end_raw = actuation.desired_next + dev_end;
  next.zmp_actual = region.clamp(zmp_end_raw);
  if(next.zmp_actual != zmp_end_raw)
  {
    ++next.zmp_clamp_events;
  }

  const auto coeff = computeCoefficients(params, true_contacts);
  const double omega = coeff.omega;
  const Eigen::Vector2d ext_start = extZmp(coeff, zmp_start);
  const Eigen::Vector2d ext_end = extZmp(coeff, next.zmp_actual);
  const Eigen::Vector2d slope = (ext_end - ext_start) / dt;

  // e = c - ext_zmp(t) obeys e_ddot = omega^2 e when the ext-ZMP is linear in time
  const Eigen::Vector2d e0 = state.com.pos - ext_start;
  const Eigen::Vector2d e0_dot = state.com.vel - slope;
  const double ch = std::cosh(omega * dt);
  const double sh = std::sinh(omega * dt);
  const Eigen::Vector2d e1 = e0 * ch + e0_dot * (sh / omega);
  const Eigen::Vector2d e1_dot = e0 * (omega * sh) + e0_dot * ch;

  next.com.pos = ext_end + e1;
  next.com.vel = slope + e1_dot;
  next.com.acc = omega * omega * e1;
  next.time = state.time + dt;
  return next;
}

} // namespace locomanip
