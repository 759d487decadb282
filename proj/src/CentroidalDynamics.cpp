#include <LocoManip/CentroidalDynamics.h>
#include <LocoManip/Errors.h>

#include <cmath>
#include <string>

namespace locomanip
{

void RobotParams::validate() const
{
  if(!(mass > 0.0) || !std::isfinite(mass))
  {
    throw NonPhysicalError("mass must be positive and finite, got " + std::to_string(mass));
  }
  if(!(gravity > 0.0) || !std::isfinite(gravity))
  {
    throw NonPhysicalError("gravity must be positive and finite, got " + std::to_string(gravity));
  }
  if(!(com_height > zmp_height) || !std::isfinite(com_height) || !std::isfinite(zmp_height))
  {
    throw NonPhysicalError("CoM height (" + std::to_string(com_height) + ") must be above the ZMP height ("
                           + std::to_string(zmp_height) + ")");
  }
}

double naturalFrequency(const RobotParams & params, double com_vert_accel)
{
  params.validate();
  const double vertical = com_vert_accel + params.gravity;
  if(!(vertical > 0.0))
  {
    throw NonPhysicalError("vertical CoM acceleration plus gravity must be positive, got " + std::to_string(vertical));
  }
  return std::sqrt(vertical / (params.com_height - params.zmp_height));
}

Eigen::Vector2d gammaOffset(std::span<const ExternalContact> contacts, double zeta, double zmp_height)
{
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for(const auto & contact : contacts)
  {
    const auto & f = contact.force;
    const auto & n = contact.moment;
    const auto & p = contact.position;
    sum.x() += (p.z() - zmp_height) * f.x() - p.x() * f.z() + n.y();
    sum.y() += (p.z() - zmp_height) * f.y() - p.y() * f.z() - n.x();
  }
  return sum / zeta;
}

LipmCoefficients computeCoefficients(const RobotParams & params,
                                     std::span<const ExternalContact> contacts,
                                     double com_vert_accel)
{
  LipmCoefficients coeff;
  coeff.omega = naturalFrequency(params, com_vert_accel);
  coeff.zeta = params.mass * (com_vert_accel + params.gravity);

  double vertical_force = 0.0;
  for(const auto & contact : contacts)
  {
    vertical_force += contact.force.z();
  }
  coeff.kappa = 1.0 - vertical_force / coeff.zeta;
  coeff.gamma = gammaOffset(contacts, coeff.zeta, params.zmp_height);
  return coeff;
}

Eigen::Vector2d extZmp(const LipmCoefficients & coeff, const Eigen::Vector2d & zmp)
{
  return coeff.kappa * zmp - coeff.gamma;
}

Eigen::Vector2d zmpFromExtZmp(const LipmCoefficients & coeff, const Eigen::Vector2d & ext_zmp)
{
  return (ext_zmp + coeff.gamma) / coeff.kappa;
}

Eigen::Vector2d lipmAccel(const LipmCoefficients & coeff, const Eigen::Vector2d & com, const Eigen::Vector2d & zmp)
{
  return coeff.omega * coeff.omega * (com - coeff.kappa * zmp + coeff.gamma);
}

Eigen::Vector2d dcmOf(const CoMState & com, double omega)
{
  return com.pos + com.vel / omega;
}

Eigen::Vector2d dcmRate(const LipmCoefficients & coeff, const Eigen::Vector2d & dcm, const Eigen::Vector2d & zmp)
{
  return coeff.omega * (dcm - coeff.kappa * zmp + coeff.gamma);
}

Wrench contactWrenchSum(std::span<const ExternalContact> contacts)
{
  Wrench sum;
  for(const auto & contact : contacts)
  {
    sum.force += contact.force;
    sum.moment += contact.position.cross(contact.force) + contact.moment;
  }
  return sum;
}

Wrench netFootWrench(const RobotParams & params,
                     const Eigen::Vector3d & com_pos,
                     const Eigen::Vector3d & com_accel,
                     std::span<const ExternalContact> contacts)
{
  const Eigen::Vector3d gravito_inertial = params.mass * (com_accel + Eigen::Vector3d(0.0, 0.0, params.gravity));

  Wrench foot;
  foot.force = gravito_inertial;
  for(const auto & contact : contacts)
  {
    foot.force -= contact.force;
  }
  foot.moment = com_pos.cross(foot.force);
  for(const auto & contact : contacts)
  {
    foot.moment -= (contact.position - com_pos).cross(contact.force) + contact.moment;
  }
  return foot;
}

Eigen::Vector2d centerOfPressure(const Wrench & wrench, double plane_z)
{
  const auto & f = wrench.force;
  const auto & n = wrench.moment;
  return {(plane_z * f.x() - n.y()) / f.z(), (n.x() + plane_z * f.y()) / f.z()};
}

} // namespace locomanip
