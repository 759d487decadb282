#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace locomanip
{

/** \brief Below this value of kappa the stabilizer refuses to run (its gains are divided by kappa). */
constexpr double DEGENERATE_KAPPA = 0.05;

/** \brief Centroidal parameters of the robot. All values in SI units, world frame with z up. */
struct RobotParams
{
  double mass = 100.0;
  double gravity = 9.81;
  double com_height = 0.8;
  double zmp_height = 0.0;

  /** \brief Throws NonPhysicalError unless mass > 0, gravity > 0 and com_height > zmp_height. */
  void validate() const;

  bool operator==(const RobotParams &) const = default;
};

/** \brief Force, moment and position of one manipulation contact (e.g. a hand). */
struct ExternalContact
{
  Eigen::Vector3d force = Eigen::Vector3d::Zero();
  Eigen::Vector3d moment = Eigen::Vector3d::Zero();
  Eigen::Vector3d position = Eigen::Vector3d::Zero();

  bool operator==(const ExternalContact &) const = default;
};

/** \brief Coefficients of the linear inverted pendulum with external forces.
 *
 * The horizontal CoM dynamics read c_ddot = omega^2 (c - kappa z + gamma), where the external contacts only
 * change kappa (ZMP scale, from vertical forces) and gamma (ZMP offset), never omega.
 */
struct LipmCoefficients
{
  double omega = 0.0;
  double kappa = 1.0;
  Eigen::Vector2d gamma = Eigen::Vector2d::Zero();
  /** Gravito-inertial vertical force m (c_ddot_z + g) [N]. */
  double zeta = 0.0;

  /** \brief True when vertical external forces nearly carry the robot (kappa <= DEGENERATE_KAPPA). */
  bool degenerate() const
  {
    return kappa <= DEGENERATE_KAPPA;
  }
};

/** \brief Horizontal CoM position, velocity and acceleration. */
struct CoMState
{
  Eigen::Vector2d pos = Eigen::Vector2d::Zero();
  Eigen::Vector2d vel = Eigen::Vector2d::Zero();
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
};

/** \brief Force and moment, both expressed in the world frame (moment about the world origin). */
struct Wrench
{
  Eigen::Vector3d force = Eigen::Vector3d::Zero();
  Eigen::Vector3d moment = Eigen::Vector3d::Zero();

  Wrench operator+(const Wrench & other) const
  {
    return {force + other.force, moment + other.moment};
  }
};

double naturalFrequency(const RobotParams & params, double com_vert_accel = 0.0);

/** \brief Evaluate omega, kappa, gamma and zeta for a set of external contacts.
 *
 * Throws NonPhysicalError if the CoM is not above the ZMP plane or com_vert_accel + g <= 0.
 * A degenerate kappa is reported through LipmCoefficients::degenerate(), not by throwing.
 */
LipmCoefficients computeCoefficients(const RobotParams & params,
                                     std::span<const ExternalContact> contacts,
                                     double com_vert_accel = 0.0);

/** \brief ZMP offset gamma of a contact set for a given zeta (additive over contacts). */
Eigen::Vector2d gammaOffset(std::span<const ExternalContact> contacts, double zeta, double zmp_height);

/** \brief ext-ZMP kappa z - gamma. */
Eigen::Vector2d extZmp(const LipmCoefficients & coeff, const Eigen::Vector2d & zmp);

/** \brief Inverse of extZmp: the ZMP that realizes a given ext-ZMP. */
Eigen::Vector2d zmpFromExtZmp(const LipmCoefficients & coeff, const Eigen::Vector2d & ext_zmp);

Eigen::Vector2d lipmAccel(const LipmCoefficients & coeff, const Eigen::Vector2d & com, const Eigen::Vector2d & zmp);

/** \brief DCM xi = c + c_dot / omega. */
Eigen::Vector2d dcmOf(const CoMState & com, double omega);

/** \brief First-order DCM dynamics xi_dot = omega (xi - kappa z + gamma). */
Eigen::Vector2d dcmRate(const LipmCoefficients & coeff, const Eigen::Vector2d & dcm, const Eigen::Vector2d & zmp);

/** \brief Net foot wrench required for a given CoM acceleration under external contacts.
 *
 * The angular momentum rate about the CoM is assumed zero. The returned moment is about the world origin.
 */
Wrench netFootWrench(const RobotParams & params,
                     const Eigen::Vector3d & com_pos,
                     const Eigen::Vector3d & com_accel,
                     std::span<const ExternalContact> contacts);

/** \brief Sum of the contact wrenches, moments taken about the world origin. */
Wrench contactWrenchSum(std::span<const ExternalContact> contacts);

/** \brief Center of pressure of a wrench on the horizontal plane at height plane_z. */
Eigen::Vector2d centerOfPressure(const Wrench & wrench, double plane_z);

} // namespace locomanip
