#pragma once

#include <LocoManip/PreviewControl.h>
#include <LocoManip/WrenchDistribution.h>

#include <span>
#include <vector>

namespace locomanip
{

/** \brief Base gains of the DCM feedback and the parameters of the external-force error handling.
 *
 * k_p, k_i and k_d are the gains of the conventional stabilizer; the ones applied to the DCM error are divided
 * by kappa so that the closed-loop response does not depend on the vertical external forces.
 */
struct StabilizerGains
{
  double k_p = 1.25;
  double k_i = 0.0;
  double k_d = 0.0;
  /** ZMP lag parameter of the actuation model [1/s]. */
  double rho = 20.0;
  /** Cutoff period of the low-pass filter separating the offset error [s]. */
  double cutoff_period = 1.0;
  /** Clamp of the DCM error integral [m s]. */
  double integrator_limit = 0.05;
  /** Time constant of the derivative filters, in control steps. */
  double derivative_filter_steps = 5.0;

  bool operator==(const StabilizerGains &) const = default;
};

/** \brief Closed-loop matrix of the (integral, error, error rate) DCM state under ZMP feedback.
 *
 * With kappa = 1 this is the conventional stabilizer; with the scaled gains k / kappa it is the external-force
 * aware one. Gains are ordered (k_i, k_p, k_d).
 */
Eigen::Matrix3d dcmErrorClosedLoop(double kappa, double rho, double omega, const Eigen::Vector3d & gains_ipd);

/** \brief Throws std::invalid_argument unless rho and the cutoff are positive and the conventional closed loop is
 * Hurwitz. With k_i = 0 the integral state is decoupled (eigenvalue 0) and only the (error, rate) block is tested.
 */
void validateGains(const StabilizerGains & gains, double omega);

/** \brief Offset gamma error of the actual contacts with respect to the desired ones. */
Eigen::Vector2d measureGammaError(std::span<const ExternalContact> desired,
                                  std::span<const ExternalContact> actual,
                                  const RobotParams & params);

struct StabilizerState
{
  Eigen::Vector2d dcm_error_integral = Eigen::Vector2d::Zero();
  /** Last raw offset error fed to the frequency split. */
  Eigen::Vector2d gamma_err = Eigen::Vector2d::Zero();
  Eigen::Vector2d gamma_err_low = Eigen::Vector2d::Zero();
  Eigen::Vector2d gamma_err_high = Eigen::Vector2d::Zero();
  Eigen::Vector2d gamma_err_high_rate = Eigen::Vector2d::Zero();
  Eigen::Vector2d dcm_error = Eigen::Vector2d::Zero();
  Eigen::Vector2d dcm_error_rate = Eigen::Vector2d::Zero();
  bool has_previous = false;
};

struct FrequencySplit
{
  Eigen::Vector2d low = Eigen::Vector2d::Zero();
  Eigen::Vector2d high = Eigen::Vector2d::Zero();
  Eigen::Vector2d high_rate = Eigen::Vector2d::Zero();
};

/** \brief Advance the low-pass (time constant cutoff_period / 2 pi) and take the high part as its complement.
 *
 * The rate of the high part is a backward difference smoothed by a first-order filter of
 * derivative_filter_steps * dt.
 */
FrequencySplit splitFrequency(StabilizerState & state,
                              const Eigen::Vector2d & gamma_err,
                              double dt,
                              double cutoff_period,
                              double derivative_filter_steps = 5.0);

/** \brief Actual (measured) state fed to the stabilizer. */
struct ActualSample
{
  CoMState com;
  Eigen::Vector2d dcm = Eigen::Vector2d::Zero();
  std::vector<ExternalContact> contacts;
};

struct DcmFeedback
{
  Eigen::Vector2d command_zmp = Eigen::Vector2d::Zero();
  Eigen::Vector2d command_com_accel = Eigen::Vector2d::Zero();
  /** Desired CoM shifted by the low-frequency offset error (CoM strategy). */
  Eigen::Vector2d shifted_com = Eigen::Vector2d::Zero();
  Eigen::Vector2d shifted_dcm = Eigen::Vector2d::Zero();
  /** DCM error with respect to the shifted desired DCM. */
  Eigen::Vector2d dcm_error = Eigen::Vector2d::Zero();
  Eigen::Vector2d pid = Eigen::Vector2d::Zero();
};

/** \brief DCM feedback with offset-error compensation.
 *
 * Uses the low/high split already stored in state (see splitFrequency) and updates the integral and derivative
 * of the DCM error. Throws DegenerateScaleError if the desired kappa is degenerate.
 */
DcmFeedback dcmFeedback(const DesiredSample & desired,
                        const ActualSample & actual,
                        StabilizerState & state,
                        const StabilizerGains & gains,
                        double omega,
                        double dt);

struct StabilizerOutput
{
  /** Command ZMP after saturation to the support region. */
  Eigen::Vector2d command_zmp = Eigen::Vector2d::Zero();
  /** Command ZMP before saturation. */
  Eigen::Vector2d raw_command_zmp = Eigen::Vector2d::Zero();
  Eigen::Vector2d command_com_accel = Eigen::Vector2d::Zero();
  Wrench net_wrench;
  FootWrenches feet;

  // diagnostics
  Eigen::Vector2d gamma_err = Eigen::Vector2d::Zero();
  FrequencySplit split;
  Eigen::Vector2d dcm_error = Eigen::Vector2d::Zero();
  Eigen::Vector2d shifted_com = Eigen::Vector2d::Zero();
  bool saturated = false;
};

/** \brief DCM feedback stabilizer with external manipulation force compensation.
 *
 * One instance owns its filters and integrator; calls to step() must be serialized.
 */
class Stabilizer
{
public:
  Stabilizer(const RobotParams & params, const StabilizerGains & gains, double dt);

  /** \brief Disable the offset-error compensation (gamma error forced to zero). */
  void compensateGammaError(bool enable)
  {
    compensate_gamma_ = enable;
  }

  StabilizerOutput step(const DesiredSample & desired, const ActualSample & actual);

  void reset()
  {
    state_ = {};
  }

  const StabilizerState & state() const
  {
    return state_;
  }

  double omega() const
  {
    return omega_;
  }

private:
  RobotParams params_;
  StabilizerGains gains_;
  double dt_;
  double omega_;
  bool compensate_gamma_ = true;
  StabilizerState state_;
};

} // namespace locomanip
