#include <LocoManip/Errors.h>
#include <LocoManip/Stabilizer.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace locomanip
{

Eigen::Matrix3d dcmErrorClosedLoop(double kappa, double rho, double omega, const Eigen::Vector3d & gains_ipd)
{
  const double k_i = gains_ipd[0];
  const double k_p = gains_ipd[1];
  const double k_d = gains_ipd[2];
  Eigen::Matrix3d m;
  m << 0.0, 1.0, 0.0, //
      0.0, 0.0, 1.0, //
      -kappa * rho * omega * k_i, rho * omega * (1.0 - kappa * k_p), omega - rho - kappa * rho * omega * k_d;
  return m;
}

void validateGains(const StabilizerGains & gains, double omega)
{
  if(!(gains.rho > 0.0) || !std::isfinite(gains.rho))
  {
    throw std::invalid_argument("stabilizer rho must be positive and finite");
  }
  if(!(gains.cutoff_period > 0.0))
  {
    throw std::invalid_argument("stabilizer cutoff period must be positive");
  }
  if(!(gains.integrator_limit >= 0.0) || !(gains.derivative_filter_steps > 0.0))
  {
    throw std::invalid_argument("stabilizer integrator limit and derivative filter must be non-negative/positive");
  }
  const Eigen::Matrix3d closed = dcmErrorClosedLoop(1.0, gains.rho, omega, {gains.k_i, gains.k_p, gains.k_d});
  double max_real = 0.0;
  if(gains.k_i == 0.0)
  {
    max_real = closed.bottomRightCorner<2, 2>().eigenvalues().real().maxCoeff();
  }
  else
  {
    max_real = closed.eigenvalues().real().maxCoeff();
  }
  if(!(max_real < 0.0))
  {
    throw std::invalid_argument("stabilizer gains do not give a Hurwitz DCM error loop (max real part "
                                + std::to_string(max_real) + ")");
  }
}

Eigen::Vector2d measureGammaError(std::span<const ExternalContact> desired,
                                  std::span<const ExternalContact> actual,
                                  const RobotParams & params)
{
  const double zeta = params.mass * params.gravity;
  return gammaOffset(actual, zeta, params.zmp_height) - gammaOffset(desired, zeta, params.zmp_height);
}

FrequencySplit splitFrequency(StabilizerState & state,
                              const Eigen::Vector2d & gamma_err,
                              double dt,
                              double cutoff_period,
                              double derivative_filter_steps)
{
  const double time_constant = cutoff_period / (2.0 * M_PI);
  const double low_gain = 1.0 - std::exp(-dt / time_constant);
  const double rate_gain = 1.0 - std::exp(-1.0 / derivative_filter_steps);

  const Eigen::Vector2d previous_high = state.gamma_err_high;
  state.gamma_err = gamma_err;
  state.gamma_err_low += low_gain * (gamma_err - state.gamma_err_low);
  state.gamma_err_high = gamma_err - state.gamma_err_low;
  const Eigen::Vector2d raw_rate = (state.gamma_err_high - previous_high) / dt;
  state.gamma_err_high_rate += rate_gain * (raw_rate - state.gamma_err_high_rate);

  return {state.gamma_err_low, state.gamma_err_high, state.gamma_err_high_rate};
}

DcmFeedback dcmFeedback(const DesiredSample & desired,
                        const ActualSample & actual,
                        StabilizerState & state,
                        const StabilizerGains & gains,
                        double omega,
                        double dt)
{
  const double kappa = desired.coeff.kappa;
  if(kappa <= DEGENERATE_KAPPA)
  {
    throw DegenerateScaleError("stabilizer cannot run with kappa = " + std::to_string(kappa));
  }

  DcmFeedback out;
  out.shifted_com = desired.com.pos - state.gamma_err_low;
  out.shifted_dcm = desired.dcm - state.gamma_err_low;
  out.dcm_error = actual.dcm - out.shifted_dcm;

  state.dcm_error_integral += out.dcm_error * dt;
  state.dcm_error_integral = state.dcm_error_integral.cwiseMax(-gains.integrator_limit).cwiseMin(gains.integrator_limit);

  if(state.has_previous)
  {
    const double rate_gain = 1.0 - std::exp(-1.0 / gains.derivative_filter_steps);
    const Eigen::Vector2d raw_rate = (out.dcm_error - state.dcm_error) / dt;
    state.dcm_error_rate += rate_gain * (raw_rate - state.dcm_error_rate);
  }
  state.dcm_error = out.dcm_error;
  state.has_previous = true;

  out.pid = gains.k_p * out.dcm_error + gains.k_i * state.dcm_error_integral + gains.k_d * state.dcm_error_rate;

  const Eigen::Vector2d & high = state.gamma_err_high;
  const Eigen::Vector2d & high_rate = state.gamma_err_high_rate;
  out.command_zmp = desired.zmp + out.pid / kappa + high / kappa + high_rate / (kappa * gains.rho);
  const double omega2 = omega * omega;
  out.command_com_accel = desired.com.acc - omega2 * out.pid - omega2 * high - omega2 / gains.rho * high_rate;
  return out;
}

Stabilizer::Stabilizer(const RobotParams & params, const StabilizerGains & gains, double dt)
: params_(params), gains_(gains), dt_(dt), omega_(naturalFrequency(params))
{
  if(!(dt > 0.0))
  {
    throw std::invalid_argument("stabilizer dt must be positive");
  }
  validateGains(gains_, omega_);
}

StabilizerOutput Stabilizer::step(const DesiredSample & desired, const ActualSample & actual)
{
  StabilizerOutput out;
  out.gamma_err = measureGammaError(desired.contacts, actual.contacts, params_);
  const Eigen::Vector2d split_input = compensate_gamma_ ? out.gamma_err : Eigen::Vector2d::Zero();
  out.split = splitFrequency(state_, split_input, dt_, gains_.cutoff_period, gains_.derivative_filter_steps);

  const auto feedback = dcmFeedback(desired, actual, state_, gains_, omega_, dt_);
  out.dcm_error = feedback.dcm_error;
  out.shifted_com = feedback.shifted_com;
  out.raw_command_zmp = feedback.command_zmp;

  const Rect region = desired.support.region();
  out.command_zmp = region.clamp(feedback.command_zmp);
  out.saturated = out.command_zmp != feedback.command_zmp;
  if(out.saturated)
  {
    out.command_com_accel = lipmAccel(desired.coeff, desired.com.pos, out.command_zmp);
  }
  else
  {
    out.command_com_accel = feedback.command_com_accel;
  }

  const Eigen::Vector3d com(desired.com.pos.x(), desired.com.pos.y(), params_.com_height);
  const Eigen::Vector3d accel(out.command_com_accel.x(), out.command_com_accel.y(), 0.0);
  out.net_wrench = netFootWrench(params_, com, accel, desired.contacts);
  try
  {
    out.feet = distributeWrench(out.net_wrench, desired.support, params_.zmp_height);
  }
  catch(const InfeasibleError &)
  {
    // Only reachable when the contact model and kappa disagree (kappa ablation) or the bounding rectangle exceeds
    // the sole hull: move the net CoP onto the closest sole and retry.
    const Eigen::Vector2d cop = centerOfPressure(out.net_wrench, params_.zmp_height);
    Eigen::Vector2d target = region.clamp(cop);
    double best = std::numeric_limits<double>::infinity();
    for(const auto & sole : {desired.support.left, desired.support.right})
    {
      if(sole && (sole->clamp(cop) - cop).norm() < best)
      {
        best = (sole->clamp(cop) - cop).norm();
        target = sole->clamp(cop);
      }
    }
    auto & f = out.net_wrench.force;
    auto & n = out.net_wrench.moment;
    const double z = params_.zmp_height;
    n.x() = target.y() * f.z() - z * f.y();
    n.y() = z * f.x() - target.x() * f.z();
    out.feet = distributeWrench(out.net_wrench, desired.support, params_.zmp_height);
  }
  return out;
}

} // namespace locomanip
