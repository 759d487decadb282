#include <LocoManip/Errors.h>
#include <LocoManip/PreviewControl.h>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace locomanip
{

JerkSystem discretize(double omega, double dt)
{
  if(!(dt > 0.0) || !(omega > 0.0))
  {
    throw std::invalid_argument("discretize: dt and omega must be positive");
  }
  JerkSystem sys;
  sys.A << 1.0, dt, dt * dt / 2.0, 0.0, 1.0, dt, 0.0, 0.0, 1.0;
  sys.B << dt * dt * dt / 6.0, dt * dt / 2.0, dt;
  sys.C << 1.0, 0.0, -1.0 / (omega * omega);
  return sys;
}

double PreviewGains::closedLoopSpectralRadius() const
{
  const auto sys = discretize(omega, dt);
  const Eigen::Matrix3d closed = sys.A - sys.B * k_fb;
  return closed.eigenvalues().cwiseAbs().maxCoeff();
}

PreviewGains synthesizeGains(const PreviewWeights & weights,
                             double omega,
                             double dt,
                             double preview_window,
                             const RiccatiOptions & options)
{
  if(!(weights.q_zmp > 0.0) || !(weights.r_jerk > 0.0))
  {
    throw std::invalid_argument("preview weights must be positive");
  }
  if(!(preview_window >= 1.0))
  {
    throw std::invalid_argument("preview window must be at least 1 s, got " + std::to_string(preview_window));
  }
  const auto sys = discretize(omega, dt);
  const Eigen::Matrix3d & A = sys.A;
  const Eigen::Vector3d & B = sys.B;
  const Eigen::Matrix3d output_weight = sys.C.transpose() * weights.q_zmp * sys.C;

  Eigen::Matrix3d P = output_weight;
  size_t iter = 0;
  for(;; ++iter)
  {
    if(iter >= options.max_iterations)
    {
      throw RiccatiDivergenceError("Riccati iteration did not converge in " + std::to_string(options.max_iterations)
                                   + " iterations");
    }
    const Eigen::RowVector3d PB_t = (P * B).transpose();
    const double s = weights.r_jerk + B.dot(P * B);
    const Eigen::Matrix3d next =
        output_weight + A.transpose() * P * A - A.transpose() * PB_t.transpose() * (PB_t * A) / s;
    const double diff = (next - P).cwiseAbs().maxCoeff();
    P = 0.5 * (next + next.transpose());
    if(!P.allFinite())
    {
      throw RiccatiDivergenceError("Riccati iteration produced non-finite values");
    }
    if(diff < options.tolerance)
    {
      break;
    }
  }

  PreviewGains gains;
  gains.dt = dt;
  gains.omega = omega;
  gains.riccati = P;
  gains.riccati_iterations = iter + 1;

  const double s = weights.r_jerk + B.dot(P * B);
  gains.k_fb = (B.transpose() * P * A) / s;

  const Eigen::Matrix3d closed_t = (A - B * gains.k_fb).transpose();
  gains.n_horizon = static_cast<size_t>(std::llround(preview_window / dt));
  gains.k_ff.resize(gains.n_horizon);
  Eigen::Vector3d propagated = sys.C.transpose() * weights.q_zmp;
  for(size_t j = 0; j < gains.n_horizon; ++j)
  {
    gains.k_ff[j] = B.dot(propagated) / s;
    propagated = closed_t * propagated;
  }
  // The reference is held beyond the window, so the geometric tail of the gain sequence folds into the last gain.
  // Without it the truncated sum misses k_fb[0] by the slow stable-pole residue and constant references are tracked
  // with a steady-state error.
  const Eigen::Vector3d tail = (Eigen::Matrix3d::Identity() - closed_t).partialPivLu().solve(propagated);
  gains.k_ff.back() += B.dot(tail) / s;
  return gains;
}

PgStep stepPreview(const PgState & state,
                   const PreviewGains & gains,
                   const JerkSystem & system,
                   std::span<const double> future_ref_x,
                   std::span<const double> future_ref_y)
{
  if(future_ref_x.size() != gains.n_horizon || future_ref_y.size() != gains.n_horizon)
  {
    throw std::invalid_argument("stepPreview expects exactly " + std::to_string(gains.n_horizon)
                                + " future references per axis");
  }
  PgStep out;
  out.ext_zmp = {system.C * state.x, system.C * state.y};
  const double ff_x = std::inner_product(gains.k_ff.begin(), gains.k_ff.end(), future_ref_x.begin(), 0.0);
  const double ff_y = std::inner_product(gains.k_ff.begin(), gains.k_ff.end(), future_ref_y.begin(), 0.0);
  out.jerk.x() = -gains.k_fb.dot(state.x) + ff_x;
  out.jerk.y() = -gains.k_fb.dot(state.y) + ff_y;
  out.next.x = system.A * state.x + system.B * out.jerk.x();
  out.next.y = system.A * state.y + system.B * out.jerk.y();
  return out;
}

PgState restingState(const ReferenceFrame & first)
{
  PgState state;
  state.x.x() = first.ext_zmp_ref.x();
  state.y.x() = first.ext_zmp_ref.y();
  return state;
}

std::vector<DesiredSample> generateTrajectory(const std::vector<ReferenceFrame> & frames,
                                              const PreviewGains & gains,
                                              const PgState & initial)
{
  if(frames.size() <= gains.n_horizon)
  {
    throw std::invalid_argument("generateTrajectory needs more than " + std::to_string(gains.n_horizon)
                                + " frames, got " + std::to_string(frames.size()));
  }
  const auto system = discretize(gains.omega, gains.dt);

  std::vector<double> ref_x(frames.size());
  std::vector<double> ref_y(frames.size());
  for(size_t k = 0; k < frames.size(); ++k)
  {
    ref_x[k] = frames[k].ext_zmp_ref.x();
    ref_y[k] = frames[k].ext_zmp_ref.y();
  }

  const size_t n_samples = frames.size() - gains.n_horizon;
  std::vector<DesiredSample> samples;
  samples.reserve(n_samples);
  PgState state = initial;
  for(size_t k = 0; k < n_samples; ++k)
  {
    const auto & frame = frames[k];
    if(frame.coeff.degenerate())
    {
      throw DegenerateScaleError("kappa = " + std::to_string(frame.coeff.kappa) + " at t = "
                                 + std::to_string(frame.time));
    }
    const auto step = stepPreview(state, gains, system, std::span<const double>(ref_x).subspan(k + 1, gains.n_horizon),
                                  std::span<const double>(ref_y).subspan(k + 1, gains.n_horizon));

    DesiredSample sample;
    sample.time = frame.time;
    sample.com.pos = {state.x[0], state.y[0]};
    sample.com.vel = {state.x[1], state.y[1]};
    sample.com.acc = {state.x[2], state.y[2]};
    sample.dcm = dcmOf(sample.com, gains.omega);
    sample.ext_zmp = step.ext_zmp;
    sample.ext_zmp_ref = frame.ext_zmp_ref;
    sample.zmp_ref = frame.zmp_ref;
    sample.coeff = frame.coeff;
    sample.zmp = zmpFromExtZmp(frame.coeff, step.ext_zmp);
    sample.contacts = frame.contacts_ref;
    sample.support = frame.support;
    samples.push_back(std::move(sample));

    state = step.next;
  }
  return samples;
}

} // namespace locomanip
