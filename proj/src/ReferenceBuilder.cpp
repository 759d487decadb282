#include <LocoManip/Errors.h>
#include <LocoManip/ReferenceBuilder.h>

#include <algorithm>
#include <cmath>
#include <string>

namespace locomanip
{

namespace
{

void setSole(SupportState & support, Foot foot, const Rect & sole)
{
  if(foot == Foot::Left)
  {
    support.left = sole;
  }
  else
  {
    support.right = sole;
  }
}

/// Start of the single-support part of step i.
double singleSupportStart(const std::vector<Footstep> & steps, size_t i, double ds_fraction)
{
  const auto & s = steps[i];
  return i == 0 ? s.start_time : s.start_time + ds_fraction * (s.end_time - s.start_time);
}

void validateSteps(const std::vector<Footstep> & steps, double ds_fraction, double dt, double horizon)
{
  if(steps.empty())
  {
    throw InvalidScheduleError("footstep list is empty");
  }
  if(!(ds_fraction >= 0.0 && ds_fraction < 1.0))
  {
    throw InvalidScheduleError("double support fraction must be in [0, 1), got " + std::to_string(ds_fraction));
  }
  if(!(dt > 0.0) || !(horizon >= 0.0))
  {
    throw InvalidScheduleError("dt must be positive and horizon non-negative");
  }
  for(size_t i = 0; i < steps.size(); ++i)
  {
    if(!(steps[i].end_time > steps[i].start_time))
    {
      throw InvalidScheduleError("footstep " + std::to_string(i) + " ends before it starts");
    }
    if(i > 0 && steps[i].start_time < steps[i - 1].start_time)
    {
      throw InvalidScheduleError("footsteps are not in chronological order at index " + std::to_string(i));
    }
  }
  for(size_t i = 0; i < steps.size(); ++i)
  {
    for(size_t j = i + 1; j < steps.size(); ++j)
    {
      if(steps[i].foot == steps[j].foot)
      {
        continue;
      }
      const double lo = std::max(singleSupportStart(steps, i, ds_fraction), singleSupportStart(steps, j, ds_fraction));
      const double hi = std::min(steps[i].end_time, steps[j].end_time);
      if(lo < hi)
      {
        throw InvalidScheduleError("single support of footsteps " + std::to_string(i) + " and " + std::to_string(j)
                                   + " overlap on both feet");
      }
    }
  }
}

} // namespace

Rect SupportState::region() const
{
  if(left && right)
  {
    return left->hull(*right);
  }
  return left ? *left : *right;
}

void ContactSchedule::validate() const
{
  for(size_t i = 1; i < breakpoints.size(); ++i)
  {
    if(!(breakpoints[i].time > breakpoints[i - 1].time))
    {
      throw InvalidScheduleError("contact schedule times must be strictly increasing (breakpoint "
                                 + std::to_string(i) + ")");
    }
    if(breakpoints[i - 1].mode == Interpolation::Linear
       && breakpoints[i - 1].contacts.size() != breakpoints[i].contacts.size())
    {
      throw InvalidScheduleError("linear segment " + std::to_string(i - 1) + " changes the number of contacts");
    }
  }
}

std::vector<ExternalContact> ContactSchedule::contactsAt(double t) const
{
  if(breakpoints.empty())
  {
    return {};
  }
  if(t < breakpoints.front().time)
  {
    return breakpoints.front().contacts;
  }
  // last breakpoint whose time is <= t
  auto next = std::upper_bound(breakpoints.begin(), breakpoints.end(), t,
                               [](double value, const Breakpoint & bp) { return value < bp.time; });
  const auto & current = *std::prev(next);
  if(next == breakpoints.end() || current.mode == Interpolation::Hold)
  {
    return current.contacts;
  }
  const double ratio = (t - current.time) / (next->time - current.time);
  std::vector<ExternalContact> contacts = current.contacts;
  for(size_t i = 0; i < contacts.size(); ++i)
  {
    const auto & a = current.contacts[i];
    const auto & b = next->contacts[i];
    contacts[i].force = a.force + ratio * (b.force - a.force);
    contacts[i].moment = a.moment + ratio * (b.moment - a.moment);
    contacts[i].position = a.position + ratio * (b.position - a.position);
  }
  return contacts;
}

ZmpReference buildZmpReference(const std::vector<Footstep> & steps,
                               double double_support_fraction,
                               double dt,
                               double horizon,
                               const SoleGeometry & sole)
{
  validateSteps(steps, double_support_fraction, dt, horizon);

  const auto n_samples = static_cast<size_t>(std::llround(horizon / dt)) + 1;
  ZmpReference ref;
  ref.dt = dt;
  ref.zmp.reserve(n_samples);
  ref.support.reserve(n_samples);

  size_t step_idx = 0;
  for(size_t k = 0; k < n_samples; ++k)
  {
    const double t = static_cast<double>(k) * dt;
    while(step_idx + 1 < steps.size() && steps[step_idx + 1].start_time <= t)
    {
      ++step_idx;
    }
    const auto & step = steps[step_idx];
    const Rect step_sole = Rect::centered(step.position, sole.half_extent);

    SupportState support;
    setSole(support, step.foot, step_sole);
    Eigen::Vector2d zmp = step.position;

    const double ds_end = singleSupportStart(steps, step_idx, double_support_fraction);
    if(step_idx > 0 && t >= step.start_time && t < ds_end)
    {
      const auto & prev = steps[step_idx - 1];
      const double ratio = (t - step.start_time) / (ds_end - step.start_time);
      zmp = prev.position + ratio * (step.position - prev.position);
      if(prev.foot != step.foot)
      {
        setSole(support, prev.foot, Rect::centered(prev.position, sole.half_extent));
      }
    }
    ref.zmp.push_back(zmp);
    ref.support.push_back(support);
  }
  return ref;
}

std::vector<ReferenceFrame> buildReferenceFrames(const ZmpReference & zmp_traj,
                                                 const ContactSchedule & schedule,
                                                 const RobotParams & params)
{
  schedule.validate();
  std::vector<ReferenceFrame> frames;
  frames.reserve(zmp_traj.zmp.size());
  for(size_t k = 0; k < zmp_traj.zmp.size(); ++k)
  {
    ReferenceFrame frame;
    frame.time = static_cast<double>(k) * zmp_traj.dt;
    frame.zmp_ref = zmp_traj.zmp[k];
    frame.contacts_ref = schedule.contactsAt(frame.time);
    frame.coeff = computeCoefficients(params, frame.contacts_ref);
    frame.ext_zmp_ref = extZmp(frame.coeff, frame.zmp_ref);
    frame.support = zmp_traj.support[k];
    frames.push_back(std::move(frame));
  }
  return frames;
}

void forceUnitKappa(std::vector<ReferenceFrame> & frames)
{
  for(auto & frame : frames)
  {
    frame.coeff.kappa = 1.0;
    frame.ext_zmp_ref = extZmp(frame.coeff, frame.zmp_ref);
  }
}

std::vector<Footstep> inPlaceStepping(double foot_spacing,
                                      double single_support,
                                      double double_support,
                                      double end_time)
{
  const double period = single_support + double_support;
  std::vector<Footstep> steps;
  Foot foot = Foot::Right;
  for(double start = 0.0; steps.empty() || start < end_time; start = static_cast<double>(steps.size()) * period)
  {
    const double y = foot == Foot::Left ? 0.5 * foot_spacing : -0.5 * foot_spacing;
    steps.push_back({foot, Eigen::Vector2d(0.0, y), start, start + period});
    foot = foot == Foot::Left ? Foot::Right : Foot::Left;
  }
  return steps;
}

} // namespace locomanip
