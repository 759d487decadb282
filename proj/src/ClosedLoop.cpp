#include <LocoManip/ClosedLoop.h>

#include <cmath>
#include <random>
#include <stdexcept>

namespace locomanip
{

Eigen::Vector3d Disturbance::at(double t) const
{
  if(t < start_time || t >= end_time)
  {
    return Eigen::Vector3d::Zero();
  }
  switch(kind)
  {
    case Kind::Sinusoid:
      return force * std::sin(2.0 * M_PI * (t - start_time) / period);
    case Kind::Constant:
    case Kind::Step:
      break;
  }
  return force;
}

std::vector<ExternalContact> applyDisturbances(const std::vector<ExternalContact> & desired,
                                               const std::vector<Disturbance> & disturbances,
                                               double t)
{
  std::vector<ExternalContact> actual = desired;
  for(const auto & d : disturbances)
  {
    if(d.contact < actual.size())
    {
      actual[d.contact].force += d.at(t);
    }
  }
  return actual;
}

TraceLog runClosedLoop(const std::vector<DesiredSample> & desired,
                       const RobotParams & params,
                       const StabilizerGains & gains,
                       const std::vector<Disturbance> & disturbances,
                       const ClosedLoopOptions & options)
{
  if(desired.empty())
  {
    throw std::invalid_argument("runClosedLoop needs at least one desired sample");
  }
  const double dt = options.plant.dt;
  Stabilizer stabilizer(params, gains, dt);
  stabilizer.compensateGammaError(options.compensate_gamma);
  const double omega = stabilizer.omega();

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> unit_noise(0.0, 1.0);

  PlantState plant;
  plant.com = desired.front().com;
  plant.com.pos += options.initial_com_offset;
  plant.zmp_actual = desired.front().zmp;
  plant.time = desired.front().time;

  TraceLog log;
  log.dt = dt;
  log.rows.reserve(desired.size());
  for(size_t k = 0; k < desired.size(); ++k)
  {
    const auto & des = desired[k];
    const auto true_contacts = applyDisturbances(des.contacts, disturbances, des.time);

    ActualSample actual;
    actual.com = plant.com;
    actual.contacts = true_contacts;
    if(options.com_noise > 0.0)
    {
      actual.com.pos += options.com_noise * Eigen::Vector2d(unit_noise(rng), unit_noise(rng));
    }
    if(options.force_noise > 0.0)
    {
      for(auto & c : actual.contacts)
      {
        c.force += options.force_noise * Eigen::Vector3d(unit_noise(rng), unit_noise(rng), unit_noise(rng));
      }
    }
    actual.dcm = dcmOf(actual.com, omega);

    const auto out = stabilizer.step(des, actual);
    if(out.saturated)
    {
      ++log.zmp_saturation_events;
    }

    TraceRow row;
    row.time = des.time;
    row.com_des = des.com.pos;
    row.com_act = plant.com.pos;
    row.dcm_des = des.dcm;
    row.dcm_act = dcmOf(plant.com, omega);
    row.zmp_des = des.zmp;
    row.zmp_cmd = out.command_zmp;
    row.zmp_act = plant.zmp_actual;
    row.ext_zmp_ref = des.ext_zmp_ref;
    row.gamma_err = out.gamma_err;
    row.gamma_high = out.split.high;
    row.gamma_low = out.split.low;
    for(const auto & c : true_contacts)
    {
      row.fext_sum += c.force;
    }
    log.rows.push_back(row);

    if((plant.com.pos - des.com.pos).norm() > options.divergence_threshold || !plant.com.pos.allFinite())
    {
      log.diverged = true;
      break;
    }

    ZmpActuation actuation;
    actuation.command = out.command_zmp;
    actuation.desired = des.zmp;
    actuation.desired_next = k + 1 < desired.size() ? desired[k + 1].zmp : des.zmp;
    actuation.support_region = des.support.region();
    plant = stepPlant(plant, actuation, true_contacts, params, options.plant);
  }
  log.zmp_clamp_events = plant.zmp_clamp_events;
  return log;
}

} // namespace locomanip
