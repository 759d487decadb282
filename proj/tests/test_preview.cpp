#include <LocoManip/Errors.h>
#include <LocoManip/PreviewControl.h>

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace locomanip;

namespace
{

constexpr double DT = 0.002;

double omegaDefault()
{
  return naturalFrequency(RobotParams{});
}

const PreviewGains & defaultGains()
{
  static const PreviewGains gains = synthesizeGains({}, omegaDefault(), DT, 1.6);
  return gains;
}

std::vector<ReferenceFrame> framesFor(const std::vector<Footstep> & steps, const ContactSchedule & schedule,
                                      double duration)
{
  const double horizon = duration + static_cast<double>(defaultGains().n_horizon) * DT;
  return buildReferenceFrames(buildZmpReference(steps, 0.2, DT, horizon), schedule, RobotParams{});
}

} // namespace

TEST(Discretize, Entries)
{
  const auto sys = discretize(std::sqrt(12.2625), DT);
  EXPECT_EQ(sys.A(0, 1), 0.002);
  EXPECT_DOUBLE_EQ(sys.A(0, 2), 2e-6);
  EXPECT_DOUBLE_EQ(sys.B(0), DT * DT * DT / 6.0);
  EXPECT_DOUBLE_EQ(sys.B(1), DT * DT / 2.0);
  EXPECT_DOUBLE_EQ(sys.B(2), DT);
  EXPECT_EQ(sys.C(0), 1.0);
  EXPECT_EQ(sys.C(1), 0.0);
  EXPECT_NEAR(sys.C(2), -0.0815494393476, 1e-12);
  for(int i = 0; i < 3; ++i)
  {
    EXPECT_EQ(sys.A(i, i), 1.0);
    for(int j = 0; j < i; ++j)
    {
      EXPECT_EQ(sys.A(i, j), 0.0);
    }
  }
  EXPECT_THROW(discretize(3.5, 0.0), std::invalid_argument);
}

TEST(Gains, SatisfyRiccatiEquation)
{
  const auto & g = defaultGains();
  const auto sys = discretize(g.omega, g.dt);
  const PreviewWeights w;
  const Eigen::Matrix3d & P = g.riccati;
  const double s = w.r_jerk + sys.B.dot(P * sys.B);
  const Eigen::Matrix3d rhs = sys.C.transpose() * w.q_zmp * sys.C + sys.A.transpose() * P * sys.A
                              - sys.A.transpose() * P * sys.B * sys.B.transpose() * P * sys.A / s;
  EXPECT_LT((rhs - P).cwiseAbs().maxCoeff(), 1e-8 * P.cwiseAbs().maxCoeff());
  EXPECT_GT(P.ldlt().vectorD().minCoeff(), 0.0);
}

TEST(Gains, Invariants)
{
  const auto & g = defaultGains();
  EXPECT_EQ(g.n_horizon, 800u);
  EXPECT_EQ(g.k_ff.size(), 800u);
  EXPECT_LT(g.closedLoopSpectralRadius(), 1.0);
  double total = 0.0;
  double tail = 0.0;
  for(size_t j = 0; j < g.k_ff.size(); ++j)
  {
    total += std::abs(g.k_ff[j]);
    if(j >= g.k_ff.size() - g.k_ff.size() / 10)
    {
      tail += std::abs(g.k_ff[j]);
    }
  }
  EXPECT_LT(tail, 0.01 * total);
  // A held reference is tracked without offset: the feedforward sum equals the position feedback gain.
  const double sum = std::accumulate(g.k_ff.begin(), g.k_ff.end(), 0.0);
  EXPECT_NEAR(sum, g.k_fb(0), 1e-9 * g.k_fb(0));
}

TEST(Gains, RejectsBadInputs)
{
  EXPECT_THROW(synthesizeGains({}, omegaDefault(), DT, 0.5), std::invalid_argument);
  EXPECT_THROW(synthesizeGains({0.0, 1e-8}, omegaDefault(), DT, 1.6), std::invalid_argument);
  RiccatiOptions tiny;
  tiny.max_iterations = 5;
  EXPECT_THROW(synthesizeGains({}, omegaDefault(), DT, 1.6, tiny), RiccatiDivergenceError);
}

TEST(Gains, IndependentOfContactSchedule)
{
  // Gains only depend on the weights, omega, dt and the window; contacts never change omega.
  ExternalContact hand;
  hand.force = {-50.0, 10.0, 200.0};
  hand.position = {0.3, 0.2, 1.0};
  const std::vector<ExternalContact> contacts{hand};
  const auto coeff = computeCoefficients(RobotParams{}, contacts);
  const auto g = synthesizeGains({}, coeff.omega, DT, 1.6);
  EXPECT_EQ(g.k_fb, defaultGains().k_fb);
  EXPECT_EQ(g.k_ff, defaultGains().k_ff);
}

TEST(StepPreview, RestIsFixedPoint)
{
  const auto & g = defaultGains();
  const auto sys = discretize(g.omega, g.dt);
  const std::vector<double> zeros(g.n_horizon, 0.0);
  const auto step = stepPreview({}, g, sys, zeros, zeros);
  EXPECT_EQ(step.jerk, Eigen::Vector2d::Zero());
  EXPECT_EQ(step.next.x, Eigen::Vector3d::Zero());
  EXPECT_EQ(step.next.y, Eigen::Vector3d::Zero());
  EXPECT_THROW(stepPreview({}, g, sys, std::vector<double>(3, 0.0), zeros), std::invalid_argument);
}

TEST(StepPreview, ConvergesToConstantReference)
{
  const auto & g = defaultGains();
  const auto sys = discretize(g.omega, g.dt);
  const std::vector<double> ref_x(g.n_horizon, 0.05);
  const std::vector<double> ref_y(g.n_horizon, -0.03);
  PgState s;
  PgStep step;
  for(int k = 0; k < 5000; ++k)
  {
    step = stepPreview(s, g, sys, ref_x, ref_y);
    s = step.next;
  }
  EXPECT_LT(step.jerk.norm(), 1e-9);
  EXPECT_LT(std::abs(step.ext_zmp.x() - 0.05), 1e-6);
  EXPECT_LT(std::abs(step.ext_zmp.y() + 0.03), 1e-6);
}

TEST(StepPreview, AxesDecoupled)
{
  const auto & g = defaultGains();
  const auto sys = discretize(g.omega, g.dt);
  std::vector<double> ref_x(g.n_horizon);
  for(size_t j = 0; j < ref_x.size(); ++j)
  {
    ref_x[j] = 0.1 * std::sin(0.01 * static_cast<double>(j));
  }
  const std::vector<double> ref_y(g.n_horizon, 0.0);
  PgState s;
  for(int k = 0; k < 200; ++k)
  {
    s = stepPreview(s, g, sys, ref_x, ref_y).next;
    ASSERT_EQ(s.y, Eigen::Vector3d::Zero());
  }
  EXPECT_GT(s.x.norm(), 0.0);
}

TEST(Trajectory, ZeroForceStandingIsConstant)
{
  const std::vector<Footstep> steps{{Foot::Left, {0.02, 0.0}, 0.0, 1.0}};
  const auto frames = framesFor(steps, {}, 3.0);
  const auto traj = generateTrajectory(frames, defaultGains(), restingState(frames[0]));
  ASSERT_EQ(traj.size(), static_cast<size_t>(std::llround(3.0 / DT)) + 1);
  for(const auto & s : traj)
  {
    // Constant up to the rounding of the gain synthesis (sum of k_ff equals the first k_fb entry to 1e-9).
    EXPECT_LT((s.com.pos - Eigen::Vector2d(0.02, 0.0)).norm(), 1e-9);
    EXPECT_LT(s.com.vel.norm(), 1e-9);
    EXPECT_LT((s.zmp - Eigen::Vector2d(0.02, 0.0)).norm(), 1e-9);
  }
}

TEST(Trajectory, ConstantHandForceShiftsCom)
{
  ExternalContact l, r;
  l.position = {0.3, 0.25, 1.0};
  r.position = {0.3, -0.25, 1.0};
  ContactSchedule schedule;
  schedule.breakpoints = {{1.0, {l, r}, Interpolation::Linear}};
  l.force.x() = r.force.x() = -50.0;
  schedule.breakpoints.push_back({2.0, {l, r}, Interpolation::Hold});
  const auto frames = framesFor(inPlaceStepping(0.2, 0.8, 0.2, 12.0), schedule, 10.0);
  const auto traj = generateTrajectory(frames, defaultGains(), restingState(frames[0]));
  const double gamma_x = -100.0 / 981.0;
  for(const auto & s : traj)
  {
    if(s.time > 6.0)
    {
      EXPECT_NEAR(s.com.pos.x() - s.zmp_ref.x(), -gamma_x, 1e-6) << "t = " << s.time;
      EXPECT_NEAR(s.zmp.x(), s.zmp_ref.x(), 1e-6);
    }
  }
}

TEST(Trajectory, LateralSwayDependsOnVerticalForce)
{
  auto hands = [](double fz) {
    ExternalContact l, r;
    l.position = {0.3, 0.25, 1.0};
    r.position = {0.3, -0.25, 1.0};
    l.force.z() = r.force.z() = fz;
    return std::vector<ExternalContact>{l, r};
  };
  ContactSchedule schedule;
  schedule.breakpoints = {{0.0, hands(200.0), Interpolation::Hold}, {8.0, hands(-200.0), Interpolation::Hold}};
  const auto frames = framesFor(inPlaceStepping(0.2, 0.8, 0.2, 18.0), schedule, 16.0);
  const auto traj = generateTrajectory(frames, defaultGains(), restingState(frames[0]));
  auto sway = [&](double t0, double t1) {
    double lo = 1e9, hi = -1e9;
    for(const auto & s : traj)
    {
      if(s.time >= t0 && s.time < t1)
      {
        lo = std::min(lo, s.com.pos.y());
        hi = std::max(hi, s.com.pos.y());
      }
    }
    return hi - lo;
  };
  const double up = sway(4.0, 8.0);
  const double down = sway(12.0, 16.0);
  // Upward hand forces shrink the ext-ZMP swing (kappa < 1), downward forces enlarge it.
  EXPECT_LT(up, down);
  EXPECT_GT(down / up, 1.5);
}

TEST(Trajectory, TrackingAccuracyInSteadySegments)
{
  const auto frames = framesFor(inPlaceStepping(0.2, 0.8, 0.2, 12.0), {}, 10.0);
  const auto traj = generateTrajectory(frames, defaultGains(), restingState(frames[0]));
  double sum_sq = 0.0;
  size_t n = 0;
  for(const auto & s : traj)
  {
    if(s.time < 5.0)
    {
      continue;
    }
    // Skip 0.3 s after each reference discontinuity: steps begin every second.
    const double phase = std::fmod(s.time, 1.0);
    if(phase < 0.3)
    {
      continue;
    }
    sum_sq += (s.ext_zmp - s.ext_zmp_ref).squaredNorm();
    ++n;
  }
  ASSERT_GT(n, 0u);
  EXPECT_LT(std::sqrt(sum_sq / static_cast<double>(n)), 0.002);
}

TEST(Trajectory, DegenerateKappaThrows)
{
  ExternalContact lift;
  lift.force.z() = 960.0;
  lift.position = {0.0, 0.0, 1.0};
  ContactSchedule schedule;
  schedule.breakpoints = {{0.5, {lift}, Interpolation::Hold}};
  const auto frames = framesFor({{Foot::Left, {0.0, 0.0}, 0.0, 1.0}}, schedule, 1.0);
  EXPECT_THROW(generateTrajectory(frames, defaultGains(), restingState(frames[0])), DegenerateScaleError);
}

TEST(Trajectory, DesiredZmpInvertsExtZmp)
{
  ExternalContact l;
  l.position = {0.3, 0.25, 1.0};
  l.force = {-30.0, 5.0, 150.0};
  ContactSchedule schedule;
  schedule.breakpoints = {{0.0, {l}, Interpolation::Hold}};
  const auto frames = framesFor(inPlaceStepping(0.2, 0.8, 0.2, 5.0), schedule, 3.0);
  const auto traj = generateTrajectory(frames, defaultGains(), restingState(frames[0]));
  for(const auto & s : traj)
  {
    EXPECT_LT((extZmp(s.coeff, s.zmp) - s.ext_zmp).norm(), 1e-14);
    EXPECT_LT((s.dcm - dcmOf(s.com, s.coeff.omega)).norm(), 1e-15);
  }
}
