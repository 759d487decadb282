#include <LocoManip/Errors.h>
#include <LocoManip/Stabilizer.h>

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <complex>
#include <random>

using namespace locomanip;

namespace
{

constexpr double DT = 0.002;

std::vector<ExternalContact> hands(double fx, double fz = 0.0)
{
  ExternalContact l, r;
  l.position = {0.3, 0.25, 1.0};
  r.position = {0.3, -0.25, 1.0};
  l.force = {fx, 0.0, fz};
  r.force = l.force;
  return {l, r};
}

DesiredSample standingSample(const std::vector<ExternalContact> & contacts = {})
{
  const RobotParams params;
  DesiredSample d;
  d.coeff = computeCoefficients(params, contacts);
  d.contacts = contacts;
  // CoM at rest on the ext-ZMP of a centered ZMP.
  d.zmp = Eigen::Vector2d::Zero();
  d.ext_zmp = extZmp(d.coeff, d.zmp);
  d.com.pos = d.ext_zmp;
  d.dcm = d.com.pos;
  d.zmp_ref = d.zmp;
  d.ext_zmp_ref = d.ext_zmp;
  d.support.left = Rect::centered({0.0, 0.1}, {0.1, 0.05});
  d.support.right = Rect::centered({0.0, -0.1}, {0.1, 0.05});
  return d;
}

ActualSample matching(const DesiredSample & d)
{
  ActualSample a;
  a.com = d.com;
  a.dcm = d.dcm;
  a.contacts = d.contacts;
  return a;
}

std::vector<std::complex<double>> sortedEigenvalues(const Eigen::MatrixXd & m)
{
  const Eigen::VectorXcd ev = m.eigenvalues();
  std::vector<std::complex<double>> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end(), [](const auto & a, const auto & b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

} // namespace

TEST(GammaError, Examples)
{
  const RobotParams params;
  EXPECT_EQ(measureGammaError(hands(-50.0), hands(-50.0), params), Eigen::Vector2d::Zero());
  const auto err = measureGammaError(hands(-50.0), hands(-80.0), params);
  EXPECT_NEAR(err.x(), 2.0 * -30.0 * 1.0 / 981.0, 1e-15);
  EXPECT_NEAR(err.x(), -0.06116, 1e-5);
  EXPECT_NEAR(err.y(), 0.0, 1e-15);

  ExternalContact above;
  above.position = {0.0, 0.0, 1.2};
  ExternalContact pushed = above;
  pushed.force.z() = 150.0;
  const std::vector<ExternalContact> a{above}, b{pushed};
  EXPECT_EQ(measureGammaError(a, b, params), Eigen::Vector2d::Zero());
  // Lists of different lengths are fine: the offset is additive.
  EXPECT_NEAR(measureGammaError({}, hands(-50.0), params).x(), -100.0 / 981.0, 1e-15);
}

TEST(FrequencySplit, ConstantInputSettlesLow)
{
  StabilizerState s;
  const Eigen::Vector2d g(0.03, -0.01);
  FrequencySplit split;
  for(int k = 0; k < 5000; ++k)
  {
    split = splitFrequency(s, g, DT, 1.0);
  }
  EXPECT_LT((split.low - g).norm(), 1e-12);
  EXPECT_LT(split.high.norm(), 1e-12);
  EXPECT_LT(split.high_rate.norm(), 1e-9);
}

TEST(FrequencySplit, StepGoesToHighFirst)
{
  StabilizerState s;
  const Eigen::Vector2d g(0.05, 0.0);
  const auto split = splitFrequency(s, g, DT, 1.0);
  EXPECT_GT(split.high.x(), 0.98 * g.x());
  EXPECT_LT(split.low.x(), 0.02 * g.x());
}

TEST(FrequencySplit, ExactComplement)
{
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 0.05);
  StabilizerState s;
  for(int k = 0; k < 2000; ++k)
  {
    const Eigen::Vector2d g(n(rng), n(rng));
    const auto split = splitFrequency(s, g, DT, 1.0);
    EXPECT_LE((split.low + split.high - g).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(s.gamma_err, g);
  }
}

TEST(FrequencySplit, HighPassMagnitude)
{
  for(const double period : {2.0, 5.0, 10.0})
  {
    StabilizerState s;
    const double w = 2.0 * M_PI / period;
    const double tau = 1.0 / (2.0 * M_PI);
    double peak = 0.0;
    const int n = static_cast<int>(std::llround(6.0 * period / DT));
    for(int k = 0; k < n; ++k)
    {
      const double t = k * DT;
      const auto split = splitFrequency(s, Eigen::Vector2d(std::sin(w * t), 0.0), DT, 1.0);
      if(t > 3.0 * period)
      {
        peak = std::max(peak, std::abs(split.high.x()));
      }
    }
    const double analytic = w * tau / std::sqrt(1.0 + w * w * tau * tau);
    EXPECT_NEAR(peak / analytic, 1.0, 0.05) << "period " << period;
  }
}

TEST(DcmFeedback, ZeroErrorReproducesDesired)
{
  auto d = standingSample(hands(-50.0));
  d.com.acc = {0.1, -0.2};
  StabilizerState state;
  const auto fb = dcmFeedback(d, matching(d), state, StabilizerGains{}, d.coeff.omega, DT);
  EXPECT_EQ(fb.command_zmp, d.zmp);
  EXPECT_EQ(fb.command_com_accel, d.com.acc);
  EXPECT_EQ(fb.shifted_com, d.com.pos);
}

TEST(DcmFeedback, GainScalesWithKappa)
{
  auto d = standingSample(hands(0.0, 245.25));
  ASSERT_NEAR(d.coeff.kappa, 0.5, 1e-12);
  StabilizerState state;
  auto a = matching(d);
  const Eigen::Vector2d delta(0.004, -0.002);
  a.dcm += delta;
  StabilizerGains gains;
  const auto fb = dcmFeedback(d, a, state, gains, d.coeff.omega, DT);
  EXPECT_LT((fb.command_zmp - d.zmp - 2.5 * delta).norm(), 1e-15);
  const double w2 = d.coeff.omega * d.coeff.omega;
  EXPECT_LT((fb.command_com_accel - (d.com.acc - w2 * 1.25 * delta)).norm(), 1e-12);
}

TEST(DcmFeedback, LowFrequencyErrorShiftsCom)
{
  // Steady low-frequency offset only: the command ZMP carries only the PID response to the shifted DCM error.
  auto d = standingSample();
  StabilizerState state;
  state.gamma_err_low = {-0.06, 0.0};
  auto a = matching(d);
  const StabilizerGains gains;
  const auto fb = dcmFeedback(d, a, state, gains, d.coeff.omega, DT);
  EXPECT_EQ(fb.shifted_com, d.com.pos - state.gamma_err_low);
  EXPECT_EQ(fb.dcm_error, a.dcm - (d.dcm - state.gamma_err_low));
  EXPECT_LT((fb.command_zmp - d.zmp - gains.k_p * fb.dcm_error).norm(), 1e-15);
  // Once the CoM sits at the shifted target, the ZMP stays at its desired value.
  a.dcm = fb.shifted_dcm;
  a.com.pos = fb.shifted_com;
  const auto settled = dcmFeedback(d, a, state, gains, d.coeff.omega, DT);
  EXPECT_LT((settled.command_zmp - d.zmp).norm(), 1e-15);
}

TEST(DcmFeedback, HighFrequencyTerms)
{
  auto d = standingSample(hands(-20.0, 100.0));
  StabilizerState state;
  state.gamma_err_high = {0.01, -0.02};
  state.gamma_err_high_rate = {0.1, 0.05};
  StabilizerGains gains;
  const auto fb = dcmFeedback(d, matching(d), state, gains, d.coeff.omega, DT);
  const double k = d.coeff.kappa;
  const Eigen::Vector2d expected_zmp =
      d.zmp + state.gamma_err_high / k + state.gamma_err_high_rate / (k * gains.rho);
  EXPECT_LT((fb.command_zmp - expected_zmp).norm(), 1e-15);
  const double w2 = d.coeff.omega * d.coeff.omega;
  const Eigen::Vector2d expected_acc =
      d.com.acc - w2 * state.gamma_err_high - w2 / gains.rho * state.gamma_err_high_rate;
  EXPECT_LT((fb.command_com_accel - expected_acc).norm(), 1e-12);
}

TEST(DcmFeedback, IntegratorClamp)
{
  auto d = standingSample();
  StabilizerState state;
  StabilizerGains gains;
  gains.k_i = 0.5;
  gains.integrator_limit = 0.01;
  auto a = matching(d);
  a.dcm.x() += 0.05;
  for(int k = 0; k < 1000; ++k)
  {
    dcmFeedback(d, a, state, gains, d.coeff.omega, DT);
  }
  EXPECT_DOUBLE_EQ(state.dcm_error_integral.x(), 0.01);
}

TEST(DcmFeedback, DegenerateKappaThrows)
{
  auto d = standingSample();
  d.coeff.kappa = 0.04;
  StabilizerState state;
  EXPECT_THROW(dcmFeedback(d, matching(d), state, StabilizerGains{}, 3.5, DT), DegenerateScaleError);
}

TEST(Gains, ScalingPreservesEigenvalues)
{
  // The closed loop built from the error model (integral, error, ZMP deviation) with scaled gains k / kappa must
  // have the spectrum of the conventional loop with the unscaled gains.
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> kappa_d(0.3, 1.5), rho_d(5.0, 50.0), omega_d(2.5, 4.5), kp_d(1.05, 3.0),
      ki_d(0.0, 2.0), kd_d(0.0, 0.3);
  for(int draw = 0; draw < 50; ++draw)
  {
    const double kappa = kappa_d(rng), rho = rho_d(rng), omega = omega_d(rng);
    const Eigen::Vector3d k(ki_d(rng), kp_d(rng), kd_d(rng));
    const Eigen::Vector3d kt = k / kappa;
    // x = (I, e, zbar): I' = e, e' = w (e - kappa zbar), zbar' = rho (-zbar + kt_i I + kt_p e + kt_d e')
    Eigen::Matrix3d m;
    m << 0.0, 1.0, 0.0, //
        0.0, omega, -omega * kappa, //
        rho * kt(0), rho * (kt(1) + kt(2) * omega), -rho - rho * kt(2) * omega * kappa;
    const auto scaled = sortedEigenvalues(m);
    const auto conventional = sortedEigenvalues(dcmErrorClosedLoop(1.0, rho, omega, k));
    const auto library = sortedEigenvalues(dcmErrorClosedLoop(kappa, rho, omega, kt));
    for(size_t i = 0; i < 3; ++i)
    {
      EXPECT_LE(std::abs(scaled[i] - conventional[i]), 1e-9 * std::max(1.0, std::abs(conventional[i])));
      EXPECT_LE(std::abs(library[i] - conventional[i]), 1e-9 * std::max(1.0, std::abs(conventional[i])));
    }
  }
}

TEST(Gains, Validation)
{
  const double omega = 3.5;
  EXPECT_NO_THROW(validateGains(StabilizerGains{}, omega));
  StabilizerGains weak;
  weak.k_p = 0.9;
  EXPECT_THROW(validateGains(weak, omega), std::invalid_argument);
  StabilizerGains no_rho;
  no_rho.rho = 0.0;
  EXPECT_THROW(validateGains(no_rho, omega), std::invalid_argument);
  StabilizerGains no_cutoff;
  no_cutoff.cutoff_period = -1.0;
  EXPECT_THROW(validateGains(no_cutoff, omega), std::invalid_argument);
  StabilizerGains integral;
  integral.k_i = 0.5;
  integral.k_p = 2.0;
  EXPECT_NO_THROW(validateGains(integral, omega));
}

TEST(Cancellation, ConstantHighFrequencyOffset)
{
  // Integrate the DCM error model (state: integral, error, error rate) under the command ZMP of the feedback law
  // with a constant high-frequency offset error. The feedforward terms must cancel the offset forcing.
  const RobotParams params;
  auto d = standingSample(hands(0.0, 150.0));
  const double kappa = d.coeff.kappa;
  const double omega = d.coeff.omega;
  const StabilizerGains gains;
  const double rho = gains.rho;
  const double gamma_h = 0.05;

  auto simulate = [&](bool compensate) {
    StabilizerState state;
    state.gamma_err_high = {compensate ? gamma_h : 0.0, 0.0};
    Eigen::Vector3d x = Eigen::Vector3d::Zero();
    const double h = DT / 10.0;
    const int steps = static_cast<int>(std::ceil(10.0 / omega / DT));
    for(int k = 0; k < steps; ++k)
    {
      ActualSample a = matching(d);
      a.dcm.x() += x(1);
      const double zc = dcmFeedback(d, a, state, gains, omega, DT).command_zmp.x() - d.zmp.x();
      for(int sub = 0; sub < 10; ++sub)
      {
        auto f = [&](const Eigen::Vector3d & s) {
          return Eigen::Vector3d(s(1), s(2),
                                 rho * omega * s(1) + (omega - rho) * s(2) - kappa * rho * omega * zc
                                     + rho * omega * gamma_h);
        };
        const Eigen::Vector3d k1 = f(x);
        const Eigen::Vector3d k2 = f(x + 0.5 * h * k1);
        const Eigen::Vector3d k3 = f(x + 0.5 * h * k2);
        const Eigen::Vector3d k4 = f(x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
    }
    return x(1);
  };
  EXPECT_LT(std::abs(simulate(true)), 1e-4);
  // Without the feedforward terms the same offset leaves a large steady error.
  EXPECT_GT(std::abs(simulate(false)), 1e-2);
  (void)params;
}

TEST(StabilizerStep, NominalReproducesDesiredChain)
{
  const RobotParams params;
  Stabilizer st(params, StabilizerGains{}, DT);
  auto d = standingSample(hands(-50.0));
  const auto out = st.step(d, matching(d));
  EXPECT_EQ(out.command_zmp, d.zmp);
  EXPECT_EQ(out.command_com_accel, d.com.acc);
  EXPECT_FALSE(out.saturated);
  const auto expected = netFootWrench(params, {d.com.pos.x(), d.com.pos.y(), params.com_height},
                                      Eigen::Vector3d::Zero(), d.contacts);
  EXPECT_EQ(out.net_wrench.force, expected.force);
  EXPECT_EQ(out.net_wrench.moment, expected.moment);
  EXPECT_LT((out.feet.sum().force - out.net_wrench.force).norm(), 1e-12);
  EXPECT_LT((out.feet.sum().moment - out.net_wrench.moment).norm(), 1e-9);
  EXPECT_LT((centerOfPressure(out.net_wrench, 0.0) - d.zmp).norm(), 1e-12);
}

TEST(StabilizerStep, SaturatesIntoSupport)
{
  const RobotParams params;
  Stabilizer st(params, StabilizerGains{}, DT);
  auto d = standingSample();
  auto a = matching(d);
  a.dcm.x() += 0.3;
  const auto out = st.step(d, a);
  EXPECT_TRUE(out.saturated);
  EXPECT_TRUE(d.support.region().contains(out.command_zmp, 1e-12));
  EXPECT_GT(out.raw_command_zmp.x(), d.support.region().max.x());
  EXPECT_LT((centerOfPressure(out.net_wrench, 0.0) - out.command_zmp).norm(), 1e-9);
  EXPECT_LT((out.feet.sum().force - out.net_wrench.force).norm(), 1e-12);
}

TEST(StabilizerStep, CompensationSwitch)
{
  const RobotParams params;
  auto d = standingSample(hands(-50.0));
  ActualSample a = matching(d);
  a.contacts = hands(-80.0);
  Stabilizer on(params, StabilizerGains{}, DT);
  Stabilizer off(params, StabilizerGains{}, DT);
  off.compensateGammaError(false);
  const auto out_on = on.step(d, a);
  const auto out_off = off.step(d, a);
  EXPECT_NEAR(out_on.gamma_err.x(), -60.0 / 981.0, 1e-15);
  EXPECT_EQ(out_off.gamma_err, out_on.gamma_err);
  EXPECT_EQ(out_off.split.high, Eigen::Vector2d::Zero());
  EXPECT_EQ(out_off.command_zmp, d.zmp);
  // Pushed backwards harder than expected: the ZMP strategy moves the command ZMP backwards at first.
  EXPECT_LT(out_on.command_zmp.x(), d.zmp.x());
}
