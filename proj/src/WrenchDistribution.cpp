#include <LocoManip/Errors.h>
#include <LocoManip/WrenchDistribution.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace locomanip
{

namespace
{

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

constexpr double CONTAINS_MARGIN = 1e-9;
constexpr int MAX_ACTIVE_SET_ITERATIONS = 100;

/// Intersect [lo, hi] with {s | a s <= b}.
void restrict(double a, double b, double & lo, double & hi)
{
  constexpr double eps = 1e-14;
  if(std::abs(a) < eps)
  {
    if(b < -eps)
    {
      hi = lo - 1.0;
    }
    return;
  }
  if(a > 0.0)
  {
    hi = std::min(hi, b / a);
  }
  else
  {
    lo = std::max(lo, b / a);
  }
}

Wrench footWrench(double fz, const Eigen::Vector2d & cop, const Wrench & net, double plane_z)
{
  const double share = fz / net.force.z();
  Wrench w;
  w.force = Eigen::Vector3d(share * net.force.x(), share * net.force.y(), fz);
  w.moment = Eigen::Vector3d(cop.x(), cop.y(), plane_z).cross(w.force);
  return w;
}

FootWrenches singleSupport(const Wrench & net, const Rect & sole, const Eigen::Vector2d & cop, bool left)
{
  if(!sole.contains(cop, CONTAINS_MARGIN))
  {
    throw InfeasibleError("net CoP (" + std::to_string(cop.x()) + ", " + std::to_string(cop.y())
                          + ") is outside the support sole");
  }
  FootWrenches out;
  (left ? out.left : out.right) = net;
  return out;
}

/** Primal active-set for min 1/2 (x - x0)' H (x - x0) s.t. E x = e, G x <= 0, from a feasible x. */
Vector6d solveActiveSet(const Vector6d & H,
                        const Vector6d & x0,
                        const Eigen::Matrix<double, 3, 6> & E,
                        const Eigen::Matrix<double, 8, 6> & G,
                        Vector6d x)
{
  std::vector<int> working;
  for(int iter = 0; iter < MAX_ACTIVE_SET_ITERATIONS; ++iter)
  {
    const int n_con = 3 + static_cast<int>(working.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(6 + n_con, 6 + n_con);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(6 + n_con);
    kkt.topLeftCorner<6, 6>() = H.asDiagonal();
    Eigen::MatrixXd A(n_con, 6);
    A.topRows<3>() = E;
    for(size_t i = 0; i < working.size(); ++i)
    {
      A.row(3 + static_cast<Eigen::Index>(i)) = G.row(working[i]);
    }
    kkt.topRightCorner(6, n_con) = A.transpose();
    kkt.bottomLeftCorner(n_con, 6) = A;
    rhs.head<6>() = -(H.asDiagonal() * (x - x0));

    const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
    const Vector6d p = sol.head<6>();

    if(p.cwiseAbs().maxCoeff() < 1e-12 * (1.0 + x.cwiseAbs().maxCoeff()))
    {
      // multipliers of the working inequalities
      int most_negative = -1;
      double lowest = -1e-12;
      for(size_t i = 0; i < working.size(); ++i)
      {
        const double mu = sol(6 + 3 + static_cast<Eigen::Index>(i));
        if(mu < lowest)
        {
          lowest = mu;
          most_negative = static_cast<int>(i);
        }
      }
      if(most_negative < 0)
      {
        return x;
      }
      working.erase(working.begin() + most_negative);
      continue;
    }

    double step = 1.0;
    int blocking = -1;
    for(int i = 0; i < 8; ++i)
    {
      if(std::find(working.begin(), working.end(), i) != working.end())
      {
        continue;
      }
      const double gp = G.row(i).dot(p);
      if(gp > 1e-15)
      {
        const double limit = std::max(0.0, -G.row(i).dot(x)) / gp;
        if(limit < step)
        {
          step = limit;
          blocking = i;
        }
      }
    }
    x += step * p;
    if(blocking >= 0)
    {
      working.push_back(blocking);
    }
  }
  throw InfeasibleError("wrench distribution active-set did not terminate");
}

/** Left shares s in [0, 1] whose soles can realize the CoP, each sole inflated by slack. */
std::optional<std::pair<double, double>> shareInterval(const Eigen::Vector2d & cop,
                                                       const Rect & left,
                                                       const Rect & right,
                                                       double slack)
{
  // cop = s cL + (1 - s) cR + offset with |offset_a| <= s hL_a + (1 - s) hR_a on each axis
  double lo = 0.0;
  double hi = 1.0;
  const Eigen::Vector2d cL = left.center();
  const Eigen::Vector2d cR = right.center();
  const Eigen::Vector2d hL = left.halfExtent();
  const Eigen::Vector2d hR = right.halfExtent();
  for(int a = 0; a < 2; ++a)
  {
    const double d0 = cop[a] - cR[a];
    const double dc = cL[a] - cR[a];
    const double dh = hL[a] - hR[a];
    restrict(-dc - dh, hR[a] + slack - d0, lo, hi);
    restrict(dc - dh, d0 + hR[a] + slack, lo, hi);
  }
  if(lo > hi)
  {
    return std::nullopt;
  }
  return std::make_pair(lo, hi);
}

} // namespace

std::optional<std::pair<double, double>> feasibleLeftShare(const Eigen::Vector2d & cop,
                                                           const Rect & left,
                                                           const Rect & right)
{
  return shareInterval(cop, left, right, CONTAINS_MARGIN);
}

FootWrenches distributeWrench(const Wrench & net,
                              const SupportState & support,
                              double plane_z,
                              std::optional<double> left_ratio)
{
  const double Fz = net.force.z();
  if(!(Fz > 0.0))
  {
    throw InfeasibleError("net vertical foot force must be positive, got " + std::to_string(Fz));
  }
  const Eigen::Vector2d cop = centerOfPressure(net, plane_z);
  if(!support.doubleSupport())
  {
    if(support.left)
    {
      return singleSupport(net, *support.left, cop, true);
    }
    return singleSupport(net, *support.right, cop, false);
  }

  const Rect & left = *support.left;
  const Rect & right = *support.right;
  const auto share_range = feasibleLeftShare(cop, left, right);
  if(!share_range)
  {
    throw InfeasibleError("net CoP (" + std::to_string(cop.x()) + ", " + std::to_string(cop.y())
                          + ") is outside the double support hull");
  }

  const Eigen::Vector2d cL = left.center();
  const Eigen::Vector2d cR = right.center();
  const Eigen::Vector2d hL = left.halfExtent();
  const Eigen::Vector2d hR = right.halfExtent();

  double ratio = 0.5;
  if(left_ratio)
  {
    ratio = std::clamp(*left_ratio, 0.0, 1.0);
  }
  else
  {
    const Eigen::Vector2d seg = cR - cL;
    const double len2 = seg.squaredNorm();
    if(len2 > 0.0)
    {
      ratio = std::clamp(1.0 - (cop - cL).dot(seg) / len2, 0.0, 1.0);
    }
  }

  // x = [fL, fR, mLx, mLy, mRx, mRy]
  Vector6d x0;
  x0 << ratio * Fz, (1.0 - ratio) * Fz, 0.0, 0.0, 0.0, 0.0;
  Vector6d H;
  H << 1.0 / (Fz * Fz), 1.0 / (Fz * Fz), 1.0 / std::pow(Fz * hL.x(), 2), 1.0 / std::pow(Fz * hL.y(), 2),
      1.0 / std::pow(Fz * hR.x(), 2), 1.0 / std::pow(Fz * hR.y(), 2);

  Eigen::Matrix<double, 3, 6> E;
  E << 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, //
      cL.x(), cR.x(), 1.0, 0.0, 1.0, 0.0, //
      cL.y(), cR.y(), 0.0, 1.0, 0.0, 1.0;
  const Eigen::Vector3d e(Fz, Fz * cop.x(), Fz * cop.y());

  Eigen::Matrix<double, 8, 6> G = Eigen::Matrix<double, 8, 6>::Zero();
  // |mL| <= fL hL, |mR| <= fR hR
  G.row(0) << -hL.x(), 0.0, 1.0, 0.0, 0.0, 0.0;
  G.row(1) << -hL.x(), 0.0, -1.0, 0.0, 0.0, 0.0;
  G.row(2) << -hL.y(), 0.0, 0.0, 1.0, 0.0, 0.0;
  G.row(3) << -hL.y(), 0.0, 0.0, -1.0, 0.0, 0.0;
  G.row(4) << 0.0, -hR.x(), 0.0, 0.0, 1.0, 0.0;
  G.row(5) << 0.0, -hR.x(), 0.0, 0.0, -1.0, 0.0;
  G.row(6) << 0.0, -hR.y(), 0.0, 0.0, 0.0, 1.0;
  G.row(7) << 0.0, -hR.y(), 0.0, 0.0, 0.0, -1.0;

  // feasible start: closest admissible share to the nominal one, offsets split by CoP capacity; the tolerance of
  // the feasibility test is only used when the CoP lies on the hull boundary
  const auto strict = shareInterval(cop, left, right, 0.0);
  const auto & range = strict ? *strict : *share_range;
  const double s = std::clamp(ratio, range.first, range.second);
  Vector6d start;
  start(0) = s * Fz;
  start(1) = (1.0 - s) * Fz;
  const Eigen::Vector2d needed = Fz * (cop - s * cL - (1.0 - s) * cR);
  for(int a = 0; a < 2; ++a)
  {
    const double capL = start(0) * hL[a];
    const double capR = start(1) * hR[a];
    const double total = capL + capR;
    const double mL = total > 0.0 ? needed[a] * capL / total : 0.0;
    start(2 + a) = mL;
    start(4 + a) = needed[a] - mL;
  }

  Vector6d sol = solveActiveSet(H, x0, E, G, start);

  // enforce the equalities to rounding on the more loaded foot
  if(sol(0) >= sol(1))
  {
    sol(0) = Fz - sol(1);
    sol.segment<2>(2) = e.tail<2>() - sol(0) * cL - sol(1) * cR - sol.segment<2>(4);
  }
  else
  {
    sol(1) = Fz - sol(0);
    sol.segment<2>(4) = e.tail<2>() - sol(0) * cL - sol(1) * cR - sol.segment<2>(2);
  }

  const auto cop_of = [](double fz, const Eigen::Vector2d & center, const Eigen::Vector2d & moment) {
    return fz > 0.0 ? Eigen::Vector2d(center + moment / fz) : center;
  };
  FootWrenches out;
  out.left = footWrench(sol(0), cop_of(sol(0), cL, sol.segment<2>(2)), net, plane_z);
  out.right = footWrench(sol(1), cop_of(sol(1), cR, sol.segment<2>(4)), net, plane_z);

  // the horizontal forces and CoPs fix the roll/pitch moments; the yaw residual is a free moment on the soles
  const double yaw_residual = net.moment.z() - out.left.moment.z() - out.right.moment.z();
  out.left.moment.z() += sol(0) / Fz * yaw_residual;
  out.right.moment.z() += sol(1) / Fz * yaw_residual;
  // absorb rounding so that the pair sums to the net wrench
  out.right.force = net.force - out.left.force;
  out.right.moment.head<2>() = net.moment.head<2>() - out.left.moment.head<2>();
  return out;
}

} // namespace locomanip
