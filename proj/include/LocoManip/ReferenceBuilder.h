#pragma once

#include <LocoManip/CentroidalDynamics.h>

#include <optional>
#include <vector>

namespace locomanip
{

enum class Foot
{
  Left,
  Right
};

/** \brief Support interval of one foot. */
struct Footstep
{
  Foot foot = Foot::Left;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double start_time = 0.0;
  double end_time = 0.0;

  bool operator==(const Footstep &) const = default;
};

/** \brief Axis-aligned rectangle on the ground. */
struct Rect
{
  Eigen::Vector2d min = Eigen::Vector2d::Zero();
  Eigen::Vector2d max = Eigen::Vector2d::Zero();

  static Rect centered(const Eigen::Vector2d & center, const Eigen::Vector2d & half_extent)
  {
    return {center - half_extent, center + half_extent};
  }

  Eigen::Vector2d center() const
  {
    return 0.5 * (min + max);
  }

  Eigen::Vector2d halfExtent() const
  {
    return 0.5 * (max - min);
  }

  bool contains(const Eigen::Vector2d & p, double margin = 0.0) const
  {
    return (p.array() >= min.array() - margin).all() && (p.array() <= max.array() + margin).all();
  }

  Eigen::Vector2d clamp(const Eigen::Vector2d & p) const
  {
    return p.cwiseMax(min).cwiseMin(max);
  }

  Rect inflated(double margin) const
  {
    return {min.array() - margin, max.array() + margin};
  }

  /** \brief Bounding rectangle of both. */
  Rect hull(const Rect & other) const
  {
    return {min.cwiseMin(other.min), max.cwiseMax(other.max)};
  }
};

/** \brief Soles in contact at one instant. At least one is set. */
struct SupportState
{
  std::optional<Rect> left;
  std::optional<Rect> right;

  bool doubleSupport() const
  {
    return left.has_value() && right.has_value();
  }

  /** \brief Saturation region: the sole, or the bounding rectangle of both soles in double support. */
  Rect region() const;
};

enum class Interpolation
{
  Hold,
  Linear
};

/** \brief Piecewise contact schedule.
 *
 * Breakpoint i holds from its time until the next breakpoint, or interpolates linearly towards it. Before the
 * first breakpoint and after the last one the nearest breakpoint is held.
 */
struct ContactSchedule
{
  struct Breakpoint
  {
    double time = 0.0;
    std::vector<ExternalContact> contacts;
    Interpolation mode = Interpolation::Hold;

    bool operator==(const Breakpoint &) const = default;
  };

  std::vector<Breakpoint> breakpoints;

  /** \brief Throws InvalidScheduleError if times are not strictly increasing or a linear segment changes the
   * number of contacts. */
  void validate() const;

  std::vector<ExternalContact> contactsAt(double t) const;

  bool operator==(const ContactSchedule &) const = default;
};

/** \brief Sampled reference ZMP and the support soles at each sample. */
struct ZmpReference
{
  double dt = 0.0;
  std::vector<Eigen::Vector2d> zmp;
  std::vector<SupportState> support;
};

struct SoleGeometry
{
  Eigen::Vector2d half_extent{0.10, 0.05};

  bool operator==(const SoleGeometry &) const = default;
};

/** \brief Reference ZMP from a footstep sequence.
 *
 * Single support holds the ZMP at the support foot; the first double_support_fraction of every step after the
 * first interpolates linearly in time from the previous foot. The last value is held after the final step.
 * Samples are taken at k * dt for k = 0 .. round(horizon / dt).
 */
ZmpReference buildZmpReference(const std::vector<Footstep> & steps,
                               double double_support_fraction,
                               double dt,
                               double horizon,
                               const SoleGeometry & sole = {});

/** \brief Reference signals of one control sample. */
struct ReferenceFrame
{
  double time = 0.0;
  Eigen::Vector2d zmp_ref = Eigen::Vector2d::Zero();
  std::vector<ExternalContact> contacts_ref;
  LipmCoefficients coeff;
  Eigen::Vector2d ext_zmp_ref = Eigen::Vector2d::Zero();
  SupportState support;
};

std::vector<ReferenceFrame> buildReferenceFrames(const ZmpReference & zmp_traj,
                                                 const ContactSchedule & schedule,
                                                 const RobotParams & params);

/** \brief Ablation of the ZMP scale: sets kappa = 1 in every frame and recomputes ext_zmp_ref. */
void forceUnitKappa(std::vector<ReferenceFrame> & frames);

/** \brief Alternating in-place steps with both feet at +-foot_spacing/2 in y.
 *
 * The first step (right foot) starts at t = 0; each step lasts single_support + double_support seconds. Steps are
 * generated until end_time is covered.
 */
std::vector<Footstep> inPlaceStepping(double foot_spacing,
                                      double single_support,
                                      double double_support,
                                      double end_time);

} // namespace locomanip
