#pragma once

#include <LocoManip/ReferenceBuilder.h>

#include <optional>

namespace locomanip
{

struct FootWrenches
{
  Wrench left;
  Wrench right;

  Wrench sum() const
  {
    return left + right;
  }
};

/** \brief Distribute a net foot wrench to the feet in support.
 *
 * Per foot, the decision variables are the vertical force and the first moment f_z (cop - sole center), which
 * keeps the CoP-in-sole constraints linear. The objective is the squared deviation from a nominal split, where
 * the left foot carries left_ratio of the vertical force and both CoPs sit at the sole centers; forces are
 * normalized by the net vertical force and CoP offsets by the sole half-extents. Horizontal forces and the yaw
 * moment are shared in proportion to the vertical forces.
 *
 * The problem (6 variables, 3 equalities, 8 inequalities) is solved by a primal active-set method started from
 * an analytic feasible point. Without left_ratio, the nominal split follows the projection of the net CoP on the
 * segment between the two sole centers.
 *
 * Throws InfeasibleError when the net vertical force is not positive or the net CoP is outside the convex hull
 * of the soles in support.
 *
 * \param net Net foot wrench, moment about the world origin.
 * \param support Soles in contact.
 * \param plane_z Ground height.
 * \param left_ratio Nominal share of vertical force on the left foot in double support.
 */
FootWrenches distributeWrench(const Wrench & net,
                              const SupportState & support,
                              double plane_z,
                              std::optional<double> left_ratio = std::nullopt);

/** \brief Admissible interval of the left vertical-force share for a net CoP, or nullopt when infeasible. */
std::optional<std::pair<double, double>> feasibleLeftShare(const Eigen::Vector2d & cop,
                                                           const Rect & left,
                                                           const Rect & right);

} // namespace locomanip
