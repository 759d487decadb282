#pragma once

#include <LocoManip/ReferenceBuilder.h>

#include <span>
#include <vector>

namespace locomanip
{

/** \brief Weights of the preview objective sum Q (ext_zmp - ext_zmp_ref)^2 + R jerk^2. */
struct PreviewWeights
{
  double q_zmp = 1.0;
  double r_jerk = 1e-8;

  bool operator==(const PreviewWeights &) const = default;
};

/** \brief Discrete CoM-jerk system of one horizontal axis, with the ext-ZMP as output. */
struct JerkSystem
{
  Eigen::Matrix3d A;
  Eigen::Vector3d B;
  Eigen::RowVector3d C;
};

JerkSystem discretize(double omega, double dt);

/** \brief Gains of the preview controller u[k] = -k_fb x[k] + sum_j k_ff[j-1] ext_zmp_ref[k+j]. */
struct PreviewGains
{
  Eigen::RowVector3d k_fb = Eigen::RowVector3d::Zero();
  /** Preview feedforward gains, k_ff[j-1] weighs the reference j samples ahead. */
  std::vector<double> k_ff;
  double dt = 0.0;
  double omega = 0.0;
  size_t n_horizon = 0;
  /** Solution of the discrete algebraic Riccati equation. */
  Eigen::Matrix3d riccati = Eigen::Matrix3d::Zero();
  size_t riccati_iterations = 0;

  /** \brief Spectral radius of A - B k_fb. */
  double closedLoopSpectralRadius() const;
};

struct RiccatiOptions
{
  double tolerance = 1e-10;
  size_t max_iterations = 1'000'000;
};

/** \brief Solve the output-tracking DARE by fixed-point iteration and derive the preview gains.
 *
 * The window length preview_window must be at least 1 s. Throws RiccatiDivergenceError when the iteration does
 * not converge within the cap.
 */
PreviewGains synthesizeGains(const PreviewWeights & weights,
                             double omega,
                             double dt,
                             double preview_window,
                             const RiccatiOptions & options = {});

/** \brief CoM position, velocity and acceleration of both axes. */
struct PgState
{
  Eigen::Vector3d x = Eigen::Vector3d::Zero();
  Eigen::Vector3d y = Eigen::Vector3d::Zero();
};

struct PgStep
{
  PgState next;
  /** CoM jerk applied over the step. */
  Eigen::Vector2d jerk = Eigen::Vector2d::Zero();
  /** ext-ZMP of the state the jerk was computed from. */
  Eigen::Vector2d ext_zmp = Eigen::Vector2d::Zero();
};

/** \brief One preview-control step. Both spans hold exactly n_horizon future references (k+1 .. k+N_h). */
PgStep stepPreview(const PgState & state,
                   const PreviewGains & gains,
                   const JerkSystem & system,
                   std::span<const double> future_ref_x,
                   std::span<const double> future_ref_y);

/** \brief Desired state of one control sample, as consumed by the stabilizer. */
struct DesiredSample
{
  double time = 0.0;
  CoMState com;
  Eigen::Vector2d dcm = Eigen::Vector2d::Zero();
  /** Desired ZMP recovered from the tracked ext-ZMP. */
  Eigen::Vector2d zmp = Eigen::Vector2d::Zero();
  Eigen::Vector2d ext_zmp = Eigen::Vector2d::Zero();
  Eigen::Vector2d ext_zmp_ref = Eigen::Vector2d::Zero();
  Eigen::Vector2d zmp_ref = Eigen::Vector2d::Zero();
  LipmCoefficients coeff;
  std::vector<ExternalContact> contacts;
  SupportState support;
};

/** \brief Initial state at rest on the first reference ext-ZMP. */
PgState restingState(const ReferenceFrame & first);

/** \brief Run the preview controller over a frame list.
 *
 * Produces frames.size() - n_horizon samples; the remaining frames only feed the preview window.
 * Throws DegenerateScaleError if any produced sample has a degenerate kappa.
 */
std::vector<DesiredSample> generateTrajectory(const std::vector<ReferenceFrame> & frames,
                                              const PreviewGains & gains,
                                              const PgState & initial);

} // namespace locomanip
