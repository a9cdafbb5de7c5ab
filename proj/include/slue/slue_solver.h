#pragma once

// Pose bounds: minimum-volume ellipsoids around a pose estimate that contain
// every pose consistent with the keypoint uncertainty sets.
//
// `order` is the relaxation order (kappa + 1). Rotation-matrix form centers
// at [vec(R), t] (12 coordinates), quaternion form at [q, t] (7).

#include <optional>
#include <string>
#include <vector>

#include "slue/constraints.h"
#include "slue/sos_engine.h"

namespace slue {

enum class SplitTarget { kRotationOnly, kTranslationOnly };

std::string to_string(SplitTarget target);
SplitTarget split_target_from_string(const std::string& s);
SetForm form_from_string(const std::string& s);

/// Quaternion for order >= 2, rotation matrix for order 1.
SetForm default_form(int order);

struct SlueSettings {
  EngineSettings engine;
  /// Also impose R R^T = I (six quadratics implied by the column equalities)
  /// in rotation-matrix form. They enlarge the multiplier space, which the
  /// order-2 relaxation needs to converge.
  bool row_orthonormality = true;
};

struct SlueResult {
  EllipsoidBound joint;
  SetForm form = SetForm::kRotmat;
  int order = 1;
  double solve_time_s = 0.0;
  SolveStatus status = SolveStatus::kNumerical;
  std::string message;
  std::optional<SplitTarget> target;
  SosCertificate certificate;
  double identity_residual = 0.0;
  std::vector<VecX> degenerate_axes;
  /// Keypoints removed for an infinite radius.
  std::vector<int> dropped_ids;
  Pose pose_estimate;

  bool ok() const { return status == SolveStatus::kOk; }
};

/// Six quadratics sum_j R_ij R_kj - delta_ik over [1, vec(R), t].
std::vector<MatX> build_row_orthonormality();

/// The constraint set the solver works on for this form, including any
/// redundant equalities from `settings`.
QuadraticConstraintSet build_pose_set(const ObservationSet& obs, const Pose& pose_estimate,
                                      SetForm form, const SlueSettings& settings = {});

/// [vec(R), t] or [q, t] with q the nonnegative-scalar representative.
VecX pose_center(const Pose& pose, SetForm form);
/// Coordinates of `pose` in the frame of a bound centered at `estimate`; in
/// quaternion form the sign of q follows the estimate's hemisphere.
VecX pose_coordinates(const Pose& pose, SetForm form, const Pose& estimate);
/// Inverse of pose_center; rotation entries are projected onto SO(3).
Pose pose_from_center(const VecX& center, SetForm form);

/// Throws InputError for order < 1, quaternion form at order 1, the
/// quaternion form with 2-norm radii, or fewer than one usable keypoint.
SlueResult slue_joint(const ObservationSet& obs, const Pose& pose_estimate, SetForm form,
                      int order, const SlueSettings& settings = {});

/// Maximizes log det of the target block of H with the rest of H zero.
SlueResult slue_split(const ObservationSet& obs, const Pose& pose_estimate, SetForm form,
                      int order, SplitTarget target, const SlueSettings& settings = {});

struct Frame {
  ObservationSet obs;
  Pose pose_estimate;
};

/// One result per frame; errors become a numerical status with the message.
std::vector<SlueResult> slue_batch(const std::vector<Frame>& frames, std::optional<SetForm> form,
                                   int order, const SlueSettings& settings = {},
                                   int threads = 1);

}  // namespace slue
