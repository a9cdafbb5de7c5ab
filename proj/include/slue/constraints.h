#pragma once

// Homogeneous quadratic constraint sets describing the poses consistent with
// bounded keypoint reprojection error.
//
// Rotation-matrix form: x = [1, vec(R), t] (13 entries).
// Quaternion form:      x = [1, q, t]      (8 entries).
// Every constraint is x^T A x <= 0 or x^T Q x = 0 with A, Q symmetric.

#include <string>
#include <utility>
#include <vector>

#include "slue/conformal.h"
#include "slue/geometry.h"

namespace slue {

enum class ConstraintLabel {
  kChirality,
  kBackprojection,
  kSo3,
  kUnitQuat,
  kHemisphere,
  kBp2,
  kGeneric,
};

std::string to_string(ConstraintLabel label);

enum class SetForm { kRotmat, kQuat, kGeneric };

std::string to_string(SetForm form);

inline constexpr int kRotmatDim = 13;
inline constexpr int kQuatDim = 8;

/// Membership tolerance for inequality values and |equality values|.
inline constexpr double kMembershipTolerance = 1e-8;

struct QuadraticConstraintSet {
  int dim = 0;
  SetForm form = SetForm::kGeneric;
  int homogenization = 0;
  std::vector<MatX> inequalities;
  std::vector<ConstraintLabel> inequality_labels;
  std::vector<MatX> equalities;
  std::vector<ConstraintLabel> equality_labels;
  /// Fewer than three keypoints: the set is almost surely unbounded.
  bool likely_unbounded = false;
  /// Quaternion form only: q_bar of the hemisphere constraint.
  UnitQuaternion hemisphere_reference;

  void add_inequality(const MatX& a, ConstraintLabel label);
  void add_equality(const MatX& q, ConstraintLabel label);
  /// Copy with every matrix scaled to unit Frobenius norm.
  QuadraticConstraintSet normalized() const;
};

struct ObservationSet {
  std::vector<Vec3> keypoints_3d;
  std::vector<Vec2> detections;
  std::vector<double> radii;
  CameraIntrinsics intrinsics;
  NormType norm = NormType::kInfinity;
  /// Optional identifiers used in diagnostics; defaults to positions.
  std::vector<int> keypoint_ids;

  std::size_t size() const { return keypoints_3d.size(); }
  int id(std::size_t i) const;
  /// Throws InputError on length mismatch, empty input, or bad radii.
  void validate() const;
};

/// Result of removing keypoints whose conformal radius is infinite.
struct FilteredObservations {
  ObservationSet obs;
  std::vector<int> dropped_ids;
};

FilteredObservations drop_unbounded_keypoints(const ObservationSet& obs);

/// x^T M x = x_h * (l^T x) for a linear functional l over the full vector.
MatX linear_to_quadratic(const VecX& l, int homogenization = 0);

/// Q_1..Q_15 enforcing R in SO(3), over the 13-vector [1, vec(R), t].
std::vector<MatX> build_so3_equalities();

/// One matrix per keypoint; value is minus the depth of the keypoint.
std::vector<MatX> build_chirality(const ObservationSet& obs);

/// Four per keypoint (+/- for image axes u, v), each a linear inequality
/// +/-(K - y e3^T)_j (R b + t) - r e3^T (R b + t) <= 0.
std::vector<MatX> build_backprojection_inf(const ObservationSet& obs);

/// One per keypoint: ||(y e3^T - K) p||^2 - (r e3^T p)^2 <= 0, p = R b + t.
std::vector<MatX> build_backprojection_2norm(const ObservationSet& obs);

QuadraticConstraintSet build_rotmat_set(const ObservationSet& obs);

/// Quaternion form; `pose_estimate` fixes the hemisphere q^T q_bar >= 0.
QuadraticConstraintSet build_quaternion_set(const ObservationSet& obs,
                                            const Pose& pose_estimate);

struct Membership {
  bool member = false;
  std::vector<double> inequality_values;
  std::vector<double> equality_values;
  double max_violation = 0.0;
};

Membership check_membership(const QuadraticConstraintSet& set, const VecX& x,
                            double tol = kMembershipTolerance);

/// [1, vec(R), t].
VecX rotmat_vector(const Pose& pose);
/// [1, q, t] with q in the hemisphere of `reference`.
VecX quat_vector(const Pose& pose, const UnitQuaternion& reference);
/// Homogeneous vector of `pose` in the frame of `set`; quaternion sets pick
/// the sign in the hemisphere of the set's reference.
VecX pose_vector(const QuadraticConstraintSet& set, const Pose& pose);

}  // namespace slue
