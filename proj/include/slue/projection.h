#pragma once

// Translation and axis-angle marginals of a joint pose ellipsoid, and their
// volumes.
//
// The marginal of {z : (z - c)^T H (z - c) <= 1} on coordinates P z is
// {u : (u - P c)^T (P H^-1 P^T)^-1 (u - P c) <= 1}. Rotations are measured
// as left perturbations R = R_w(theta) R_bar of the center rotation.

#include <string>
#include <vector>

#include "slue/geometry.h"
#include "slue/sos_engine.h"

namespace slue {

/// Eigenvalue floor when inverting nearly singular shape matrices.
inline constexpr double kEigenFloor = 1e-12;

struct TranslationBound {
  Mat3 h_t = Mat3::Zero();
  Vec3 center = Vec3::Zero();
  bool degenerate = false;
  /// Unbounded directions of the marginal (translation coordinates).
  std::vector<Vec3> degenerate_axes;

  double value(const Vec3& t) const { return (t - center).dot(h_t * (t - center)); }
};

enum class AngularRepresentation { kSinTheta, kSinHalfTheta };

std::string to_string(AngularRepresentation r);

/// (w s)^T h_theta (w s) <= 1 with s = sin(theta) or sin(theta / 2).
struct AngularBound {
  Mat3 h_theta = Mat3::Zero();
  AngularRepresentation representation = AngularRepresentation::kSinTheta;
  Rotation center_rotation;
  /// Coordinates of the joint center's rotation, zero when it is
  /// center_rotation itself.
  Vec3 center = Vec3::Zero();
  bool degenerate = false;
  std::vector<Vec3> degenerate_axes;

  /// w sin(theta) (from the skew part) or w sin(theta / 2) of R R_bar^T.
  Vec3 coordinates(const Rotation& r) const;
  double value(const Rotation& r) const;
};

/// (P H^-1 P^T)^-1 for the coordinate block [begin, begin + size), with
/// eigenvalues of H floored at kEigenFloor; `degenerate` is set when H has
/// eigenvalues at or below the floor.
MatX marginal_shape(const MatX& h, int begin, int size, bool* degenerate = nullptr);

/// Throws InputError unless the joint frame carries a translation block.
TranslationBound project_translation(const EllipsoidBound& joint);

/// Rotation-matrix frame, w sin(theta) coordinates: 4 (P_w M^-1 P_w^T)^-1
/// where M is the rotation marginal of H written over vec(R_w - I).
AngularBound project_axis_angle_rotmat(const EllipsoidBound& joint,
                                       const Rotation& center_rotation);

/// Quaternion frame: w sin(theta / 2) coordinates, no angle restriction.
AngularBound project_axis_angle_quat(const EllipsoidBound& joint,
                                     const UnitQuaternion& center_quat);

/// Picks the rotmat or quat projection from the joint frame and its center.
AngularBound project_axis_angle(const EllipsoidBound& joint);

/// The 3 x 9 map vec(M) -> skew_part(M).
Eigen::Matrix<double, 3, 9> skew_part_map();

struct BoundVolumes {
  /// Cubic meters; infinite for a degenerate bound.
  double translation = 0.0;
  /// Cubic degrees.
  double angular = 0.0;
  /// Principal half-angles in degrees.
  Vec3 angles_deg = Vec3::Zero();
};

/// (4 pi / 3) det(h_t)^(-1/2), and (4 pi / 3) prod theta_i with principal
/// half-angles theta_i from the axis lengths, clipped at 90 degrees.
/// Throws InputError on non-PSD input.
BoundVolumes bound_volumes(const TranslationBound& t, const AngularBound& a);
double translation_volume(const Mat3& h_t);

/// Boundary points of the planar ellipse obtained by projecting the 3D
/// ellipsoid {u : (u - c)^T h (u - c) <= 1} onto coordinates (i, j).
std::vector<Eigen::Vector2d> ellipse_outline(const Mat3& h, const Vec3& center, int i, int j,
                                             int points = 64);

}  // namespace slue
