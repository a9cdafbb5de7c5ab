#pragma once

// Rotation representations and camera geometry.
//
// Conventions used throughout the library:
//  * quaternions are scalar-first, q = [cos(theta/2), w sin(theta/2)];
//  * vec(M) stacks the columns of M (column-major), so
//    vec(M R b) = (b^T kron M) vec(R);
//  * a rotation perturbation about an estimate is applied on the left,
//    R = R_w(theta) * R_bar, equivalently q = q_theta o q_bar.

#include <utility>

#include <Eigen/Dense>

namespace slue {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Tolerance on orthonormality when constructing a Rotation from raw entries.
inline constexpr double kRotationTolerance = 1e-8;

/// Element of SO(3). Construction validates orthonormality and det = +1.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}
  explicit Rotation(const Mat3& m, double tol = kRotationTolerance);

  static Rotation identity() { return Rotation(); }
  /// Nearest rotation in Frobenius norm (orthogonal polar factor).
  static Rotation project(const Mat3& m);

  const Mat3& matrix() const { return m_; }
  Rotation inverse() const;
  Rotation operator*(const Rotation& other) const;
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

 private:
  struct Unchecked {};
  Rotation(const Mat3& m, Unchecked) : m_(m) {}
  Mat3 m_;
};

/// Unit quaternion, scalar first.
class UnitQuaternion {
 public:
  UnitQuaternion() : q_(1.0, 0.0, 0.0, 0.0) {}
  explicit UnitQuaternion(const Vec4& q, double tol = kRotationTolerance);

  static UnitQuaternion from_axis_angle(const Vec3& axis, double angle);
  /// Shepperd's method; returns the representative with nonnegative scalar.
  static UnitQuaternion from_rotation(const Rotation& r);

  const Vec4& coeffs() const { return q_; }
  double w() const { return q_(0); }
  Vec3 vec() const { return q_.tail<3>(); }
  UnitQuaternion operator-() const;
  /// Representative whose inner product with `reference` is nonnegative.
  UnitQuaternion aligned_with(const UnitQuaternion& reference) const;

 private:
  Vec4 q_;
};

struct Pose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();
};

/// Pinhole intrinsics: upper triangular, positive focal entries, k(2,2) = 1.
class CameraIntrinsics {
 public:
  CameraIntrinsics() : k_(Mat3::Identity()) {}
  explicit CameraIntrinsics(const Mat3& k);
  static CameraIntrinsics from_focal(double fx, double fy, double cx, double cy);

  const Mat3& matrix() const { return k_; }

 private:
  Mat3 k_;
};

/// Hamilton-product matrices with a o b = omega1(a) b = omega2(b) a.
/// Returns {omega1(a), omega2(a)}.
std::pair<Mat4, Mat4> quat_product_matrices(const Vec4& a);
Mat4 omega1(const Vec4& a);
Mat4 omega2(const Vec4& a);
/// Embeds a 3-vector as the pure quaternion (0, v).
Vec4 pure_quaternion(const Vec3& v);

Mat3 skew(const Vec3& w);
Rotation rotation_from_axis_angle(const Vec3& axis, double angle);
Rotation quat_to_rotation(const UnitQuaternion& q);
/// [R32 - R23, R13 - R31, R21 - R12], equal to 2 w sin(theta) for R_w(theta).
Vec3 skew_part(const Mat3& r);
/// Axis-angle of R as w * theta (theta in [0, pi]).
Vec3 rotation_log(const Rotation& r);
/// Geodesic angle between two rotations, radians.
double rotation_angle_between(const Rotation& a, const Rotation& b);

/// Pixel coordinates of model point b under pose; throws ChiralityError when
/// the depth is not positive.
Vec2 project_keypoint(const Pose& pose, const CameraIntrinsics& k,
                      const Vec3& b);

/// Column-major vectorization.
VecX vec(const MatX& m);
MatX kron(const MatX& a, const MatX& b);

}  // namespace slue
