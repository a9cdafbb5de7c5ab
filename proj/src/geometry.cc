#include "slue/geometry.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "slue/errors.h"

namespace slue {

Rotation::Rotation(const Mat3& m, double tol) : m_(m) {
  const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!(ortho <= tol)) {
    throw InputError("rotation matrix is not orthonormal (max deviation " +
                     std::to_string(ortho) + ")");
  }
  if (!(std::abs(m.determinant() - 1.0) <= tol)) {
    throw InputError("rotation matrix has determinant " +
                     std::to_string(m.determinant()));
  }
}

Rotation Rotation::project(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return Rotation(u * v.transpose(), Unchecked{});
}

Rotation Rotation::inverse() const {
  return Rotation(Mat3(m_.transpose()), Unchecked{});
}

Rotation Rotation::operator*(const Rotation& other) const {
  return Rotation(Mat3(m_ * other.m_), Unchecked{});
}

UnitQuaternion::UnitQuaternion(const Vec4& q, double tol) : q_(q) {
  if (!(std::abs(q.norm() - 1.0) <= tol)) {
    throw InputError("quaternion is not unit norm (norm " +
                     std::to_string(q.norm()) + ")");
  }
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double angle) {
  if (!(std::abs(axis.norm() - 1.0) <= kRotationTolerance)) {
    throw InputError("rotation axis must be a unit vector");
  }
  Vec4 q;
  q << std::cos(angle / 2.0), axis * std::sin(angle / 2.0);
  return UnitQuaternion(q.normalized());
}

UnitQuaternion UnitQuaternion::from_rotation(const Rotation& rot) {
  const Mat3& r = rot.matrix();
  const double tr = r.trace();
  Vec4 q;
  // Shepperd: pivot on the largest of (trace, diagonal entries).
  if (tr >= r(0, 0) && tr >= r(1, 1) && tr >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    q << 0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s,
        (r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
    q << (r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s,
        (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
    q << (r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s,
        (r(1, 2) + r(2, 1)) / s;
  } else {
    const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
    q << (r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s,
        (r(1, 2) + r(2, 1)) / s, 0.25 * s;
  }
  if (q(0) < 0.0) q = -q;
  return UnitQuaternion(q.normalized());
}

UnitQuaternion UnitQuaternion::operator-() const {
  return UnitQuaternion(Vec4(-q_));
}

UnitQuaternion UnitQuaternion::aligned_with(const UnitQuaternion& reference) const {
  return q_.dot(reference.q_) < 0.0 ? -*this : *this;
}

CameraIntrinsics::CameraIntrinsics(const Mat3& k) : k_(k) {
  if (!(k(0, 0) > 0.0 && k(1, 1) > 0.0)) {
    throw InputError("camera intrinsics need positive focal lengths");
  }
  if (k(1, 0) != 0.0 || k(2, 0) != 0.0 || k(2, 1) != 0.0 || k(2, 2) != 1.0) {
    throw InputError("camera intrinsics must be upper triangular with k22 = 1");
  }
}

CameraIntrinsics CameraIntrinsics::from_focal(double fx, double fy, double cx,
                                              double cy) {
  Mat3 k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return CameraIntrinsics(k);
}

Mat4 omega1(const Vec4& a) {
  Mat4 m;
  m << a(0), -a(1), -a(2), -a(3),
       a(1),  a(0), -a(3),  a(2),
       a(2),  a(3),  a(0), -a(1),
       a(3), -a(2),  a(1),  a(0);
  return m;
}

Mat4 omega2(const Vec4& a) {
  Mat4 m;
  m << a(0), -a(1), -a(2), -a(3),
       a(1),  a(0),  a(3), -a(2),
       a(2), -a(3),  a(0),  a(1),
       a(3),  a(2), -a(1),  a(0);
  return m;
}

std::pair<Mat4, Mat4> quat_product_matrices(const Vec4& a) {
  return {omega1(a), omega2(a)};
}

Vec4 pure_quaternion(const Vec3& v) {
  Vec4 q;
  q << 0.0, v;
  return q;
}

Mat3 skew(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w(2), w(1),
       w(2), 0.0, -w(0),
       -w(1), w(0), 0.0;
  return m;
}

Rotation rotation_from_axis_angle(const Vec3& axis, double angle) {
  if (!(std::abs(axis.norm() - 1.0) <= kRotationTolerance)) {
    throw InputError("rotation axis must be a unit vector");
  }
  const Mat3 w = skew(axis);
  const Mat3 r =
      Mat3::Identity() + w * std::sin(angle) + w * w * (1.0 - std::cos(angle));
  return Rotation(r);
}

Rotation quat_to_rotation(const UnitQuaternion& quat) {
  const double w = quat.coeffs()(0), x = quat.coeffs()(1),
               y = quat.coeffs()(2), z = quat.coeffs()(3);
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
       2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
       2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return Rotation(r);
}

Vec3 skew_part(const Mat3& r) {
  return Vec3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
}

Vec3 rotation_log(const Rotation& rot) {
  const UnitQuaternion q = UnitQuaternion::from_rotation(rot);
  const double s = q.vec().norm();
  if (s < 1e-15) return Vec3::Zero();
  const double angle = 2.0 * std::atan2(s, q.w());
  return q.vec() / s * angle;
}

double rotation_angle_between(const Rotation& a, const Rotation& b) {
  return rotation_log(a.inverse() * b).norm();
}

Vec2 project_keypoint(const Pose& pose, const CameraIntrinsics& k,
                      const Vec3& b) {
  const Vec3 p = pose.rotation * b + pose.translation;
  if (!(p(2) > 0.0)) {
    throw ChiralityError("keypoint has nonpositive depth " + std::to_string(p(2)));
  }
  const Vec3 h = k.matrix() * p / p(2);
  return h.head<2>();
}

VecX vec(const MatX& m) {
  return Eigen::Map<const VecX>(m.data(), m.size());
}

MatX kron(const MatX& a, const MatX& b) {
  MatX out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace slue
