#include <cmath>

#include <gtest/gtest.h>

#include "slue/errors.h"
#include "slue/geometry.h"
#include "test_util.h"

using namespace slue;

namespace {

Vec4 hamilton(const Vec4& a, const Vec4& b) {
  const double a0 = a(0), b0 = b(0);
  const Vec3 av = a.tail<3>(), bv = b.tail<3>();
  Vec4 r;
  r(0) = a0 * b0 - av.dot(bv);
  r.tail<3>() = a0 * bv + b0 * av + av.cross(bv);
  return r;
}

}  // namespace

TEST(Geometry, IdentityQuaternionProductMatrices) {
  const auto [o1, o2] = quat_product_matrices(Vec4(1, 0, 0, 0));
  EXPECT_TRUE(o1.isApprox(Mat4::Identity()));
  EXPECT_TRUE(o2.isApprox(Mat4::Identity()));
}

TEST(Geometry, PureQuaternionProductIsSkew) {
  const Mat4 o = omega1(pure_quaternion(Vec3(0.3, -1.2, 2.0)));
  EXPECT_LT((o + o.transpose()).norm(), 1e-15);
}

TEST(Geometry, ProductMatricesMatchHamiltonProduct) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const Vec4 a(n(rng), n(rng), n(rng), n(rng));
    const Vec4 b(n(rng), n(rng), n(rng), n(rng));
    EXPECT_LT((omega1(a) * b - hamilton(a, b)).norm(), 1e-12);
    EXPECT_LT((omega2(b) * a - hamilton(a, b)).norm(), 1e-12);
  }
}

TEST(Geometry, AxisAngleZeroIsIdentity) {
  std::mt19937_64 rng(2);
  EXPECT_TRUE(rotation_from_axis_angle(test::random_unit(rng), 0.0).matrix().isApprox(Mat3::Identity()));
}

TEST(Geometry, QuarterTurnAboutZ) {
  const Mat3 r = rotation_from_axis_angle(Vec3::UnitZ(), M_PI / 2).matrix();
  EXPECT_LT((r * Vec3::UnitX() - Vec3::UnitY()).norm(), 1e-15);
  EXPECT_LT((r * Vec3::UnitY() + Vec3::UnitX()).norm(), 1e-15);
  EXPECT_LT((r * Vec3::UnitZ() - Vec3::UnitZ()).norm(), 1e-15);
}

TEST(Geometry, SkewPartRecoversAxisSine) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, M_PI / 2);
  for (int k = 0; k < 100; ++k) {
    const Vec3 w = test::random_unit(rng);
    const double th = u(rng);
    const Vec3 s = skew_part(rotation_from_axis_angle(w, th).matrix());
    EXPECT_LT((s - 2.0 * std::sin(th) * w).norm(), 1e-12);
  }
}

TEST(Geometry, QuaternionToRotation) {
  EXPECT_TRUE(quat_to_rotation(UnitQuaternion()).matrix().isApprox(Mat3::Identity()));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, M_PI);
  for (int k = 0; k < 100; ++k) {
    const Vec3 w = test::random_unit(rng);
    const double th = u(rng);
    const Mat3 a = quat_to_rotation(UnitQuaternion::from_axis_angle(w, th)).matrix();
    const Mat3 b = rotation_from_axis_angle(w, th).matrix();
    EXPECT_LT((a - b).norm(), 1e-12);
    const UnitQuaternion q = test::random_quat(rng);
    EXPECT_LT((quat_to_rotation(q).matrix() - quat_to_rotation(-q).matrix()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Geometry, RotationQuaternionRoundTrip) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    const UnitQuaternion q = test::random_quat(rng);
    const UnitQuaternion p = UnitQuaternion::from_rotation(quat_to_rotation(q));
    EXPECT_GE(p.w(), 0.0);
    EXPECT_LT(std::min((p.coeffs() - q.coeffs()).norm(), (p.coeffs() + q.coeffs()).norm()), 1e-12);
  }
}

TEST(Geometry, LogRoundTrip) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.01, M_PI - 0.01);
  for (int k = 0; k < 100; ++k) {
    const Vec3 w = test::random_unit(rng);
    const double th = u(rng);
    EXPECT_LT((rotation_log(rotation_from_axis_angle(w, th)) - th * w).norm(), 1e-9);
  }
}

TEST(Geometry, ProjectKeypoint) {
  const CameraIntrinsics k;
  Pose p;
  p.translation = Vec3(0, 0, 1);
  EXPECT_LT(project_keypoint(p, k, Vec3::Zero()).norm(), 1e-15);
  p.translation = Vec3(1, 1, 2);
  EXPECT_LT((project_keypoint(p, k, Vec3::Zero()) - Vec2(0.5, 0.5)).norm(), 1e-15);
  p.translation = Vec3(1, 1, 0);
  EXPECT_THROW(project_keypoint(p, k, Vec3::Zero()), ChiralityError);
}

TEST(Geometry, RotationValidation) {
  EXPECT_THROW(Rotation(Vec3(2, 1, 1).asDiagonal()), InputError);
  EXPECT_THROW(Rotation(Vec3(1, 1, -1).asDiagonal()), InputError);
  EXPECT_THROW(UnitQuaternion(Vec4(1, 1, 0, 0)), InputError);
  Mat3 k = Mat3::Identity();
  k(2, 0) = 0.1;
  EXPECT_THROW(CameraIntrinsics{k}, InputError);
  EXPECT_THROW(CameraIntrinsics::from_focal(-1.0, 1.0, 0.0, 0.0), InputError);
}

TEST(GeometryProperty, QuaternionRotationsAreOrthonormal) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 1000; ++k) {
    const Mat3 r = quat_to_rotation(test::random_quat(rng)).matrix();
    EXPECT_LT((r.transpose() * r - Mat3::Identity()).norm(), 1e-10);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-10);
  }
}

TEST(GeometryProperty, BilinearFormThroughProductMatrices) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const UnitQuaternion q = test::random_quat(rng);
    const Vec3 x(n(rng), n(rng), n(rng));
    const Vec3 y(n(rng), n(rng), n(rng));
    const double lhs = x.dot(quat_to_rotation(q).matrix() * y);
    const double rhs = -q.coeffs().dot(omega1(pure_quaternion(x)) * omega2(pure_quaternion(y)) * q.coeffs());
    EXPECT_NEAR(lhs, rhs, 1e-10);
  }
}

TEST(GeometryProperty, KroneckerVectorization) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    MatX m(2, 3);
    for (int i = 0; i < 6; ++i) m(i) = n(rng);
    const Mat3 r = quat_to_rotation(test::random_quat(rng)).matrix();
    const Vec3 b(n(rng), n(rng), n(rng));
    const VecX lhs = vec(m * r * b);
    const VecX rhs = kron(b.transpose(), m) * vec(r);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Geometry, VecIsColumnMajor) {
  Mat3 m;
  m << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  const VecX v = vec(m);
  EXPECT_EQ(v(1), 4.0);
  EXPECT_EQ(v(3), 2.0);
}
