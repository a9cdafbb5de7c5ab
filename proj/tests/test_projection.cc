#include <cmath>

#include <gtest/gtest.h>

#include "slue/errors.h"
#include "slue/projection.h"
#include "test_util.h"

using namespace slue;

namespace {

EllipsoidBound joint_bound(const MatX& h, const VecX& c, EllipsoidFrame f) {
  EllipsoidBound b;
  b.h = h;
  b.center = c;
  b.frame = f;
  return b;
}

VecX boundary_point(const EllipsoidBound& b, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  VecX u(b.h.rows());
  for (int i = 0; i < u.size(); ++i) u(i) = n(rng);
  u.normalize();
  const Eigen::LLT<MatX> llt(b.h);
  // z = c + L^-T u with H = L L^T
  return b.center + llt.matrixU().solve(u);
}

Eigen::Matrix<double, 3, 9> explicit_p_theta() {
  Eigen::Matrix<double, 3, 9> p = Eigen::Matrix<double, 3, 9>::Zero();
  // vec index of R(i, j) is 3 j + i
  p(0, 5) = 1.0;  // R(2,1)
  p(0, 7) = -1.0; // R(1,2)
  p(1, 6) = 1.0;  // R(0,2)
  p(1, 2) = -1.0; // R(2,0)
  p(2, 1) = 1.0;  // R(1,0)
  p(2, 3) = -1.0; // R(0,1)
  return p;
}

}  // namespace

TEST(Projection, TranslationOfBall) {
  const auto b = joint_bound(MatX::Identity(12, 12), VecX::Zero(12), EllipsoidFrame::kRotmatTranslation);
  EXPECT_LT((project_translation(b).h_t - Mat3::Identity()).norm(), 1e-12);
}

TEST(Projection, TranslationOfDecoupledBlocks) {
  std::mt19937_64 rng(91);
  MatX h = MatX::Zero(12, 12);
  h.topLeftCorner(9, 9) = test::random_spd(rng, 9);
  const MatX c3 = test::random_spd(rng, 3);
  h.bottomRightCorner(3, 3) = c3;
  const auto b = joint_bound(h, VecX::Zero(12), EllipsoidFrame::kRotmatTranslation);
  EXPECT_LT((project_translation(b).h_t - c3).norm(), 1e-9 * c3.norm());
}

TEST(Projection, AxisAngleOfBallAtIdentity) {
  VecX c = VecX::Zero(12);
  c.head(9) = vec(Mat3::Identity());
  const auto b = joint_bound(MatX::Identity(12, 12), c, EllipsoidFrame::kRotmatTranslation);
  const AngularBound a = project_axis_angle_rotmat(b, Rotation());
  const auto p = explicit_p_theta();
  const Mat3 expected = 4.0 * (p * p.transpose()).inverse();
  EXPECT_LT((a.h_theta - expected).norm(), 1e-12);
  EXPECT_EQ((skew_part_map() - p).norm(), 0.0);

  std::mt19937_64 rng(92);
  std::uniform_real_distribution<double> u(0.0, M_PI / 2);
  int checked = 0;
  for (int k = 0; k < 2000; ++k) {
    const Rotation r = rotation_from_axis_angle(test::random_unit(rng), u(rng));
    VecX z = c;
    z.head(9) = vec(r.matrix());
    if (!b.contains(z, 0.0)) continue;
    ++checked;
    EXPECT_LE(a.value(r), 1.0 + 1e-9);
  }
  EXPECT_GT(checked, 100);
}

TEST(Projection, AxisAngleSmallBall) {
  std::mt19937_64 rng(93);
  const Rotation rbar = quat_to_rotation(test::random_quat(rng));
  const double rho = 0.05;
  VecX c = VecX::Zero(12);
  c.head(9) = vec(rbar.matrix());
  MatX h = MatX::Identity(12, 12) / (rho * rho);
  const auto b = joint_bound(h, c, EllipsoidFrame::kRotmatTranslation);
  const AngularBound a = project_axis_angle_rotmat(b, rbar);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 w = test::random_unit(rng);
    const double th = std::asin(std::min(1.0, rho / 2.0 * u(rng)));
    const Rotation r = rotation_from_axis_angle(w, th) * rbar;
    VecX z = c;
    z.head(9) = vec(r.matrix());
    if (!b.contains(z, 0.0)) continue;
    EXPECT_LE(a.value(r), 1.0 + 1e-9);
  }
}

TEST(Projection, QuaternionExplicit) {
  std::mt19937_64 rng(94);
  const UnitQuaternion qbar = test::random_quat(rng).aligned_with(UnitQuaternion());
  MatX h = test::random_spd(rng, 7);
  VecX c = VecX::Zero(7);
  c.head(4) = qbar.coeffs();
  const auto b = joint_bound(h, c, EllipsoidFrame::kQuatTranslation);
  const AngularBound a = project_axis_angle_quat(b, qbar);
  EXPECT_EQ(a.representation, AngularRepresentation::kSinHalfTheta);
  const Mat4 o = omega2(qbar.coeffs());
  const MatX minv = o.transpose() * h.inverse().topLeftCorner(4, 4) * o;
  const Mat3 expected = minv.bottomRightCorner(3, 3).inverse();
  EXPECT_LT((a.h_theta - expected).norm(), 1e-9 * expected.norm());
  EXPECT_LT(a.value(quat_to_rotation(qbar)), 1e-20);
  EXPECT_LT(a.coordinates(quat_to_rotation(qbar)).norm(), 1e-12);
}

TEST(Projection, QuaternionSamples) {
  std::mt19937_64 rng(95);
  const UnitQuaternion qbar = test::random_quat(rng).aligned_with(UnitQuaternion());
  VecX c = VecX::Zero(7);
  c.head(4) = qbar.coeffs();
  const MatX h = test::random_spd(rng, 7, 50.0) * 4.0;
  const auto b = joint_bound(h, c, EllipsoidFrame::kQuatTranslation);
  const AngularBound a = project_axis_angle_quat(b, qbar);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  int inside = 0;
  for (int k = 0; k < 20000; ++k) {
    const Rotation r = rotation_from_axis_angle(test::random_unit(rng), u(rng)) * quat_to_rotation(qbar);
    VecX z = c;
    z.head(4) = UnitQuaternion::from_rotation(r).aligned_with(qbar).coeffs();
    z.tail(3) = 0.05 * Vec3(n(rng), n(rng), n(rng));
    if (!b.contains(z, 0.0)) continue;
    ++inside;
    EXPECT_LE(a.value(r), 1.0 + 1e-9);
  }
  EXPECT_GT(inside, 100);
}

TEST(Projection, Volumes) {
  TranslationBound t;
  t.h_t = Mat3::Identity();
  AngularBound a;
  a.h_theta = Mat3::Identity() * 0.25;
  BoundVolumes v = bound_volumes(t, a);
  EXPECT_NEAR(v.translation, 4.0 * M_PI / 3.0, 1e-12);
  EXPECT_NEAR(v.angular, 4.0 * M_PI / 3.0 * 90.0 * 90.0 * 90.0, 1e-6);
  t.h_t = Mat3::Identity() * 4.0;
  a.h_theta = Mat3::Identity() * 4.0;
  v = bound_volumes(t, a);
  EXPECT_NEAR(v.translation, 4.0 * M_PI / 3.0 / 8.0, 1e-12);
  EXPECT_NEAR(v.angles_deg(0), 30.0, 1e-9);
  a.representation = AngularRepresentation::kSinHalfTheta;
  EXPECT_NEAR(bound_volumes(t, a).angles_deg(0), 60.0, 1e-9);
  t.h_t(0, 0) = -1.0;
  EXPECT_THROW(bound_volumes(t, a), InputError);
}

TEST(Projection, Outline) {
  const Mat3 h = Vec3(1.0, 4.0, 9.0).asDiagonal();
  const auto pts = ellipse_outline(h, Vec3(1, 2, 3), 0, 2, 32);
  ASSERT_EQ(pts.size(), 32u);
  for (const auto& p : pts) {
    EXPECT_NEAR(std::pow(p(0) - 1.0, 2) + 9.0 * std::pow(p(1) - 3.0, 2), 1.0, 1e-12);
  }
}

TEST(Projection, DegenerateJoint) {
  MatX h = MatX::Identity(12, 12);
  h(11, 11) = 0.0;
  const auto b = joint_bound(h, VecX::Zero(12), EllipsoidFrame::kRotmatTranslation);
  const TranslationBound t = project_translation(b);
  EXPECT_TRUE(t.degenerate);
  EXPECT_FALSE(t.degenerate_axes.empty());
}

TEST(ProjectionProperty, BoundarySamplesSatisfyMarginals) {
  std::mt19937_64 rng(96);
  for (int trial = 0; trial < 5; ++trial) {
    const auto b = joint_bound(test::random_spd(rng, 12), VecX::Zero(12), EllipsoidFrame::kRotmatTranslation);
    const TranslationBound t = project_translation(b);
    for (int k = 0; k < 10000; ++k) {
      const VecX z = boundary_point(b, rng);
      EXPECT_LE(t.value(z.tail<3>()), 1.0 + 1e-8);
    }
  }
}

TEST(ProjectionProperty, TranslationSupportIsTight) {
  std::mt19937_64 rng(97);
  const MatX h = test::random_spd(rng, 12);
  const auto b = joint_bound(h, VecX::Zero(12), EllipsoidFrame::kRotmatTranslation);
  const TranslationBound t = project_translation(b);
  const MatX hinv = h.inverse();
  for (int k = 0; k < 100; ++k) {
    const Vec3 d = test::random_unit(rng);
    VecX e = VecX::Zero(12);
    e.tail<3>() = d;
    const double joint = std::sqrt(e.dot(hinv * e));
    const double marg = std::sqrt(d.dot(t.h_t.inverse() * d));
    EXPECT_NEAR(joint, marg, 1e-8);
  }
}

TEST(ProjectionProperty, BlockEmbeddingNeverShrinksVolume) {
  std::mt19937_64 rng(98);
  for (int k = 0; k < 20; ++k) {
    const MatX h = test::random_spd(rng, 12);
    MatX blocks = MatX::Zero(12, 12);
    blocks.topLeftCorner(9, 9) = marginal_shape(h, 0, 9);
    blocks.bottomRightCorner(3, 3) = marginal_shape(h, 9, 3);
    const double lh = std::log(h.determinant());
    const double lb = std::log(blocks.determinant());
    EXPECT_LE(lb, lh + 1e-9);
  }
}
