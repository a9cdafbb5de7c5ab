#include <cmath>

#include <gtest/gtest.h>

#include "slue/errors.h"
#include "slue/sos_engine.h"
#include "test_util.h"

using namespace slue;

namespace {

QuadraticConstraintSet unit_ball(int d) {
  QuadraticConstraintSet set;
  set.dim = d + 1;
  VecX diag = VecX::Ones(d + 1);
  diag(0) = -1.0;
  set.add_inequality(diag.asDiagonal().toDenseMatrix(), ConstraintLabel::kGeneric);
  return set;
}

}  // namespace

TEST(SosEngine, UnitBallOrderOneIsExact) {
  for (int d : {2, 3, 5}) {
    const QuadraticConstraintSet set = unit_ball(d);
    const EngineResult r = solve_min_volume_ellipsoid(set, VecX::Zero(d), 0);
    ASSERT_EQ(r.status, SolveStatus::kOk) << r.message;
    EXPECT_LT((r.bound.h - MatX::Identity(d, d)).norm(), 1e-6);
    EXPECT_LT(r.identity_residual, 1e-5);
  }
}

TEST(SosEngine, ShiftedEllipse) {
  // (u - 1)^2 / 4 + v^2 <= 1, centered at its middle
  QuadraticConstraintSet set;
  set.dim = 3;
  MatX a = MatX::Zero(3, 3);
  a(0, 0) = 0.25 - 1.0;
  a(0, 1) = a(1, 0) = -0.25;
  a(1, 1) = 0.25;
  a(2, 2) = 1.0;
  set.add_inequality(a, ConstraintLabel::kGeneric);
  const EngineResult r = solve_min_volume_ellipsoid(set, Eigen::Vector2d(1.0, 0.0), 0);
  ASSERT_EQ(r.status, SolveStatus::kOk);
  EXPECT_LT((r.bound.h - MatX(Eigen::Vector2d(0.25, 1.0).asDiagonal())).norm(), 1e-6);
}

TEST(SosEngine, CertificateIdentityHolds) {
  const Toy2dSet toy = toy_quarter_annulus();
  const auto set = toy_constraint_set(toy);
  for (int kappa : {0, 1, 2}) {
    const EngineResult r = solve_min_volume_ellipsoid(set, toy.center, kappa);
    ASSERT_EQ(r.status, SolveStatus::kOk);
    EXPECT_LT(r.identity_residual, 1e-5);
    EXPECT_NEAR(sos_identity_residual(set, r.bound, r.certificate), r.identity_residual, 1e-9);
    for (const MatX& l : r.certificate.lambda_mats) {
      EXPECT_GT(Eigen::SelfAdjointEigenSolver<MatX>(l).eigenvalues()(0), -1e-7);
    }
  }
}

TEST(SosEngine, ChiralityOnlyIsUnbounded) {
  const Scene s = test::scene(61);
  QuadraticConstraintSet set;
  set.dim = kRotmatDim;
  set.form = SetForm::kRotmat;
  for (const auto& a : build_chirality(s.obs)) set.add_inequality(a, ConstraintLabel::kChirality);
  for (const auto& q : build_so3_equalities()) set.add_equality(q, ConstraintLabel::kSo3);
  const EngineResult r = solve_min_volume_ellipsoid(set, pose_center(s.ground_truth, SetForm::kRotmat), 0);
  EXPECT_EQ(r.status, SolveStatus::kUnbounded);
  ASSERT_FALSE(r.degenerate_axes.empty());
  for (const VecX& axis : r.degenerate_axes) {
    EXPECT_LT(axis.head(9).norm(), 1e-3);
  }
}

TEST(SosEngine, RejectsBadArguments) {
  const QuadraticConstraintSet set = unit_ball(2);
  EXPECT_THROW(solve_min_volume_ellipsoid(set, VecX::Zero(3), 0), InputError);
  EXPECT_THROW(solve_min_volume_ellipsoid(set, VecX::Zero(2), -1), InputError);
}

TEST(SosEngine, AffineHelpers) {
  VecX l(3);
  l << 0.5, -1.0, 2.0;
  const MatX a = linear_to_quadratic(l);
  EXPECT_TRUE(is_affine_constraint(a, 0));
  EXPECT_FALSE(is_affine_constraint(unit_ball(2).inequalities[0], 0));
  VecX m(3);
  m << -0.2, 0.3, 1.0;
  const MatX b = linear_to_quadratic(m);
  const MatX p = affine_product(a, b, 0);
  std::mt19937_64 rng(62);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    VecX x(3);
    x << 1.0, n(rng), n(rng);
    EXPECT_NEAR(x.dot(p * x), -(l.dot(x)) * (m.dot(x)), 1e-12);
  }
}

TEST(SosEngine, ReducedBasisModuloUnitSphere) {
  // On x1^2 = u^2 + v^2 the monomial v^2 is redundant at degree 2.
  MatX q = MatX::Zero(3, 3);
  q(0, 0) = -1.0;
  q(1, 1) = q(2, 2) = 1.0;
  const MonomialBasis b = monomial_basis(3, 2);
  const auto keep = reduced_basis_indices(b, {q});
  EXPECT_EQ(static_cast<int>(keep.size()), b.dim - 1);
}

TEST(SosEngine, LmiAssembly) {
  const Toy2dSet toy = toy_quarter_annulus();
  const auto set = toy_constraint_set(toy);
  const sdp::Problem p = assemble_ellipsoid_lmi(set, toy.center, 1);
  EXPECT_GT(p.num_constraints(), 0);
  EXPECT_GT(p.num_blocks(), static_cast<int>(set.inequalities.size()));
  EXPECT_FALSE(p.to_triplets().empty());
}

TEST(SosEngineProperty, HierarchyIsMonotone) {
  for (const Toy2dSet& toy : {toy_quarter_annulus(), toy_crescent(), toy_disk()}) {
    const auto set = toy_constraint_set(toy);
    double prev = -INFINITY;
    for (int kappa = 0; kappa <= 2; ++kappa) {
      const EngineResult r = solve_min_volume_ellipsoid(set, toy.center, kappa);
      ASSERT_EQ(r.status, SolveStatus::kOk);
      EXPECT_GE(r.bound.logdet(), prev - 1e-5);
      prev = r.bound.logdet();
    }
  }
}

TEST(SosEngineProperty, RandomMembersInsideToyEllipses) {
  std::mt19937_64 rng(63);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const Toy2dSet& toy : {toy_quarter_annulus(), toy_crescent()}) {
    const auto set = toy_constraint_set(toy);
    for (int kappa = 0; kappa <= 2; ++kappa) {
      const EngineResult r = solve_min_volume_ellipsoid(set, toy.center, kappa);
      ASSERT_EQ(r.status, SolveStatus::kOk);
      int members = 0;
      while (members < 1000) {
        VecX x(3);
        x << 1.0, u(rng), u(rng);
        if (!check_membership(set, x).member) continue;
        ++members;
        EXPECT_LE(r.bound.value(x.tail(2)), 1.0 + 1e-6);
      }
    }
  }
}
