#include <cmath>

#include <gtest/gtest.h>

#include "slue/errors.h"
#include "slue/projection.h"
#include "slue/slue_solver.h"
#include "test_util.h"

using namespace slue;

namespace {

int outside(const SlueResult& r, const std::vector<Pose>& poses, double slack = 1e-6) {
  int n = 0;
  for (const Pose& p : poses) {
    if (!r.joint.contains(pose_coordinates(p, r.form, r.pose_estimate), slack)) ++n;
  }
  return n;
}

}  // namespace

TEST(SlueSolver, OrderOneContainsSampledPoses) {
  const Scene s = test::scene(71);
  const Pose est = test::order1_pnp(s.obs);
  const SlueResult r = slue_joint(s.obs, est, SetForm::kRotmat, 1);
  ASSERT_TRUE(r.ok()) << r.message;
  EXPECT_EQ(r.joint.h.rows(), 12);
  EXPECT_LT(r.identity_residual, 1e-5);
  const auto smp = sample_feasible_poses(build_rotmat_set(s.obs), s.ground_truth, 1000, 72);
  ASSERT_EQ(smp.poses.size(), 1000u);
  EXPECT_EQ(outside(r, smp.poses), 0);
  EXPECT_TRUE(r.joint.contains(pose_coordinates(s.ground_truth, r.form, est)));
}

TEST(SlueSolver, QuaternionOrderTwo) {
  const Scene s = test::scene(73);
  const Pose est = test::order1_pnp(s.obs);
  const SlueResult r = slue_joint(s.obs, est, SetForm::kQuat, 2);
  ASSERT_TRUE(r.ok()) << r.message;
  EXPECT_EQ(r.joint.h.rows(), 7);
  EXPECT_LT(r.identity_residual, 1e-5);
  const auto smp = sample_feasible_poses(build_rotmat_set(s.obs), s.ground_truth, 500, 74);
  EXPECT_EQ(outside(r, smp.poses), 0);
}

TEST(SlueSolver, ArgumentChecks) {
  const Scene s = test::scene(75);
  EXPECT_THROW(slue_joint(s.obs, s.ground_truth, SetForm::kQuat, 1), InputError);
  EXPECT_THROW(slue_joint(s.obs, s.ground_truth, SetForm::kRotmat, 0), InputError);
  ObservationSet two = s.obs;
  two.norm = NormType::kTwo;
  EXPECT_THROW(slue_joint(two, s.ground_truth, SetForm::kQuat, 2), InputError);
  ObservationSet none = s.obs;
  for (double& r : none.radii) r = INFINITY;
  EXPECT_THROW(slue_joint(none, s.ground_truth, SetForm::kRotmat, 1), InputError);
}

TEST(SlueSolver, DefaultForm) {
  EXPECT_EQ(default_form(1), SetForm::kRotmat);
  EXPECT_EQ(default_form(2), SetForm::kQuat);
  EXPECT_EQ(default_form(3), SetForm::kQuat);
}

TEST(SlueSolver, DropsInfiniteRadius) {
  Scene s = test::scene(76);
  s.obs.radii[3] = INFINITY;
  const SlueResult r = slue_joint(s.obs, s.ground_truth, SetForm::kRotmat, 1);
  EXPECT_TRUE(r.ok());
  ASSERT_EQ(r.dropped_ids.size(), 1u);
  EXPECT_EQ(r.dropped_ids[0], 3);
}

TEST(SlueSolver, SplitZeroesOffTargetBlock) {
  const Scene s = test::scene(77);
  const Pose est = test::order1_pnp(s.obs);
  const SlueResult t = slue_split(s.obs, est, SetForm::kRotmat, 1, SplitTarget::kTranslationOnly);
  ASSERT_TRUE(t.ok()) << t.message;
  EXPECT_EQ(t.joint.h.topLeftCorner(9, 9).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(t.joint.h.topRightCorner(9, 3).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(t.joint.h.bottomLeftCorner(3, 9).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(t.joint.h.bottomRightCorner(3, 3).determinant(), 0.0);

  const SlueResult r = slue_split(s.obs, est, SetForm::kRotmat, 1, SplitTarget::kRotationOnly);
  ASSERT_TRUE(r.ok()) << r.message;
  EXPECT_EQ(r.joint.h.bottomRightCorner(3, 3).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(r.joint.h.topRightCorner(9, 3).cwiseAbs().maxCoeff(), 0.0);
  const auto smp = sample_feasible_poses(build_rotmat_set(s.obs), s.ground_truth, 500, 78);
  EXPECT_EQ(outside(r, smp.poses), 0);
  EXPECT_EQ(outside(t, smp.poses), 0);
}

TEST(SlueSolver, SplitTranslationNotLargerThanJointProjection) {
  const Scene s = test::scene(79);
  const Pose est = test::order1_pnp(s.obs);
  const SlueResult j = slue_joint(s.obs, est, SetForm::kRotmat, 1);
  const SlueResult t = slue_split(s.obs, est, SetForm::kRotmat, 1, SplitTarget::kTranslationOnly);
  ASSERT_TRUE(j.ok() && t.ok());
  const double vj = translation_volume(project_translation(j.joint).h_t);
  const double vt = translation_volume(project_translation(t.joint).h_t);
  EXPECT_LE(vt, vj * (1.0 + 1e-6));
}

TEST(SlueSolver, Deterministic) {
  const Scene s = test::scene(80);
  const SlueResult a = slue_joint(s.obs, s.ground_truth, SetForm::kRotmat, 1);
  const SlueResult b = slue_joint(s.obs, s.ground_truth, SetForm::kRotmat, 1);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_NEAR(a.joint.logdet(), b.joint.logdet(), 1e-6);
}

TEST(SlueSolver, BatchNeverThrows) {
  std::vector<Frame> frames;
  const Scene s = test::scene(81);
  frames.push_back({s.obs, s.ground_truth});
  ObservationSet bad = s.obs;
  bad.detections.pop_back();
  frames.push_back({bad, s.ground_truth});
  const auto out = slue_batch(frames, std::nullopt, 1);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_TRUE(out[0].ok());
  EXPECT_FALSE(out[1].ok());
  EXPECT_FALSE(out[1].message.empty());
}

TEST(SlueSolver, PoseCenterRoundTrip) {
  std::mt19937_64 rng(82);
  for (int k = 0; k < 20; ++k) {
    Pose p;
    p.rotation = quat_to_rotation(test::random_quat(rng));
    p.translation = test::random_unit(rng);
    for (SetForm f : {SetForm::kRotmat, SetForm::kQuat}) {
      const Pose q = pose_from_center(pose_center(p, f), f);
      EXPECT_LT((q.rotation.matrix() - p.rotation.matrix()).norm(), 1e-12);
      EXPECT_LT((q.translation - p.translation).norm(), 1e-15);
    }
  }
}

TEST(SlueSolverProperty, SmallerRadiiNeverGrowTheBound) {
  for (int k = 0; k < 20; ++k) {
    // noiseless, so the ground truth stays feasible at every scale
    const Scene s = test::scene(derive_seed(83, 0, k), 0.0);
    ObservationSet half = s.obs;
    for (double& r : half.radii) r *= 0.5;
    ObservationSet twice = s.obs;
    for (double& r : twice.radii) r *= 2.0;
    const SlueResult a = slue_joint(s.obs, s.ground_truth, SetForm::kRotmat, 1);
    const SlueResult b = slue_joint(half, s.ground_truth, SetForm::kRotmat, 1);
    const SlueResult c = slue_joint(twice, s.ground_truth, SetForm::kRotmat, 1);
    ASSERT_TRUE(a.ok() && b.ok() && c.ok()) << "scene " << k;
    EXPECT_GE(b.joint.logdet(), a.joint.logdet() - 1e-5) << "scene " << k;
    EXPECT_LE(c.joint.logdet(), a.joint.logdet() + 1e-5) << "scene " << k;
  }
}
