#include <gtest/gtest.h>

#include "slue/errors.h"
#include "slue/harness.h"
#include "test_util.h"

using namespace slue;

namespace {

double spread(const std::vector<Pose>& poses) {
  double d = 0.0;
  for (std::size_t i = 0; i < poses.size(); ++i)
    for (std::size_t j = i + 1; j < poses.size(); ++j)
      d = std::max(d, (poses[i].translation - poses[j].translation).norm());
  return d;
}

}  // namespace

TEST(Harness, SceneIsDeterministic) {
  SceneConfig c;
  c.seed = 111;
  const Scene a = generate_scene(c);
  const Scene b = generate_scene(c);
  EXPECT_EQ(a.ground_truth.rotation.matrix(), b.ground_truth.rotation.matrix());
  EXPECT_EQ(a.ground_truth.translation, b.ground_truth.translation);
  for (std::size_t i = 0; i < a.obs.size(); ++i) {
    EXPECT_EQ(a.obs.detections[i], b.obs.detections[i]);
    EXPECT_EQ(a.obs.radii[i], b.obs.radii[i]);
    EXPECT_EQ(a.obs.keypoints_3d[i], b.obs.keypoints_3d[i]);
  }
  c.seed = 112;
  EXPECT_NE(generate_scene(c).ground_truth.translation, a.ground_truth.translation);
}

TEST(Harness, NoiselessDetections) {
  const Scene s = test::scene(113, 0.0);
  for (std::size_t i = 0; i < s.obs.size(); ++i) EXPECT_EQ(s.obs.detections[i], s.projections[i]);
}

TEST(Harness, PositiveDepths) {
  for (int k = 0; k < 200; ++k) {
    const Scene s = test::scene(derive_seed(114, 0, k));
    for (const Vec3& b : s.obs.keypoints_3d) {
      EXPECT_GT((s.ground_truth.rotation * b + s.ground_truth.translation).z(), 0.0);
    }
  }
}

TEST(Harness, GaussianNoiseStaysInRadius) {
  SceneConfig c;
  c.noise_model = NoiseModel::kTruncatedGaussian;
  for (int k = 0; k < 100; ++k) {
    c.seed = derive_seed(115, 0, k);
    const Scene s = generate_scene(c);
    for (std::size_t i = 0; i < s.obs.size(); ++i) {
      EXPECT_LE((s.obs.detections[i] - s.projections[i]).cwiseAbs().maxCoeff(), s.obs.radii[i] + 1e-12);
    }
  }
}

TEST(Harness, BadConfig) {
  SceneConfig c;
  c.n_keypoints = 0;
  EXPECT_THROW(generate_scene(c), InputError);
  c = SceneConfig{};
  c.radius_min = 0.0;
  EXPECT_THROW(generate_scene(c), InputError);
  EXPECT_THROW(noise_model_from_string("laplace"), InputError);
}

TEST(Harness, SamplerReturnsMembers) {
  const Scene s = test::scene(116, 0.0);
  const auto set = build_rotmat_set(s.obs);
  const SampleResult r = sample_feasible_poses(set, s.ground_truth, 300, 117);
  ASSERT_EQ(r.poses.size(), 300u);
  EXPECT_GT(r.acceptance_rate, 0.0);
  for (const Pose& p : r.poses) EXPECT_TRUE(check_membership(set, rotmat_vector(p)).member);
  EXPECT_TRUE(sample_feasible_poses(set, s.ground_truth, 0, 117).poses.empty());
}

TEST(Harness, SamplerSpreadShrinksWithRadii) {
  const Scene s = test::scene(118, 0.0);
  double prev = INFINITY;
  for (double r : {4.0, 2.0, 1.0}) {
    ObservationSet o = s.obs;
    for (double& v : o.radii) v = r;
    const SampleResult smp = sample_feasible_poses(build_rotmat_set(o), s.ground_truth, 300, 119);
    ASSERT_EQ(smp.poses.size(), 300u);
    const double d = spread(smp.poses);
    EXPECT_LT(d, prev);
    prev = d;
  }
}

TEST(Harness, SeedDerivation) {
  EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 2, 4));
  EXPECT_NE(derive_seed(1, 1, 3), derive_seed(1, 2, 3));
}

TEST(Harness, SmallCoverageRun) {
  CoverageConfig c;
  c.n_calibration = 200;
  c.n_eval = 12;
  c.alpha = 0.1;
  c.scene.seed = 120;
  c.scene.correlated = true;
  const CoverageReport r = evaluate_coverage(c);
  EXPECT_EQ(r.n_frames, 12);
  EXPECT_EQ(r.n_solved + r.n_failures, 12);
  EXPECT_EQ(r.n_exceptions, 0);
  for (double f : {r.keypoint_coverage, r.set_coverage, r.ellipsoid_coverage}) {
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
  if (r.n_failures == 0) {
    EXPECT_GE(r.ellipsoid_coverage, r.set_coverage);
  }
}

TEST(Harness, ToyDiskIsItsOwnEllipse) {
  const Toy2dReport r = toy2d(toy_disk(), 1, 101);
  ASSERT_EQ(r.orders.size(), 1u);
  EXPECT_LT((r.orders[0].bound.h - MatX::Identity(2, 2)).norm(), 1e-6);
  EXPECT_EQ(r.orders[0].grid_outside, 0);
}

TEST(Harness, ToyCrescentContainsGrid) {
  const Toy2dReport r = toy2d(toy_crescent(), 3, 201);
  ASSERT_EQ(r.orders.size(), 3u);
  EXPECT_GT(r.grid_feasible, 0);
  for (const auto& o : r.orders) {
    EXPECT_EQ(o.status, SolveStatus::kOk);
    EXPECT_EQ(o.grid_outside, 0);
  }
  EXPECT_TRUE(r.monotone);
}

TEST(Harness, ToyAnnulusTightens) {
  const Toy2dReport r = toy2d(toy_quarter_annulus(), 3, 201);
  ASSERT_EQ(r.orders.size(), 3u);
  EXPECT_TRUE(r.monotone);
  EXPECT_GT(r.orders[1].logdet, r.orders[0].logdet + 0.1);
  EXPECT_LT(r.orders[2].area, r.orders[0].area);
  for (const auto& o : r.orders) EXPECT_EQ(o.grid_outside, 0);
}

TEST(Harness, ToyUnboundedThrows) {
  Toy2dSet t;
  // v^2 <= 1 leaves u free
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  a(0, 0) = -1.0;
  a(2, 2) = 1.0;
  t.inequalities.push_back(a);
  EXPECT_THROW(toy2d(t, 2), InputError);
}
