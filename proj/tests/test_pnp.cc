#include <gtest/gtest.h>

#include "slue/errors.h"
#include "slue/pnp.h"
#include "test_util.h"

using namespace slue;

namespace {

double rot_err(const Pose& a, const Pose& b) {
  return (a.rotation.matrix() - b.rotation.matrix()).norm();
}

}  // namespace

TEST(Pnp, NoiselessRecovery) {
  for (int k = 0; k < 10; ++k) {
    const Scene s = test::scene(derive_seed(101, 0, k), 0.0);
    const PnpResult r = pnp_estimate(PnpProblem{s.obs, {}});
    EXPECT_LT(rot_err(r.pose, s.ground_truth), 1e-4);
    EXPECT_LT((r.pose.translation - s.ground_truth.translation).norm(), 1e-4);
    EXPECT_LT(r.tightness, 1e-6);
    EXPECT_NE(r.method, PnpMethod::kDlt);
  }
}

TEST(Pnp, CostMatrixMatchesObjective) {
  const Scene s = test::scene(102);
  const PnpProblem p{s.obs, {}};
  const MatX c = pnp_cost_matrix(p);
  EXPECT_EQ(c.rows(), 13);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<MatX>(c).eigenvalues()(0), -1e-9 * c.norm());
  std::mt19937_64 rng(103);
  for (int k = 0; k < 10; ++k) {
    Pose q;
    q.rotation = quat_to_rotation(test::random_quat(rng));
    q.translation = test::random_unit(rng);
    const VecX x = rotmat_vector(q);
    EXPECT_NEAR(x.dot(c * x), pnp_objective(p, q), 1e-9 * std::max(1.0, pnp_objective(p, q)));
  }
}

TEST(Pnp, CommonSigmaScaleKeepsThePose) {
  const Scene s = test::scene(104);
  std::vector<double> sig(s.obs.size());
  for (std::size_t i = 0; i < sig.size(); ++i) sig[i] = 1.0 + 0.5 * static_cast<double>(i);
  std::vector<double> big = sig;
  for (double& v : big) v *= 7.5;
  const PnpResult a = pnp_estimate(PnpProblem{s.obs, sig});
  const PnpResult b = pnp_estimate(PnpProblem{s.obs, big});
  EXPECT_LT(rot_err(a.pose, b.pose), 1e-7);
  EXPECT_LT((a.pose.translation - b.pose.translation).norm(), 1e-7);
}

TEST(Pnp, InputChecks) {
  Scene s = test::scene(105);
  ObservationSet two = s.obs;
  two.keypoints_3d.resize(2);
  two.detections.resize(2);
  two.radii.resize(2);
  EXPECT_THROW(pnp_estimate(PnpProblem{two, {}}), InputError);
  EXPECT_THROW(pnp_estimate(PnpProblem{s.obs, std::vector<double>(8, -1.0)}), InputError);
  EXPECT_THROW(pnp_estimate(PnpProblem{s.obs, std::vector<double>(3, 1.0)}), InputError);
}

TEST(Pnp, DltFallback) {
  const Scene s = test::scene(106, 0.0);
  PnpSettings st;
  st.sdp.max_iterations = 1;
  st.sdp.acceptable = 1e-30;
  const PnpResult r = pnp_estimate(PnpProblem{s.obs, {}}, st);
  EXPECT_EQ(r.method, PnpMethod::kDlt);
  EXPECT_LT(rot_err(r.pose, s.ground_truth), 1e-6);
  EXPECT_LT((r.pose.translation - s.ground_truth.translation).norm(), 1e-6);
}

TEST(PnpProperty, OptimalOnTightNoisyScenes) {
  int tight = 0;
  for (int k = 0; k < 20; ++k) {
    const Scene s = test::scene(derive_seed(107, 0, k));
    const PnpProblem p{s.obs, {}};
    const PnpResult r = pnp_estimate(p);
    for (std::size_t i = 0; i < s.obs.size(); ++i) {
      EXPECT_GT((r.pose.rotation * s.obs.keypoints_3d[i] + r.pose.translation).z(), 0.0);
    }
    if (r.tightness >= 1e-6) continue;
    ++tight;
    EXPECT_LE(pnp_objective(p, r.pose), pnp_objective(p, s.ground_truth) * (1.0 + 1e-9));
  }
  EXPECT_GT(tight, 15);
}
