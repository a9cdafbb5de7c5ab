#include <sstream>

#include <gtest/gtest.h>

#include "slue/errors.h"
#include "slue/io.h"
#include "test_util.h"

using namespace slue;

TEST(Io, RecordsParse) {
  std::istringstream in(
      "{\"keypoint_id\": 3, \"detected\": [10, 20], \"confidence\": 0.5, \"ground_truth\": [11, 19]}\n"
      "\n"
      "{\"keypoint_id\": 4, \"detected\": [1, 2], \"ground_truth\": [1, 2]}\n");
  const auto r = read_records_jsonl(in);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].keypoint_id, 3);
  EXPECT_DOUBLE_EQ(r[0].confidence, 0.5);
  EXPECT_EQ(r[0].ground_truth, Vec2(11, 19));
  EXPECT_DOUBLE_EQ(r[1].confidence, 1.0);
}

TEST(Io, RecordsReportLine) {
  std::istringstream in("{\"keypoint_id\": 1, \"detected\": [1, 2], \"ground_truth\": [1, 2]}\n{broken\n");
  try {
    read_records_jsonl(in);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Io, BoundsRoundTrip) {
  std::map<int, KeypointBound> b;
  b[2] = {2, 3.5, NormType::kTwo, 0.2, false};
  b[5] = {5, 0.0, NormType::kInfinity, 0.2, true};
  const auto back = bounds_from_json(to_json(b));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_DOUBLE_EQ(back.at(2).radius, 3.5);
  EXPECT_EQ(back.at(2).norm, NormType::kTwo);
  EXPECT_TRUE(back.at(5).infinite);
}

TEST(Io, ObservationsWithRadiiOrBounds) {
  const Scene s = test::scene(131);
  Json j = to_json(s.obs);
  const ObservationSet a = observations_from_json(j);
  ASSERT_EQ(a.size(), s.obs.size());
  EXPECT_EQ(a.detections[4], s.obs.detections[4]);
  EXPECT_EQ(a.radii[4], s.obs.radii[4]);

  j.erase("radii");
  EXPECT_THROW(observations_from_json(j), InputError);
  std::map<int, KeypointBound> b;
  for (int i = 0; i < 8; ++i) b[i] = {i, 2.0, NormType::kInfinity, 0.1, false};
  b[6].infinite = true;
  j["confidences"] = {1.0, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  const ObservationSet c = observations_from_json(j, &b);
  EXPECT_DOUBLE_EQ(c.radii[1], 4.0);
  EXPECT_TRUE(std::isinf(c.radii[6]));
  b.erase(7);
  EXPECT_THROW(observations_from_json(j, &b), InputError);
}

TEST(Io, PoseRoundTrip) {
  std::mt19937_64 rng(132);
  Pose p;
  p.rotation = quat_to_rotation(test::random_quat(rng));
  p.translation = Vec3(0.1, -0.2, 1.3);
  const Pose q = pose_from_json(to_json(p));
  EXPECT_LT((q.rotation.matrix() - p.rotation.matrix()).norm(), 1e-14);
  Json only_q = to_json(p);
  only_q.erase("rotation");
  EXPECT_LT((pose_from_json(only_q).rotation.matrix() - p.rotation.matrix()).norm(), 1e-12);
  EXPECT_THROW(pose_from_json(Json{{"translation", {0, 0, 1}}}), InputError);
}

TEST(Io, ResultRoundTrip) {
  const Scene s = test::scene(133);
  const SlueResult r = slue_joint(s.obs, s.ground_truth, SetForm::kRotmat, 1);
  const Json j = to_json(r);
  for (const char* k : {"form", "order", "status", "solve_time_s", "center", "H", "logdet"}) {
    EXPECT_TRUE(j.contains(k)) << k;
  }
  EXPECT_EQ(j["H"].size(), 144u);
  const StoredResult back = result_from_json(Json::parse(j.dump()));
  EXPECT_EQ(back.form, SetForm::kRotmat);
  EXPECT_EQ(back.status, "ok");
  EXPECT_EQ(back.joint.frame, EllipsoidFrame::kRotmatTranslation);
  EXPECT_LT((back.joint.h - r.joint.h).norm(), 1e-12 * r.joint.h.norm());
  // row-major: entry (0, 1) is the second element
  EXPECT_DOUBLE_EQ(j["H"][1].get<double>(), r.joint.h(0, 1));
}

TEST(Io, ProjectionOutputs) {
  const Scene s = test::scene(134);
  const SlueResult r = slue_joint(s.obs, s.ground_truth, SetForm::kRotmat, 1);
  const TranslationBound t = project_translation(r.joint);
  const AngularBound a = project_axis_angle(r.joint);
  const Json j = to_json(t, a, bound_volumes(t, a));
  for (const char* k : {"h_t", "center_t", "h_theta", "representation", "volumes"}) {
    EXPECT_TRUE(j.contains(k)) << k;
  }
  const std::string csv = ellipse_slices_csv(t, a, 16);
  EXPECT_EQ(csv.rfind("quantity,plane,point,x,y\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 6 * 16);
}

TEST(Io, SceneConfigDefaults) {
  const SceneConfig c = scene_config_from_json(Json{{"n_keypoints", 5}, {"noise_model", "truncated_gaussian"}});
  EXPECT_EQ(c.n_keypoints, 5);
  EXPECT_EQ(c.noise_model, NoiseModel::kTruncatedGaussian);
  EXPECT_DOUBLE_EQ(c.radius_max, SceneConfig{}.radius_max);
  const SceneConfig d = scene_config_from_json(to_json(c));
  EXPECT_EQ(d.n_keypoints, 5);
}

TEST(Io, ToySet) {
  const Json j = Json::parse(R"({"inequalities": [[[-1,0,0],[0,1,0],[0,0,1]]], "center": [0, 0]})");
  const Toy2dSet t = toy_from_json(j);
  ASSERT_EQ(t.inequalities.size(), 1u);
  const Json rep = to_json(toy2d(t, 1, 51));
  EXPECT_EQ(rep["orders"].size(), 1u);
  EXPECT_THROW(toy_from_json(Json::parse(R"({"inequalities": [[[1,0],[0,1]]]})")), InputError);
}

TEST(Io, MissingFile) {
  EXPECT_THROW(read_json_file("/nonexistent/x.json"), InputError);
}
