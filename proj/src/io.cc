#include "slue/io.h"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "slue/errors.h"

namespace slue {

namespace {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double get_number(const Json& j, const char* what) {
  if (!j.is_number()) throw InputError(std::string("expected a number for ") + what);
  return j.get<double>();
}

Vec2 vec2_from_json(const Json& j) {
  const VecX v = vector_from_json(j);
  if (v.size() != 2) throw InputError("expected a 2-vector");
  return v;
}

Vec3 vec3_from_json(const Json& j) {
  const VecX v = vector_from_json(j);
  if (v.size() != 3) throw InputError("expected a 3-vector");
  return v;
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InputError("cannot parse '" + path + "': " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

Json matrix_to_json(const MatX& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

MatX matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw InputError("expected a matrix (array of rows)");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  MatX m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != cols) {
      throw InputError("matrix rows have different lengths");
    }
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = get_number(j[i][k], "matrix entry");
  }
  return m;
}

Json vector_to_json(const VecX& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

VecX vector_from_json(const Json& j) {
  if (!j.is_array()) throw InputError("expected an array");
  VecX v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = get_number(j[i], "vector entry");
  return v;
}

Json to_json(const Pose& pose) {
  return {{"rotation", matrix_to_json(pose.rotation.matrix())},
          {"quaternion", vector_to_json(UnitQuaternion::from_rotation(pose.rotation).coeffs())},
          {"translation", vector_to_json(pose.translation)}};
}

Pose pose_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("pose must be an object");
  Pose p;
  if (j.contains("rotation")) {
    const MatX r = matrix_from_json(j.at("rotation"));
    if (r.rows() != 3 || r.cols() != 3) throw InputError("rotation must be 3x3");
    p.rotation = Rotation(Mat3(r), 1e-6);
  } else if (j.contains("quaternion")) {
    const VecX q = vector_from_json(j.at("quaternion"));
    if (q.size() != 4) throw InputError("quaternion must have 4 entries");
    p.rotation = quat_to_rotation(UnitQuaternion(Vec4(q), 1e-6));
  } else {
    throw InputError("pose needs a rotation or a quaternion");
  }
  if (!j.contains("translation")) throw InputError("pose needs a translation");
  p.translation = vec3_from_json(j.at("translation"));
  return p;
}

std::vector<CalibrationRecord> read_records_jsonl(std::istream& in) {
  std::vector<CalibrationRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Json j = Json::parse(line);
      CalibrationRecord r;
      r.keypoint_id = j.at("keypoint_id").get<int>();
      r.detected = vec2_from_json(j.at("detected"));
      r.confidence = j.contains("confidence") ? get_number(j.at("confidence"), "confidence") : 1.0;
      r.ground_truth = vec2_from_json(j.at("ground_truth"));
      out.push_back(r);
    } catch (const Json::exception& e) {
      throw InputError("record line " + std::to_string(line_no) + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError("record line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<CalibrationRecord> read_records_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_records_jsonl(in);
}

Json to_json(const std::map<int, KeypointBound>& bounds) {
  Json arr = Json::array();
  for (const auto& [id, b] : bounds) {
    arr.push_back({{"keypoint_id", id},
                   {"radius", number(b.radius)},
                   {"norm", to_string(b.norm)},
                   {"alpha", b.alpha},
                   {"infinite", b.infinite}});
  }
  return {{"bounds", arr}};
}

std::map<int, KeypointBound> bounds_from_json(const Json& j) {
  const Json& arr = j.is_object() ? j.at("bounds") : j;
  if (!arr.is_array()) throw InputError("bounds must be an array");
  std::map<int, KeypointBound> out;
  for (const Json& e : arr) {
    KeypointBound b;
    b.keypoint_id = e.at("keypoint_id").get<int>();
    b.infinite = e.value("infinite", false);
    b.radius = e.at("radius").is_null() ? 0.0 : get_number(e.at("radius"), "radius");
    b.norm = norm_from_string(e.value("norm", std::string("infinity")));
    b.alpha = e.value("alpha", 0.1);
    out[b.keypoint_id] = b;
  }
  return out;
}

ObservationSet observations_from_json(const Json& j, const std::map<int, KeypointBound>* bounds) {
  try {
    ObservationSet obs;
    const MatX k = matrix_from_json(j.at("intrinsics"));
    if (k.rows() != 3 || k.cols() != 3) throw InputError("intrinsics must be 3x3");
    obs.intrinsics = CameraIntrinsics(Mat3(k));
    for (const Json& b : j.at("keypoints_3d")) obs.keypoints_3d.push_back(vec3_from_json(b));
    for (const Json& y : j.at("detections")) obs.detections.push_back(vec2_from_json(y));
    obs.norm = norm_from_string(j.value("norm", std::string("infinity")));
    if (j.contains("keypoint_ids")) obs.keypoint_ids = j.at("keypoint_ids").get<std::vector<int>>();
    std::vector<double> conf(obs.keypoints_3d.size(), 1.0);
    if (j.contains("confidences")) {
      conf = j.at("confidences").get<std::vector<double>>();
      if (conf.size() != obs.keypoints_3d.size()) throw InputError("one confidence per keypoint");
    }
    if (j.contains("radii")) {
      for (const Json& r : j.at("radii")) {
        obs.radii.push_back(r.is_null() ? std::numeric_limits<double>::infinity()
                                        : get_number(r, "radius"));
      }
    } else if (bounds != nullptr) {
      for (std::size_t i = 0; i < obs.keypoints_3d.size(); ++i) {
        const auto it = bounds->find(obs.id(i));
        if (it == bounds->end()) {
          throw InputError("no calibrated bound for keypoint " + std::to_string(obs.id(i)));
        }
        obs.radii.push_back(bound_for_detection(it->second, conf[i]));
      }
    } else {
      throw InputError("observations need radii or calibrated bounds");
    }
    if (obs.radii.size() != obs.keypoints_3d.size() ||
        obs.detections.size() != obs.keypoints_3d.size()) {
      throw InputError("observation lists have mismatched lengths");
    }
    return obs;
  } catch (const Json::exception& e) {
    throw InputError(std::string("observations: ") + e.what());
  }
}

Json to_json(const ObservationSet& obs) {
  Json kp = Json::array();
  Json det = Json::array();
  Json radii = Json::array();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    kp.push_back(vector_to_json(obs.keypoints_3d[i]));
    det.push_back(vector_to_json(obs.detections[i]));
    radii.push_back(number(obs.radii[i]));
  }
  return {{"intrinsics", matrix_to_json(obs.intrinsics.matrix())},
          {"keypoints_3d", kp},
          {"detections", det},
          {"radii", radii},
          {"norm", to_string(obs.norm)}};
}

Json to_json(const SlueResult& r) {
  Json h = Json::array();
  for (int i = 0; i < r.joint.h.rows(); ++i) {
    for (int k = 0; k < r.joint.h.cols(); ++k) h.push_back(number(r.joint.h(i, k)));
  }
  Json j = {{"form", to_string(r.form)},
            {"order", r.order},
            {"status", to_string(r.status)},
            {"solve_time_s", r.solve_time_s},
            {"center", vector_to_json(r.joint.center)},
            {"dim", r.joint.h.rows()},
            {"H", h},
            {"logdet", number(r.joint.logdet())},
            {"identity_residual", r.identity_residual},
            {"message", r.message},
            {"dropped_keypoints", r.dropped_ids},
            {"pose_estimate", to_json(r.pose_estimate)}};
  if (r.target) j["target"] = to_string(*r.target);
  if (!r.degenerate_axes.empty()) {
    Json axes = Json::array();
    for (const VecX& a : r.degenerate_axes) axes.push_back(vector_to_json(a));
    j["degenerate_axes"] = axes;
  }
  return j;
}

StoredResult result_from_json(const Json& j) {
  try {
    StoredResult s;
    s.form = form_from_string(j.at("form").get<std::string>());
    s.order = j.value("order", 1);
    s.status = j.value("status", std::string("ok"));
    s.joint.center = vector_from_json(j.at("center"));
    const auto d = s.joint.center.size();
    const Json& h = j.at("H");
    if (!h.is_array() || static_cast<Eigen::Index>(h.size()) != d * d) {
      throw InputError("H must hold dim * dim row-major entries");
    }
    s.joint.h.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index k = 0; k < d; ++k) {
        const Json& e = h[static_cast<std::size_t>(i * d + k)];
        s.joint.h(i, k) = e.is_null() ? std::nan("") : get_number(e, "H entry");
      }
    }
    s.joint.frame = s.form == SetForm::kQuat ? EllipsoidFrame::kQuatTranslation
                                             : EllipsoidFrame::kRotmatTranslation;
    return s;
  } catch (const Json::exception& e) {
    throw InputError(std::string("result: ") + e.what());
  }
}

Json to_json(const TranslationBound& t, const AngularBound& a, const BoundVolumes& v) {
  Json j = {{"h_t", matrix_to_json(t.h_t)},
            {"center_t", vector_to_json(t.center)},
            {"h_theta", matrix_to_json(a.h_theta)},
            {"representation", to_string(a.representation)},
            {"center_rotation", matrix_to_json(a.center_rotation.matrix())},
            {"angular_center", vector_to_json(a.center)},
            {"volumes",
             {{"translation_m3", number(v.translation)},
              {"angular_deg3", number(v.angular)},
              {"half_angles_deg", vector_to_json(v.angles_deg)}}},
            {"translation_degenerate", t.degenerate},
            {"angular_degenerate", a.degenerate}};
  return j;
}

std::string ellipse_slices_csv(const TranslationBound& t, const AngularBound& a, int points) {
  std::ostringstream out;
  out.precision(12);
  out << "quantity,plane,point,x,y\n";
  const char* names[] = {"x", "y", "z"};
  const std::pair<int, int> planes[] = {{0, 1}, {0, 2}, {1, 2}};
  for (const auto& [i, k] : planes) {
    const std::string plane = std::string(names[i]) + names[k];
    int n = 0;
    for (const auto& p : ellipse_outline(t.h_t, t.center, i, k, points)) {
      out << "translation," << plane << ',' << n++ << ',' << p(0) << ',' << p(1) << '\n';
    }
    n = 0;
    for (const auto& p : ellipse_outline(a.h_theta, a.center, i, k, points)) {
      out << "angular," << plane << ',' << n++ << ',' << p(0) << ',' << p(1) << '\n';
    }
  }
  return out.str();
}

Json to_json(const SceneConfig& c) {
  return {{"n_keypoints", c.n_keypoints},
          {"object_scale", c.object_scale},
          {"lateral_range", c.lateral_range},
          {"depth_min", c.depth_min},
          {"depth_max", c.depth_max},
          {"noise_model", to_string(c.noise_model)},
          {"noise_scale", c.noise_scale},
          {"radius_min", c.radius_min},
          {"radius_max", c.radius_max},
          {"correlated", c.correlated},
          {"intrinsics", matrix_to_json(c.intrinsics.matrix())},
          {"seed", c.seed}};
}

SceneConfig scene_config_from_json(const Json& j, SceneConfig c) {
  if (!j.is_object()) throw InputError("scene config must be an object");
  try {
    c.n_keypoints = j.value("n_keypoints", c.n_keypoints);
    c.object_scale = j.value("object_scale", c.object_scale);
    c.lateral_range = j.value("lateral_range", c.lateral_range);
    c.depth_min = j.value("depth_min", c.depth_min);
    c.depth_max = j.value("depth_max", c.depth_max);
    if (j.contains("noise_model")) c.noise_model = noise_model_from_string(j.at("noise_model"));
    c.noise_scale = j.value("noise_scale", c.noise_scale);
    c.radius_min = j.value("radius_min", c.radius_min);
    c.radius_max = j.value("radius_max", c.radius_max);
    c.correlated = j.value("correlated", c.correlated);
    if (j.contains("intrinsics")) c.intrinsics = CameraIntrinsics(Mat3(matrix_from_json(j.at("intrinsics"))));
    c.seed = j.value("seed", c.seed);
  } catch (const Json::exception& e) {
    throw InputError(std::string("scene config: ") + e.what());
  }
  return c;
}

Json to_json(const CoverageReport& r) {
  return {{"alpha", r.alpha},
          {"keypoint_coverage", r.keypoint_coverage},
          {"set_coverage", r.set_coverage},
          {"ellipsoid_coverage", r.ellipsoid_coverage},
          {"n_frames", r.n_frames},
          {"n_solved", r.n_solved},
          {"n_failures", r.n_failures},
          {"n_exceptions", r.n_exceptions},
          {"median_solve_time_s", r.median_solve_time_s},
          {"failures", r.failure_messages}};
}

Toy2dSet toy_from_json(const Json& j) {
  Toy2dSet t;
  try {
    auto read = [](const Json& arr, std::vector<Eigen::Matrix3d>& out) {
      for (const Json& m : arr) {
        const MatX a = matrix_from_json(m);
        if (a.rows() != 3 || a.cols() != 3) throw InputError("toy constraints must be 3x3");
        out.push_back(0.5 * (a + a.transpose()));
      }
    };
    if (j.contains("inequalities")) read(j.at("inequalities"), t.inequalities);
    if (j.contains("equalities")) read(j.at("equalities"), t.equalities);
    if (j.contains("center")) t.center = vec2_from_json(j.at("center"));
  } catch (const Json::exception& e) {
    throw InputError(std::string("toy set: ") + e.what());
  }
  return t;
}

Json to_json(const Toy2dReport& r) {
  Json orders = Json::array();
  for (const auto& o : r.orders) {
    orders.push_back({{"order", o.order},
                      {"status", to_string(o.status)},
                      {"H", matrix_to_json(o.bound.h)},
                      {"center", vector_to_json(o.bound.center)},
                      {"logdet", number(o.logdet)},
                      {"area", number(o.area)},
                      {"identity_residual", o.identity_residual},
                      {"grid_outside", o.grid_outside}});
  }
  return {{"orders", orders},
          {"grid_size", r.grid_size},
          {"grid_feasible", r.grid_feasible},
          {"monotone", r.monotone}};
}

}  // namespace slue
