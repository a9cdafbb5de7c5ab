#pragma once

// JSON and CSV serialization of inputs and results.

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "slue/conformal.h"
#include "slue/harness.h"
#include "slue/projection.h"
#include "slue/slue_solver.h"

namespace slue {

using Json = nlohmann::json;

/// Parses a file; throws InputError with the path on I/O or parse errors.
Json read_json_file(const std::string& path);
/// Writes to `path`, or to stdout for "-" or an empty path.
void write_text(const std::string& path, const std::string& text);

Json matrix_to_json(const MatX& m);
MatX matrix_from_json(const Json& j);
Json vector_to_json(const VecX& v);
VecX vector_from_json(const Json& j);

Json to_json(const Pose& pose);
/// {"rotation": 3x3 rows} or {"quaternion": [w, x, y, z]}, plus "translation".
Pose pose_from_json(const Json& j);

/// One JSON object per line: {keypoint_id, detected, confidence, ground_truth}.
std::vector<CalibrationRecord> read_records_jsonl(std::istream& in);
std::vector<CalibrationRecord> read_records_jsonl_file(const std::string& path);

Json to_json(const std::map<int, KeypointBound>& bounds);
std::map<int, KeypointBound> bounds_from_json(const Json& j);

/// {intrinsics, keypoints_3d, detections, confidences, norm, alpha} with
/// either explicit "radii" or radii r_i / c_i from `bounds`.
ObservationSet observations_from_json(const Json& j,
                                      const std::map<int, KeypointBound>* bounds = nullptr);
Json to_json(const ObservationSet& obs);

/// {form, order, status, solve_time_s, center, H (row-major), logdet, ...}.
Json to_json(const SlueResult& r);

struct StoredResult {
  SetForm form = SetForm::kRotmat;
  int order = 1;
  std::string status;
  EllipsoidBound joint;
};
StoredResult result_from_json(const Json& j);

Json to_json(const TranslationBound& t, const AngularBound& a, const BoundVolumes& v);
/// Rows "quantity,plane,point,x,y" outlining the coordinate-pair projections
/// of the translation and angular ellipsoids.
std::string ellipse_slices_csv(const TranslationBound& t, const AngularBound& a, int points = 64);

Json to_json(const SceneConfig& c);
/// Missing fields keep their defaults.
SceneConfig scene_config_from_json(const Json& j, SceneConfig base = {});
Json to_json(const CoverageReport& r);

/// {"inequalities": [3x3...], "equalities": [...], "center": [u, v]}.
Toy2dSet toy_from_json(const Json& j);
Json to_json(const Toy2dReport& r);

}  // namespace slue
