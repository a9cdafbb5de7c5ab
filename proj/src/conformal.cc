#include "slue/conformal.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slue/errors.h"

namespace slue {

std::string to_string(NormType norm) {
  return norm == NormType::kTwo ? "two" : "infinity";
}

NormType norm_from_string(const std::string& s) {
  if (s == "two" || s == "2" || s == "l2") return NormType::kTwo;
  if (s == "infinity" || s == "inf" || s == "linf") return NormType::kInfinity;
  throw InputError("unknown norm '" + s + "' (expected two or infinity)");
}

double conformity_score(const CalibrationRecord& record, NormType norm) {
  if (!(record.confidence > 0.0)) {
    throw InputError("calibration record confidence must be positive");
  }
  const Vec2 d = record.detected - record.ground_truth;
  const double dist = norm == NormType::kTwo ? d.norm() : d.cwiseAbs().maxCoeff();
  return record.confidence * dist;
}

KeypointBound calibrate(const std::vector<CalibrationRecord>& records,
                        double alpha, NormType norm) {
  if (records.empty()) throw InputError("calibration needs at least one record");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");

  std::vector<double> scores;
  scores.reserve(records.size());
  for (const auto& r : records) scores.push_back(conformity_score(r, norm));
  std::sort(scores.begin(), scores.end());

  const double n = static_cast<double>(scores.size());
  KeypointBound bound;
  bound.keypoint_id = records.front().keypoint_id;
  bound.norm = norm;
  bound.alpha = alpha;
  const double level = (1.0 - alpha) * (1.0 + 1.0 / n);
  // Guard against 0.9 * 1.25 * 4 evaluating to 4.5000000001 and similar.
  const double rank = std::ceil(level * n - 1e-9);
  if (level > 1.0 || rank > n) {
    bound.infinite = true;
    bound.radius = std::numeric_limits<double>::infinity();
    return bound;
  }
  const auto index = static_cast<std::size_t>(std::max(1.0, rank)) - 1;
  bound.radius = scores[index];
  return bound;
}

std::map<int, KeypointBound> calibrate_all(
    const std::vector<CalibrationRecord>& records, double alpha, NormType norm) {
  std::map<int, std::vector<CalibrationRecord>> groups;
  for (const auto& r : records) groups[r.keypoint_id].push_back(r);
  std::map<int, KeypointBound> out;
  for (const auto& [id, group] : groups) out[id] = calibrate(group, alpha, norm);
  return out;
}

double bound_for_detection(const KeypointBound& bound, double confidence) {
  if (!(confidence > 0.0)) throw InputError("detection confidence must be positive");
  if (bound.infinite) return std::numeric_limits<double>::infinity();
  return bound.radius / confidence;
}

}  // namespace slue
