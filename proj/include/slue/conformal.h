#pragma once

// Split conformal calibration of per-keypoint pixel error radii.

#include <map>
#include <string>
#include <vector>

#include "slue/geometry.h"

namespace slue {

enum class NormType { kTwo, kInfinity };

std::string to_string(NormType norm);
NormType norm_from_string(const std::string& s);

struct CalibrationRecord {
  int keypoint_id = 0;
  Vec2 detected = Vec2::Zero();
  double confidence = 1.0;
  Vec2 ground_truth = Vec2::Zero();
};

/// Calibrated radius for one keypoint. `radius` is the confidence-weighted
/// quantile; the pixel radius for a detection is radius / confidence.
struct KeypointBound {
  int keypoint_id = 0;
  double radius = 0.0;
  NormType norm = NormType::kInfinity;
  double alpha = 0.1;
  bool infinite = false;
};

/// c * ||y - z||_p.
double conformity_score(const CalibrationRecord& record, NormType norm);

/// Rank ceil((1 - alpha)(1 + 1/n) n) among the sorted scores; flagged
/// infinite when that rank exceeds n.
KeypointBound calibrate(const std::vector<CalibrationRecord>& records,
                        double alpha, NormType norm);

/// Groups records by keypoint id and calibrates each group.
std::map<int, KeypointBound> calibrate_all(
    const std::vector<CalibrationRecord>& records, double alpha, NormType norm);

/// Pixel radius r / c; +infinity when the bound is flagged infinite.
double bound_for_detection(const KeypointBound& bound, double confidence);

}  // namespace slue
