#pragma once

// Weighted backprojection PnP:
//
//   min_{R in SO(3), t}  sum_i (1 / sigma_i) || (e3^T p_i) y_i - K p_i ||^2,
//   p_i = R b_i + t,
//
// solved by a sum-of-squares relaxation over x = [1, vec(R), t] with the
// keypoint depths kept nonnegative through localizing multipliers. The
// relaxation's moment matrix gives the pose; a Gauss-Newton polish follows.

#include <string>
#include <vector>

#include "slue/constraints.h"
#include "slue/sdp_solver.h"

namespace slue {

struct PnpProblem {
  ObservationSet obs;
  /// Per-keypoint pixel scales; empty means the radii.
  std::vector<double> sigmas;
};

enum class PnpMethod { kRelaxationOrder1, kRelaxationOrder2, kDlt };

std::string to_string(PnpMethod method);

struct PnpSettings {
  /// Highest relaxation order tried while the gap exceeds gap_tolerance.
  int max_order = 2;
  double gap_tolerance = 1e-6;
  int polish_iterations = 50;
  sdp::Settings sdp;
};

struct PnpResult {
  Pose pose;
  /// (f(pose) - relaxation value) / max(1, f(pose)) on the cost scaled to a
  /// unit Frobenius norm matrix; infinity when no relaxation was solved.
  double tightness = 0.0;
  /// Relaxation lower bound and objective at `pose`, both on the scaled cost.
  double relaxation_value = 0.0;
  double objective = 0.0;
  PnpMethod method = PnpMethod::kRelaxationOrder1;
  int order = 1;
  std::string message;
};

/// 13 x 13 PSD matrix C with x^T C x the (unscaled) objective.
MatX pnp_cost_matrix(const PnpProblem& problem);
/// Unscaled objective at a pose.
double pnp_objective(const PnpProblem& problem, const Pose& pose);

/// Throws InputError for fewer than three keypoints or nonpositive sigmas.
PnpResult pnp_estimate(const PnpProblem& problem, const PnpSettings& settings = {});

}  // namespace slue
