#pragma once

// Synthetic scenes, rejection sampling of feasible poses, coverage
// evaluation, and the planar hierarchy demo.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "slue/conformal.h"
#include "slue/constraints.h"
#include "slue/slue_solver.h"

namespace slue {

enum class NoiseModel { kUniformInBox, kTruncatedGaussian };

std::string to_string(NoiseModel m);
NoiseModel noise_model_from_string(const std::string& s);

struct SceneConfig {
  int n_keypoints = 8;
  /// Edge of the cube the model keypoints are drawn from, meters.
  double object_scale = 0.2;
  /// Translation prior: |t_x|, |t_y| <= lateral_range, t_z in [depth_min, depth_max].
  double lateral_range = 0.1;
  double depth_min = 0.8;
  double depth_max = 1.5;
  NoiseModel noise_model = NoiseModel::kUniformInBox;
  /// Pixels. Uniform noise: box half-width, where a negative value uses each
  /// keypoint's radius (the mean radius when correlated). Truncated Gaussian:
  /// sigma, truncated at 3 sigma, a third of that width.
  double noise_scale = -1.0;
  /// Radii assigned to the observations, uniform in [radius_min, radius_max].
  double radius_min = 2.0;
  double radius_max = 8.0;
  /// Same noise vector for every keypoint of a frame.
  bool correlated = false;
  CameraIntrinsics intrinsics = CameraIntrinsics::from_focal(600.0, 600.0, 320.0, 240.0);
  std::uint64_t seed = 0;
};

struct Scene {
  ObservationSet obs;
  Pose ground_truth;
  /// Noiseless projections of the keypoints.
  std::vector<Vec2> projections;
};

/// Deterministic in config.seed. Throws InputError when no pose with
/// positive depths is found in 1000 draws.
Scene generate_scene(const SceneConfig& config);

/// Seed of item `index` of stream `stream` derived from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

Rotation random_rotation(std::mt19937_64& rng);

struct SampleResult {
  std::vector<Pose> poses;
  long long proposals = 0;
  double acceptance_rate = 0.0;
};

/// Rejection sampling around seed_pose: rotations perturbed about random
/// axes, translations by isotropic noise plus scaling along the viewing ray,
/// over a ladder of growing scales. Stops at n members or max_proposals.
SampleResult sample_feasible_poses(const QuadraticConstraintSet& set, const Pose& seed_pose,
                                   int n, std::uint64_t seed, long long max_proposals = -1);

struct CoverageConfig {
  SceneConfig scene;
  int n_calibration = 1000;
  int n_eval = 500;
  double alpha = 0.1;
  NormType norm = NormType::kInfinity;
  int order = 1;
  std::optional<SetForm> form;
  /// Solve for an ellipsoid per frame; otherwise only keypoint and set
  /// coverage are measured.
  bool solve_ellipsoids = true;
  /// Pose estimate from PnP (order-1 relaxation); otherwise ground truth.
  bool use_pnp = true;
  SlueSettings slue;
};

struct CoverageReport {
  double alpha = 0.0;
  double keypoint_coverage = 0.0;
  double set_coverage = 0.0;
  /// Over frames whose solve succeeded.
  double ellipsoid_coverage = 0.0;
  int n_frames = 0;
  int n_solved = 0;
  int n_failures = 0;
  /// Solved frames with the ground truth in the set but not in the ellipsoid.
  int n_exceptions = 0;
  double median_solve_time_s = 0.0;
  std::vector<std::string> failure_messages;
};

/// Calibrates radii on n_calibration frames, then evaluates n_eval fresh
/// frames. Frame failures are counted, never thrown.
CoverageReport evaluate_coverage(const CoverageConfig& config);

/// Planar set over x = [1, u, v].
struct Toy2dSet {
  std::vector<Eigen::Matrix3d> inequalities;
  std::vector<Eigen::Matrix3d> equalities;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
};

/// u^2 + v^2 <= 1.
Toy2dSet toy_disk();
/// Unit disk minus the disk of radius 0.6 around (0.7, 0).
Toy2dSet toy_crescent();
/// 0.5 <= u^2 + v^2 <= 1 with u, v >= 0, centered at (0.5, 0.5). Order 1
/// is loose here and higher orders tighten.
Toy2dSet toy_quarter_annulus();

QuadraticConstraintSet toy_constraint_set(const Toy2dSet& toy);

struct Toy2dOrder {
  int order = 1;
  SolveStatus status = SolveStatus::kNumerical;
  EllipsoidBound bound;
  double logdet = 0.0;
  double area = 0.0;
  double identity_residual = 0.0;
  /// Feasible grid points outside the ellipse (value > 1 + 1e-6).
  int grid_outside = 0;
};

struct Toy2dReport {
  std::vector<Toy2dOrder> orders;
  int grid_feasible = 0;
  int grid_size = 0;
  /// logdet weakly increasing in order (1e-5 slack).
  bool monotone = true;
};

/// Orders 1..max_order; throws InputError when the set is unbounded.
Toy2dReport toy2d(const Toy2dSet& toy, int max_order, int grid = 401);

}  // namespace slue
