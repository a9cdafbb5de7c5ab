#include "slue/harness.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>

#include <Eigen/Eigenvalues>

#include "slue/errors.h"
#include "slue/pnp.h"

namespace slue {

std::string to_string(NoiseModel m) {
  return m == NoiseModel::kUniformInBox ? "uniform_in_box" : "truncated_gaussian";
}

NoiseModel noise_model_from_string(const std::string& s) {
  if (s == "uniform_in_box" || s == "uniform") return NoiseModel::kUniformInBox;
  if (s == "truncated_gaussian" || s == "gaussian") return NoiseModel::kTruncatedGaussian;
  throw InputError("unknown noise model '" + s + "'");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  // splitmix64 over a mix of the three inputs
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1) + 0xbf58476d1ce4e5b9ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rotation random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec4 q;
  do {
    q = Vec4(n(rng), n(rng), n(rng), n(rng));
  } while (q.norm() < 1e-6);
  return quat_to_rotation(UnitQuaternion(q.normalized()));
}

namespace {

double truncated_normal(std::mt19937_64& rng, double limit) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    const double v = n(rng);
    if (std::abs(v) <= limit) return v;
  }
}

Vec2 unit_noise(std::mt19937_64& rng, NoiseModel model) {
  if (model == NoiseModel::kUniformInBox) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double a = u(rng);
    return Vec2(a, u(rng));
  }
  const double a = truncated_normal(rng, 3.0);
  return Vec2(a, truncated_normal(rng, 3.0));
}

Rotation small_rotation(std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 axis(n(rng), n(rng), n(rng));
  while (axis.norm() < 1e-9) axis = Vec3(n(rng), n(rng), n(rng));
  return rotation_from_axis_angle(axis.normalized(), sigma * n(rng));
}

}  // namespace

Scene generate_scene(const SceneConfig& config) {
  if (config.n_keypoints < 1) throw InputError("scene needs at least one keypoint");
  if (!(config.radius_min > 0.0) || config.radius_max < config.radius_min) {
    throw InputError("scene radii must satisfy 0 < radius_min <= radius_max");
  }
  if (!(config.object_scale > 0.0) || config.depth_max < config.depth_min) {
    throw InputError("bad scene geometry");
  }
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double a, double b) { return a + (b - a) * unit(rng); };

  Scene s;
  bool found = false;
  for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
    s.ground_truth.rotation = random_rotation(rng);
    s.ground_truth.translation =
        Vec3(uniform(-config.lateral_range, config.lateral_range),
             uniform(-config.lateral_range, config.lateral_range),
             uniform(config.depth_min, config.depth_max));
    s.obs.keypoints_3d.clear();
    found = true;
    const double h = 0.5 * config.object_scale;
    for (int i = 0; i < config.n_keypoints; ++i) {
      const Vec3 b(uniform(-h, h), uniform(-h, h), uniform(-h, h));
      s.obs.keypoints_3d.push_back(b);
      const Vec3 p = s.ground_truth.rotation * b + s.ground_truth.translation;
      if (!(p.z() > 1e-6)) found = false;
    }
  }
  if (!found) throw InputError("pose prior gives no pose with positive depths");

  s.obs.intrinsics = config.intrinsics;
  s.obs.norm = NormType::kInfinity;
  const Vec2 shared = unit_noise(rng, config.noise_model);
  for (int i = 0; i < config.n_keypoints; ++i) {
    const double r = uniform(config.radius_min, config.radius_max);
    s.obs.radii.push_back(r);
    const Vec2 z = project_keypoint(s.ground_truth, config.intrinsics, s.obs.keypoints_3d[i]);
    s.projections.push_back(z);
    const Vec2 e = config.correlated ? shared : unit_noise(rng, config.noise_model);
    double scale = config.noise_scale;
    if (scale < 0.0) {
      // one pixel error for the whole frame when correlated
      const double base = config.correlated ? 0.5 * (config.radius_min + config.radius_max) : r;
      scale = config.noise_model == NoiseModel::kUniformInBox ? base : base / 3.0;
    }
    s.obs.detections.push_back(z + scale * e);
  }
  return s;
}

SampleResult sample_feasible_poses(const QuadraticConstraintSet& set, const Pose& seed_pose, int n,
                                   std::uint64_t seed, long long max_proposals) {
  SampleResult out;
  if (n <= 0) return out;
  if (max_proposals < 0) max_proposals = 400LL * n + 1000;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr int kLevels = 8;
  const double depth = std::max(1e-3, std::abs(seed_pose.translation.z()));
  while (static_cast<int>(out.poses.size()) < n && out.proposals < max_proposals) {
    const int level = static_cast<int>(out.proposals % kLevels);
    ++out.proposals;
    const double s = 0.25 * std::pow(2.0, level);
    Pose p;
    p.rotation = small_rotation(rng, 0.005 * s) * seed_pose.rotation;
    const Vec3 jitter(normal(rng), normal(rng), normal(rng));
    p.translation =
        seed_pose.translation * (1.0 + 0.005 * s * normal(rng)) + 0.002 * s * depth * jitter;
    if (check_membership(set, pose_vector(set, p)).member) out.poses.push_back(p);
  }
  out.acceptance_rate =
      out.proposals > 0 ? static_cast<double>(out.poses.size()) / out.proposals : 0.0;
  if (out.poses.empty()) std::cerr << "warning: rejection sampler accepted no poses\n";
  return out;
}

CoverageReport evaluate_coverage(const CoverageConfig& config) {
  if (config.n_calibration < 1 || config.n_eval < 1) throw InputError("coverage needs frames");
  const std::uint64_t seed = config.scene.seed;
  std::vector<CalibrationRecord> records;
  for (int f = 0; f < config.n_calibration; ++f) {
    SceneConfig sc = config.scene;
    sc.seed = derive_seed(seed, 1, f);
    const Scene s = generate_scene(sc);
    for (std::size_t i = 0; i < s.obs.size(); ++i) {
      CalibrationRecord r;
      r.keypoint_id = static_cast<int>(i);
      r.detected = s.obs.detections[i];
      r.ground_truth = s.projections[i];
      records.push_back(r);
    }
  }
  const std::map<int, KeypointBound> bounds = calibrate_all(records, config.alpha, config.norm);

  CoverageReport rep;
  rep.alpha = config.alpha;
  long long kp_total = 0;
  long long kp_covered = 0;
  int set_covered = 0;
  int ell_covered = 0;
  std::vector<double> times;
  for (int f = 0; f < config.n_eval; ++f) {
    SceneConfig sc = config.scene;
    sc.seed = derive_seed(seed, 2, f);
    Scene s = generate_scene(sc);
    s.obs.norm = config.norm;
    for (std::size_t i = 0; i < s.obs.size(); ++i) {
      const auto it = bounds.find(static_cast<int>(i));
      s.obs.radii[i] = it == bounds.end() ? std::numeric_limits<double>::infinity()
                                          : bound_for_detection(it->second, 1.0);
      const Vec2 e = s.obs.detections[i] - s.projections[i];
      const double err = config.norm == NormType::kTwo ? e.norm() : e.cwiseAbs().maxCoeff();
      ++kp_total;
      if (err <= s.obs.radii[i]) ++kp_covered;
    }
    ++rep.n_frames;
    bool member = false;
    try {
      const FilteredObservations filtered = drop_unbounded_keypoints(s.obs);
      const QuadraticConstraintSet set = build_rotmat_set(filtered.obs);
      member = check_membership(set, rotmat_vector(s.ground_truth)).member;
    } catch (const std::exception& e) {
      member = false;
    }
    if (member) ++set_covered;
    if (!config.solve_ellipsoids) continue;

    const SetForm form = config.form.value_or(default_form(config.order));
    try {
      Pose estimate = s.ground_truth;
      if (config.use_pnp) {
        PnpSettings ps;
        ps.max_order = 1;
        PnpProblem prob{drop_unbounded_keypoints(s.obs).obs, {}};
        estimate = pnp_estimate(prob, ps).pose;
      }
      const SlueResult r = slue_joint(s.obs, estimate, form, config.order, config.slue);
      times.push_back(r.solve_time_s);
      if (!r.ok()) {
        ++rep.n_failures;
        rep.failure_messages.push_back("frame " + std::to_string(f) + ": " + to_string(r.status) +
                                       " " + r.message);
        continue;
      }
      ++rep.n_solved;
      const bool inside =
          r.joint.contains(pose_coordinates(s.ground_truth, form, estimate), 1e-6);
      if (inside) ++ell_covered;
      if (member && !inside) ++rep.n_exceptions;
    } catch (const std::exception& e) {
      ++rep.n_failures;
      rep.failure_messages.push_back("frame " + std::to_string(f) + ": " + e.what());
    }
  }
  rep.keypoint_coverage = kp_total > 0 ? static_cast<double>(kp_covered) / kp_total : 0.0;
  rep.set_coverage = static_cast<double>(set_covered) / rep.n_frames;
  rep.ellipsoid_coverage = rep.n_solved > 0 ? static_cast<double>(ell_covered) / rep.n_solved : 0.0;
  if (!times.empty()) {
    std::sort(times.begin(), times.end());
    rep.median_solve_time_s = times[times.size() / 2];
  }
  return rep;
}

Toy2dSet toy_disk() {
  Toy2dSet t;
  t.inequalities.push_back(Eigen::Vector3d(-1.0, 1.0, 1.0).asDiagonal());
  return t;
}

Toy2dSet toy_crescent() {
  Toy2dSet t = toy_disk();
  Eigen::Matrix3d outside = Eigen::Matrix3d::Zero();
  // 0.36 - (u - 0.7)^2 - v^2 <= 0
  outside(0, 0) = -0.13;
  outside(0, 1) = outside(1, 0) = 0.7;
  outside(1, 1) = -1.0;
  outside(2, 2) = -1.0;
  t.inequalities.push_back(outside);
  t.center = Eigen::Vector2d(-0.4, 0.0);
  return t;
}

Toy2dSet toy_quarter_annulus() {
  Toy2dSet t = toy_disk();
  Eigen::Matrix3d inner = Eigen::Matrix3d::Zero();
  // 0.5 - u^2 - v^2 <= 0
  inner(0, 0) = 0.5;
  inner(1, 1) = -1.0;
  inner(2, 2) = -1.0;
  t.inequalities.push_back(inner);
  for (int k = 1; k <= 2; ++k) {
    Eigen::Matrix3d half = Eigen::Matrix3d::Zero();
    half(0, k) = half(k, 0) = -0.5;
    t.inequalities.push_back(half);
  }
  t.center = Eigen::Vector2d(0.5, 0.5);
  return t;
}

QuadraticConstraintSet toy_constraint_set(const Toy2dSet& toy) {
  QuadraticConstraintSet set;
  set.dim = 3;
  set.form = SetForm::kGeneric;
  set.homogenization = 0;
  for (const auto& a : toy.inequalities) set.add_inequality(a, ConstraintLabel::kGeneric);
  for (const auto& q : toy.equalities) set.add_equality(q, ConstraintLabel::kGeneric);
  return set;
}

Toy2dReport toy2d(const Toy2dSet& toy, int max_order, int grid) {
  if (max_order < 1) throw InputError("toy2d needs max_order >= 1");
  if (grid < 2) throw InputError("toy2d grid needs at least two points per side");
  if (toy.inequalities.empty() && toy.equalities.empty()) throw InputError("toy set is empty");
  const QuadraticConstraintSet set = toy_constraint_set(toy);
  Toy2dReport rep;
  rep.grid_size = grid;
  for (int order = 1; order <= max_order; ++order) {
    const EngineResult er = solve_min_volume_ellipsoid(set, toy.center, order - 1);
    if (order == 1 && (er.status == SolveStatus::kUnbounded || !er.degenerate_axes.empty())) {
      throw InputError("toy set is unbounded: " + er.message);
    }
    Toy2dOrder o;
    o.order = order;
    o.status = er.status;
    o.bound = er.bound;
    o.logdet = er.bound.logdet();
    const double det = er.bound.h.determinant();
    o.area = det > 0.0 ? 3.14159265358979323846 / std::sqrt(det)
                       : std::numeric_limits<double>::infinity();
    o.identity_residual = er.identity_residual;
    rep.orders.push_back(o);
  }
  for (std::size_t k = 1; k < rep.orders.size(); ++k) {
    if (rep.orders[k].logdet + 1e-5 < rep.orders[k - 1].logdet) rep.monotone = false;
  }

  // grid over the box of the first solved ellipse
  const Toy2dOrder* box = nullptr;
  for (const auto& o : rep.orders) {
    if (o.status == SolveStatus::kOk) {
      box = &o;
      break;
    }
  }
  if (box == nullptr) return rep;
  const Eigen::Matrix2d inv = box->bound.h.inverse();
  const double hu = 1.02 * std::sqrt(inv(0, 0));
  const double hv = 1.02 * std::sqrt(inv(1, 1));
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double u = toy.center(0) - hu + 2.0 * hu * i / (grid - 1);
      const double v = toy.center(1) - hv + 2.0 * hv * j / (grid - 1);
      const Eigen::Vector3d x(1.0, u, v);
      bool feasible = true;
      for (const auto& a : toy.inequalities) feasible = feasible && x.dot(a * x) <= 0.0;
      for (const auto& q : toy.equalities) feasible = feasible && std::abs(x.dot(q * x)) <= 1e-9;
      if (!feasible) continue;
      ++rep.grid_feasible;
      for (auto& o : rep.orders) {
        if (o.status == SolveStatus::kOk && !o.bound.contains(Eigen::Vector2d(u, v), 1e-6)) {
          ++o.grid_outside;
        }
      }
    }
  }
  return rep;
}

}  // namespace slue
