#include "slue/slue_solver.h"

#include <atomic>
#include <chrono>
#include <thread>

#include "slue/errors.h"

namespace slue {

std::string to_string(SplitTarget target) {
  return target == SplitTarget::kRotationOnly ? "rotation_only" : "translation_only";
}

SplitTarget split_target_from_string(const std::string& s) {
  if (s == "rotation_only" || s == "rotation") return SplitTarget::kRotationOnly;
  if (s == "translation_only" || s == "translation") return SplitTarget::kTranslationOnly;
  throw InputError("unknown split target '" + s + "'");
}

SetForm form_from_string(const std::string& s) {
  if (s == "rotmat") return SetForm::kRotmat;
  if (s == "quat" || s == "quaternion") return SetForm::kQuat;
  throw InputError("unknown form '" + s + "' (expected rotmat or quat)");
}

SetForm default_form(int order) { return order >= 2 ? SetForm::kQuat : SetForm::kRotmat; }

std::vector<MatX> build_row_orthonormality() {
  std::vector<MatX> out;
  for (int i = 0; i < 3; ++i) {
    for (int k = i; k < 3; ++k) {
      MatX q = MatX::Zero(kRotmatDim, kRotmatDim);
      for (int j = 0; j < 3; ++j) {
        const int a = 1 + 3 * j + i;
        const int b = 1 + 3 * j + k;
        q(a, b) += 0.5;
        q(b, a) += 0.5;
      }
      if (i == k) q(0, 0) = -1.0;
      out.push_back(q);
    }
  }
  return out;
}

QuadraticConstraintSet build_pose_set(const ObservationSet& obs, const Pose& pose_estimate,
                                      SetForm form, const SlueSettings& settings) {
  if (form == SetForm::kQuat) return build_quaternion_set(obs, pose_estimate);
  if (form != SetForm::kRotmat) throw InputError("pose sets are rotmat or quat");
  QuadraticConstraintSet set = build_rotmat_set(obs);
  if (settings.row_orthonormality) {
    for (const MatX& q : build_row_orthonormality()) set.add_equality(q, ConstraintLabel::kSo3);
  }
  return set;
}

VecX pose_center(const Pose& pose, SetForm form) {
  if (form == SetForm::kRotmat) return rotmat_vector(pose).tail(kRotmatDim - 1);
  if (form == SetForm::kQuat) {
    VecX c(kQuatDim - 1);
    c.head<4>() = UnitQuaternion::from_rotation(pose.rotation).coeffs();
    c.tail<3>() = pose.translation;
    return c;
  }
  throw InputError("pose centers are rotmat or quat");
}

VecX pose_coordinates(const Pose& pose, SetForm form, const Pose& estimate) {
  if (form == SetForm::kQuat) {
    return quat_vector(pose, UnitQuaternion::from_rotation(estimate.rotation)).tail(kQuatDim - 1);
  }
  return pose_center(pose, form);
}

Pose pose_from_center(const VecX& center, SetForm form) {
  Pose p;
  if (form == SetForm::kRotmat && center.size() == kRotmatDim - 1) {
    p.rotation = Rotation::project(Eigen::Map<const Mat3>(center.data()));
    p.translation = center.tail<3>();
    return p;
  }
  if (form == SetForm::kQuat && center.size() == kQuatDim - 1) {
    const Vec4 q = center.head<4>();
    if (!(q.norm() > 0.0)) throw InputError("quaternion center is zero");
    p.rotation = quat_to_rotation(UnitQuaternion(q.normalized()));
    p.translation = center.tail<3>();
    return p;
  }
  throw InputError("center does not match the form");
}

namespace {

SlueResult solve(const ObservationSet& raw, const Pose& pose_estimate, SetForm form, int order,
                 const EllipsoidObjective& objective, const SlueSettings& settings) {
  if (order < 1) throw InputError("relaxation order must be at least 1");
  if (form == SetForm::kQuat && order == 1) {
    throw InputError("the order-1 relaxation is not available in quaternion form; use rotmat");
  }
  const FilteredObservations filtered = drop_unbounded_keypoints(raw);
  if (filtered.obs.size() == 0) throw InputError("no keypoint with a finite radius");

  const QuadraticConstraintSet set = build_pose_set(filtered.obs, pose_estimate, form, settings);
  const VecX center = pose_center(pose_estimate, form);
  EngineResult er = solve_min_volume_ellipsoid(set, center, order - 1, objective, settings.engine);

  SlueResult r;
  r.joint = std::move(er.bound);
  r.form = form;
  r.order = order;
  r.solve_time_s = er.solve_time_s;
  r.status = er.status;
  r.message = std::move(er.message);
  r.certificate = std::move(er.certificate);
  r.identity_residual = er.identity_residual;
  r.degenerate_axes = std::move(er.degenerate_axes);
  r.dropped_ids = filtered.dropped_ids;
  r.pose_estimate = pose_estimate;
  return r;
}

}  // namespace

SlueResult slue_joint(const ObservationSet& obs, const Pose& pose_estimate, SetForm form,
                      int order, const SlueSettings& settings) {
  return solve(obs, pose_estimate, form, order, EllipsoidObjective::joint(), settings);
}

SlueResult slue_split(const ObservationSet& obs, const Pose& pose_estimate, SetForm form,
                      int order, SplitTarget target, const SlueSettings& settings) {
  const int nr = form == SetForm::kQuat ? 4 : 9;
  const EllipsoidObjective objective = target == SplitTarget::kRotationOnly
                                           ? EllipsoidObjective::sub(0, nr)
                                           : EllipsoidObjective::sub(nr, nr + 3);
  SlueResult r = solve(obs, pose_estimate, form, order, objective, settings);
  r.target = target;
  return r;
}

std::vector<SlueResult> slue_batch(const std::vector<Frame>& frames, std::optional<SetForm> form,
                                   int order, const SlueSettings& settings, int threads) {
  std::vector<SlueResult> out(frames.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < frames.size(); i = next++) {
      const SetForm f = form.value_or(default_form(order));
      const auto start = std::chrono::steady_clock::now();
      try {
        out[i] = slue_joint(frames[i].obs, frames[i].pose_estimate, f, order, settings);
      } catch (const std::exception& e) {
        out[i].form = f;
        out[i].order = order;
        out[i].status = SolveStatus::kNumerical;
        out[i].message = e.what();
        out[i].pose_estimate = frames[i].pose_estimate;
        out[i].solve_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      }
    }
  };
  const int n = std::max(1, threads);
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

}  // namespace slue
