#include "slue/constraints.h"

#include <cmath>
#include <iostream>
#include <string>

#include "slue/errors.h"

namespace slue {
namespace {

MatX symmetrize(const MatX& m) { return 0.5 * (m + m.transpose()); }

// Linear map x -> p = R b + t over the rotation-matrix vector (3 x 13).
Eigen::Matrix<double, 3, kRotmatDim> point_map(const Vec3& b) {
  Eigen::Matrix<double, 3, kRotmatDim> l = Eigen::Matrix<double, 3, kRotmatDim>::Zero();
  for (int c = 0; c < 3; ++c) l.block<3, 3>(0, 1 + 3 * c) = b(c) * Mat3::Identity();
  l.block<3, 3>(0, 10) = Mat3::Identity();
  return l;
}

Vec3 homogeneous(const Vec2& y) { return Vec3(y(0), y(1), 1.0); }

// Rows of (K - y e3^T); row j gives the image-axis residual times depth.
Mat3 residual_map(const ObservationSet& obs, std::size_t i) {
  Mat3 e3y = Mat3::Zero();
  e3y.col(2) = homogeneous(obs.detections[i]);
  return obs.intrinsics.matrix() - e3y;
}

// Linear functionals v^T p <= 0 for the four infinity-norm backprojection
// constraints of keypoint i, as v over the point p.
std::vector<Vec3> backprojection_functionals(const ObservationSet& obs,
                                             std::size_t i) {
  const Mat3 g = residual_map(obs, i);
  const Vec3 e3 = Vec3::UnitZ();
  std::vector<Vec3> out;
  for (int j = 0; j < 2; ++j) {
    const Vec3 row = g.row(j).transpose();
    out.push_back(row - obs.radii[i] * e3);
    out.push_back(-row - obs.radii[i] * e3);
  }
  return out;
}

void require_size(const ObservationSet& obs) {
  if (obs.keypoints_3d.size() != obs.detections.size() ||
      obs.keypoints_3d.size() != obs.radii.size()) {
    throw InputError("observation lists have mismatched lengths");
  }
}

}  // namespace

std::string to_string(ConstraintLabel label) {
  switch (label) {
    case ConstraintLabel::kChirality: return "chirality";
    case ConstraintLabel::kBackprojection: return "backprojection";
    case ConstraintLabel::kSo3: return "so3";
    case ConstraintLabel::kUnitQuat: return "unit_quat";
    case ConstraintLabel::kHemisphere: return "hemisphere";
    case ConstraintLabel::kBp2: return "bp2";
    case ConstraintLabel::kGeneric: return "generic";
  }
  return "generic";
}

std::string to_string(SetForm form) {
  switch (form) {
    case SetForm::kRotmat: return "rotmat";
    case SetForm::kQuat: return "quat";
    case SetForm::kGeneric: return "generic";
  }
  return "generic";
}

void QuadraticConstraintSet::add_inequality(const MatX& a, ConstraintLabel label) {
  if (a.rows() != dim || a.cols() != dim) throw InputError("constraint has wrong dimension");
  inequalities.push_back(symmetrize(a));
  inequality_labels.push_back(label);
}

void QuadraticConstraintSet::add_equality(const MatX& q, ConstraintLabel label) {
  if (q.rows() != dim || q.cols() != dim) throw InputError("constraint has wrong dimension");
  equalities.push_back(symmetrize(q));
  equality_labels.push_back(label);
}

QuadraticConstraintSet QuadraticConstraintSet::normalized() const {
  QuadraticConstraintSet out = *this;
  for (auto& a : out.inequalities) {
    const double f = a.norm();
    if (f > 0.0) a /= f;
  }
  for (auto& q : out.equalities) {
    const double f = q.norm();
    if (f > 0.0) q /= f;
  }
  return out;
}

int ObservationSet::id(std::size_t i) const {
  return i < keypoint_ids.size() ? keypoint_ids[i] : static_cast<int>(i);
}

void ObservationSet::validate() const {
  require_size(*this);
  if (keypoints_3d.empty()) throw InputError("observation set is empty");
  if (!keypoint_ids.empty() && keypoint_ids.size() != keypoints_3d.size()) {
    throw InputError("keypoint_ids length does not match the keypoints");
  }
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!std::isfinite(radii[i])) {
      throw InputError("keypoint " + std::to_string(id(i)) +
                       " has an infinite conformal radius");
    }
    if (!(radii[i] > 0.0)) {
      throw InputError("keypoint " + std::to_string(id(i)) +
                       " has a nonpositive radius");
    }
  }
}

FilteredObservations drop_unbounded_keypoints(const ObservationSet& obs) {
  require_size(obs);
  FilteredObservations out;
  out.obs.intrinsics = obs.intrinsics;
  out.obs.norm = obs.norm;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!std::isfinite(obs.radii[i])) {
      out.dropped_ids.push_back(obs.id(i));
      continue;
    }
    out.obs.keypoints_3d.push_back(obs.keypoints_3d[i]);
    out.obs.detections.push_back(obs.detections[i]);
    out.obs.radii.push_back(obs.radii[i]);
    out.obs.keypoint_ids.push_back(obs.id(i));
  }
  for (int id : out.dropped_ids) {
    std::cerr << "warning: dropping keypoint " << id
              << " (infinite conformal radius)\n";
  }
  return out;
}

MatX linear_to_quadratic(const VecX& l, int homogenization) {
  const auto n = l.size();
  MatX m = MatX::Zero(n, n);
  m.row(homogenization) += 0.5 * l.transpose();
  m.col(homogenization) += 0.5 * l;
  return m;
}

std::vector<MatX> build_so3_equalities() {
  struct Triple { int i, j; double v; };
  // 1-based indices into [1, vec(R), t]; (i, j, v) sets Q_ij = Q_ji = v.
  const std::vector<std::vector<Triple>> sparse = {
      {{2, 2, 1}, {3, 3, 1}, {4, 4, 1}, {1, 1, -1}},
      {{5, 5, 1}, {6, 6, 1}, {7, 7, 1}, {1, 1, -1}},
      {{8, 8, 1}, {9, 9, 1}, {10, 10, 1}, {1, 1, -1}},
      {{2, 5, 1}, {3, 6, 1}, {4, 7, 1}},
      {{2, 8, 1}, {3, 9, 1}, {4, 10, 1}},
      {{5, 8, 1}, {6, 9, 1}, {7, 10, 1}},
      {{3, 7, 1}, {4, 6, -1}, {1, 8, -1}},
      {{4, 5, 1}, {2, 7, -1}, {1, 9, -1}},
      {{2, 6, 1}, {3, 5, -1}, {1, 10, -1}},
      {{6, 10, 1}, {7, 9, -1}, {1, 2, -1}},
      {{7, 8, 1}, {5, 10, -1}, {1, 3, -1}},
      {{5, 9, 1}, {6, 8, -1}, {1, 4, -1}},
      {{9, 4, 1}, {10, 3, -1}, {1, 5, -1}},
      {{10, 2, 1}, {8, 4, -1}, {1, 6, -1}},
      {{8, 3, 1}, {9, 2, -1}, {1, 7, -1}},
  };
  std::vector<MatX> out;
  for (const auto& triples : sparse) {
    MatX q = MatX::Zero(kRotmatDim, kRotmatDim);
    for (const auto& t : triples) {
      q(t.i - 1, t.j - 1) = t.v;
      q(t.j - 1, t.i - 1) = t.v;
    }
    out.push_back(q);
  }
  return out;
}

std::vector<MatX> build_chirality(const ObservationSet& obs) {
  require_size(obs);
  std::vector<MatX> out;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const VecX l = -point_map(obs.keypoints_3d[i]).row(2).transpose();
    out.push_back(linear_to_quadratic(l));
  }
  return out;
}

std::vector<MatX> build_backprojection_inf(const ObservationSet& obs) {
  require_size(obs);
  std::vector<MatX> out;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto p = point_map(obs.keypoints_3d[i]);
    for (const Vec3& v : backprojection_functionals(obs, i)) {
      out.push_back(linear_to_quadratic(p.transpose() * v));
    }
  }
  return out;
}

std::vector<MatX> build_backprojection_2norm(const ObservationSet& obs) {
  require_size(obs);
  std::vector<MatX> out;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto p = point_map(obs.keypoints_3d[i]);
    const Mat3 g = residual_map(obs, i);
    const double r = obs.radii[i];
    Mat3 inner = g.transpose() * g;
    inner(2, 2) -= r * r;
    out.push_back(symmetrize(p.transpose() * inner * p));
  }
  return out;
}

QuadraticConstraintSet build_rotmat_set(const ObservationSet& obs) {
  obs.validate();
  QuadraticConstraintSet set;
  set.dim = kRotmatDim;
  set.form = SetForm::kRotmat;
  set.homogenization = 0;
  for (const auto& a : build_chirality(obs)) set.add_inequality(a, ConstraintLabel::kChirality);
  if (obs.norm == NormType::kInfinity) {
    for (const auto& a : build_backprojection_inf(obs)) {
      set.add_inequality(a, ConstraintLabel::kBackprojection);
    }
  } else {
    for (const auto& a : build_backprojection_2norm(obs)) {
      set.add_inequality(a, ConstraintLabel::kBp2);
    }
  }
  for (const auto& q : build_so3_equalities()) set.add_equality(q, ConstraintLabel::kSo3);
  set.likely_unbounded = obs.size() < 3;
  return set;
}

QuadraticConstraintSet build_quaternion_set(const ObservationSet& obs,
                                            const Pose& pose_estimate) {
  obs.validate();
  if (obs.norm != NormType::kInfinity) {
    throw InputError("the quaternion form requires infinity-norm radii");
  }
  QuadraticConstraintSet set;
  set.dim = kQuatDim;
  set.form = SetForm::kQuat;
  set.homogenization = 0;

  // v^T (R b + t) = -q^T omega1(v) omega2(b) q + v^T t.
  auto functional = [](const Vec3& v, const Vec3& b) {
    MatX m = MatX::Zero(kQuatDim, kQuatDim);
    const Mat4 qq = omega1(pure_quaternion(v)) * omega2(pure_quaternion(b));
    m.block<4, 4>(1, 1) = -0.5 * (qq + qq.transpose());
    VecX l = VecX::Zero(kQuatDim);
    l.tail<3>() = v;
    return MatX(m + linear_to_quadratic(l));
  };

  for (std::size_t i = 0; i < obs.size(); ++i) {
    set.add_inequality(-functional(Vec3::UnitZ(), obs.keypoints_3d[i]),
                       ConstraintLabel::kChirality);
  }
  for (std::size_t i = 0; i < obs.size(); ++i) {
    for (const Vec3& v : backprojection_functionals(obs, i)) {
      set.add_inequality(functional(v, obs.keypoints_3d[i]),
                         ConstraintLabel::kBackprojection);
    }
  }
  const UnitQuaternion q_bar = UnitQuaternion::from_rotation(pose_estimate.rotation);
  VecX hemi = VecX::Zero(kQuatDim);
  hemi.segment<4>(1) = -q_bar.coeffs();
  set.add_inequality(linear_to_quadratic(hemi), ConstraintLabel::kHemisphere);
  set.hemisphere_reference = q_bar;

  MatX unit = MatX::Zero(kQuatDim, kQuatDim);
  unit.block<4, 4>(1, 1).setIdentity();
  unit(0, 0) = -1.0;
  set.add_equality(unit, ConstraintLabel::kUnitQuat);
  set.likely_unbounded = obs.size() < 3;
  return set;
}

Membership check_membership(const QuadraticConstraintSet& set, const VecX& x,
                            double tol) {
  if (x.size() != set.dim) {
    throw InputError("membership vector has dimension " + std::to_string(x.size()) +
                     ", expected " + std::to_string(set.dim));
  }
  if (std::abs(x(set.homogenization) - 1.0) > 1e-12) {
    throw InputError("membership vector violates the homogenization x_h = 1");
  }
  Membership m;
  m.member = true;
  for (const auto& a : set.inequalities) {
    const double v = x.dot(a * x);
    m.inequality_values.push_back(v);
    m.max_violation = std::max(m.max_violation, v);
    if (!(v <= tol)) m.member = false;
  }
  for (const auto& q : set.equalities) {
    const double v = x.dot(q * x);
    m.equality_values.push_back(v);
    m.max_violation = std::max(m.max_violation, std::abs(v));
    if (!(std::abs(v) <= tol)) m.member = false;
  }
  return m;
}

VecX rotmat_vector(const Pose& pose) {
  VecX x(kRotmatDim);
  x(0) = 1.0;
  x.segment<9>(1) = vec(pose.rotation.matrix());
  x.tail<3>() = pose.translation;
  return x;
}

VecX quat_vector(const Pose& pose, const UnitQuaternion& reference) {
  VecX x(kQuatDim);
  x(0) = 1.0;
  x.segment<4>(1) =
      UnitQuaternion::from_rotation(pose.rotation).aligned_with(reference).coeffs();
  x.tail<3>() = pose.translation;
  return x;
}

VecX pose_vector(const QuadraticConstraintSet& set, const Pose& pose) {
  switch (set.form) {
    case SetForm::kRotmat: return rotmat_vector(pose);
    case SetForm::kQuat: return quat_vector(pose, set.hemisphere_reference);
    case SetForm::kGeneric: break;
  }
  throw InputError("pose_vector needs a rotmat or quaternion constraint set");
}

}  // namespace slue
