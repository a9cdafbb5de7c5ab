#include "slue/projection.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "slue/errors.h"

namespace slue {

std::string to_string(AngularRepresentation r) {
  return r == AngularRepresentation::kSinTheta ? "sin_theta" : "sin_half_theta";
}

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = 180.0 / kPi;

// H^-1 with eigenvalues floored.
MatX floored_inverse(const MatX& h, bool* degenerate) {
  Eigen::SelfAdjointEigenSolver<MatX> es(0.5 * (h + h.transpose()));
  const VecX ev = es.eigenvalues();
  if (degenerate) *degenerate = ev.size() > 0 && ev(0) <= kEigenFloor;
  const VecX inv = ev.cwiseMax(kEigenFloor).cwiseInverse();
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

Mat3 inverse3(const Mat3& s) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (s + s.transpose()));
  const Vec3 inv = es.eigenvalues().cwiseMax(kEigenFloor).cwiseInverse();
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

// Directions in which the marginal shape is (numerically) flat.
std::vector<Vec3> flat_axes(const Mat3& h) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(h);
  std::vector<Vec3> out;
  for (int i = 0; i < 3; ++i) {
    if (es.eigenvalues()(i) <= 1e3 * kEigenFloor) out.push_back(es.eigenvectors().col(i));
  }
  return out;
}

int rotation_size(EllipsoidFrame frame, const EllipsoidBound& joint) {
  if (frame == EllipsoidFrame::kRotmatTranslation && joint.h.rows() == 12) return 9;
  if (frame == EllipsoidFrame::kQuatTranslation && joint.h.rows() == 7) return 4;
  throw InputError("joint bound has frame " + to_string(frame) + " and dimension " +
                   std::to_string(joint.h.rows()) + "; expected a pose frame");
}

void check_joint(const EllipsoidBound& joint) {
  if (joint.h.rows() != joint.h.cols() || joint.center.size() != joint.h.rows()) {
    throw InputError("joint bound has inconsistent dimensions");
  }
  if (!joint.h.allFinite()) throw InputError("joint bound is not finite");
}

}  // namespace

MatX marginal_shape(const MatX& h, int begin, int size, bool* degenerate) {
  if (begin < 0 || size < 1 || begin + size > h.rows()) throw InputError("marginal block out of range");
  const MatX inv = floored_inverse(h, degenerate);
  const MatX s = inv.block(begin, begin, size, size);
  return floored_inverse(s, nullptr);
}

Eigen::Matrix<double, 3, 9> skew_part_map() {
  Eigen::Matrix<double, 3, 9> p = Eigen::Matrix<double, 3, 9>::Zero();
  // vec index 3 j + i holds M(i, j)
  p(0, 5) = 1.0;
  p(0, 7) = -1.0;
  p(1, 6) = 1.0;
  p(1, 2) = -1.0;
  p(2, 1) = 1.0;
  p(2, 3) = -1.0;
  return p;
}

TranslationBound project_translation(const EllipsoidBound& joint) {
  check_joint(joint);
  const int nr = rotation_size(joint.frame, joint);
  TranslationBound t;
  bool degenerate = false;
  t.h_t = marginal_shape(joint.h, nr, 3, &degenerate);
  t.center = joint.center.segment<3>(nr);
  t.degenerate_axes = flat_axes(t.h_t);
  t.degenerate = degenerate && !t.degenerate_axes.empty();
  return t;
}

AngularBound project_axis_angle_rotmat(const EllipsoidBound& joint,
                                       const Rotation& center_rotation) {
  check_joint(joint);
  if (rotation_size(joint.frame, joint) != 9) throw InputError("joint bound is not in rotmat frame");
  bool degenerate = false;
  const MatX inv = floored_inverse(joint.h, &degenerate);
  // vec(R) - vec(R_bar) = (R_bar^T kron I) vec(R_w - I)
  const MatX k = kron(center_rotation.matrix().transpose(), Mat3::Identity());
  const Eigen::Matrix<double, 3, 9> p = skew_part_map();
  const Mat3 s = p * k.transpose() * inv.topLeftCorner(9, 9) * k * p.transpose();
  AngularBound a;
  a.representation = AngularRepresentation::kSinTheta;
  a.center_rotation = center_rotation;
  a.h_theta = 4.0 * inverse3(s);
  const VecX offset = k.transpose() * (joint.center.head<9>() - vec(center_rotation.matrix()));
  a.center = 0.5 * p * offset;
  a.degenerate_axes = flat_axes(a.h_theta);
  a.degenerate = degenerate && !a.degenerate_axes.empty();
  return a;
}

AngularBound project_axis_angle_quat(const EllipsoidBound& joint,
                                     const UnitQuaternion& center_quat) {
  check_joint(joint);
  if (rotation_size(joint.frame, joint) != 4) throw InputError("joint bound is not in quat frame");
  bool degenerate = false;
  const MatX inv = floored_inverse(joint.h, &degenerate);
  // q = omega2(q_bar) q_w, omega2(q_bar) orthogonal
  const Mat4 o = omega2(center_quat.coeffs());
  const Mat4 m_inv = o.transpose() * inv.topLeftCorner(4, 4) * o;
  AngularBound a;
  a.representation = AngularRepresentation::kSinHalfTheta;
  a.center_rotation = quat_to_rotation(center_quat);
  a.h_theta = inverse3(m_inv.bottomRightCorner<3, 3>());
  a.center = (o.transpose() * joint.center.head<4>()).tail<3>();
  a.degenerate_axes = flat_axes(a.h_theta);
  a.degenerate = degenerate && !a.degenerate_axes.empty();
  return a;
}

AngularBound project_axis_angle(const EllipsoidBound& joint) {
  check_joint(joint);
  const int nr = rotation_size(joint.frame, joint);
  if (nr == 9) {
    return project_axis_angle_rotmat(
        joint, Rotation::project(Eigen::Map<const Mat3>(joint.center.data())));
  }
  const Vec4 q = joint.center.head<4>();
  if (!(q.norm() > 0.0)) throw InputError("quaternion center is zero");
  return project_axis_angle_quat(joint, UnitQuaternion(q.normalized()));
}

Vec3 AngularBound::coordinates(const Rotation& r) const {
  const Rotation d = r * center_rotation.inverse();
  if (representation == AngularRepresentation::kSinTheta) return 0.5 * skew_part(d.matrix());
  return UnitQuaternion::from_rotation(d).vec();
}

double AngularBound::value(const Rotation& r) const {
  const Vec3 u = coordinates(r) - center;
  return u.dot(h_theta * u);
}

double translation_volume(const Mat3& h_t) {
  const double det = h_t.determinant();
  if (!(det > 0.0)) return std::numeric_limits<double>::infinity();
  return 4.0 * kPi / 3.0 / std::sqrt(det);
}

BoundVolumes bound_volumes(const TranslationBound& t, const AngularBound& a) {
  for (const Mat3* m : {&t.h_t, &a.h_theta}) {
    if (!m->allFinite()) throw InputError("bound matrix is not finite");
    Eigen::SelfAdjointEigenSolver<Mat3> es(*m);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    if (es.eigenvalues()(0) < -1e-8 * scale) throw InputError("bound matrix is not PSD");
  }
  BoundVolumes v;
  v.translation = translation_volume(t.h_t);
  Eigen::SelfAdjointEigenSolver<Mat3> es(a.h_theta);
  double prod = 1.0;
  for (int i = 0; i < 3; ++i) {
    const double ev = es.eigenvalues()(i);
    const double len = ev > 0.0 ? 1.0 / std::sqrt(ev) : std::numeric_limits<double>::infinity();
    double theta = std::asin(std::min(1.0, len)) * kDeg;
    if (a.representation == AngularRepresentation::kSinHalfTheta) theta *= 2.0;
    theta = std::min(90.0, theta);
    v.angles_deg(i) = theta;
    prod *= theta;
  }
  v.angular = 4.0 * kPi / 3.0 * prod;
  return v;
}

std::vector<Eigen::Vector2d> ellipse_outline(const Mat3& h, const Vec3& center, int i, int j,
                                             int points) {
  if (i < 0 || i > 2 || j < 0 || j > 2 || i == j) throw InputError("bad outline coordinates");
  if (points < 3) throw InputError("outline needs at least three points");
  const Mat3 inv = inverse3(h);
  Eigen::Matrix2d s;
  s << inv(i, i), inv(i, j), inv(j, i), inv(j, j);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(s);
  const Eigen::Matrix2d l =
      es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  std::vector<Eigen::Vector2d> out;
  for (int k = 0; k < points; ++k) {
    const double a = 2.0 * kPi * k / points;
    out.push_back(Eigen::Vector2d(center(i), center(j)) + l * Eigen::Vector2d(std::cos(a), std::sin(a)));
  }
  return out;
}

}  // namespace slue
