#include "slue/pnp.h"

#include <cmath>
#include <iostream>
#include <limits>

#include <Eigen/Dense>

#include "slue/errors.h"
#include "slue/monomial.h"
#include "slue/slue_solver.h"
#include "slue/sos_engine.h"

namespace slue {

std::string to_string(PnpMethod method) {
  switch (method) {
    case PnpMethod::kRelaxationOrder1: return "relaxation_order1";
    case PnpMethod::kRelaxationOrder2: return "relaxation_order2";
    case PnpMethod::kDlt: return "dlt";
  }
  return "dlt";
}

namespace {

std::vector<double> weights(const PnpProblem& problem) {
  const ObservationSet& obs = problem.obs;
  if (obs.keypoints_3d.size() != obs.detections.size()) {
    throw InputError("observation lists have mismatched lengths");
  }
  if (obs.size() < 3) throw InputError("PnP needs at least three keypoints");
  const std::vector<double>& s = problem.sigmas.empty() ? obs.radii : problem.sigmas;
  if (s.size() != obs.size()) throw InputError("need one sigma per keypoint");
  std::vector<double> w;
  for (double v : s) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("sigmas must be positive and finite");
    w.push_back(1.0 / v);
  }
  return w;
}

// Rows of (K - y e3^T) that are not identically zero.
Eigen::Matrix<double, 2, 3> residual_rows(const ObservationSet& obs, std::size_t i) {
  Mat3 g = obs.intrinsics.matrix();
  g.col(2) -= Vec3(obs.detections[i](0), obs.detections[i](1), 1.0);
  return g.topRows<2>();
}

struct Polished {
  Pose pose;
  double cost = 0.0;
};

double cost_at(const ObservationSet& obs, const std::vector<double>& w, const Mat3& r,
               const Vec3& t) {
  double f = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    f += w[i] * (residual_rows(obs, i) * (r * obs.keypoints_3d[i] + t)).squaredNorm();
  }
  return f;
}

Vec3 best_translation(const ObservationSet& obs, const std::vector<double>& w, const Mat3& r) {
  Mat3 a = Mat3::Zero();
  Vec3 b = Vec3::Zero();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const Eigen::Matrix<double, 2, 3> g = residual_rows(obs, i);
    const Mat3 gg = w[i] * g.transpose() * g;
    a += gg;
    b -= gg * (r * obs.keypoints_3d[i]);
  }
  return a.ldlt().solve(b);
}

Mat3 exp_so3(const Vec3& w) {
  const double angle = w.norm();
  if (angle < 1e-300) return Mat3::Identity();
  return rotation_from_axis_angle(w / angle, angle).matrix();
}

// Levenberg-Marquardt on (R, t) with left rotation increments.
Polished polish(const ObservationSet& obs, const std::vector<double>& w, Mat3 r, Vec3 t,
                int iterations) {
  double f = cost_at(obs, w, r, t);
  double lambda = 1e-6;
  for (int it = 0; it < iterations; ++it) {
    Eigen::Matrix<double, 6, 6> jtj = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> jtr = Eigen::Matrix<double, 6, 1>::Zero();
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const Eigen::Matrix<double, 2, 3> g = std::sqrt(w[i]) * residual_rows(obs, i);
      const Vec3 rb = r * obs.keypoints_3d[i];
      const Eigen::Vector2d res = g * (rb + t);
      Eigen::Matrix<double, 2, 6> j;
      j.leftCols<3>() = -g * skew(rb);
      j.rightCols<3>() = g;
      jtj += j.transpose() * j;
      jtr += j.transpose() * res;
    }
    bool improved = false;
    for (int attempt = 0; attempt < 10 && !improved; ++attempt) {
      Eigen::Matrix<double, 6, 6> a = jtj;
      a.diagonal() *= 1.0 + lambda;
      const Eigen::Matrix<double, 6, 1> step = -a.ldlt().solve(jtr);
      const Mat3 r_new = exp_so3(step.head<3>()) * r;
      const Vec3 t_new = t + step.tail<3>();
      const double f_new = cost_at(obs, w, r_new, t_new);
      if (f_new <= f) {
        const double drop = f - f_new;
        r = Rotation::project(r_new).matrix();
        t = t_new;
        f = f_new;
        lambda = std::max(1e-12, lambda * 0.1);
        improved = true;
        if (drop <= 1e-15 * std::max(1.0, f) && step.norm() < 1e-12) it = iterations;
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
  }
  Polished p;
  p.pose.rotation = Rotation::project(r);
  p.pose.translation = t;
  p.cost = cost_at(obs, w, p.pose.rotation.matrix(), t);
  return p;
}

// Pose from a homogeneous vector estimate [s, vec(R) s, t s].
bool pose_from_vector(const VecX& v, Mat3& r, Vec3& t) {
  if (!(std::abs(v(0)) > 1e-9 * v.norm())) return false;
  const VecX x = v / v(0);
  r = Eigen::Map<const Mat3>(x.data() + 1);
  t = x.tail<3>();
  return r.allFinite() && t.allFinite();
}

struct Relaxation {
  bool ok = false;
  double value = 0.0;
  MatX moments;  // 13 x 13
  std::string message;
};

// x_h d_i >= 0 for the keypoint depths d_i = e3^T (R b_i + t).
std::vector<MatX> depth_products(const ObservationSet& obs) {
  VecX e0 = VecX::Zero(kRotmatDim);
  e0(0) = 1.0;
  std::vector<MatX> g;
  for (const Vec3& b : obs.keypoints_3d) {
    VecX d = VecX::Zero(kRotmatDim);
    for (int col = 0; col < 3; ++col) d(1 + 3 * col + 2) = b(col);
    d(12) = 1.0;
    const MatX m = e0 * d.transpose() + d * e0.transpose();
    g.push_back(m / m.norm());
  }
  return g;
}

// max gamma  s.t.  x_h^(2k) (x^T C x - gamma x_h^2)
//                    = sigma + sum_j mu_j q_j + sum_i s_i g_i,  s_i SOS of degree 2k.
Relaxation solve_relaxation(const MatX& c, const std::vector<MatX>& positive, int kappa,
                            const sdp::Settings& settings) {
  const int n = kRotmatDim;
  std::vector<MatX> eqs = build_so3_equalities();
  for (const MatX& q : build_row_orthonormality()) eqs.push_back(q);
  const MonomialBasis mb = monomial_basis(n, kappa);
  const MonomialBasis sb = monomial_basis(n, kappa + 1);
  const MonomialBasis top = monomial_basis(n, 2 * kappa + 2);
  const MonomialKey base = pure_power(0, 2 * kappa);

  sdp::Problem prob(top.dim);
  for (int c1 = 0; c1 < n; ++c1) {
    for (int d = 0; d < n; ++d) {
      if (c(c1, d) != 0.0) {
        const int k = top.index(base + pure_power(c1, 1) + pure_power(d, 1));
        prob.set_rhs(k, prob.rhs()(k) + c(c1, d));
      }
    }
  }
  const int gamma = prob.add_free_variable();
  prob.add_free_term(top.index(pure_power(0, 2 * kappa + 2)), gamma, 1.0);
  prob.add_free_objective(gamma, -1.0);
  for (const MatX& q : eqs) {
    const MatX qn = q / q.norm();
    for (int a = 0; a < mb.dim; ++a) {
      for (int b = a; b < mb.dim; ++b) {
        const int f = prob.add_free_variable();
        const MonomialKey mab = mb.keys[a] + mb.keys[b];
        for (int c1 = 0; c1 < n; ++c1) {
          for (int d = 0; d < n; ++d) {
            if (qn(c1, d) == 0.0) continue;
            prob.add_free_term(top.index(mab + pure_power(c1, 1) + pure_power(d, 1)), f,
                               (a == b ? 1.0 : 2.0) * qn(c1, d));
          }
        }
      }
    }
  }
  // localizing blocks: sum_ab L_ab m_a m_b g_i with L PSD
  std::vector<int> multipliers;
  for (const MatX& g : positive) {
    const int blk = prob.add_psd_block(mb.dim);
    multipliers.push_back(blk);
    for (int a = 0; a < mb.dim; ++a) {
      for (int b = a; b < mb.dim; ++b) {
        const MonomialKey mab = mb.keys[a] + mb.keys[b];
        for (int c1 = 0; c1 < n; ++c1) {
          for (int d = 0; d < n; ++d) {
            if (g(c1, d) == 0.0) continue;
            prob.add_term(top.index(mab + pure_power(c1, 1) + pure_power(d, 1)), blk, a, b,
                          (a == b ? 1.0 : 2.0) * g(c1, d));
          }
        }
      }
    }
  }
  std::vector<int> keep = reduced_basis_indices(sb, eqs);
  keep = prune_gram_basis(sb, keep, prob.constraint_support(multipliers), top);
  const int s = prob.add_psd_block(static_cast<int>(keep.size()));
  for (std::size_t a = 0; a < keep.size(); ++a) {
    for (std::size_t b = a; b < keep.size(); ++b) {
      const int k = top.index(sb.keys[keep[a]] + sb.keys[keep[b]]);
      prob.add_term(k, s, static_cast<int>(a), static_cast<int>(b), a == b ? 1.0 : 2.0);
    }
  }

  const sdp::Solution sol = sdp::solve(prob, settings);
  Relaxation r;
  r.ok = sol.status == sdp::Status::kOptimal || sol.status == sdp::Status::kInaccurate;
  r.message = sdp::to_string(sol.status);
  r.value = sol.free.size() > 0 ? sol.free(gamma) : 0.0;
  // moments L(m_k) = -y_k
  r.moments = MatX::Zero(n, n);
  for (int c1 = 0; c1 < n; ++c1) {
    for (int d = 0; d < n; ++d) {
      r.moments(c1, d) = -sol.y(top.index(base + pure_power(c1, 1) + pure_power(d, 1)));
    }
  }
  return r;
}

}  // namespace

MatX pnp_cost_matrix(const PnpProblem& problem) {
  const std::vector<double> w = weights(problem);
  MatX c = MatX::Zero(kRotmatDim, kRotmatDim);
  for (std::size_t i = 0; i < problem.obs.size(); ++i) {
    // p = L x with L = [0, b^T kron I, I]
    Eigen::Matrix<double, 3, kRotmatDim> l = Eigen::Matrix<double, 3, kRotmatDim>::Zero();
    const Vec3& b = problem.obs.keypoints_3d[i];
    for (int col = 0; col < 3; ++col) l.block<3, 3>(0, 1 + 3 * col) = b(col) * Mat3::Identity();
    l.block<3, 3>(0, 10) = Mat3::Identity();
    const Eigen::Matrix<double, 2, kRotmatDim> g = residual_rows(problem.obs, i) * l;
    c += w[i] * g.transpose() * g;
  }
  return 0.5 * (c + c.transpose());
}

double pnp_objective(const PnpProblem& problem, const Pose& pose) {
  return cost_at(problem.obs, weights(problem), pose.rotation.matrix(), pose.translation);
}

PnpResult pnp_estimate(const PnpProblem& problem, const PnpSettings& settings) {
  const std::vector<double> w = weights(problem);
  const ObservationSet& obs = problem.obs;
  if (obs.size() == 3) std::cerr << "warning: PnP with three keypoints may be ambiguous\n";
  const MatX c = pnp_cost_matrix(problem);
  const double scale = c.norm() > 0.0 ? c.norm() : 1.0;
  const MatX cn = c / scale;
  const std::vector<MatX> positive = depth_products(obs);

  PnpResult best;
  best.tightness = std::numeric_limits<double>::infinity();
  best.objective = std::numeric_limits<double>::infinity();
  bool have = false;
  for (int order = 1; order <= std::max(1, settings.max_order); ++order) {
    const Relaxation rel = solve_relaxation(cn, positive, order - 1, settings.sdp);
    if (!rel.ok) {
      best.message += "order " + std::to_string(order) + " relaxation " + rel.message + "; ";
      continue;
    }
    Eigen::SelfAdjointEigenSolver<MatX> es(rel.moments);
    const VecX v = es.eigenvectors().col(kRotmatDim - 1);
    Mat3 r;
    Vec3 t;
    if (!pose_from_vector(v, r, t)) continue;
    const Mat3 rp = Rotation::project(r).matrix();
    const Polished p = polish(obs, w, rp, best_translation(obs, w, rp), settings.polish_iterations);
    const double f = p.cost / scale;
    const double gap = std::max(0.0, f - rel.value) / std::max(1.0, f);
    if (!have || gap < best.tightness) {
      best.pose = p.pose;
      best.objective = f;
      best.relaxation_value = rel.value;
      best.tightness = gap;
      best.order = order;
      best.method = order == 1 ? PnpMethod::kRelaxationOrder1 : PnpMethod::kRelaxationOrder2;
      have = true;
    }
    if (gap <= settings.gap_tolerance) break;
  }
  if (!have) {
    // DLT: null vector of the homogeneous system in (vec(R), t)
    Eigen::SelfAdjointEigenSolver<MatX> es(cn.bottomRightCorner(12, 12));
    const VecX v = es.eigenvectors().col(0);
    Mat3 r = Eigen::Map<const Mat3>(v.data());
    double det = r.determinant();
    if (det < 0.0) {
      r = -r;
      det = -det;
    }
    const Mat3 rp = Rotation::project(r).matrix();
    const Polished p = polish(obs, w, rp, best_translation(obs, w, rp), settings.polish_iterations);
    best.pose = p.pose;
    best.objective = p.cost / scale;
    best.method = PnpMethod::kDlt;
    best.order = 0;
    best.message += "fell back to DLT";
  }
  return best;
}

}  // namespace slue
