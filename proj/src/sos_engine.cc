#include "slue/sos_engine.h"

#include <array>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <mutex>
#include <unordered_map>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "slue/errors.h"

namespace slue {

std::string to_string(EllipsoidFrame frame) {
  switch (frame) {
    case EllipsoidFrame::kRotmatTranslation: return "rotmat_translation";
    case EllipsoidFrame::kQuatTranslation: return "quat_translation";
    case EllipsoidFrame::kGeneric: return "generic";
  }
  return "generic";
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOk: return "ok";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kNumerical: return "numerical";
  }
  return "numerical";
}

double EllipsoidBound::logdet() const {
  Eigen::SelfAdjointEigenSolver<MatX> es(h, Eigen::EigenvaluesOnly);
  const VecX ev = es.eigenvalues();
  if (ev.size() == 0 || ev(0) <= 0.0) return -std::numeric_limits<double>::infinity();
  return ev.array().log().sum();
}

double EllipsoidBound::value(const VecX& z) const {
  if (z.size() != center.size()) throw InputError("point dimension does not match ellipsoid");
  const VecX d = z - center;
  return d.dot(h * d);
}

std::vector<int> reduced_basis_indices(const MonomialBasis& basis,
                                       const std::vector<MatX>& equalities) {
  std::vector<int> all(basis.dim);
  for (int i = 0; i < basis.dim; ++i) all[i] = i;
  if (basis.kappa < 2 || equalities.empty()) return all;
  const MonomialBasis lower = monomial_basis(basis.n, basis.kappa - 2);
  MatX gens = MatX::Zero(static_cast<Eigen::Index>(lower.dim * equalities.size()), basis.dim);
  int row = 0;
  for (const MatX& q : equalities) {
    for (int a = 0; a < lower.dim; ++a, ++row) {
      for (int c = 0; c < basis.n; ++c) {
        for (int d = 0; d < basis.n; ++d) {
          if (q(c, d) == 0.0) continue;
          const int col = basis.index(lower.keys[a] + pure_power(c, 1) + pure_power(d, 1));
          gens(row, col) += q(c, d);
        }
      }
    }
  }
  Eigen::ColPivHouseholderQR<MatX> qr(gens);
  qr.setThreshold(1e-10);
  std::vector<bool> drop(basis.dim, false);
  for (Eigen::Index i = 0; i < qr.rank(); ++i) drop[qr.colsPermutation().indices()(i)] = true;
  std::vector<int> keep;
  for (int i = 0; i < basis.dim; ++i) {
    if (!drop[i]) keep.push_back(i);
  }
  return keep;
}

std::vector<int> prune_gram_basis(const MonomialBasis& sb, std::vector<int> keep,
                                  const std::vector<char>& used, const MonomialBasis& top) {
  for (bool changed = true; changed;) {
    changed = false;
    std::unordered_map<MonomialKey, int> pair_count;
    for (std::size_t a = 0; a < keep.size(); ++a) {
      for (std::size_t b = a + 1; b < keep.size(); ++b) {
        ++pair_count[sb.keys[keep[a]] + sb.keys[keep[b]]];
      }
    }
    std::vector<int> next;
    for (int m : keep) {
      const MonomialKey sq = sb.keys[m] + sb.keys[m];
      if (used[top.index(sq)] || pair_count.count(sq)) {
        next.push_back(m);
      } else {
        changed = true;
      }
    }
    keep = std::move(next);
  }
  return keep;
}

bool is_affine_constraint(const MatX& a, int homogenization) {
  bool any = false;
  for (int c = 0; c < a.rows(); ++c) {
    for (int d = 0; d < a.cols(); ++d) {
      if (a(c, d) == 0.0) continue;
      if (c != homogenization && d != homogenization) return false;
      any = true;
    }
  }
  return any;
}

namespace {

VecX affine_coefficients(const MatX& a, int h) {
  VecX l = a.row(h).transpose() + a.col(h);
  l(h) = a(h, h);
  return l;
}

// T^-1: x_h = x'_h, z = c x_h + W^-1 z'. Built directly so that rows of
// T^-1 at x_h stay exactly e_h and affine constraints stay affine.
MatX frame_inverse(const MatX& t, int h) {
  const int dim = static_cast<int>(t.rows());
  std::vector<int> coords;
  for (int i = 0; i < dim; ++i) {
    if (i != h) coords.push_back(i);
  }
  const int d = dim - 1;
  MatX w(d, d);
  VecX w0(d);
  for (int p = 0; p < d; ++p) {
    w0(p) = t(coords[p], h);
    for (int q = 0; q < d; ++q) w(p, q) = t(coords[p], coords[q]);
  }
  const MatX w_inv = w.inverse();
  const VecX c = -w_inv * w0;
  MatX t_inv = MatX::Zero(dim, dim);
  t_inv(h, h) = 1.0;
  for (int p = 0; p < d; ++p) {
    t_inv(coords[p], h) = c(p);
    for (int q = 0; q < d; ++q) t_inv(coords[p], coords[q]) = w_inv(p, q);
  }
  return t_inv;
}

}  // namespace

MatX affine_product(const MatX& a_i, const MatX& a_j, int homogenization) {
  if (!is_affine_constraint(a_i, homogenization) || !is_affine_constraint(a_j, homogenization)) {
    throw InputError("affine_product needs two affine constraints");
  }
  const VecX li = affine_coefficients(a_i, homogenization);
  const VecX lj = affine_coefficients(a_j, homogenization);
  return -0.5 * (li * lj.transpose() + lj * li.transpose());
}

namespace {

struct Reduction {
  std::vector<int> lambda_keep;
  std::vector<int> slack_keep;
  std::vector<int> free_keep;
  bool has_free_keep = false;
};

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

std::unordered_map<std::string, Reduction>& cache() {
  static std::unordered_map<std::string, Reduction> c;
  return c;
}

std::string cache_key(const QuadraticConstraintSet& set, int kappa) {
  std::string key = std::to_string(set.dim) + ":" + std::to_string(kappa) + ":" +
                    std::to_string(set.homogenization) + ":";
  for (const MatX& q : set.equalities) {
    const auto* p = reinterpret_cast<const char*>(q.data());
    key.append(p, sizeof(double) * q.size());
  }
  return key;
}

struct Layout {
  int n = 0;
  int d = 0;
  int kappa = 0;
  std::vector<int> coords;
  std::vector<int> hsub;
  MonomialBasis mb;
  MonomialBasis sb;
  std::vector<int> lambda_keep;
  std::vector<int> slack_keep;
  // (equality, a, b) per free variable
  std::vector<std::array<int, 3>> free_vars;
  std::vector<double> ineq_scale;
  std::vector<double> eq_scale;
  std::vector<std::array<int, 2>> product_pairs;
  std::vector<double> product_scale;
  int first_product = 0;
  int h_block = 0;
  int first_lambda = 1;
  int s_block = 0;
};

struct Nonzero {
  int c;
  int d;
  double v;
};

std::vector<Nonzero> nonzeros(const MatX& a) {
  std::vector<Nonzero> out;
  for (int c = 0; c < a.rows(); ++c) {
    for (int d = 0; d < a.cols(); ++d) {
      if (a(c, d) != 0.0) out.push_back({c, d, a(c, d)});
    }
  }
  return out;
}

void validate_inputs(const QuadraticConstraintSet& set, const VecX& center, int kappa,
                     const EllipsoidObjective& objective) {
  if (set.dim < 2) throw InputError("constraint set needs at least two coordinates");
  if (set.homogenization < 0 || set.homogenization >= set.dim) {
    throw InputError("homogenizing coordinate out of range");
  }
  if (center.size() != set.dim - 1) {
    throw InputError("center must have " + std::to_string(set.dim - 1) + " entries");
  }
  if (kappa < 0) throw InputError("kappa must be nonnegative");
  if (objective.subblock &&
      (objective.begin < 0 || objective.end > set.dim - 1 || objective.begin >= objective.end)) {
    throw InputError("sub-block range out of bounds");
  }
  for (const MatX& a : set.inequalities) {
    if (a.rows() != set.dim || a.cols() != set.dim) throw InputError("constraint has wrong dimension");
  }
  for (const MatX& q : set.equalities) {
    if (q.rows() != set.dim || q.cols() != set.dim) throw InputError("constraint has wrong dimension");
  }
}

MatX center_map(const Layout& lay, const VecX& center, int homogenization) {
  MatX c = MatX::Zero(lay.d, lay.n);
  for (int p = 0; p < lay.d; ++p) {
    c(p, homogenization) = -center(p);
    c(p, lay.coords[p]) = 1.0;
  }
  return c;
}

sdp::Problem build(const QuadraticConstraintSet& set, const VecX& center, int kappa,
                   const EllipsoidObjective& objective, bool affine_products, Layout& lay) {
  validate_inputs(set, center, kappa, objective);
  const int h = set.homogenization;
  lay.n = set.dim;
  lay.d = set.dim - 1;
  lay.kappa = kappa;
  for (int i = 0; i < set.dim; ++i) {
    if (i != h) lay.coords.push_back(i);
  }
  if (objective.subblock) {
    for (int p = objective.begin; p < objective.end; ++p) lay.hsub.push_back(p);
  } else {
    for (int p = 0; p < lay.d; ++p) lay.hsub.push_back(p);
  }

  QuadraticConstraintSet norm = set;
  for (auto& a : norm.inequalities) {
    const double f = a.norm();
    lay.ineq_scale.push_back(f > 0.0 ? f : 1.0);
    a /= lay.ineq_scale.back();
  }
  for (auto& q : norm.equalities) {
    const double f = q.norm();
    lay.eq_scale.push_back(f > 0.0 ? f : 1.0);
    q /= lay.eq_scale.back();
  }

  lay.mb = monomial_basis(lay.n, kappa);
  lay.sb = monomial_basis(lay.n, kappa + 1);
  const MonomialBasis top = monomial_basis(lay.n, 2 * kappa + 2);

  const std::string key = cache_key(norm, kappa);
  Reduction red;
  bool cached = false;
  {
    std::lock_guard<std::mutex> lock(cache_mutex());
    const auto it = cache().find(key);
    if (it != cache().end()) {
      red = it->second;
      cached = true;
    }
  }
  if (!cached) {
    red.lambda_keep = reduced_basis_indices(lay.mb, norm.equalities);
    red.slack_keep = reduced_basis_indices(lay.sb, norm.equalities);
  }
  lay.lambda_keep = red.lambda_keep;
  lay.slack_keep = red.slack_keep;

  sdp::Problem prob(top.dim);

  lay.h_block = prob.add_psd_block(static_cast<int>(lay.hsub.size()), 1.0);
  {
    const MonomialKey base = pure_power(h, 2 * kappa);
    const MatX cm = center_map(lay, center, h);
    const int s = static_cast<int>(lay.hsub.size());
    for (int p = 0; p < s; ++p) {
      for (int q = 0; q < s; ++q) {
        const int gp = lay.hsub[p];
        const int gq = lay.hsub[q];
        for (int c : {h, lay.coords[gp]}) {
          for (int d : {h, lay.coords[gq]}) {
            const double v = cm(gp, c) * cm(gq, d);
            if (v == 0.0) continue;
            const int k = top.index(base + pure_power(c, 1) + pure_power(d, 1));
            prob.add_term(k, lay.h_block, p, q, -v);
          }
        }
      }
    }
  }

  lay.first_lambda = prob.num_blocks();
  const int lk = static_cast<int>(lay.lambda_keep.size());
  for (const MatX& a : norm.inequalities) {
    const int blk = prob.add_psd_block(lk);
    const auto nz = nonzeros(a);
    for (int ia = 0; ia < lk; ++ia) {
      const MonomialKey ma = lay.mb.keys[lay.lambda_keep[ia]];
      for (int ib = 0; ib < lk; ++ib) {
        const MonomialKey mab = ma + lay.mb.keys[lay.lambda_keep[ib]];
        for (const Nonzero& e : nz) {
          const int k = top.index(mab + pure_power(e.c, 1) + pure_power(e.d, 1));
          prob.add_term(k, blk, ia, ib, e.v);
        }
      }
    }
  }

  lay.first_product = prob.num_blocks();
  if (affine_products) {
    std::vector<int> affine;
    for (std::size_t i = 0; i < norm.inequalities.size(); ++i) {
      if (is_affine_constraint(norm.inequalities[i], h)) affine.push_back(static_cast<int>(i));
    }
    const MonomialKey base = pure_power(h, 2 * kappa);
    for (std::size_t a = 0; a < affine.size(); ++a) {
      for (std::size_t b = a + 1; b < affine.size(); ++b) {
        MatX p = affine_product(norm.inequalities[affine[a]], norm.inequalities[affine[b]], h);
        const double f = p.norm();
        if (f == 0.0) continue;
        p /= f;
        lay.product_pairs.push_back({affine[a], affine[b]});
        lay.product_scale.push_back(f * lay.ineq_scale[affine[a]] * lay.ineq_scale[affine[b]]);
        const int blk = prob.add_psd_block(1);
        for (const Nonzero& e : nonzeros(p)) {
          prob.add_term(top.index(base + pure_power(e.c, 1) + pure_power(e.d, 1)), blk, 0, 0, e.v);
        }
      }
    }
  }

  for (std::size_t j = 0; j < norm.equalities.size(); ++j) {
    const auto nz = nonzeros(norm.equalities[j]);
    for (int a = 0; a < lay.mb.dim; ++a) {
      for (int b = a; b < lay.mb.dim; ++b) {
        const int f = prob.add_free_variable();
        lay.free_vars.push_back({static_cast<int>(j), a, b});
        const MonomialKey mab = lay.mb.keys[a] + lay.mb.keys[b];
        const double mult = a == b ? 1.0 : 2.0;
        for (const Nonzero& e : nz) {
          const int k = top.index(mab + pure_power(e.c, 1) + pure_power(e.d, 1));
          prob.add_free_term(k, f, mult * e.v);
        }
      }
    }
  }

  prob.set_rhs(top.index(pure_power(h, 2 * kappa + 2)), -1.0);

  std::vector<int> others(prob.num_blocks());
  for (int b = 0; b < prob.num_blocks(); ++b) others[b] = b;
  const std::vector<char> used = prob.constraint_support(others);
  lay.slack_keep = prune_gram_basis(lay.sb, lay.slack_keep, used, top);

  lay.s_block = prob.add_psd_block(static_cast<int>(lay.slack_keep.size()));
  for (std::size_t ia = 0; ia < lay.slack_keep.size(); ++ia) {
    for (std::size_t ib = 0; ib < lay.slack_keep.size(); ++ib) {
      const int k = top.index(lay.sb.keys[lay.slack_keep[ia]] + lay.sb.keys[lay.slack_keep[ib]]);
      prob.add_term(k, lay.s_block, static_cast<int>(ia), static_cast<int>(ib), -1.0);
    }
  }

  if (!cached) {
    red.free_keep = prob.independent_free_columns();
    red.has_free_keep = true;
    std::lock_guard<std::mutex> lock(cache_mutex());
    cache().emplace(key, red);
  }
  prob.set_free_basis(red.free_keep);
  return prob;
}

MatX embed(const MatX& small, const std::vector<int>& idx, int dim) {
  MatX out = MatX::Zero(dim, dim);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = 0; b < idx.size(); ++b) out(idx[a], idx[b]) = small(a, b);
  }
  return out;
}

}  // namespace

sdp::Problem assemble_ellipsoid_lmi(const QuadraticConstraintSet& set, const VecX& center,
                                    int kappa, const EllipsoidObjective& objective,
                                    bool affine_products) {
  Layout lay;
  return build(set, center, kappa, objective, affine_products, lay);
}

double sos_identity_residual(const QuadraticConstraintSet& original,
                             const EllipsoidBound& original_bound, const SosCertificate& cert) {
  QuadraticConstraintSet set = original;
  EllipsoidBound bound = original_bound;
  if (cert.frame.size() > 0) {
    const MatX& t = cert.frame;
    if (t.rows() != set.dim || t.cols() != set.dim) {
      throw InputError("certificate frame does not match the constraint set");
    }
    const MatX t_inv = frame_inverse(t, set.homogenization);
    for (auto& a : set.inequalities) a = t_inv.transpose() * a * t_inv;
    for (auto& q : set.equalities) q = t_inv.transpose() * q * t_inv;
    // z' = W z + w0 x_h
    const int h = set.homogenization;
    std::vector<int> coords;
    for (int i = 0; i < set.dim; ++i) {
      if (i != h) coords.push_back(i);
    }
    const int d = set.dim - 1;
    MatX w(d, d);
    VecX w0(d);
    for (int p = 0; p < d; ++p) {
      w0(p) = t(coords[p], h);
      for (int q = 0; q < d; ++q) w(p, q) = t(coords[p], coords[q]);
    }
    const MatX w_inv = w.inverse();
    bound.center = w * original_bound.center + w0;
    bound.h = w_inv.transpose() * original_bound.h * w_inv;
  }
  const int n = set.dim;
  const int h = set.homogenization;
  const int kappa = cert.kappa;
  if (cert.lambda_mats.size() != set.inequalities.size() ||
      cert.mu_mats.size() != set.equalities.size()) {
    throw InputError("certificate does not match the constraint set");
  }
  const MonomialBasis mb = monomial_basis(n, kappa);
  const MonomialBasis sb = monomial_basis(n, kappa + 1);
  Polynomial res;
  for (std::size_t i = 0; i < set.inequalities.size(); ++i) {
    poly_add_scaled(res, poly_multiply(gram_to_polynomial(mb, cert.lambda_mats[i]),
                                       quadratic_form_polynomial(set.inequalities[i])), 1.0);
  }
  for (std::size_t j = 0; j < set.equalities.size(); ++j) {
    poly_add_scaled(res, poly_multiply(gram_to_polynomial(mb, cert.mu_mats[j]),
                                       quadratic_form_polynomial(set.equalities[j])), 1.0);
  }
  if (cert.product_pairs.size() != cert.product_multipliers.size()) {
    throw InputError("certificate product multipliers do not match their pairs");
  }
  Polynomial base;
  base[pure_power(h, 2 * kappa)] = 1.0;
  for (std::size_t k = 0; k < cert.product_pairs.size(); ++k) {
    const auto [i, j] = cert.product_pairs[k];
    const MatX pm = affine_product(set.inequalities.at(i), set.inequalities.at(j), h);
    poly_add_scaled(res, poly_multiply(base, quadratic_form_polynomial(pm)),
                    cert.product_multipliers[k]);
  }
  MatX c = MatX::Zero(n - 1, n);
  int p = 0;
  for (int i = 0; i < n; ++i) {
    if (i == h) continue;
    c(p, h) = -bound.center(p);
    c(p, i) = 1.0;
    ++p;
  }
  Polynomial xh_pow;
  xh_pow[pure_power(h, 2 * kappa)] = 1.0;
  const MatX w = c.transpose() * bound.h * c;
  poly_add_scaled(res, poly_multiply(xh_pow, quadratic_form_polynomial(w)), -1.0);
  poly_add_scaled(res, gram_to_polynomial(sb, cert.slack_mat), -1.0);
  res[pure_power(h, 2 * kappa + 2)] += 1.0;
  return max_abs_coefficient(res);
}

namespace {

// Solve in the coordinates of `set` as given; no residual check.
EngineResult solve_direct(const QuadraticConstraintSet& set, const VecX& center, int kappa,
                          const EllipsoidObjective& objective, const EngineSettings& settings) {
  Layout lay;
  const sdp::Problem prob = build(set, center, kappa, objective, settings.affine_products, lay);
  const sdp::Solution sol = sdp::solve(prob, settings.sdp);

  EngineResult res;
  res.solver_status = sol.status;
  res.iterations = sol.iterations;
  res.solver_infeasibility = std::max(sol.primal_infeasibility, sol.dual_infeasibility);
  res.bound.center = center;
  if (set.form == SetForm::kRotmat) res.bound.frame = EllipsoidFrame::kRotmatTranslation;
  if (set.form == SetForm::kQuat) res.bound.frame = EllipsoidFrame::kQuatTranslation;

  const MatX& xh = sol.x[lay.h_block];
  Eigen::SelfAdjointEigenSolver<MatX> es(xh);
  const VecX ev = es.eigenvalues();
  const double lmin = ev(0);
  const double lmax = ev(ev.size() - 1);

  MatX hsub = xh;
  if (lmin < 0.0 && lmin >= -settings.psd_tolerance) {
    VecX clipped = ev.cwiseMax(0.0);
    hsub = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
  }
  res.bound.h = embed(hsub, lay.hsub, lay.d);

  res.certificate.kappa = kappa;
  for (std::size_t i = 0; i < set.inequalities.size(); ++i) {
    res.certificate.lambda_mats.push_back(
        embed(sol.x[lay.first_lambda + i], lay.lambda_keep, lay.mb.dim) / lay.ineq_scale[i]);
  }
  for (std::size_t j = 0; j < set.equalities.size(); ++j) {
    res.certificate.mu_mats.push_back(MatX::Zero(lay.mb.dim, lay.mb.dim));
  }
  for (std::size_t f = 0; f < lay.free_vars.size(); ++f) {
    const auto [j, a, b] = lay.free_vars[f];
    const double v = sol.free(f) / lay.eq_scale[j];
    res.certificate.mu_mats[j](a, b) += v;
    if (a != b) res.certificate.mu_mats[j](b, a) += v;
  }
  res.certificate.slack_mat = embed(sol.x[lay.s_block], lay.slack_keep, lay.sb.dim);
  res.certificate.product_pairs = lay.product_pairs;
  for (std::size_t p = 0; p < lay.product_pairs.size(); ++p) {
    res.certificate.product_multipliers.push_back(sol.x[lay.first_product + p](0, 0) /
                                                  lay.product_scale[p]);
  }

  const bool solved = sol.status == sdp::Status::kOptimal || sol.status == sdp::Status::kInaccurate;
  if (solved && lmin > 0.0 && lmin >= 1e-6 * lmax) {
    res.status = SolveStatus::kOk;
  } else if (lmax > 1e10) {
    res.status = SolveStatus::kNumerical;
    for (int i = 0; i < ev.size(); ++i) {
      if (ev(i) > 1e-4 * lmax) {
        VecX axis = VecX::Zero(lay.d);
        for (std::size_t a = 0; a < lay.hsub.size(); ++a) axis(lay.hsub[a]) = es.eigenvectors()(a, i);
        res.degenerate_axes.push_back(axis);
      }
    }
    res.message = "log det unbounded: set is flat along " +
                  std::to_string(res.degenerate_axes.size()) + " degenerate axes";
  } else if (lmin < 1e-6 * std::max(1.0, lmax)) {
    res.status = SolveStatus::kUnbounded;
    for (int i = 0; i < ev.size(); ++i) {
      if (ev(i) < 1e-6 * std::max(1.0, lmax)) {
        VecX axis = VecX::Zero(lay.d);
        for (std::size_t a = 0; a < lay.hsub.size(); ++a) axis(lay.hsub[a]) = es.eigenvectors()(a, i);
        res.degenerate_axes.push_back(axis);
      }
    }
    res.message = "constraint set unbounded in some direction";
    if (set.likely_unbounded) res.message += " (fewer than three keypoints)";
  } else if (sol.status == sdp::Status::kDiverging) {
    res.status = SolveStatus::kInfeasible;
    res.message = "no ellipsoid certified at this order";
  } else {
    res.status = SolveStatus::kNumerical;
    res.message = "solver status " + sdp::to_string(sol.status) +
                  (sol.message.empty() ? "" : ": " + sol.message);
  }

  return res;
}

QuadraticConstraintSet transform_set(const QuadraticConstraintSet& set, const MatX& t_inv) {
  QuadraticConstraintSet out = set;
  for (auto& a : out.inequalities) a = t_inv.transpose() * a * t_inv;
  for (auto& q : out.equalities) q = t_inv.transpose() * q * t_inv;
  return out;
}

MatX sqrt_spd(const MatX& a) {
  Eigen::SelfAdjointEigenSolver<MatX> es(a);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

// Whitening of the coordinates from a rough joint ellipsoid, block diagonal
// with respect to a sub-block objective.
MatX whitening(const MatX& h_rough, const EllipsoidObjective& objective) {
  const int d = static_cast<int>(h_rough.rows());
  Eigen::SelfAdjointEigenSolver<MatX> es(h_rough, Eigen::EigenvaluesOnly);
  if (!h_rough.allFinite() || es.eigenvalues()(0) <= 0.0) return MatX::Identity(d, d);
  if (!objective.subblock) return sqrt_spd(h_rough);
  MatX w = MatX::Zero(d, d);
  std::vector<int> in, out;
  for (int p = 0; p < d; ++p) (p >= objective.begin && p < objective.end ? in : out).push_back(p);
  for (const auto* idx : {&in, &out}) {
    if (idx->empty()) continue;
    MatX sub(idx->size(), idx->size());
    for (std::size_t a = 0; a < idx->size(); ++a) {
      for (std::size_t b = 0; b < idx->size(); ++b) sub(a, b) = h_rough((*idx)[a], (*idx)[b]);
    }
    const MatX r = sqrt_spd(sub);
    for (std::size_t a = 0; a < idx->size(); ++a) {
      for (std::size_t b = 0; b < idx->size(); ++b) w((*idx)[a], (*idx)[b]) = r(a, b);
    }
  }
  return w;
}

// x' = T x with x'_h = x_h and z' = W (z - c x_h).
MatX frame_matrix(const VecX& center, const MatX& w, int dim, int h) {
  MatX t = MatX::Zero(dim, dim);
  t(h, h) = 1.0;
  std::vector<int> coords;
  for (int i = 0; i < dim; ++i) {
    if (i != h) coords.push_back(i);
  }
  const VecX wc = w * center;
  for (std::size_t p = 0; p < coords.size(); ++p) {
    t(coords[p], h) = -wc(p);
    for (std::size_t q = 0; q < coords.size(); ++q) t(coords[p], coords[q]) = w(p, q);
  }
  return t;
}

EngineResult solve_in_frame(const QuadraticConstraintSet& set, const VecX& center, int kappa,
                            const EllipsoidObjective& objective, const EngineSettings& settings,
                            const MatX& w) {
  const int h = set.homogenization;
  const MatX t = frame_matrix(center, w, set.dim, h);
  const MatX t_inv = frame_inverse(t, h);
  EngineResult r = solve_direct(transform_set(set, t_inv), VecX::Zero(center.size()), kappa,
                                objective, settings);
  r.bound.h = w.transpose() * r.bound.h * w;
  r.bound.center = center;
  const MatX w_inv = w.inverse();
  for (VecX& axis : r.degenerate_axes) axis = (w_inv * axis).normalized();

  r.certificate.frame = t;
  return r;
}

}  // namespace

EngineResult solve_min_volume_ellipsoid(const QuadraticConstraintSet& set, const VecX& center,
                                        int kappa, const EllipsoidObjective& objective,
                                        const EngineSettings& settings) {
  const auto start = std::chrono::steady_clock::now();
  validate_inputs(set, center, kappa, objective);
  const int d = set.dim - 1;
  MatX w = MatX::Identity(d, d);
  if (settings.prescale_iterations > 0) {
    EngineSettings rough = settings;
    rough.sdp.max_iterations = settings.prescale_iterations;
    rough.sdp.tolerance = 1e-3;
    rough.sdp.restarts = 0;
    MatX h_rough;
    // a rough solve stuck far from feasibility gives a useless frame; an
    // open duality gap is fine
    const auto usable = [](const EngineResult& r) {
      if (r.solver_status == sdp::Status::kOptimal || r.solver_status == sdp::Status::kInaccurate) {
        return true;
      }
      return r.solver_status == sdp::Status::kMaxIterations && r.solver_infeasibility < 1e-3;
    };
    if (kappa > 0) {
      const EngineResult low =
          solve_in_frame(set, center, 0, EllipsoidObjective::joint(), rough, w);
      if (low.status == SolveStatus::kOk) h_rough = low.bound.h;
    }
    if (h_rough.size() == 0) {
      const EngineResult same =
          solve_in_frame(set, center, kappa, EllipsoidObjective::joint(), rough, w);
      if (usable(same)) h_rough = same.bound.h;
    }
    if (h_rough.size() > 0) w = whitening(h_rough, objective);
  }
  EngineResult res = solve_in_frame(set, center, kappa, objective, settings, w);
  // an unbounded verdict from a badly scaled frame is retried in the frame of
  // the returned ellipsoid while that is still positive definite
  for (int round = 0; round < settings.rescale_rounds; ++round) {
    const bool numerical = res.status == SolveStatus::kNumerical && res.degenerate_axes.empty();
    if (!numerical && res.status != SolveStatus::kUnbounded) break;
    if (!res.bound.h.allFinite()) break;
    Eigen::SelfAdjointEigenSolver<MatX> es(res.bound.h, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) <= 0.0) break;
    w = whitening(res.bound.h, objective);
    res = solve_in_frame(set, center, kappa, objective, settings, w);
  }
  if (res.status == SolveStatus::kOk) {
    res.identity_residual = sos_identity_residual(set, res.bound, res.certificate);
  }
  res.solve_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace slue
