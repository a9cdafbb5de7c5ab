#include "slue/sdp_solver.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "slue/errors.h"

namespace slue::sdp {

std::string to_string(Status status) {
  switch (status) {
    case Status::kOptimal: return "optimal";
    case Status::kInaccurate: return "inaccurate";
    case Status::kMaxIterations: return "max_iterations";
    case Status::kNumerical: return "numerical";
    case Status::kDiverging: return "diverging";
  }
  return "numerical";
}

Problem::Problem(int num_constraints)
    : m_(num_constraints), rhs_(VecX::Zero(num_constraints)) {
  if (num_constraints < 0) throw InputError("negative constraint count");
}

int Problem::add_psd_block(int size, double logdet_weight) {
  if (size < 1) throw InputError("PSD block needs positive size");
  if (logdet_weight < 0.0) throw InputError("log-det weight must be nonnegative");
  block_sizes_.push_back(size);
  logdet_weights_.push_back(logdet_weight);
  terms_.emplace_back();
  objective_.emplace_back();
  return num_blocks() - 1;
}

int Problem::add_free_variable() {
  free_objective_.conservativeResize(num_free_ + 1);
  free_objective_(num_free_) = 0.0;
  free_basis_.reset();
  return num_free_++;
}

void Problem::add_term(int constraint, int block, int row, int col, double value) {
  if (constraint < 0 || constraint >= m_) throw InputError("constraint index out of range");
  if (block < 0 || block >= num_blocks()) throw InputError("block index out of range");
  const int n = block_sizes_[block];
  if (row < 0 || col < 0 || row >= n || col >= n) throw InputError("entry out of block range");
  if (value == 0.0) return;
  terms_[block][constraint][{std::min(row, col), std::max(row, col)}] += value;
}

void Problem::add_free_term(int constraint, int free_var, double value) {
  if (constraint < 0 || constraint >= m_) throw InputError("constraint index out of range");
  if (free_var < 0 || free_var >= num_free_) throw InputError("free variable out of range");
  if (value == 0.0) return;
  free_terms_[{constraint, free_var}] += value;
}

void Problem::set_rhs(int constraint, double value) {
  if (constraint < 0 || constraint >= m_) throw InputError("constraint index out of range");
  rhs_(constraint) = value;
}

void Problem::add_objective(int block, int row, int col, double value) {
  if (block < 0 || block >= num_blocks()) throw InputError("block index out of range");
  objective_[block][{std::min(row, col), std::max(row, col)}] += value;
}

void Problem::add_free_objective(int free_var, double value) {
  if (free_var < 0 || free_var >= num_free_) throw InputError("free variable out of range");
  free_objective_(free_var) += value;
}

void Problem::set_free_basis(std::vector<int> independent) {
  for (int j : independent) {
    if (j < 0 || j >= num_free_) throw InputError("free basis index out of range");
  }
  free_basis_ = std::move(independent);
}

static std::vector<Entry> to_entries(const std::map<std::pair<int, int>, double>& terms) {
  std::vector<Entry> out;
  for (const auto& [key, v] : terms) {
    if (key.first == key.second) {
      out.push_back({key.first, key.second, v});
    } else {
      out.push_back({key.first, key.second, 0.5 * v});
      out.push_back({key.second, key.first, 0.5 * v});
    }
  }
  return out;
}

std::vector<std::pair<int, std::vector<Entry>>> Problem::block_constraints(int b) const {
  std::vector<std::pair<int, std::vector<Entry>>> out;
  for (const auto& [k, terms] : terms_[b]) out.emplace_back(k, to_entries(terms));
  return out;
}

MatX Problem::objective_matrix(int b) const {
  MatX c = MatX::Zero(block_sizes_[b], block_sizes_[b]);
  for (const auto& e : to_entries(objective_[b])) c(e.row, e.col) += e.value;
  return c;
}

MatX Problem::free_matrix() const {
  MatX a = MatX::Zero(m_, num_free_);
  for (const auto& [key, v] : free_terms_) a(key.first, key.second) += v;
  return a;
}

std::vector<char> Problem::constraint_support(const std::vector<int>& blocks) const {
  std::vector<char> used(m_, 0);
  for (int b : blocks) {
    for (const auto& [k, row] : terms_.at(b)) {
      for (const auto& [key, v] : row) {
        if (v != 0.0) used[k] = 1;
      }
    }
  }
  for (const auto& [key, v] : free_terms_) {
    if (v != 0.0) used[key.first] = 1;
  }
  for (int k = 0; k < m_; ++k) {
    if (rhs_(k) != 0.0) used[k] = 1;
  }
  return used;
}

std::vector<int> Problem::independent_free_columns() const {
  if (num_free_ == 0) return {};
  const MatX a = free_matrix();
  Eigen::ColPivHouseholderQR<MatX> qr(a);
  qr.setThreshold(1e-10);
  const auto rank = qr.rank();
  std::vector<int> keep;
  for (Eigen::Index i = 0; i < rank; ++i) keep.push_back(qr.colsPermutation().indices()(i));
  std::sort(keep.begin(), keep.end());
  return keep;
}

std::string Problem::to_triplets() const {
  std::ostringstream os;
  os.precision(17);
  os << "# constraints " << m_ << " blocks " << num_blocks() << " free " << num_free_ << "\n";
  for (int b = 0; b < num_blocks(); ++b) {
    os << "# block " << b + 1 << " size " << block_sizes_[b] << " logdet "
       << logdet_weights_[b] << "\n";
  }
  os << "# rows: constraint block row col value (constraint 0 = objective)\n";
  for (int b = 0; b < num_blocks(); ++b) {
    for (const auto& [key, v] : objective_[b]) {
      os << 0 << " " << b + 1 << " " << key.first << " " << key.second << " " << v << "\n";
    }
    for (const auto& [k, terms] : terms_[b]) {
      for (const auto& [key, v] : terms) {
        os << k + 1 << " " << b + 1 << " " << key.first << " " << key.second << " " << v << "\n";
      }
    }
  }
  for (int j = 0; j < num_free_; ++j) {
    if (free_objective_(j) != 0.0) os << 0 << " 0 " << j << " 0 " << free_objective_(j) << "\n";
  }
  for (const auto& [key, v] : free_terms_) {
    os << key.first + 1 << " 0 " << key.second << " 0 " << v << "\n";
  }
  os << "# rhs: constraint value\n";
  for (int k = 0; k < m_; ++k) {
    if (rhs_(k) != 0.0) os << "b " << k + 1 << " " << rhs_(k) << "\n";
  }
  return os.str();
}

namespace {

struct Block {
  int n = 0;
  double nu = 0.0;
  std::vector<int> cons;
  std::vector<std::vector<Entry>> mats;
  MatX c;
};

MatX sym(const MatX& m) { return 0.5 * (m + m.transpose()); }

double inner(const MatX& a, const MatX& b) { return a.cwiseProduct(b).sum(); }

void apply_a(const std::vector<Block>& blocks, const std::vector<MatX>& x, VecX& out,
             double scale = 1.0) {
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const Block& blk = blocks[b];
    for (std::size_t j = 0; j < blk.cons.size(); ++j) {
      double s = 0.0;
      for (const Entry& e : blk.mats[j]) s += e.value * x[b](e.row, e.col);
      out(blk.cons[j]) += scale * s;
    }
  }
}

MatX apply_at(const Block& blk, const VecX& y) {
  MatX out = MatX::Zero(blk.n, blk.n);
  for (std::size_t j = 0; j < blk.cons.size(); ++j) {
    const double yk = y(blk.cons[j]);
    if (yk == 0.0) continue;
    for (const Entry& e : blk.mats[j]) out(e.row, e.col) += yk * e.value;
  }
  return out;
}

// M_kl += tr(A_k X A_l Zi) for all constraints touching the block.
void accumulate_schur(const Block& blk, const MatX& x, const MatX& zi, MatX& m) {
  const int n = blk.n;
  const std::size_t mb = blk.cons.size();
  MatX g(n, n);
  MatX t(n, n);
  for (std::size_t a = 0; a < mb; ++a) {
    const auto& ak = blk.mats[a];
    if (static_cast<int>(ak.size()) > n) {
      t.setZero();
      for (const Entry& e : ak) t.col(e.col).noalias() += e.value * x.col(e.row);
      g.noalias() = t * zi;
    } else {
      g.setZero();
      for (const Entry& e : ak) {
        g.noalias() += e.value * x.col(e.row) * zi.row(e.col);
      }
    }
    const int k = blk.cons[a];
    for (std::size_t b = a; b < mb; ++b) {
      double s = 0.0;
      for (const Entry& e : blk.mats[b]) s += e.value * g(e.col, e.row);
      const int l = blk.cons[b];
      m(k, l) += s;
      if (l != k) m(l, k) += s;
    }
  }
}

double max_step(const MatX& x, const MatX& dx) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (x.rows() == 1) return dx(0, 0) < 0.0 ? -x(0, 0) / dx(0, 0) : kInf;
  Eigen::LLT<MatX> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  MatX w = llt.matrixL().solve(dx);
  w = llt.matrixL().solve(w.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<MatX> es(sym(w), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin < 0.0 ? -1.0 / lmin : kInf;
}

bool inverse_spd(const MatX& a, MatX& inv, double& logdet) {
  Eigen::LLT<MatX> llt(a);
  if (llt.info() != Eigen::Success) return false;
  inv = llt.solve(MatX::Identity(a.rows(), a.cols()));
  inv = sym(inv);
  logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return std::isfinite(logdet);
}

struct Direction {
  std::vector<MatX> dx;
  std::vector<MatX> dz;
  VecX dy;
  VecX dfree;
};

class Engine {
 public:
  Engine(const Problem& p, const Settings& s) : settings_(s) {
    const int m_all = p.num_constraints();
    free_cols_ = p.free_basis() ? *p.free_basis() : p.independent_free_columns();
    num_free_total_ = p.num_free();
    const MatX af = p.free_matrix();
    std::vector<int> row_of(m_all, -1);
    std::vector<char> used(m_all, 0);
    std::vector<std::vector<std::pair<int, std::vector<Entry>>>> raw(p.num_blocks());
    for (int bi = 0; bi < p.num_blocks(); ++bi) {
      raw[bi] = p.block_constraints(bi);
      for (const auto& [k, entries] : raw[bi]) used[k] = 1;
    }
    for (int j : free_cols_) {
      for (int k = 0; k < m_all; ++k) {
        if (af(k, j) != 0.0) used[k] = 1;
      }
    }
    // Rows without any term are dropped; a nonzero right side there is infeasible.
    for (int k = 0; k < m_all; ++k) {
      if (used[k]) {
        row_of[k] = static_cast<int>(rows_.size());
        rows_.push_back(k);
      } else if (p.rhs()(k) != 0.0) {
        empty_row_infeasible_ = true;
      }
    }
    m_all_ = m_all;
    m_ = static_cast<int>(rows_.size());
    b_.resize(m_);
    for (int i = 0; i < m_; ++i) b_(i) = p.rhs()(rows_[i]);
    for (int bi = 0; bi < p.num_blocks(); ++bi) {
      Block blk;
      blk.n = p.block_size(bi);
      blk.nu = p.logdet_weight(bi);
      for (auto& [k, entries] : raw[bi]) {
        blk.cons.push_back(row_of[k]);
        blk.mats.push_back(std::move(entries));
      }
      blk.c = p.objective_matrix(bi);
      blocks_.push_back(std::move(blk));
    }
    af_.resize(m_, static_cast<Eigen::Index>(free_cols_.size()));
    cf_.resize(static_cast<Eigen::Index>(free_cols_.size()));
    for (std::size_t j = 0; j < free_cols_.size(); ++j) {
      for (int i = 0; i < m_; ++i) af_(i, j) = af(rows_[i], free_cols_[j]);
      cf_(j) = p.free_objective()(free_cols_[j]);
    }
    for (const Block& blk : blocks_) {
      if (blk.nu == 0.0) n_regular_ += blk.n;
    }
    const int nf = static_cast<int>(af_.cols());
    if (nf > 0) {
      Eigen::HouseholderQR<MatX> qr(af_);
      const MatX q = qr.householderQ();
      qf_ = q.leftCols(nf);
      null_ = q.rightCols(m_ - nf);
      r_ = qr.matrixQR().topLeftCorner(nf, nf).triangularView<Eigen::Upper>();
    }
  }

  Solution run() {
    Solution sol;
    const int nb = static_cast<int>(blocks_.size());
    std::vector<MatX> x(nb), z(nb), zi(nb), rd(nb);
    for (int b = 0; b < nb; ++b) {
      x[b] = settings_.initial_primal * MatX::Identity(blocks_[b].n, blocks_[b].n);
      z[b] = settings_.initial_dual * MatX::Identity(blocks_[b].n, blocks_[b].n);
    }
    VecX y = VecX::Zero(m_);
    VecX xf = VecX::Zero(af_.cols());

    double c_norm = cf_.squaredNorm();
    for (const Block& blk : blocks_) c_norm += blk.c.squaredNorm();
    c_norm = std::sqrt(c_norm);
    const double b_norm = b_.norm();

    sol.status = Status::kMaxIterations;
    if (empty_row_infeasible_) {
      sol.status = Status::kDiverging;
      sol.message = "a constraint with no terms has a nonzero right side";
      sol.x = x;
      sol.z = z;
      sol.y = VecX::Zero(m_all_);
      sol.free = VecX::Zero(num_free_total_);
      return sol;
    }
    int stalls = 0;
    struct Best {
      double merit = std::numeric_limits<double>::infinity();
      int iter = 0;
      std::vector<MatX> x, z;
      VecX y, xf;
      Solution stats;
    } best;
    for (int iter = 0; iter <= settings_.max_iterations; ++iter) {
      sol.iterations = iter;
      double logdet_x_total = 0.0, logdet_gap = 0.0, dual_logdet = 0.0;
      bool ok = true;
      for (int b = 0; b < nb; ++b) {
        double ldz = 0.0;
        if (!inverse_spd(z[b], zi[b], ldz)) ok = false;
        const double nu = blocks_[b].nu;
        if (nu > 0.0 && ok) {
          MatX tmp;
          double ldx = 0.0;
          if (!inverse_spd(x[b], tmp, ldx)) ok = false;
          const double n = blocks_[b].n;
          logdet_x_total += nu * ldx;
          logdet_gap += nu * (inner(x[b], z[b]) / nu - n - (ldx + ldz - n * std::log(nu)));
          dual_logdet += nu * (n + ldz - n * std::log(nu));
        }
      }
      if (!ok) {
        sol.status = Status::kNumerical;
        sol.message = "iterate lost positive definiteness";
        break;
      }

      // Residuals.
      VecX rp = b_ - af_ * xf;
      {
        VecX ax = VecX::Zero(m_);
        apply_a(blocks_, x, ax);
        rp -= ax;
      }
      double rd_norm2 = 0.0;
      for (int b = 0; b < nb; ++b) {
        rd[b] = blocks_[b].c - apply_at(blocks_[b], y) - z[b];
        rd_norm2 += rd[b].squaredNorm();
      }
      const VecX rf = cf_ - af_.transpose() * y;
      rd_norm2 += rf.squaredNorm();

      double reg_comp = 0.0;
      double pobj = cf_.dot(xf) - logdet_x_total;
      double dobj = b_.dot(y);
      for (int b = 0; b < nb; ++b) {
        pobj += inner(blocks_[b].c, x[b]);
        if (blocks_[b].nu == 0.0) reg_comp += inner(x[b], z[b]);
      }
      dobj += dual_logdet;
      const double gap = reg_comp + logdet_gap;
      const double mu = n_regular_ > 0 ? reg_comp / n_regular_ : 0.0;

      sol.primal_infeasibility = rp.norm() / (1.0 + b_norm);
      sol.dual_infeasibility = std::sqrt(rd_norm2) / (1.0 + c_norm);
      sol.relative_gap = gap / (1.0 + std::abs(pobj));
      sol.primal_objective = pobj;
      sol.dual_objective = dobj;

      if (settings_.verbose) {
        std::fprintf(stderr, "%3d pinf %.2e dinf %.2e gap %.2e pobj % .8e dobj % .8e mu %.2e\n",
                     iter, sol.primal_infeasibility, sol.dual_infeasibility,
                     sol.relative_gap, pobj, dobj, mu);
      }
      const double merit =
          std::max({sol.primal_infeasibility, sol.dual_infeasibility, sol.relative_gap});
      if (merit < best.merit) {
        best.merit = merit;
        best.iter = iter;
        best.x = x;
        best.z = z;
        best.y = y;
        best.xf = xf;
        best.stats = sol;
      }
      if (merit < settings_.tolerance) {
        sol.status = Status::kOptimal;
        break;
      }
      if (iter - best.iter > settings_.stall_iterations) {
        sol.status = Status::kNumerical;
        sol.message = "no progress";
        break;
      }
      double x_size = 0.0;
      for (int b = 0; b < nb; ++b) x_size = std::max(x_size, x[b].cwiseAbs().maxCoeff());
      if (x_size > 1e15 || y.cwiseAbs().maxCoeff() > 1e15 || !std::isfinite(pobj)) {
        sol.status = Status::kDiverging;
        sol.message = "iterates diverge";
        break;
      }
      if (iter == settings_.max_iterations) break;

      // Schur complement.
      MatX schur = MatX::Zero(m_, m_);
      for (int b = 0; b < nb; ++b) accumulate_schur(blocks_[b], x[b], zi[b], schur);
      if (!factorize(schur)) {
        sol.status = Status::kNumerical;
        sol.message = "Schur complement factorization failed";
        break;
      }

      // Predictor.
      std::vector<MatX> rc(nb);
      for (int b = 0; b < nb; ++b) rc[b] = blocks_[b].nu * zi[b] - x[b];
      Direction pred = direction(x, zi, rd, rp, rf, rc);
      const double ap = step_length(x, pred.dx);
      const double ad = step_length(z, pred.dz);
      double mu_aff = 0.0;
      for (int b = 0; b < nb; ++b) {
        if (blocks_[b].nu > 0.0) continue;
        mu_aff += inner(x[b] + ap * pred.dx[b], z[b] + ad * pred.dz[b]);
      }
      mu_aff = n_regular_ > 0 ? mu_aff / n_regular_ : 0.0;
      const double expon = std::max(1.0, 3.0 * std::min(ap, ad) * std::min(ap, ad));
      double sigma = mu > 0.0 ? std::pow(std::max(0.0, mu_aff / mu), expon) : 0.0;
      sigma = std::clamp(sigma, 0.0, 1.0);

      // Corrector.
      for (int b = 0; b < nb; ++b) {
        rc[b] = (blocks_[b].nu + sigma * mu) * zi[b] - x[b] -
                sym(pred.dx[b] * pred.dz[b] * zi[b]);
      }
      Direction corr = direction(x, zi, rd, rp, rf, rc);
      const double max_p = max_step_all(x, corr.dx);
      const double max_d = max_step_all(z, corr.dz);
      const double frac =
          std::min(settings_.step_fraction, 0.9 + 0.09 * std::min({1.0, max_p, max_d}));
      const double alpha_p = std::min(1.0, frac * max_p);
      const double alpha_d = std::min(1.0, frac * max_d);
      if (settings_.verbose) std::fprintf(stderr, "    sigma %.2e alpha %.3e %.3e\n", sigma, alpha_p, alpha_d);
      if (alpha_p < 1e-10 && alpha_d < 1e-10) {
        if (++stalls > 3) {
          sol.status = Status::kNumerical;
          sol.message = "step lengths vanished";
          break;
        }
      } else {
        stalls = 0;
      }
      for (int b = 0; b < nb; ++b) {
        x[b] = sym(x[b] + alpha_p * corr.dx[b]);
        z[b] = sym(z[b] + alpha_d * corr.dz[b]);
      }
      xf += alpha_p * corr.dfree;
      y += alpha_d * corr.dy;
    }

    // a diverging run keeps its own iterate unless it got close before
    // blowing up
    if (sol.status != Status::kOptimal && std::isfinite(best.merit) &&
        (sol.status != Status::kDiverging || best.merit < settings_.acceptable)) {
      const Status failed = sol.status;
      const std::string message = sol.message;
      const int total = sol.iterations;
      sol = best.stats;
      sol.iterations = total;
      x = best.x;
      z = best.z;
      y = best.y;
      xf = best.xf;
      if (best.merit < settings_.acceptable) {
        sol.status = Status::kInaccurate;
      } else {
        sol.status = failed;
        sol.message = message;
      }
    }
    sol.x = x;
    sol.z = z;
    sol.y = VecX::Zero(m_all_);
    for (int i = 0; i < m_; ++i) sol.y(rows_[i]) = y(i);
    sol.free = VecX::Zero(num_free_total_);
    for (std::size_t j = 0; j < free_cols_.size(); ++j) sol.free(free_cols_[j]) = xf(j);
    return sol;
  }

 private:
  bool factorize(MatX& schur) {
    const int nf = static_cast<int>(af_.cols());
    if (nf > 0) {
      schur_ = schur;
      reduced_ = null_.transpose() * schur * null_;
    }
    MatX& target = nf > 0 ? reduced_ : schur;
    if (target.rows() == 0) return true;
    const double scale = std::max(1.0, target.diagonal().cwiseAbs().maxCoeff());
    for (double reg : {0.0, 1e-14, 1e-12, 1e-10}) {
      if (reg > 0.0) target.diagonal().array() += reg * scale;
      llt_.compute(target);
      if (llt_.info() == Eigen::Success) break;
    }
    return llt_.info() == Eigen::Success;
  }

  Direction direction(const std::vector<MatX>& x, const std::vector<MatX>& zi,
                      const std::vector<MatX>& rd, const VecX& rp, const VecX& rf,
                      const std::vector<MatX>& rc) const {
    const int nb = static_cast<int>(blocks_.size());
    std::vector<MatX> t(nb);
    for (int b = 0; b < nb; ++b) t[b] = rc[b] - sym(x[b] * rd[b] * zi[b]);
    VecX h = rp;
    {
      VecX at = VecX::Zero(m_);
      apply_a(blocks_, t, at);
      h -= at;
    }
    Direction d;
    solve_reduced(h, rf, d.dy, d.dfree);
    // Iterative refinement against the exact operator.
    for (int pass = 0; pass < 3; ++pass) {
      VecX r1 = h - af_ * d.dfree;
      apply_a(blocks_, schur_image(x, zi, d.dy), r1, -1.0);
      const VecX r2 = rf - af_.transpose() * d.dy;
      const double err = r1.norm() + r2.norm();
      if (!(err > 1e-14 * (1.0 + h.norm() + rf.norm()))) break;
      VecX cy, cf;
      solve_reduced(r1, r2, cy, cf);
      d.dy += cy;
      if (cf.size() > 0) d.dfree += cf;
    }
    d.dx.resize(nb);
    d.dz.resize(nb);
    for (int b = 0; b < nb; ++b) {
      const MatX aty = apply_at(blocks_[b], d.dy);
      d.dz[b] = rd[b] - aty;
      d.dx[b] = sym(t[b] + sym(x[b] * aty * zi[b]));
    }
    return d;
  }

  // Saddle system [M A_f; A_f^T 0][dy; dfree] = [h; rf] by the nullspace
  // method, with A_f = Q_f R and null_ spanning range(A_f)'s complement.
  void solve_reduced(const VecX& h, const VecX& rf, VecX& dy, VecX& dfree) const {
    if (af_.cols() == 0) {
      dy = llt_.solve(h);
      dfree = VecX::Zero(0);
      return;
    }
    const VecX y0 = qf_ * r_.transpose().triangularView<Eigen::Lower>().solve(rf);
    dy = y0;
    if (null_.cols() > 0) dy += null_ * llt_.solve(null_.transpose() * (h - schur_ * y0));
    dfree = r_.triangularView<Eigen::Upper>().solve(qf_.transpose() * (h - schur_ * dy));
  }

  // X A*(dy) Z^-1 symmetrized, per block.
  std::vector<MatX> schur_image(const std::vector<MatX>& x, const std::vector<MatX>& zi,
                                const VecX& dy) const {
    std::vector<MatX> out(blocks_.size());
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      out[b] = sym(x[b] * apply_at(blocks_[b], dy) * zi[b]);
    }
    return out;
  }

  double step_length(const std::vector<MatX>& v, const std::vector<MatX>& dv) const {
    return std::min(1.0, max_step_all(v, dv));
  }

  double max_step_all(const std::vector<MatX>& v, const std::vector<MatX>& dv) const {
    double a = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < v.size(); ++b) a = std::min(a, max_step(v[b], dv[b]));
    return a;
  }

  Settings settings_;
  int m_ = 0;
  int m_all_ = 0;
  std::vector<int> rows_;
  bool empty_row_infeasible_ = false;
  VecX b_;
  std::vector<Block> blocks_;
  MatX af_;
  VecX cf_;
  std::vector<int> free_cols_;
  int num_free_total_ = 0;
  int n_regular_ = 0;
  Eigen::LLT<MatX> llt_;
  MatX qf_;
  MatX null_;
  MatX r_;
  MatX schur_;
  MatX reduced_;
};

}  // namespace

Solution solve(const Problem& problem, const Settings& settings) {
  Solution first = Engine(problem, settings).run();
  const double scales[] = {10.0, 0.1, 100.0};
  for (int k = 0; k < std::min(settings.restarts, 3); ++k) {
    if (first.status == Status::kOptimal || first.status == Status::kInaccurate) break;
    Settings s = settings;
    s.initial_primal *= scales[k];
    s.initial_dual *= scales[k];
    Solution retry = Engine(problem, s).run();
    if (retry.status == Status::kOptimal || retry.status == Status::kInaccurate) return retry;
  }
  return first;
}

}  // namespace slue::sdp
