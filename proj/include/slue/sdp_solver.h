#pragma once

// Primal-dual interior-point solver for semidefinite programs with optional
// log-determinant terms:
//
//   minimize    sum_b <C_b, X_b> + c_f^T x_f - sum_b nu_b log det X_b
//   subject to  sum_b <A_kb, X_b> + a_k^T x_f = b_k,   k = 1..m
//               X_b PSD,  x_f free.
//
// Dual: Z_b = C_b - sum_k y_k A_kb PSD, A_f^T y = c_f.
//
// HKM search direction with Mehrotra predictor-corrector and an infeasible
// starting point. Log-det blocks are driven to X_b Z_b = nu_b I instead of 0.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace slue::sdp {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

enum class Status {
  kOptimal,
  /// Progress stalled with every measure below Settings::acceptable.
  kInaccurate,
  kMaxIterations,
  kNumerical,
  /// Iterates diverge: primal or dual infeasibility suspected.
  kDiverging,
};

std::string to_string(Status status);

struct Settings {
  double tolerance = 1e-9;
  double acceptable = 1e-6;
  /// Stop after this many iterations without a better merit.
  int stall_iterations = 10;
  int max_iterations = 120;
  double step_fraction = 0.98;
  bool verbose = false;
  double initial_primal = 10.0;
  double initial_dual = 10.0;
  /// Restarts from rescaled initial points when a run ends neither optimal
  /// nor inaccurate.
  int restarts = 3;
};

/// One nonzero of a symmetric constraint matrix. Off-diagonal entries are
/// stored once per triangle.
struct Entry {
  int row;
  int col;
  double value;
};

class Problem {
 public:
  explicit Problem(int num_constraints);

  /// Adds a PSD block of the given size. A positive `logdet_weight` adds
  /// -weight * log det(X_b) to the objective.
  int add_psd_block(int size, double logdet_weight = 0.0);
  int add_free_variable();

  /// Adds `value * X_b(row, col)` to the left side of constraint k.
  /// (row, col) and (col, row) refer to the same entry of the symmetric X_b.
  void add_term(int constraint, int block, int row, int col, double value);
  void add_free_term(int constraint, int free_var, double value);
  void set_rhs(int constraint, double value);
  /// Adds `value * X_b(row, col)` to the objective.
  void add_objective(int block, int row, int col, double value);
  void add_free_objective(int free_var, double value);

  /// Restricts the free variables to an independent subset; the others are
  /// fixed at zero. When unset the solver computes one by pivoted QR.
  void set_free_basis(std::vector<int> independent);
  /// Indices of a maximal linearly independent subset of free columns.
  std::vector<int> independent_free_columns() const;

  int num_constraints() const { return m_; }
  int num_blocks() const { return static_cast<int>(block_sizes_.size()); }
  int block_size(int b) const { return block_sizes_[b]; }
  double logdet_weight(int b) const { return logdet_weights_[b]; }
  int num_free() const { return num_free_; }

  /// Constraint matrices of block b as (constraint, entries) pairs.
  std::vector<std::pair<int, std::vector<Entry>>> block_constraints(int b) const;
  MatX objective_matrix(int b) const;
  const VecX& rhs() const { return rhs_; }
  /// 1 for constraints with a nonzero term in the blocks listed, any free
  /// variable, or the rhs.
  std::vector<char> constraint_support(const std::vector<int>& blocks) const;
  /// Dense m x num_free matrix of free-variable coefficients.
  MatX free_matrix() const;
  const VecX& free_objective() const { return free_objective_; }
  const std::optional<std::vector<int>>& free_basis() const { return free_basis_; }

  /// Sparse-triplet dump: one line per nonzero "block row col value" with
  /// blocks numbered from 1, the free block as 0, and row "0" for the
  /// objective and rhs.
  std::string to_triplets() const;

 private:
  using Key = std::pair<int, int>;
  int m_;
  int num_free_ = 0;
  std::vector<int> block_sizes_;
  std::vector<double> logdet_weights_;
  // per block: constraint -> (i <= j) -> coefficient of X_ij in the row.
  std::vector<std::map<int, std::map<Key, double>>> terms_;
  std::vector<std::map<Key, double>> objective_;
  std::map<std::pair<int, int>, double> free_terms_;  // (constraint, var)
  VecX rhs_;
  VecX free_objective_;
  std::optional<std::vector<int>> free_basis_;
};

struct Solution {
  Status status = Status::kNumerical;
  std::vector<MatX> x;
  std::vector<MatX> z;
  VecX free;
  VecX y;
  int iterations = 0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double relative_gap = 0.0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  std::string message;
};

Solution solve(const Problem& problem, const Settings& settings = {});

}  // namespace slue::sdp
