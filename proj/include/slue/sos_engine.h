#pragma once

// Minimum-volume ellipsoid bounds on a semialgebraic set certified by a
// sum-of-squares S-lemma at a chosen multiplier order.
//
// With x the homogeneous vector (x_h = 1) and z its remaining coordinates,
// the ellipsoid {z : (z - c)^T H (z - c) <= 1} contains the set whenever
//
//   x_h^(2 kappa) (x^T C^T H C x - x_h^2)
//       = sum_i lambda_i(x) x^T A_i x + sum_j mu_j(x) x^T Q_j x - sigma(x)
//
// with lambda_i = [x]_kappa^T Lambda_i [x]_kappa, Lambda_i PSD, mu_j free
// forms of degree 2 kappa, sigma SOS and C = [-c, I]. H maximizes log det.

#include <array>
#include <string>
#include <vector>

#include "slue/constraints.h"
#include "slue/monomial.h"
#include "slue/sdp_solver.h"

namespace slue {

enum class EllipsoidFrame { kRotmatTranslation, kQuatTranslation, kGeneric };

std::string to_string(EllipsoidFrame frame);

/// {z : (z - center)^T h (z - center) <= 1}.
struct EllipsoidBound {
  MatX h;
  VecX center;
  EllipsoidFrame frame = EllipsoidFrame::kGeneric;

  /// -infinity when h is singular.
  double logdet() const;
  double value(const VecX& z) const;
  bool contains(const VecX& z, double slack = 1e-6) const { return value(z) <= 1.0 + slack; }
};

/// Gram matrices are expressed in coordinates x' = frame * x, where the
/// constraint matrices become frame^-T A frame^-1. frame keeps x_h fixed.
struct SosCertificate {
  int kappa = 0;
  MatX frame;
  /// Over [x]_kappa, one per inequality of the original (unnormalized) set.
  std::vector<MatX> lambda_mats;
  /// Over [x]_kappa, one per equality.
  std::vector<MatX> mu_mats;
  /// Over [x]_{kappa+1}.
  MatX slack_mat;
  /// Scalar multipliers of x_h^(2 kappa) * affine_product(A_i, A_j).
  std::vector<std::array<int, 2>> product_pairs;
  std::vector<double> product_multipliers;
};

enum class SolveStatus { kOk, kInfeasible, kUnbounded, kNumerical };

std::string to_string(SolveStatus status);

/// Joint objective, or log det of the principal block [begin, end) of H with
/// every other entry of H fixed to zero.
struct EllipsoidObjective {
  bool subblock = false;
  int begin = 0;
  int end = 0;

  static EllipsoidObjective joint() { return {}; }
  static EllipsoidObjective sub(int begin, int end) { return {true, begin, end}; }
};

struct EngineSettings {
  sdp::Settings sdp;
  /// Eigenvalues of H above -psd_tolerance are clipped to zero.
  double psd_tolerance = 1e-8;
  /// Add g_i g_j >= 0 for every pair of inequalities affine in x.
  bool affine_products = true;
  /// Iterations of a loose joint solve whose ellipsoid whitens the
  /// coordinates before the actual solve; 0 solves in the given coordinates.
  int prescale_iterations = 25;
  /// Re-whitening retries from the last iterate after a numerical failure or
  /// an unbounded verdict with a positive definite H.
  int rescale_rounds = 2;
};

struct EngineResult {
  SolveStatus status = SolveStatus::kNumerical;
  EllipsoidBound bound;
  SosCertificate certificate;
  std::string message;
  /// Directions (in z coordinates) along which log det grows without bound.
  std::vector<VecX> degenerate_axes;
  /// Max coefficient of the reconstructed identity residual.
  double identity_residual = 0.0;
  sdp::Status solver_status = sdp::Status::kNumerical;
  /// max(primal, dual infeasibility) of the returned iterate.
  double solver_infeasibility = 0.0;
  int iterations = 0;
  double solve_time_s = 0.0;
};

/// Throws InputError on inconsistent dimensions or negative kappa; solver
/// outcomes are reported through the status.
EngineResult solve_min_volume_ellipsoid(const QuadraticConstraintSet& set,
                                        const VecX& center, int kappa,
                                        const EllipsoidObjective& objective = {},
                                        const EngineSettings& settings = {});

/// The LMI handed to the conic backend, e.g. for to_triplets().
sdp::Problem assemble_ellipsoid_lmi(const QuadraticConstraintSet& set,
                                    const VecX& center, int kappa,
                                    const EllipsoidObjective& objective = {},
                                    bool affine_products = true);

/// True when x^T A x = x_h l^T x for some l.
bool is_affine_constraint(const MatX& a, int homogenization);
/// -sym(l_i l_j^T) for two affine constraints, so that x^T P x <= 0 holds
/// wherever both do.
MatX affine_product(const MatX& a_i, const MatX& a_j, int homogenization);

/// Largest coefficient of LHS - RHS of the certificate identity, rebuilt by
/// direct polynomial multiplication.
double sos_identity_residual(const QuadraticConstraintSet& set,
                             const EllipsoidBound& bound,
                             const SosCertificate& certificate);

/// Indices of the basis monomials kept after removing pivots of the degree
/// `basis.kappa` part of the ideal generated by `equalities`.
std::vector<int> reduced_basis_indices(const MonomialBasis& basis,
                                       const std::vector<MatX>& equalities);

/// Drops Gram basis monomials m (indices into `basis`, kept in `keep`) whose
/// square no other term produces, i.e. used[doubled.index(m^2)] == 0, and that
/// no pair of other kept monomials multiplies to. Their Gram rows vanish in
/// every feasible point, so keeping them removes the interior.
std::vector<int> prune_gram_basis(const MonomialBasis& basis, std::vector<int> keep,
                                  const std::vector<char>& used, const MonomialBasis& doubled);

}  // namespace slue
