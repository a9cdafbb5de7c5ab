#pragma once

// Monomial bases of homogeneous forms and the lifting of multiplier-constraint
// products onto the next basis.
//
// A basis of order kappa over n variables lists every degree-kappa monomial
// in x = (x1, ..., xn). With x1 pinned to 1 these are all monomials of degree
// <= kappa in the remaining variables. Ordering is lexicographic on the
// exponent tuple with x1 most significant, so x1^kappa comes first.

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "slue/geometry.h"

namespace slue {

/// Packed exponent tuple, 4 bits per variable.
using MonomialKey = std::uint64_t;

inline constexpr int kMaxMonomialVariables = 16;
inline constexpr int kMaxMonomialDegree = 15;

MonomialKey monomial_key(const std::vector<int>& exponents);
std::vector<int> monomial_exponents(MonomialKey key, int n);
inline int exponent_of(MonomialKey key, int var) {
  return static_cast<int>((key >> (4 * var)) & 0xFu);
}
inline MonomialKey times_variable(MonomialKey key, int var) {
  return key + (MonomialKey{1} << (4 * var));
}
inline MonomialKey multiply(MonomialKey a, MonomialKey b) { return a + b; }
/// x_var^power.
inline MonomialKey pure_power(int var, int power) {
  return static_cast<MonomialKey>(power) << (4 * var);
}

struct MonomialBasis {
  int n = 0;
  int kappa = 0;
  std::vector<std::vector<int>> exponents;
  std::vector<MonomialKey> keys;
  int dim = 0;

  /// Position of a degree-kappa monomial, or -1.
  int index(MonomialKey key) const;

 private:
  friend MonomialBasis monomial_basis(int n, int kappa);
  std::unordered_map<MonomialKey, int> lookup_;
};

MonomialBasis monomial_basis(int n, int kappa);

/// C(n + kappa - 1, kappa).
long long basis_dimension(int n, int kappa);

/// Sparse polynomial: monomial -> coefficient. Ordered for deterministic output.
using Polynomial = std::map<MonomialKey, double>;

/// [x]^T Y [x] over the basis.
Polynomial gram_to_polynomial(const MonomialBasis& basis, const MatX& y);
/// x^T A x, i.e. the Gram polynomial over the order-1 basis.
Polynomial quadratic_form_polynomial(const MatX& a);
Polynomial poly_multiply(const Polynomial& a, const Polynomial& b);
void poly_add_scaled(Polynomial& target, const Polynomial& p, double scale);
double poly_evaluate(const Polynomial& p, const VecX& x);
double max_abs_coefficient(const Polynomial& p);

/// Symmetric matrix L over the order-(kappa+1) basis with
/// [x]_{kappa+1}^T L [x]_{kappa+1} = ([x]_kappa^T Y [x]_kappa)(x^T A x).
/// Entry (m_a x_c, m_b x_d) receives Y_ab A_cd, then the result is symmetrized.
MatX lift_product(const MonomialBasis& multiplier_basis, const MatX& constraint,
                  const MatX& coeff_mat);

/// Values of the basis monomials at x.
VecX evaluate_basis(const MonomialBasis& basis, const VecX& x);

}  // namespace slue
