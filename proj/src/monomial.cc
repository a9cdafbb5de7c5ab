#include "slue/monomial.h"

#include <cmath>

#include "slue/errors.h"

namespace slue {

MonomialKey monomial_key(const std::vector<int>& exponents) {
  if (static_cast<int>(exponents.size()) > kMaxMonomialVariables) {
    throw InputError("too many monomial variables");
  }
  MonomialKey key = 0;
  int total = 0;
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    if (exponents[i] < 0) throw InputError("negative exponent");
    total += exponents[i];
    key |= static_cast<MonomialKey>(exponents[i]) << (4 * i);
  }
  if (total > kMaxMonomialDegree) throw InputError("monomial degree too large");
  return key;
}

std::vector<int> monomial_exponents(MonomialKey key, int n) {
  std::vector<int> e(n);
  for (int i = 0; i < n; ++i) e[i] = exponent_of(key, i);
  return e;
}

int MonomialBasis::index(MonomialKey key) const {
  const auto it = lookup_.find(key);
  return it == lookup_.end() ? -1 : it->second;
}

long long basis_dimension(int n, int kappa) {
  // C(n + kappa - 1, kappa)
  long long r = 1;
  for (int i = 1; i <= kappa; ++i) r = r * (n - 1 + i) / i;
  return r;
}

namespace {

void enumerate(int var, int remaining, std::vector<int>& current,
               std::vector<std::vector<int>>& out) {
  const int n = static_cast<int>(current.size());
  if (var == n - 1) {
    current[var] = remaining;
    out.push_back(current);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[var] = e;
    enumerate(var + 1, remaining - e, current, out);
  }
  current[var] = 0;
}

}  // namespace

MonomialBasis monomial_basis(int n, int kappa) {
  if (n < 1) throw InputError("monomial basis needs n >= 1");
  if (kappa < 0) throw InputError("monomial basis needs kappa >= 0");
  if (n > kMaxMonomialVariables) throw InputError("too many monomial variables");
  if (kappa > kMaxMonomialDegree) throw InputError("basis order too large");
  MonomialBasis b;
  b.n = n;
  b.kappa = kappa;
  std::vector<int> current(n, 0);
  enumerate(0, kappa, current, b.exponents);
  b.dim = static_cast<int>(b.exponents.size());
  b.keys.reserve(b.dim);
  for (int i = 0; i < b.dim; ++i) {
    b.keys.push_back(monomial_key(b.exponents[i]));
    b.lookup_.emplace(b.keys.back(), i);
  }
  return b;
}

Polynomial gram_to_polynomial(const MonomialBasis& basis, const MatX& y) {
  if (y.rows() != basis.dim || y.cols() != basis.dim) {
    throw InputError("Gram matrix does not match basis dimension");
  }
  Polynomial p;
  for (int a = 0; a < basis.dim; ++a) {
    for (int b = 0; b < basis.dim; ++b) {
      const double v = y(a, b);
      if (v != 0.0) p[multiply(basis.keys[a], basis.keys[b])] += v;
    }
  }
  return p;
}

Polynomial quadratic_form_polynomial(const MatX& a) {
  Polynomial p;
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      if (a(i, j) != 0.0) p[pure_power(i, 1) + pure_power(j, 1)] += a(i, j);
    }
  }
  return p;
}

Polynomial poly_multiply(const Polynomial& a, const Polynomial& b) {
  Polynomial p;
  for (const auto& [ka, va] : a) {
    for (const auto& [kb, vb] : b) p[multiply(ka, kb)] += va * vb;
  }
  return p;
}

void poly_add_scaled(Polynomial& target, const Polynomial& p, double scale) {
  for (const auto& [k, v] : p) target[k] += scale * v;
}

double poly_evaluate(const Polynomial& p, const VecX& x) {
  double s = 0.0;
  for (const auto& [k, v] : p) {
    double term = v;
    for (int i = 0; i < x.size(); ++i) {
      const int e = exponent_of(k, i);
      if (e > 0) term *= std::pow(x(i), e);
    }
    s += term;
  }
  return s;
}

double max_abs_coefficient(const Polynomial& p) {
  double m = 0.0;
  for (const auto& [k, v] : p) m = std::max(m, std::abs(v));
  return m;
}

MatX lift_product(const MonomialBasis& multiplier_basis, const MatX& constraint,
                  const MatX& coeff_mat) {
  const int n = multiplier_basis.n;
  const int m = multiplier_basis.dim;
  if (constraint.rows() != n || constraint.cols() != n) {
    throw InputError("constraint matrix does not match the number of variables");
  }
  if (coeff_mat.rows() != m || coeff_mat.cols() != m) {
    throw InputError("coefficient matrix does not match basis dimension");
  }
  const MonomialBasis next = monomial_basis(n, multiplier_basis.kappa + 1);
  // row index of m_a * x_c
  std::vector<int> prod(static_cast<std::size_t>(m) * n);
  for (int a = 0; a < m; ++a) {
    for (int c = 0; c < n; ++c) {
      prod[a * n + c] = next.index(times_variable(multiplier_basis.keys[a], c));
    }
  }
  MatX lifted = MatX::Zero(next.dim, next.dim);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      const double y = coeff_mat(a, b);
      if (y == 0.0) continue;
      for (int c = 0; c < n; ++c) {
        for (int d = 0; d < n; ++d) {
          const double v = constraint(c, d);
          if (v != 0.0) lifted(prod[a * n + c], prod[b * n + d]) += y * v;
        }
      }
    }
  }
  return 0.5 * (lifted + lifted.transpose());
}

VecX evaluate_basis(const MonomialBasis& basis, const VecX& x) {
  if (x.size() != basis.n) throw InputError("point does not match basis variables");
  VecX v(basis.dim);
  for (int i = 0; i < basis.dim; ++i) {
    double s = 1.0;
    for (int j = 0; j < basis.n; ++j) {
      for (int e = 0; e < basis.exponents[i][j]; ++e) s *= x(j);
    }
    v(i) = s;
  }
  return v;
}

}  // namespace slue
