#pragma once

// Sparse real polynomials on phase space with exact derivatives and exact
// Poisson brackets. Serves as the symbolic reference for the finite-difference
// brackets.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "vcm/brackets.hpp"

namespace vcm {

class Polynomial {
 public:
  using Exponents = std::vector<int>;

  explicit Polynomial(int variables = 0) : vars_(variables) {}

  static Polynomial constant(int variables, double c) {
    Polynomial p(variables);
    p.add_term(Exponents(static_cast<std::size_t>(variables), 0), c);
    return p;
  }

  static Polynomial coordinate(int variables, int index) {
    Exponents e(static_cast<std::size_t>(variables), 0);
    e.at(static_cast<std::size_t>(index)) = 1;
    Polynomial p(variables);
    p.add_term(e, 1.0);
    return p;
  }

  /// Random polynomial of total degree <= max_degree with `terms` monomials and
  /// coefficients uniform in [-1, 1].
  template <typename Rng>
  static Polynomial random(int variables, int max_degree, int terms, Rng& rng) {
    std::uniform_int_distribution<int> var(0, variables - 1);
    std::uniform_int_distribution<int> deg(0, max_degree);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    Polynomial p(variables);
    for (int k = 0; k < terms; ++k) {
      Exponents e(static_cast<std::size_t>(variables), 0);
      const int d = deg(rng);
      for (int i = 0; i < d; ++i) ++e[static_cast<std::size_t>(var(rng))];
      p.add_term(e, coef(rng));
    }
    return p;
  }

  int variables() const { return vars_; }
  const std::map<Exponents, double>& terms() const { return terms_; }

  void add_term(const Exponents& e, double c) {
    if (c == 0.0) return;
    const double v = (terms_[e] += c);
    if (v == 0.0) terms_.erase(e);
  }

  double operator()(const Vector& x) const {
    double sum = 0.0;
    for (const auto& [e, c] : terms_) {
      double m = c;
      for (std::size_t i = 0; i < e.size(); ++i)
        if (e[i] != 0) m *= std::pow(x[static_cast<Eigen::Index>(i)], e[i]);
      sum += m;
    }
    return sum;
  }

  Polynomial derivative(int index) const {
    Polynomial d(vars_);
    const auto i = static_cast<std::size_t>(index);
    for (const auto& [e, c] : terms_) {
      if (e[i] == 0) continue;
      Exponents f = e;
      --f[i];
      d.add_term(f, c * e[i]);
    }
    return d;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    Polynomial r = a;
    for (const auto& [e, c] : b.terms_) r.add_term(e, c);
    return r;
  }

  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
    Polynomial r = a;
    for (const auto& [e, c] : b.terms_) r.add_term(e, -c);
    return r;
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial r(std::max(a.vars_, b.vars_));
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        Exponents e = ea;
        for (std::size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
        r.add_term(e, ca * cb);
      }
    }
    return r;
  }

  ScalarField as_field() const {
    return [p = *this](const Vector& x) { return p(x); };
  }

 private:
  int vars_;
  std::map<Exponents, double> terms_;
};

/// Exact {f, g} = sum_k df/dp_k dg/dq_k - df/dq_k dg/dp_k.
inline Polynomial exact_bracket(const Polynomial& f, const Polynomial& g) {
  const int n = f.variables() / 2;
  Polynomial r(f.variables());
  for (int k = 0; k < n; ++k)
    r = r + f.derivative(n + k) * g.derivative(k) - f.derivative(k) * g.derivative(n + k);
  return r;
}

}  // namespace vcm
