#pragma once

// Lagrange parentheses and Poisson brackets.
//
// Phase coordinates are ordered (q1..qn, p1..pn). The canonical matrix is
// S = [[0, I], [-I, 0]], so the Lagrange matrix of a chart with Jacobian
// J = d(q, p)/d(a) is L = J' S J:
//
//   (a_i, a_j) = sum_k dq_k/da_i dp_k/da_j - dq_k/da_j dp_k/da_i.
//
// SIGN CONVENTION. Poisson brackets follow the classical convention
//
//   {f, g} = sum_k df/dp_k dg/dq_k - df/dq_k dg/dp_k,
//
// which is the NEGATIVE of the bracket most modern texts use. With it the
// Lagrange and Poisson matrices of a chart are exact inverses, L P = I, and
// Hamilton's equations read dg/dt = {H, g}. In matrix form P = K S' K' with
// K = d(a)/d(q, p). PoissonSign::modern is available for comparison only.

#include <Eigen/Dense>

#include <cmath>
#include <functional>

#include "vcm/dynsys.hpp"
#include "vcm/motions.hpp"

namespace vcm {

using ScalarField = std::function<double(const Vector&)>;

enum class PoissonSign { classical, modern };

inline Matrix canonical_matrix(int dof) {
  const int dim = 2 * dof;
  Matrix s = Matrix::Zero(dim, dim);
  s.topRightCorner(dof, dof).setIdentity();
  s.bottomLeftCorner(dof, dof) = -Matrix::Identity(dof, dof);
  return s;
}

/// L = J' S J from a precomputed chart Jacobian.
inline Matrix lagrange_matrix(const Matrix& jac) {
  const auto dof = static_cast<int>(jac.rows() / 2);
  return jac.transpose() * canonical_matrix(dof) * jac;
}

inline Matrix lagrange_matrix(const MotionChart& chart, const Vector& el, double t,
                              Differentiation diff = Differentiation::automatic) {
  return lagrange_matrix(chart_jacobian(chart, el, t, diff).matrix);
}

/// Lagrange parentheses summed entry by entry from their defining formula.
/// Shares no code with the J' S J route.
inline Matrix lagrange_matrix_entrywise(const Matrix& jac) {
  const auto n = jac.rows() / 2;
  const auto m = jac.cols();
  Matrix l(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      double sum = 0.0;
      for (Eigen::Index k = 0; k < n; ++k)
        sum += jac(k, i) * jac(n + k, j) - jac(k, j) * jac(n + k, i);
      l(i, j) = sum;
    }
  }
  return l;
}

/// P from a precomputed inverse chart Jacobian K = d(a)/d(q, p).
inline Matrix poisson_matrix(const Matrix& inv_jac,
                             PoissonSign sign = PoissonSign::classical) {
  const auto dof = static_cast<int>(inv_jac.cols() / 2);
  const Matrix s = canonical_matrix(dof);
  return sign == PoissonSign::classical ? Matrix(inv_jac * s.transpose() * inv_jac.transpose())
                                        : Matrix(inv_jac * s * inv_jac.transpose());
}

inline Matrix poisson_matrix(const MotionChart& chart, const Vector& state, double t,
                             PoissonSign sign = PoissonSign::classical,
                             Differentiation diff = Differentiation::automatic) {
  return poisson_matrix(inverse_chart_jacobian(chart, state, t, diff), sign);
}

/// Both bracket families at one point of the manifold of motions.
struct BracketMatrices {
  Matrix lagrange;
  Matrix poisson;
  Vector at_elements;
  double at_time = 0.0;
  double jacobian_condition = 0.0;
};

inline BracketMatrices bracket_matrices(const MotionChart& chart, const Vector& el, double t,
                                        PoissonSign sign = PoissonSign::classical,
                                        Differentiation diff = Differentiation::automatic) {
  const ChartJacobian jac = chart_jacobian(chart, el, t, diff);
  const Vector state = chart.to_phase(el, t);
  return {lagrange_matrix(jac.matrix), poisson_matrix(chart, state, t, sign, diff), el, t,
          jac.condition};
}

/// Central-difference gradient, step fd_step * max(1, |x_j|).
inline Vector gradient(const ScalarField& f, const Vector& x, double fd_step) {
  Vector g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = fd_step * std::max(1.0, std::abs(x[j]));
    Vector plus = x, minus = x;
    plus[j] += h;
    minus[j] -= h;
    g[j] = (f(plus) - f(minus)) / (plus[j] - minus[j]);
  }
  return g;
}

/// {f, g} at x in the classical convention (see the header comment).
inline double poisson_bracket(const ScalarField& f, const ScalarField& g, const Vector& x,
                              double fd_step = 1e-6) {
  const Vector df = gradient(f, x, fd_step);
  const Vector dg = gradient(g, x, fd_step);
  const auto n = x.size() / 2;
  double sum = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) sum += df[n + k] * dg[k] - df[k] * dg[n + k];
  return sum;
}

/// The function x -> {f, g}(x).
inline ScalarField bracket_function(ScalarField f, ScalarField g, double fd_step = 1e-6) {
  return [f = std::move(f), g = std::move(g), fd_step](const Vector& x) {
    return poisson_bracket(f, g, x, fd_step);
  };
}

/// max |L P - I| at the matched point state = to_phase(el, t).
inline double verify_inverse(const MotionChart& chart, const Vector& el, double t,
                             PoissonSign sign = PoissonSign::classical,
                             Differentiation diff = Differentiation::automatic) {
  const BracketMatrices b = bracket_matrices(chart, el, t, sign, diff);
  const auto m = b.lagrange.rows();
  return (b.lagrange * b.poisson - Matrix::Identity(m, m)).lpNorm<Eigen::Infinity>();
}

/// Distance between the entrywise Lagrange parentheses and J' S J.
inline double darboux_pullback_residual(const MotionChart& chart, const Vector& el, double t,
                                        Differentiation diff = Differentiation::automatic) {
  const Matrix jac = chart_jacobian(chart, el, t, diff).matrix;
  return (lagrange_matrix_entrywise(jac) - lagrange_matrix(jac)).lpNorm<Eigen::Infinity>();
}

inline double time_independence_residual(const MotionChart& chart, const Vector& el,
                                         double t1, double t2,
                                         Differentiation diff = Differentiation::automatic) {
  if (t1 == t2) return 0.0;
  return (lagrange_matrix(chart, el, t1, diff) - lagrange_matrix(chart, el, t2, diff))
      .lpNorm<Eigen::Infinity>();
}

/// Same as above for the Poisson matrix, evaluated at the states the motion
/// occupies at t1 and t2.
inline double poisson_time_independence_residual(
    const MotionChart& chart, const Vector& el, double t1, double t2,
    Differentiation diff = Differentiation::automatic) {
  if (t1 == t2) return 0.0;
  const Matrix p1 = poisson_matrix(chart, chart.to_phase(el, t1), t1, PoissonSign::classical, diff);
  const Matrix p2 = poisson_matrix(chart, chart.to_phase(el, t2), t2, PoissonSign::classical, diff);
  return (p1 - p2).lpNorm<Eigen::Infinity>();
}

/// max |J' S J - S| for the flow Jacobian J of a Hamiltonian field.
inline double flow_symplecticity_residual(const VectorField& field, double t0, double t1,
                                          const Vector& x0, const IntegratorConfig& cfg = {},
                                          double fd_step = 1e-6) {
  if (t1 == t0) return 0.0;
  const Matrix jac = flow_jacobian(field, t0, x0, t1, cfg, fd_step);
  const Matrix s = canonical_matrix(static_cast<int>(x0.size() / 2));
  return (jac.transpose() * s * jac - s).lpNorm<Eigen::Infinity>();
}

/// |{f,{g,h}} + {g,{h,f}} + {h,{f,g}}| with nested central differences.
inline double jacobi_residual(const ScalarField& f, const ScalarField& g, const ScalarField& h,
                              const Vector& x, double outer_step = 1e-4,
                              double inner_step = 1e-5) {
  const double a = poisson_bracket(f, bracket_function(g, h, inner_step), x, outer_step);
  const double b = poisson_bracket(g, bracket_function(h, f, inner_step), x, outer_step);
  const double c = poisson_bracket(h, bracket_function(f, g, inner_step), x, outer_step);
  return std::abs(a + b + c);
}

/// Drift of {f, g} along the flow from (t0, x0) to t1.
inline double poisson_theorem_check(const ScalarField& f, const ScalarField& g,
                                    const VectorField& field, double t0, const Vector& x0,
                                    double t1, const IntegratorConfig& cfg = {},
                                    double fd_step = 1e-6) {
  const Vector x1 = flow(field, t0, x0, t1, cfg);
  return std::abs(poisson_bracket(f, g, x1, fd_step) - poisson_bracket(f, g, x0, fd_step));
}

}  // namespace vcm
