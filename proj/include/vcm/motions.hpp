#pragma once

// Charts on the manifold of motions.
//
// A chart identifies a motion with its coordinates `a` (orbital elements, or
// initial data at the chart epoch) and maps it, for each fixed time t, to the
// phase-space point the motion occupies at t. `to_elements` is the inverse of
// that map at the same t. Both are differentiated by central differences;
// fixtures with closed-form derivatives expose them as well.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vcm/dynsys.hpp"
#include "vcm/error.hpp"
#include "vcm/kepler.hpp"

namespace vcm {

struct MotionChart {
  std::string name;
  int dimension = 0;  // 2n
  double epoch = 0.0;
  double fd_step = 1e-7;

  // Unperturbed field whose motions the chart coordinatizes.
  VectorField field;
  std::function<Vector(const Vector& elements, double t)> to_phase;
  // Throws SingularElement outside the chart.
  std::function<Vector(const Vector& state, double t)> to_elements;
  std::function<bool(const Vector& elements)> in_domain;
  // Element coordinates living on a circle; their differences are wrapped.
  std::vector<bool> angular;

  std::function<Matrix(const Vector& elements, double t)> analytic_jacobian;
  std::function<Matrix(const Vector& state, double t)> analytic_inverse_jacobian;

  int dof() const { return dimension / 2; }
  bool contains(const Vector& el) const { return !in_domain || in_domain(el); }
};

enum class Differentiation { automatic, finite_difference, analytic };

/// d(q, p)/d(elements) at fixed time, with its 2-norm condition number.
struct ChartJacobian {
  Matrix matrix;
  Vector at_elements;
  double at_time = 0.0;
  double condition = 0.0;
};

inline double condition_number(const Matrix& m) {
  const Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s[s.size() - 1];
  return smin > 0.0 ? s[0] / smin : std::numeric_limits<double>::infinity();
}

namespace detail {

inline bool use_analytic(Differentiation d, bool available) {
  if (d == Differentiation::analytic && !available)
    throw InvalidArgument("chart has no analytic Jacobian");
  return d == Differentiation::analytic ||
         (d == Differentiation::automatic && available);
}

template <typename Fn>
Vector checked_seed(Fn&& fn, std::size_t seed) {
  try {
    return fn();
  } catch (const SingularElement& e) {
    throw SingularNeighborhood(std::string(e.what()) + " (seed " + std::to_string(seed) + ")");
  } catch (const NonElliptic& e) {
    throw SingularNeighborhood(std::string(e.what()) + " (seed " + std::to_string(seed) + ")");
  } catch (const InvalidArgument& e) {
    throw SingularNeighborhood(std::string(e.what()) + " (seed " + std::to_string(seed) + ")");
  }
}

}  // namespace detail

inline Vector modified_flow(const MotionChart& chart, const Vector& el, double t) {
  if (!chart.contains(el)) throw SingularElement(chart.name + ": elements outside the chart");
  return chart.to_phase(el, t);
}

inline ChartJacobian chart_jacobian(const MotionChart& chart, const Vector& el, double t,
                                    Differentiation diff = Differentiation::automatic) {
  if (!chart.contains(el)) throw SingularElement(chart.name + ": elements outside the chart");
  ChartJacobian out;
  out.at_elements = el;
  out.at_time = t;
  if (detail::use_analytic(diff, static_cast<bool>(chart.analytic_jacobian))) {
    out.matrix = chart.analytic_jacobian(el, t);
  } else {
    const auto n = el.size();
    out.matrix.resize(chart.dimension, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = chart.fd_step * std::max(1.0, std::abs(el[j]));
      Vector plus = el, minus = el;
      plus[j] += h;
      minus[j] -= h;
      auto eval = [&](const Vector& a) {
        return detail::checked_seed(
            [&] {
              if (!chart.contains(a))
                throw SingularElement(chart.name + ": seed crossed a chart singularity");
              return chart.to_phase(a, t);
            },
            static_cast<std::size_t>(j));
      };
      out.matrix.col(j) = (eval(plus) - eval(minus)) / (plus[j] - minus[j]);
    }
  }
  out.condition = condition_number(out.matrix);
  return out;
}

/// d(elements)/d(q, p) at fixed time t.
inline Matrix inverse_chart_jacobian(const MotionChart& chart, const Vector& state, double t,
                                     Differentiation diff = Differentiation::automatic) {
  if (detail::use_analytic(diff, static_cast<bool>(chart.analytic_inverse_jacobian)))
    return chart.analytic_inverse_jacobian(state, t);
  chart.to_elements(state, t);  // the center itself must be regular
  const auto n = state.size();
  Matrix k(chart.dimension, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = chart.fd_step * std::max(1.0, std::abs(state[j]));
    Vector plus = state, minus = state;
    plus[j] += h;
    minus[j] -= h;
    const auto seed = static_cast<std::size_t>(j);
    Vector diff_el = detail::checked_seed([&] { return chart.to_elements(plus, t); }, seed) -
                     detail::checked_seed([&] { return chart.to_elements(minus, t); }, seed);
    for (Eigen::Index i = 0; i < diff_el.size(); ++i)
      if (!chart.angular.empty() && chart.angular[static_cast<std::size_t>(i)])
        diff_el[i] = std::remainder(diff_el[i], two_pi);
    k.col(j) = diff_el / (plus[j] - minus[j]);
  }
  return k;
}

/// p = dT/dv for T = |v|^2 / 2 (unit mass).
inline Vec3 legendre_transform(const Vec3& /*q*/, const Vec3& v, const KeplerModel& /*model*/) {
  return v;
}

/// p = dT/dv for the quadratic kinetic energy T = v' M v / 2.
inline Vec3 legendre_transform(const Eigen::Matrix3d& mass, const Vec3& v) { return mass * v; }

// --- Charts -----------------------------------------------------------------

/// Orbital elements (sma, ecc, inc, raan, argp, m0) with m0 referred to `epoch`.
/// The domain is the nonsingular elliptic region (ecc and inc off their
/// singular values by at least 1e-9).
inline MotionChart kepler_chart(const KeplerModel& model, double epoch = 0.0,
                                double fd_step = 1e-7) {
  MotionChart c;
  c.name = "kepler";
  c.dimension = 6;
  c.epoch = epoch;
  c.fd_step = fd_step;
  c.field = kepler_field(model);
  c.angular = {false, false, false, true, true, true};
  c.in_domain = [](const Vector& el) {
    return el.size() == 6 && el.allFinite() && el[0] > 0.0 && el[1] > 1e-9 && el[1] < 1.0 &&
           el[2] > 1e-9 && el[2] < std::numbers::pi - 1e-9;
  };
  const double mu = model.mu;
  c.to_phase = [mu, epoch](const Vector& el, double t) {
    return detail::kepler_state(el, epoch, t, mu);
  };
  c.to_elements = [model, epoch](const Vector& x, double t) {
    const OrbitalElements el = elements_from_state(PhaseState::from_vector(t, x), model, epoch);
    if (!el.nonsingular()) throw SingularElement("state lies on a chart singularity");
    return el.to_vector();
  };
  return c;
}

/// Elements are the phase point itself: a = x at every time (zero field).
inline MotionChart identity_chart(int dof, double epoch = 0.0) {
  MotionChart c;
  c.name = "identity";
  c.dimension = 2 * dof;
  c.epoch = epoch;
  const int dim = 2 * dof;
  c.field.dimension = dim;
  c.field.eval = [dim](double, const Vector&) { return Vector(Vector::Zero(dim)); };
  c.to_phase = [](const Vector& el, double) { return el; };
  c.to_elements = [](const Vector& x, double) { return x; };
  c.analytic_jacobian = [dim](const Vector&, double) { return Matrix(Matrix::Identity(dim, dim)); };
  c.analytic_inverse_jacobian = c.analytic_jacobian;
  return c;
}

/// One-degree-of-freedom oscillator H = p^2/2 + omega^2 q^2/2; elements are
/// (q, p) at the chart epoch.
inline VectorField oscillator_field(double omega) {
  VectorField f;
  f.dimension = 2;
  f.eval = [omega](double, const Vector& x) {
    Vector dx(2);
    dx << x[1], -omega * omega * x[0];
    return dx;
  };
  return f;
}

inline MotionChart oscillator_chart(double omega = 1.0, double epoch = 0.0) {
  if (!(omega > 0.0)) throw InvalidArgument("oscillator frequency must be positive");
  MotionChart c;
  c.name = "oscillator";
  c.dimension = 2;
  c.epoch = epoch;
  c.field = oscillator_field(omega);
  auto propagator = [omega, epoch](double t) {
    const double ct = std::cos(omega * (t - epoch)), st = std::sin(omega * (t - epoch));
    Matrix m(2, 2);
    m << ct, st / omega, -omega * st, ct;
    return m;
  };
  c.to_phase = [propagator](const Vector& el, double t) { return Vector(propagator(t) * el); };
  c.to_elements = [propagator](const Vector& x, double t) {
    return Vector(propagator(t).inverse() * x);
  };
  c.analytic_jacobian = [propagator](const Vector&, double t) { return propagator(t); };
  c.analytic_inverse_jacobian = [omega, epoch](const Vector&, double t) {
    const double ct = std::cos(omega * (t - epoch)), st = std::sin(omega * (t - epoch));
    Matrix m(2, 2);
    m << ct, -st / omega, omega * st, ct;
    return m;
  };
  return c;
}

// --- Kepler conveniences -----------------------------------------------------

/// Any elliptic elements, singular ones included: propagation is defined on
/// all of them even where the chart's Jacobians are not.
inline PhaseState modified_flow(const MotionChart& chart, const OrbitalElements& el, double t) {
  if (el.epoch != chart.epoch)
    throw InvalidArgument("element epoch differs from the chart epoch");
  return PhaseState::from_vector(t, chart.to_phase(el.to_vector(), t));
}

inline OrbitalElements chart_elements(const MotionChart& chart, const PhaseState& s) {
  return OrbitalElements::from_vector(chart.to_elements(s.to_vector(), s.t), chart.epoch);
}

}  // namespace vcm
