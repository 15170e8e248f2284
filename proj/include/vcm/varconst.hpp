#pragma once

// Variation of constants for perturbed motion.
//
// The true dynamics add a disturbing function Omega(t, q) to the forces of the
// unperturbed field: the potential V becomes V - Omega, so in Hamiltonian
// terms H = Q + R with Q the unperturbed Hamiltonian and R = -Omega. The
// chart coordinates a(t) of the osculating motion then obey
//
//   sum_j (a_i, a_j) da_j/dt = dOmega/da_i            (linear-system form)
//   da_i/dt = sum_j {a_i, a_j} dOmega/da_j             (bracket form)
//
// where dOmega/da_j = grad_q Omega . dq/da_j by the chain rule (Omega does not
// depend on the momenta). The bracket matrices are those of the unperturbed
// chart; the disturbing function never enters them.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vcm/brackets.hpp"
#include "vcm/dynsys.hpp"
#include "vcm/kepler.hpp"
#include "vcm/motions.hpp"

namespace vcm {

/// Perturbing potential Omega(t, q) and its position gradient.
struct DisturbingFunction {
  std::string name;
  std::function<double(double, const Vector&)> eval;
  std::function<Vector(double, const Vector&)> grad_q;
};

inline DisturbingFunction zero_disturbance(int n = 3) {
  return {"zero", [](double, const Vector&) { return 0.0; },
          [n](double, const Vector&) { return Vector(Vector::Zero(n)); }};
}

inline DisturbingFunction constant_disturbance(double value, int n = 3) {
  return {"constant", [value](double, const Vector&) { return value; },
          [n](double, const Vector&) { return Vector(Vector::Zero(n)); }};
}

/// Omega = eps / |q|^2. Central, so it only makes the apsides precess.
inline DisturbingFunction inverse_square(double eps) {
  return {"inverse_square",
          [eps](double, const Vector& q) { return eps / q.squaredNorm(); },
          [eps](double, const Vector& q) {
            const double r2 = q.squaredNorm();
            return Vector(-2.0 * eps / (r2 * r2) * q);
          }};
}

/// Omega = eps q . (cos wt, sin wt, 0): a uniform field rotating in the xy plane.
inline DisturbingFunction rotating_dipole(double eps, double omega) {
  auto dir = [eps, omega](double t) {
    Vector d(3);
    d << eps * std::cos(omega * t), eps * std::sin(omega * t), 0.0;
    return d;
  };
  return {"rotating_dipole", [dir](double t, const Vector& q) { return dir(t).dot(q); },
          [dir](double t, const Vector&) { return dir(t); }};
}

/// Direct plus indirect term of a third body on the circular equatorial orbit
/// d(t) = radius (cos(rate t + phase), sin(rate t + phase), 0); eps = G m'.
inline DisturbingFunction third_body(double eps, double radius, double rate,
                                     double phase = 0.0) {
  auto pos = [radius, rate, phase](double t) {
    Vector d(3);
    d << radius * std::cos(rate * t + phase), radius * std::sin(rate * t + phase), 0.0;
    return d;
  };
  const double inv_r3 = 1.0 / (radius * radius * radius);
  return {"third_body",
          [=](double t, const Vector& q) {
            const Vector d = pos(t);
            return eps * (1.0 / (q - d).norm() - q.dot(d) * inv_r3);
          },
          [=](double t, const Vector& q) {
            const Vector d = pos(t);
            const Vector rel = q - d;
            const double rn = rel.norm();
            return Vector(eps * (-rel / (rn * rn * rn) - d * inv_r3));
          }};
}

/// R = -Omega, the perturbing Hamiltonian.
inline DisturbingFunction as_hamiltonian(const DisturbingFunction& omega) {
  return {omega.name + "_hamiltonian",
          [e = omega.eval](double t, const Vector& q) { return -e(t, q); },
          [g = omega.grad_q](double t, const Vector& q) { return Vector(-g(t, q)); }};
}

/// max |grad_q - central difference of eval| at (t, q).
inline double gradient_consistency(const DisturbingFunction& dist, double t, const Vector& q,
                                   double fd_step = 1e-6) {
  const Vector fd = gradient([&](const Vector& x) { return dist.eval(t, x); }, q, fd_step);
  return (fd - dist.grad_q(t, q)).lpNorm<Eigen::Infinity>();
}

/// dOmega/da at (t, el) by the chain rule through the chart Jacobian.
inline Vector disturbing_gradient(const MotionChart& chart, const DisturbingFunction& dist,
                                  double t, const Vector& el, const Matrix& jac) {
  const auto n = chart.dof();
  const Vector q = chart.to_phase(el, t).head(n);
  return jac.topRows(n).transpose() * dist.grad_q(t, q);
}

inline Vector element_rates_poisson(const MotionChart& chart, const DisturbingFunction& dist,
                                    double t, const Vector& el,
                                    PoissonSign sign = PoissonSign::classical) {
  const Matrix jac = chart_jacobian(chart, el, t).matrix;
  const Vector grad = disturbing_gradient(chart, dist, t, el, jac);
  if (grad.isZero(0.0)) return Vector::Zero(el.size());
  const Matrix p = poisson_matrix(chart, chart.to_phase(el, t), t, sign);
  return p * grad;
}

inline Vector element_rates_lagrange(const MotionChart& chart, const DisturbingFunction& dist,
                                     double t, const Vector& el,
                                     double max_condition = 1e10) {
  const ChartJacobian jac = chart_jacobian(chart, el, t);
  const Matrix l = lagrange_matrix(jac.matrix);
  const double cond = condition_number(l);
  if (!(cond <= max_condition))
    throw IllConditioned("Lagrange matrix condition number " + std::to_string(cond));
  const Vector grad = disturbing_gradient(chart, dist, t, el, jac.matrix);
  return l.partialPivLu().solve(grad);
}

/// (t, a) -> R(t, q(t, a)): the perturbing Hamiltonian pulled back to the
/// manifold of motions.
inline std::function<double(double, const Vector&)> pullback_hamiltonian(
    const MotionChart& chart, const DisturbingFunction& hamiltonian) {
  return [chart, hamiltonian](double t, const Vector& el) {
    const Vector q = chart.to_phase(el, t).head(chart.dof());
    return hamiltonian.eval(t, q);
  };
}

/// Hamiltonian vector field of the pulled-back R on element space,
/// da_i/dt = {F, a_i} = sum_j dF/da_j {a_j, a_i}, with dF/da differenced
/// directly on the composed function.
inline Vector pullback_rates(const MotionChart& chart, const DisturbingFunction& hamiltonian,
                             double t, const Vector& el, double fd_step = 1e-6) {
  const auto fn = pullback_hamiltonian(chart, hamiltonian);
  const Vector dfda = gradient([&](const Vector& a) { return fn(t, a); }, el, fd_step);
  const Matrix p = poisson_matrix(chart, chart.to_phase(el, t), t);
  return p.transpose() * dfda;
}

struct VarconstOptions {
  // Freeze the Poisson matrix at the starting point instead of recomputing it
  // every evaluation. Faster; the rates then carry an O(|a(t) - a(t0)|)
  // relative error.
  bool cache_brackets = false;
};

/// The element-rate field da/dt on chart coordinates. Invalid outside the chart.
inline VectorField element_rate_field(const MotionChart& chart, const DisturbingFunction& dist,
                                      const VarconstOptions& opts = {},
                                      std::optional<std::pair<double, Vector>> cache_at = {}) {
  VectorField f;
  f.dimension = chart.dimension;
  f.valid = [chart](double, const Vector& el) { return chart.contains(el); };
  if (opts.cache_brackets && cache_at) {
    const auto& [t0, el0] = *cache_at;
    const Matrix p = poisson_matrix(chart, chart.to_phase(el0, t0), t0);
    f.eval = [chart, dist, p](double t, const Vector& el) {
      const Matrix jac = chart_jacobian(chart, el, t).matrix;
      return Vector(p * disturbing_gradient(chart, dist, t, el, jac));
    };
  } else {
    f.eval = [chart, dist](double t, const Vector& el) {
      return element_rates_poisson(chart, dist, t, el);
    };
  }
  return f;
}

/// Osculating chart coordinates sampled along a perturbed motion.
struct ElementTrajectory {
  std::vector<Sample> samples;
  DisturbingFunction disturbing;
  double epoch = 0.0;
  double tolerance_used = 0.0;

  OrbitalElements elements(std::size_t i) const {
    return OrbitalElements::from_vector(samples.at(i).x, epoch);
  }
};

/// Integrates the bracket-form rates from el0 at t0 to t1, sampled on
/// n_samples equally spaced times.
inline ElementTrajectory integrate_varconst(const MotionChart& chart,
                                            const DisturbingFunction& dist, const Vector& el0,
                                            double t0, double t1,
                                            const IntegratorConfig& cfg = {},
                                            std::size_t n_samples = 2,
                                            const VarconstOptions& opts = {}) {
  if (!chart.contains(el0)) throw SingularElement("initial elements outside the chart");
  const VectorField rates = element_rate_field(chart, dist, opts, std::make_pair(t0, el0));
  Trajectory tr;
  try {
    tr = flow_trajectory(rates, t0, el0, t1, cfg, n_samples);
  } catch (const SingularNeighborhood& e) {
    throw DomainExit(std::string("elements left the chart: ") + e.what());
  }
  return {std::move(tr.samples), dist, chart.epoch, cfg.rel_tol};
}

/// State at each sample time from the osculating elements.
inline Trajectory reconstruct_trajectory(const MotionChart& chart, const ElementTrajectory& et) {
  Trajectory tr;
  if (et.samples.empty()) return tr;
  tr.t0 = et.samples.front().t;
  tr.t1 = et.samples.back().t;
  tr.tolerance_used = et.tolerance_used;
  tr.samples.reserve(et.samples.size());
  for (const Sample& s : et.samples) tr.samples.push_back({s.t, modified_flow(chart, s.x, s.t)});
  return tr;
}

/// The unperturbed field plus grad_q Omega in the momentum equations.
inline VectorField perturbed_field(const VectorField& base, const DisturbingFunction& dist) {
  VectorField f = base;
  const auto n = base.dimension / 2;
  f.eval = [base_eval = base.eval, grad = dist.grad_q, n](double t, const Vector& x) {
    Vector dx = base_eval(t, x);
    dx.tail(n) += grad(t, x.head(n));
    return dx;
  };
  return f;
}

/// Direct Cartesian integration of the perturbed motion.
inline Trajectory direct_perturbed(const KeplerModel& model, const DisturbingFunction& dist,
                                   const PhaseState& state0, double t1,
                                   const IntegratorConfig& cfg = {},
                                   std::size_t n_samples = 2) {
  return flow_trajectory(perturbed_field(kepler_field(model), dist), state0.t,
                         state0.to_vector(), t1, cfg, n_samples);
}

/// |p|^2/2 - mu/|q| - Omega(t, q).
inline double perturbed_energy(const PhaseState& s, const KeplerModel& model,
                               const DisturbingFunction& dist) {
  return energy(s, model) - dist.eval(s.t, s.q);
}

}  // namespace vcm
