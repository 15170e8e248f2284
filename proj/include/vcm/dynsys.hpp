#pragma once

// Flows of time-dependent vector fields on R^n.
//
// The integrator is the Dormand-Prince 5(4) pair with a PI step-size
// controller; a fixed-step classical RK4 is kept for reproducibility checks.
// Flows are evaluated over a requested span only: when the solution leaves the
// field's domain of validity before the end of the span the integrator throws
// DomainExit, and StepLimitExceeded when the step budget runs out.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vcm/error.hpp"

namespace vcm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// dx/dt = eval(t, x) on the open set where `valid(t, x)` holds.
struct VectorField {
  int dimension = 0;
  std::function<Vector(double, const Vector&)> eval;
  std::function<bool(double, const Vector&)> valid;

  bool is_valid(double t, const Vector& x) const {
    if (!x.allFinite()) return false;
    return !valid || valid(t, x);
  }
};

enum class Method { dormand_prince, rk4_fixed };

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  long max_steps = 1'000'000;
  // Starting step for the adaptive method; the fixed step for rk4_fixed.
  std::optional<double> initial_step;
  Method method = Method::dormand_prince;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
      throw InvalidArgument("integrator tolerances must be strictly positive");
    if (max_steps < 1) throw InvalidArgument("max_steps must be >= 1");
    if (initial_step && !(*initial_step > 0.0))
      throw InvalidArgument("initial_step must be strictly positive");
  }
};

struct Sample {
  double t;
  Vector x;
};

/// Solution samples from t0 to t1 (either direction), first at t0, last at t1.
struct Trajectory {
  std::vector<Sample> samples;
  double t0 = 0.0;
  double t1 = 0.0;
  double tolerance_used = 0.0;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DormandPrince {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113,
                          a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                          a76 = 11.0 / 84;
  // Error coefficients: fifth-order minus embedded fourth-order weights.
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
};

inline double error_norm(const Vector& err, const Vector& x, const Vector& x_new,
                         const IntegratorConfig& cfg) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc =
        cfg.abs_tol + cfg.rel_tol * std::max(std::abs(x[i]), std::abs(x_new[i]));
    const double r = err[i] / sc;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(err.size()));
}

inline void require_valid(const VectorField& field, double t, const Vector& x,
                          const char* what) {
  if (!field.is_valid(t, x))
    throw DomainExit(std::string(what) + ": state outside the field's domain at t = " +
                     std::to_string(t));
}

// Hairer's starting-step heuristic.
inline double initial_step(const VectorField& field, double t0, const Vector& x0,
                           const Vector& f0, double dir, double span,
                           const IntegratorConfig& cfg) {
  Vector sc = (cfg.abs_tol + cfg.rel_tol * x0.array().abs()).matrix();
  const double n = static_cast<double>(x0.size());
  const double d0 = std::sqrt((x0.array() / sc.array()).square().sum() / n);
  const double d1 = std::sqrt((f0.array() / sc.array()).square().sum() / n);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, span);
  const Vector x1 = x0 + dir * h0 * f0;
  if (!field.is_valid(t0 + dir * h0, x1)) return std::min(h0, span) * 1e-3;
  const Vector f1 = field.eval(t0 + dir * h0, x1);
  const double d2 =
      std::sqrt(((f1 - f0).array() / sc.array()).square().sum() / n) / h0;
  const double dmax = std::max(d1, d2);
  const double h1 =
      dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / 5.0);
  return std::min({100.0 * h0, h1, span});
}

inline Vector integrate_dopri(const VectorField& field, double t0, const Vector& x0,
                              double t1, const IntegratorConfig& cfg) {
  using T = DormandPrince;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);

  double t = t0;
  Vector x = x0;
  Vector k1 = field.eval(t, x);
  double h = cfg.initial_step ? std::min(*cfg.initial_step, span)
                              : initial_step(field, t0, x0, k1, dir, span, cfg);

  constexpr double safety = 0.9, fac_min = 0.2, fac_max = 10.0;
  constexpr double beta = 0.04, alpha = 0.2 - 0.75 * beta;
  double err_prev = 1e-4;
  bool last_rejected = false;

  Vector k2, k3, k4, k5, k6, k7, x_new, stage;
  long steps = 0;
  while (dir * (t1 - t) > 0.0) {
    if (steps >= cfg.max_steps)
      throw StepLimitExceeded("step limit of " + std::to_string(cfg.max_steps) +
                              " reached at t = " + std::to_string(t));
    const double remaining = std::abs(t1 - t);
    bool final_step = false;
    if (h >= remaining) {
      h = remaining;
      final_step = true;
    }
    const double h_min = 16.0 * std::numeric_limits<double>::epsilon() *
                         std::max(1.0, std::abs(t));
    if (h < h_min)
      throw StepSizeUnderflow("step size underflow at t = " + std::to_string(t));
    const double hs = dir * h;

    // Stages; an invalid stage point shrinks the step instead of evaluating.
    bool stage_ok = true;
    auto eval_stage = [&](double ts, const Vector& xs, Vector& out) {
      if (!stage_ok) return;
      if (!field.is_valid(ts, xs)) {
        stage_ok = false;
        return;
      }
      out = field.eval(ts, xs);
    };
    stage = x + hs * T::a21 * k1;
    eval_stage(t + T::c2 * hs, stage, k2);
    if (stage_ok) {
      stage = x + hs * (T::a31 * k1 + T::a32 * k2);
      eval_stage(t + T::c3 * hs, stage, k3);
    }
    if (stage_ok) {
      stage = x + hs * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3);
      eval_stage(t + T::c4 * hs, stage, k4);
    }
    if (stage_ok) {
      stage = x + hs * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4);
      eval_stage(t + T::c5 * hs, stage, k5);
    }
    if (stage_ok) {
      stage = x + hs * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 +
                        T::a65 * k5);
      eval_stage(t + hs, stage, k6);
    }
    if (stage_ok) {
      x_new = x + hs * (T::a71 * k1 + T::a73 * k3 + T::a74 * k4 + T::a75 * k5 +
                        T::a76 * k6);
      eval_stage(t + hs, x_new, k7);
    }
    ++steps;
    if (!stage_ok) {
      h *= 0.25;
      last_rejected = true;
      if (h < h_min)
        throw DomainExit("solution left the field's domain near t = " +
                         std::to_string(t));
      continue;
    }

    const Vector err = hs * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 +
                             T::e6 * k6 + T::e7 * k7);
    const double en = error_norm(err, x, x_new, cfg);

    if (en <= 1.0) {
      double fac = en == 0.0 ? fac_max
                             : safety * std::pow(en, -alpha) * std::pow(err_prev, beta);
      fac = std::clamp(fac, fac_min, fac_max);
      if (last_rejected) fac = std::min(fac, 1.0);
      err_prev = std::max(en, 1e-4);
      t = final_step ? t1 : t + hs;
      x = x_new;
      k1 = k7;
      h *= fac;
      last_rejected = false;
    } else {
      h *= std::max(fac_min, safety * std::pow(en, -alpha));
      last_rejected = true;
    }
  }
  return x;
}

inline Vector integrate_rk4(const VectorField& field, double t0, const Vector& x0,
                            double t1, const IntegratorConfig& cfg) {
  const double span = t1 - t0;
  const double h_req = cfg.initial_step.value_or(1e-3);
  const long n = std::max<long>(1, static_cast<long>(std::ceil(std::abs(span) / h_req)));
  if (n > cfg.max_steps)
    throw StepLimitExceeded("fixed-step RK4 needs " + std::to_string(n) +
                            " steps, above max_steps");
  const double h = span / static_cast<double>(n);
  Vector x = x0;
  for (long i = 0; i < n; ++i) {
    const double t = t0 + h * static_cast<double>(i);
    const Vector k1 = field.eval(t, x);
    const Vector s2 = x + 0.5 * h * k1;
    require_valid(field, t + 0.5 * h, s2, "rk4");
    const Vector k2 = field.eval(t + 0.5 * h, s2);
    const Vector s3 = x + 0.5 * h * k2;
    require_valid(field, t + 0.5 * h, s3, "rk4");
    const Vector k3 = field.eval(t + 0.5 * h, s3);
    const Vector s4 = x + h * k3;
    require_valid(field, t + h, s4, "rk4");
    const Vector k4 = field.eval(t + h, s4);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    require_valid(field, i + 1 == n ? t1 : t + h, x, "rk4");
  }
  return x;
}

}  // namespace detail

/// Phi(t1, t0, x0). Returns x0 unchanged when t1 == t0.
inline Vector flow(const VectorField& field, double t0, const Vector& x0, double t1,
                   const IntegratorConfig& cfg = {}) {
  cfg.validate();
  if (x0.size() != field.dimension)
    throw InvalidArgument("flow: state dimension does not match the field");
  if (!std::isfinite(t0) || !std::isfinite(t1))
    throw InvalidArgument("flow: times must be finite");
  detail::require_valid(field, t0, x0, "flow");
  if (t1 == t0) return x0;
  return cfg.method == Method::rk4_fixed ? detail::integrate_rk4(field, t0, x0, t1, cfg)
                                         : detail::integrate_dopri(field, t0, x0, t1, cfg);
}

/// Samples the flow at n_samples equally spaced times, integrating segment to
/// segment so every sample time is hit exactly.
inline Trajectory flow_trajectory(const VectorField& field, double t0, const Vector& x0,
                                  double t1, const IntegratorConfig& cfg,
                                  std::size_t n_samples) {
  if (n_samples < 2) throw InvalidArgument("flow_trajectory: n_samples must be >= 2");
  if (t1 == t0) throw InvalidArgument("flow_trajectory: empty time span");
  Trajectory traj;
  traj.t0 = t0;
  traj.t1 = t1;
  traj.tolerance_used = cfg.rel_tol;
  traj.samples.reserve(n_samples);
  traj.samples.push_back({t0, x0});
  const double last = static_cast<double>(n_samples - 1);
  for (std::size_t i = 1; i < n_samples; ++i) {
    const double t = i + 1 == n_samples
                         ? t1
                         : t0 + (t1 - t0) * (static_cast<double>(i) / last);
    const Sample& prev = traj.samples.back();
    traj.samples.push_back({t, flow(field, prev.t, prev.x, t, cfg)});
  }
  return traj;
}

namespace detail {

// Re-throws the active integration error with the seed index attached, keeping
// its concrete type.
[[noreturn]] inline void rethrow_with_seed(std::size_t seed, const char* side) {
  const std::string where =
      " (finite-difference seed " + std::to_string(seed) + side + ")";
  try {
    throw;
  } catch (const StepLimitExceeded& e) {
    throw StepLimitExceeded(e.what() + where);
  } catch (const DomainExit& e) {
    throw DomainExit(e.what() + where);
  } catch (const StepSizeUnderflow& e) {
    throw StepSizeUnderflow(e.what() + where);
  }
}

}  // namespace detail

/// Central-difference d Phi(t1, t0, x) / dx at x0, step fd_step * max(1, |x0_j|).
inline Matrix flow_jacobian(const VectorField& field, double t0, const Vector& x0,
                            double t1, const IntegratorConfig& cfg = {},
                            double fd_step = 1e-6) {
  const auto n = x0.size();
  if (t1 == t0) return Matrix::Identity(n, n);
  Matrix jac(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = fd_step * std::max(1.0, std::abs(x0[j]));
    Vector plus = x0, minus = x0;
    plus[j] += h;
    minus[j] -= h;
    Vector f_plus, f_minus;
    try {
      f_plus = flow(field, t0, plus, t1, cfg);
    } catch (const IntegrationError&) {
      detail::rethrow_with_seed(static_cast<std::size_t>(j), "+");
    }
    try {
      f_minus = flow(field, t0, minus, t1, cfg);
    } catch (const IntegrationError&) {
      detail::rethrow_with_seed(static_cast<std::size_t>(j), "-");
    }
    jac.col(j) = (f_plus - f_minus) / (plus[j] - minus[j]);
  }
  return jac;
}

/// max-norm of Phi(t2, t1, Phi(t1, t0, x0)) - Phi(t2, t0, x0).
inline double check_composition(const VectorField& field, double t0, double t1,
                                 double t2, const Vector& x0,
                                 const IntegratorConfig& cfg = {}) {
  const Vector via = flow(field, t1, flow(field, t0, x0, t1, cfg), t2, cfg);
  const Vector direct = flow(field, t0, x0, t2, cfg);
  return (via - direct).lpNorm<Eigen::Infinity>();
}

}  // namespace vcm
