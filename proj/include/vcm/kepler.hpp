#pragma once

// Unperturbed two-body motion in canonical units, unit mass (p equals the
// velocity). Elements are the classical Keplerian set with the mean anomaly
// at a reference epoch standing in for the position on the orbit.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "vcm/dynsys.hpp"
#include "vcm/error.hpp"

namespace vcm {

using Vec3 = Eigen::Vector3d;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Wraps an angle into [0, 2pi).
inline double normalize_angle(double a) {
  double r = std::fmod(a, two_pi);
  if (r < 0.0) r += two_pi;
  return r >= two_pi ? 0.0 : r;
}

struct KeplerModel {
  double mu = 1.0;

  explicit KeplerModel(double mu_ = 1.0) : mu(mu_) {
    if (!(mu > 0.0) || !std::isfinite(mu))
      throw InvalidArgument("gravitational parameter must be positive");
  }
};

struct PhaseState {
  double t = 0.0;
  Vec3 q = Vec3::Zero();
  Vec3 p = Vec3::Zero();

  /// (q1, q2, q3, p1, p2, p3).
  Vector to_vector() const {
    Vector x(6);
    x << q, p;
    return x;
  }

  static PhaseState from_vector(double t, const Vector& x) {
    if (x.size() != 6) throw InvalidArgument("phase vector must have 6 components");
    return {t, x.head<3>(), x.tail<3>()};
  }
};

enum class ElementIndex { sma = 0, ecc, inc, raan, argp, m0 };

struct OrbitalElements {
  double sma = 1.0;
  double ecc = 0.0;
  double inc = 0.0;
  double raan = 0.0;
  double argp = 0.0;
  double m0 = 0.0;
  double epoch = 0.0;
  // Set when ecc or inc sits on a chart singularity; raan/argp were zeroed.
  bool degenerate = false;

  OrbitalElements() = default;

  OrbitalElements(double sma_, double ecc_, double inc_, double raan_, double argp_,
                  double m0_, double epoch_ = 0.0, bool degenerate_ = false)
      : sma(sma_),
        ecc(ecc_),
        inc(inc_),
        raan(normalize_angle(raan_)),
        argp(normalize_angle(argp_)),
        m0(normalize_angle(m0_)),
        epoch(epoch_),
        degenerate(degenerate_) {
    if (!(sma > 0.0) || !std::isfinite(sma))
      throw InvalidArgument("semi-major axis must be positive");
    if (!(ecc >= 0.0 && ecc < 1.0))
      throw InvalidArgument("eccentricity must lie in [0, 1)");
    if (!(inc >= 0.0 && inc <= std::numbers::pi))
      throw InvalidArgument("inclination must lie in [0, pi]");
    if (!std::isfinite(raan_) || !std::isfinite(argp_) || !std::isfinite(m0_) ||
        !std::isfinite(epoch))
      throw InvalidArgument("element angles and epoch must be finite");
  }

  /// (sma, ecc, inc, raan, argp, m0).
  Vector to_vector() const {
    Vector v(6);
    v << sma, ecc, inc, raan, argp, m0;
    return v;
  }

  static OrbitalElements from_vector(const Vector& v, double epoch) {
    if (v.size() != 6) throw InvalidArgument("element vector must have 6 components");
    return {v[0], v[1], v[2], v[3], v[4], v[5], epoch};
  }

  /// True when ecc and inc are at least `margin` away from their singular values.
  bool nonsingular(double margin = 1e-9) const {
    return ecc > margin && inc > margin && inc < std::numbers::pi - margin;
  }
};

inline VectorField kepler_field(const KeplerModel& model) {
  const double mu = model.mu;
  VectorField f;
  f.dimension = 6;
  f.eval = [mu](double, const Vector& x) {
    const Vec3 q = x.head<3>();
    const double r = q.norm();
    Vector dx(6);
    dx.head<3>() = x.tail<3>();
    dx.tail<3>() = -mu / (r * r * r) * q;
    return dx;
  };
  f.valid = [](double, const Vector& x) { return x.head<3>().norm() > 0.0; };
  return f;
}

inline double energy(const PhaseState& s, const KeplerModel& model) {
  return 0.5 * s.p.squaredNorm() - model.mu / s.q.norm();
}

inline Vec3 angular_momentum(const PhaseState& s) { return s.q.cross(s.p); }

/// Points at perihelion with length equal to the eccentricity.
inline Vec3 eccentricity_vector(const PhaseState& s, const KeplerModel& model) {
  return s.p.cross(s.q.cross(s.p)) / model.mu - s.q / s.q.norm();
}

inline double mean_motion(double sma, const KeplerModel& model) {
  return std::sqrt(model.mu / (sma * sma * sma));
}

inline double orbital_period(const OrbitalElements& el, const KeplerModel& model) {
  return two_pi * std::sqrt(el.sma * el.sma * el.sma / model.mu);
}

inline double swept_area_rate(const PhaseState& s) { return 0.5 * s.q.cross(s.p).norm(); }

/// Solves E - ecc sin E = M. Newton from M + ecc sin M with a bisection fallback
/// on [M - 1, M + 1], which always brackets the root since |E - M| <= ecc.
inline double solve_kepler_equation(double mean_anomaly, double ecc, double tol = 1e-14) {
  if (!(ecc >= 0.0 && ecc < 1.0))
    throw InvalidArgument("Kepler equation needs 0 <= ecc < 1");
  if (!(tol > 0.0)) throw InvalidArgument("Kepler equation tolerance must be positive");
  if (!std::isfinite(mean_anomaly)) throw InvalidArgument("mean anomaly must be finite");
  const double m = mean_anomaly;
  auto residual = [&](double e_anom) { return e_anom - ecc * std::sin(e_anom) - m; };

  double e_anom = m + ecc * std::sin(m);
  bool converged = false;
  for (int it = 0; it < 50; ++it) {
    const double step = residual(e_anom) / (1.0 - ecc * std::cos(e_anom));
    e_anom -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() *
                              std::max(1.0, std::abs(e_anom))) {
      converged = true;
      break;
    }
  }
  if (converged && std::abs(residual(e_anom)) < tol) return e_anom;

  double lo = m - 1.0, hi = m + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (residual(mid) < 0.0 ? lo : hi) = mid;
  }
  e_anom = std::abs(residual(lo)) < std::abs(residual(hi)) ? lo : hi;
  if (std::abs(residual(e_anom)) >= tol)
    throw NoConvergence("Kepler equation: residual " +
                        std::to_string(std::abs(residual(e_anom))) +
                        " above tolerance");
  return e_anom;
}

namespace detail {

// Analytic propagation on raw (unnormalized) element values. Kept free of
// angle wrapping so finite differences across 0/2pi stay smooth.
inline Vector kepler_state(const Vector& el, double epoch, double t, double mu) {
  const double a = el[0], e = el[1], inc = el[2], raan = el[3], argp = el[4];
  const double n = std::sqrt(mu / (a * a * a));
  const double m = std::remainder(el[5] + n * (t - epoch), two_pi);
  const double ea = solve_kepler_equation(m, e);
  const double ce = std::cos(ea), se = std::sin(ea);
  const double root = std::sqrt(1.0 - e * e);
  const double r = a * (1.0 - e * ce);
  const double x_pf = a * (ce - e), y_pf = a * root * se;
  const double sqrt_mu_a = std::sqrt(mu * a);
  const double vx_pf = -sqrt_mu_a * se / r, vy_pf = sqrt_mu_a * root * ce / r;

  const double co = std::cos(raan), so = std::sin(raan);
  const double cw = std::cos(argp), sw = std::sin(argp);
  const double ci = std::cos(inc), si = std::sin(inc);
  const Vec3 pvec(co * cw - so * sw * ci, so * cw + co * sw * ci, sw * si);
  const Vec3 qvec(-co * sw - so * cw * ci, -so * sw + co * cw * ci, cw * si);

  Vector x(6);
  x.head<3>() = x_pf * pvec + y_pf * qvec;
  x.tail<3>() = vx_pf * pvec + vy_pf * qvec;
  return x;
}

}  // namespace detail

/// Analytic Kepler propagation of `el` to time t.
inline PhaseState state_from_elements(const OrbitalElements& el, const KeplerModel& model,
                                      double t) {
  if (!std::isfinite(t)) throw InvalidArgument("propagation time must be finite");
  return PhaseState::from_vector(t, detail::kepler_state(el.to_vector(), el.epoch, t,
                                                         model.mu));
}

/// Osculating elements of `s`, with m0 referred to `epoch` (default s.t).
/// On a chart singularity the undefined angles are zeroed and `degenerate` set.
inline OrbitalElements elements_from_state(const PhaseState& s, const KeplerModel& model,
                                           std::optional<double> epoch = std::nullopt) {
  const double mu = model.mu;
  const double r = s.q.norm();
  if (!(r > 0.0) || !s.q.allFinite() || !s.p.allFinite())
    throw InvalidArgument("state must be finite with nonzero position");
  const double en = 0.5 * s.p.squaredNorm() - mu / r;
  if (!(en < 0.0)) throw NonElliptic("orbit energy is not negative");
  const Vec3 h = s.q.cross(s.p);
  const double hn = h.norm();
  if (hn <= 1e-12 * r * s.p.norm())
    throw SingularElement("rectilinear motion has no orbital plane");

  const double sma = -mu / (2.0 * en);
  const Vec3 evec = s.p.cross(h) / mu - s.q / r;
  const double ecc = evec.norm();
  if (!(ecc < 1.0)) throw NonElliptic("eccentricity is not below 1");
  const double node_len = std::hypot(h.x(), h.y());
  const double inc = std::atan2(node_len, h.z());

  const bool flat = node_len < 1e-9 * hn;
  const bool round = ecc < 1e-9;
  const Vec3 h_hat = h / hn;
  const Vec3 node = flat ? Vec3(Vec3::UnitX()) : Vec3(Vec3(-h.y(), h.x(), 0.0) / node_len);
  const Vec3 node_perp = h_hat.cross(node);
  const double raan = flat ? 0.0 : std::atan2(h.x(), -h.y());
  const double argp = round ? 0.0 : std::atan2(evec.dot(node_perp), evec.dot(node));

  const Vec3 peri = std::cos(argp) * node + std::sin(argp) * node_perp;
  const Vec3 peri_perp = h_hat.cross(peri);
  const double f = std::atan2(s.q.dot(peri_perp), s.q.dot(peri));
  const double ea = std::atan2(std::sqrt(1.0 - ecc * ecc) * std::sin(f), ecc + std::cos(f));
  const double m = ea - ecc * std::sin(ea);
  const double ref = epoch.value_or(s.t);
  const double m0 = m - mean_motion(sma, model) * (s.t - ref);
  return {sma, ecc, inc, raan, argp, m0, ref, flat || round};
}

}  // namespace vcm
