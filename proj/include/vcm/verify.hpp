#pragma once

// Invariant suite over fixed fixtures. Each check reports a measured value and
// the tolerance it must stay below; `criterion` groups rows that belong to the
// same property.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "vcm/brackets.hpp"
#include "vcm/kepler.hpp"
#include "vcm/motions.hpp"
#include "vcm/polynomial.hpp"
#include "vcm/varconst.hpp"

namespace vcm {

struct Check {
  std::string name;
  std::string group;      // kepler | dynsys | motions | brackets | varconst
  std::string criterion;  // rows sharing a criterion pass or fail together
  double value = 0.0;
  double tolerance = 0.0;

  bool passed() const { return std::isfinite(value) && value < tolerance; }
};

struct VerifyOptions {
  // Test hook: evaluate Poisson matrices with the wrong sign.
  PoissonSign sign = PoissonSign::classical;
  std::uint64_t seed = 20240601;
};

namespace detail {

inline OrbitalElements random_elements(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {0.6 + 2.0 * u(rng), 0.05 + 0.75 * u(rng), 0.1 + 2.9 * u(rng),
          two_pi * u(rng),    two_pi * u(rng),      two_pi * u(rng)};
}

inline ScalarField phase_function(std::function<double(const PhaseState&)> fn) {
  return [fn = std::move(fn)](const Vector& x) { return fn(PhaseState::from_vector(0.0, x)); };
}

// Omega = eps/r^2 leaves the radial motion Keplerian with L'^2 = L^2 - 2 eps at
// the perturbed energy H: radial period and apsidal advance per radial period.
inline double inverse_square_radial_period(const PhaseState& s, const KeplerModel& m, double eps) {
  const double h = energy(s, m) - eps / s.q.squaredNorm();
  const double a = -m.mu / (2.0 * h);
  return two_pi * std::sqrt(a * a * a / m.mu);
}

inline double inverse_square_apsidal_advance(const PhaseState& s, double eps) {
  const double l = angular_momentum(s).norm();
  return two_pi * (1.0 / std::sqrt(1.0 - 2.0 * eps / (l * l)) - 1.0);
}

}  // namespace detail

struct CheckSpec {
  std::string criterion;
  std::string group;
  std::function<std::vector<Check>(const VerifyOptions&)> run;
};

inline std::vector<CheckSpec> check_catalog() {
  const KeplerModel model{};
  std::vector<CheckSpec> out;

  out.push_back({"kepler_third_law", "kepler", [model](const VerifyOptions&) {
    std::vector<double> ratios;
    for (double a : {0.5, 1.0, 2.0, 4.0}) {
      const double p = orbital_period(OrbitalElements(a, 0.3, 0.5, 0, 0, 0), model);
      ratios.push_back(p * p / (a * a * a));
    }
    double spread = 0.0;
    for (double r : ratios) spread = std::max(spread, std::abs(r / ratios[1] - 1.0));
    const double ratio = orbital_period(OrbitalElements(4.0, 0.3, 0.5, 0, 0, 0), model) /
                         orbital_period(OrbitalElements(1.0, 0.3, 0.5, 0, 0, 0), model);
    return std::vector<Check>{
        {"third_law_ratio_spread", "kepler", "", spread, 1e-12},
        {"period_ratio_sma4_sma1", "kepler", "", std::abs(ratio / 8.0 - 1.0), 1e-12}};
  }});

  out.push_back({"kepler_second_law", "kepler", [model](const VerifyOptions&) {
    const OrbitalElements el(1.0, 0.6, 0.4, 0.2, 0.8, 0.0);
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-14;
    const PhaseState s0 = state_from_elements(el, model, 0.0);
    const Trajectory tr = flow_trajectory(kepler_field(model), 0.0, s0.to_vector(),
                                          10 * orbital_period(el, model), cfg, 1001);
    double drift = 0.0;
    for (const Sample& s : tr.samples)
      drift = std::max(drift, std::abs(swept_area_rate(PhaseState::from_vector(s.t, s.x)) -
                                       swept_area_rate(s0)));
    return std::vector<Check>{{"area_rate_drift", "kepler", "", drift, 1e-10}};
  }});

  out.push_back({"kepler_conservation", "kepler", [model](const VerifyOptions&) {
    const OrbitalElements el(1.0, 0.6, 0.4, 0.2, 0.8, 0.0);
    const PhaseState s0 = state_from_elements(el, model, 0.0);
    const Trajectory tr = flow_trajectory(kepler_field(model), 0.0, s0.to_vector(),
                                          10 * orbital_period(el, model), {}, 101);
    double de = 0.0, dl = 0.0, dv = 0.0;
    for (const Sample& smp : tr.samples) {
      const PhaseState s = PhaseState::from_vector(smp.t, smp.x);
      de = std::max(de, std::abs(energy(s, model) - energy(s0, model)));
      dl = std::max(dl, (angular_momentum(s) - angular_momentum(s0)).lpNorm<Eigen::Infinity>());
      dv = std::max(dv, (eccentricity_vector(s, model) - eccentricity_vector(s0, model))
                            .lpNorm<Eigen::Infinity>());
    }
    return std::vector<Check>{{"energy_drift", "kepler", "", de, 1e-9},
                              {"angular_momentum_drift", "kepler", "", dl, 1e-9},
                              {"eccentricity_vector_drift", "kepler", "", dv, 1e-9}};
  }});

  out.push_back({"flow_composition", "dynsys", [model](const VerifyOptions& o) {
    std::mt19937_64 rng(o.seed + 4);
    std::uniform_real_distribution<double> time(-5.0, 5.0);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Vector x0 = state_from_elements(detail::random_elements(rng), model, 0.0).to_vector();
      const double t0 = time(rng), t1 = time(rng), t2 = time(rng);
      worst = std::max(worst, check_composition(kepler_field(model), t0, t1, t2, x0));
    }
    return std::vector<Check>{{"composition_residual", "dynsys", "", worst, 1e-8}};
  }});

  out.push_back({"chart_round_trip", "motions", [model](const VerifyOptions& o) {
    const MotionChart chart = kepler_chart(model);
    std::mt19937_64 rng(o.seed + 5);
    std::uniform_real_distribution<double> time(-20.0, 20.0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const Vector el = detail::random_elements(rng).to_vector();
      for (int j = 0; j < 5; ++j) {
        const double t = time(rng);
        Vector d = chart.to_elements(chart.to_phase(el, t), t) - el;
        for (int i = 3; i < 6; ++i) d[i] = std::remainder(d[i], two_pi);
        worst = std::max(worst, d.lpNorm<Eigen::Infinity>());
      }
    }
    return std::vector<Check>{{"round_trip_error", "motions", "", worst, 1e-9}};
  }});

  out.push_back({"lagrange_poisson_duality", "brackets", [model](const VerifyOptions& o) {
    double fixtures = verify_inverse(identity_chart(3), Vector::LinSpaced(6, -1.0, 1.0), 0.4, o.sign);
    Vector x(2);
    x << 0.3, -0.7;
    for (double w : {0.5, 1.0, 2.0})
      fixtures = std::max(fixtures, verify_inverse(oscillator_chart(w), x, 1.3, o.sign));
    const MotionChart chart = kepler_chart(model);
    std::mt19937_64 rng(o.seed + 6);
    std::uniform_real_distribution<double> time(-5.0, 5.0);
    double kepler = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Vector el = detail::random_elements(rng).to_vector();
      const double t = time(rng);
      kepler = std::max(kepler, verify_inverse(chart, el, t, o.sign));
    }
    return std::vector<Check>{{"inverse_analytic_fixtures", "brackets", "", fixtures, 1e-10},
                              {"inverse_kepler_random", "brackets", "", kepler, 1e-4}};
  }});

  out.push_back({"lagrange_time_independence", "brackets", [model](const VerifyOptions& o) {
    const MotionChart chart = kepler_chart(model);
    std::mt19937_64 rng(o.seed + 7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double kepler = 0.0;
    for (int k = 0; k < 10; ++k) {
      const OrbitalElements el = detail::random_elements(rng);
      const double t1 = u(rng), t2 = t1 + u(rng) * orbital_period(el, model);
      kepler = std::max(kepler, time_independence_residual(chart, el.to_vector(), t1, t2));
    }
    Vector x(2);
    x << 0.3, -0.7;
    double osc = 0.0;
    for (double t : {0.5, 2.0, 7.0})
      osc = std::max(osc, time_independence_residual(oscillator_chart(1.5), x, 0.0, t));
    return std::vector<Check>{{"time_independence_kepler", "brackets", "", kepler, 1e-4},
                              {"time_independence_oscillator", "brackets", "", osc, 1e-9}};
  }});

  out.push_back({"flow_symplecticity", "brackets", [model](const VerifyOptions& o) {
    std::mt19937_64 rng(o.seed + 8);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const OrbitalElements el = detail::random_elements(rng);
      const Vector x0 = state_from_elements(el, model, 0.0).to_vector();
      worst = std::max(worst, flow_symplecticity_residual(kepler_field(model), 0.0,
                                                          orbital_period(el, model), x0));
    }
    return std::vector<Check>{{"symplecticity_residual", "brackets", "", worst, 1e-5}};
  }});

  out.push_back({"jacobi_identity", "brackets", [](const VerifyOptions& o) {
    std::mt19937_64 rng(o.seed + 9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const Polynomial f = Polynomial::random(6, 3, 5, rng);
      const Polynomial g = Polynomial::random(6, 3, 5, rng);
      const Polynomial h = Polynomial::random(6, 3, 5, rng);
      for (int j = 0; j < 10; ++j) {
        Vector x(6);
        for (auto& v : x) v = u(rng);
        worst = std::max(worst, jacobi_residual(f.as_field(), g.as_field(), h.as_field(), x));
      }
    }
    return std::vector<Check>{{"jacobi_residual", "brackets", "", worst, 1e-5}};
  }});

  out.push_back({"poisson_theorem", "brackets", [model](const VerifyOptions&) {
    const OrbitalElements el(1.1, 0.4, 0.7, 0.3, 1.2, 2.0);
    const Vector x = state_from_elements(el, model, 0.0).to_vector();
    const double period = orbital_period(el, model);
    const VectorField field = kepler_field(model);
    const ScalarField h = detail::phase_function([model](const PhaseState& s) { return energy(s, model); });
    auto lcomp = [](int i) {
      return detail::phase_function([i](const PhaseState& s) { return angular_momentum(s)[i]; });
    };
    const ScalarField ex = detail::phase_function(
        [model](const PhaseState& s) { return eccentricity_vector(s, model).x(); });
    return std::vector<Check>{
        {"bracket_drift_h_lz", "brackets", "", poisson_theorem_check(h, lcomp(2), field, 0, x, period), 1e-5},
        {"bracket_drift_lx_ly", "brackets", "", poisson_theorem_check(lcomp(0), lcomp(1), field, 0, x, period), 1e-5},
        {"bracket_drift_h_ex", "brackets", "", poisson_theorem_check(h, ex, field, 0, x, period), 1e-5}};
  }});

  out.push_back({"rate_form_equivalence", "varconst", [model](const VerifyOptions& o) {
    const MotionChart chart = kepler_chart(model);
    std::mt19937_64 rng(o.seed + 11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const Vector el = detail::random_elements(rng).to_vector();
      const double t = -5.0 + 10.0 * u(rng);
      const double eps = 1e-4 + 1e-3 * u(rng);
      DisturbingFunction d;
      switch (k % 3) {
        case 0: d = inverse_square(eps); break;
        case 1: d = rotating_dipole(eps, 2.0 * u(rng)); break;
        default: {
          const double radius = 4.0 + 4.0 * u(rng);
          const double rate = 0.1 * u(rng);
          d = third_body(eps, radius, rate, two_pi * u(rng));
          break;
        }
      }
      const Vector a = element_rates_poisson(chart, d, t, el, o.sign);
      const Vector b = element_rates_lagrange(chart, d, t, el);
      worst = std::max(worst, (a - b).lpNorm<Eigen::Infinity>());
    }
    return std::vector<Check>{{"rate_forms_difference", "varconst", "", worst, 1e-8}};
  }});

  out.push_back({"varconst_exactness", "varconst", [model](const VerifyOptions&) {
    const MotionChart chart = kepler_chart(model);
    const OrbitalElements el(1.3, 0.2, 0.4, 1.0, 2.0, 0.5);
    const PhaseState s0 = state_from_elements(el, model, 0.0);
    const double span = 10 * orbital_period(el, model);
    std::vector<Check> rows;
    for (const DisturbingFunction& d : {inverse_square(1e-3), rotating_dipole(1e-4, 0.3)}) {
      const ElementTrajectory et = integrate_varconst(chart, d, el.to_vector(), 0.0, span, {}, 101);
      const Trajectory direct = direct_perturbed(model, d, s0, span, {}, 101);
      double worst = 0.0;
      for (std::size_t i = 0; i < et.samples.size(); ++i) {
        const Vector q = modified_flow(chart, et.samples[i].x, et.samples[i].t).head(3);
        worst = std::max(worst, (q - direct.samples[i].x.head(3)).lpNorm<Eigen::Infinity>());
      }
      rows.push_back({"reconstruction_vs_direct_" + d.name, "varconst", "", worst, 1e-6});
    }
    return rows;
  }});

  auto precession_run = [model](int orbits) {
    const OrbitalElements el(1.3, 0.2, 0.4, 1.0, 2.0, 0.5);
    const double eps = 1e-3;
    const PhaseState s0 = state_from_elements(el, model, 0.0);
    const double tr = detail::inverse_square_radial_period(s0, model, eps);
    const ElementTrajectory et = integrate_varconst(kepler_chart(model), inverse_square(eps),
                                                    el.to_vector(), 0.0, orbits * tr, {},
                                                    static_cast<std::size_t>(orbits) + 1);
    return std::make_pair(et, detail::inverse_square_apsidal_advance(s0, eps));
  };

  out.push_back({"apsidal_precession", "varconst", [precession_run](const VerifyOptions&) {
    const auto [et, dw] = precession_run(10);
    const double per_orbit = (et.samples.back().x[4] - et.samples.front().x[4]) / 10.0;
    return std::vector<Check>{
        {"precession_relative_error", "varconst", "", std::abs(per_orbit / dw - 1.0), 0.02}};
  }});

  out.push_back({"sma_no_secular_drift", "varconst", [precession_run](const VerifyOptions&) {
    const auto [et, dw] = precession_run(10);
    (void)dw;
    double worst = 0.0;
    for (std::size_t k = 1; k < et.samples.size(); ++k)
      worst = std::max(worst, std::abs(et.samples[k].x[0] - et.samples[0].x[0]));
    return std::vector<Check>{{"sma_deviation_at_period_multiples", "varconst", "", worst, 1e-6}};
  }});

  out.push_back({"hamilton_via_brackets", "brackets", [model](const VerifyOptions& o) {
    const MotionChart chart = kepler_chart(model);
    const ScalarField q_ham =
        detail::phase_function([model](const PhaseState& s) { return energy(s, model); });
    std::mt19937_64 rng(o.seed + 15);
    std::uniform_real_distribution<double> time(-5.0, 5.0);
    const double h = 1e-5;
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Vector el = detail::random_elements(rng).to_vector();
      const double t = time(rng);
      const Vector x = chart.to_phase(el, t);
      const Vector dxdt = (chart.to_phase(el, t + h) - chart.to_phase(el, t - h)) / (2 * h);
      for (int i = 0; i < 6; ++i) {
        const ScalarField g = [i](const Vector& v) { return v[i]; };
        worst = std::max(worst, std::abs(dxdt[i] - poisson_bracket(q_ham, g, x)));
      }
    }
    return std::vector<Check>{{"hamilton_equation_residual", "brackets", "", worst, 1e-6}};
  }});

  return out;
}

/// Runs every catalog entry whose criterion or group contains
/// `filter` (empty runs all). Errors inside a check become a failing row.
inline std::vector<Check> run_checks(const VerifyOptions& opts = {}, const std::string& filter = "") {
  std::vector<Check> rows;
  for (const CheckSpec& spec : check_catalog()) {
    if (!filter.empty() && spec.group.find(filter) == std::string::npos &&
        spec.criterion.find(filter) == std::string::npos)
      continue;
    try {
      for (Check c : spec.run(opts)) {
        c.criterion = spec.criterion;
        rows.push_back(std::move(c));
      }
    } catch (const std::exception&) {
      rows.push_back({spec.criterion + "_error", spec.group, spec.criterion,
                      std::numeric_limits<double>::infinity(), 0.0});
    }
  }
  return rows;
}

}  // namespace vcm
