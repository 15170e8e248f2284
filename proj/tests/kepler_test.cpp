#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vcm/dynsys.hpp"
#include "vcm/kepler.hpp"

namespace vcm {
namespace {

constexpr double pi = std::numbers::pi;

PhaseState make_state(Vec3 q, Vec3 p, double t = 0.0) { return {t, q, p}; }

// E - 0.1 sin E = 1, bisected to 30 digits before the solver existed.
constexpr double kKeplerRootM1E01 = 1.08859775239789361845493771471;

TEST(KeplerField, UnitRadiusAtRest) {
  const VectorField f = kepler_field(KeplerModel{2.0});
  const Vector d = f.eval(0.0, make_state({1, 0, 0}, {0, 0, 0}).to_vector());
  Vector expected(6);
  expected << 0, 0, 0, -2.0, 0, 0;
  EXPECT_EQ(d, expected);
}

TEST(KeplerField, CubeOfRadius) {
  const Vector d = kepler_field(KeplerModel{}).eval(0.0, make_state({0, 2, 0}, {1, 0, 0}).to_vector());
  Vector expected(6);
  expected << 1, 0, 0, 0, -0.25, 0;
  EXPECT_EQ(d, expected);
}

TEST(KeplerField, CollisionIsInvalid) {
  const VectorField f = kepler_field(KeplerModel{});
  EXPECT_FALSE(f.is_valid(0.0, Vector::Zero(6)));
}

TEST(KeplerModel, RejectsNonPositiveMu) {
  EXPECT_THROW(KeplerModel{0.0}, InvalidArgument);
  EXPECT_THROW(KeplerModel{-1.0}, InvalidArgument);
}

TEST(FirstIntegrals, CircularOrbit) {
  const KeplerModel m;
  const PhaseState s = make_state({1, 0, 0}, {0, 1, 0});
  EXPECT_DOUBLE_EQ(energy(s, m), -0.5);
  EXPECT_EQ(angular_momentum(s), Vec3(0, 0, 1));
  EXPECT_LT(eccentricity_vector(s, m).norm(), 1e-15);
}

TEST(FirstIntegrals, FasterThanCircular) {
  const KeplerModel m;
  const PhaseState s = make_state({1, 0, 0}, {0, 1.1, 0});
  EXPECT_NEAR(energy(s, m), -0.395, 1e-15);
  const Vec3 e = eccentricity_vector(s, m);
  EXPECT_NEAR(e.x(), 0.21, 1e-15);
  EXPECT_EQ(e.y(), 0.0);
  EXPECT_EQ(e.z(), 0.0);
}

TEST(FirstIntegrals, ConservedAlongIntegratedOrbit) {
  const KeplerModel m;
  const OrbitalElements el(1.2, 0.3, 0.5, 0.2, 1.0, 0.0);
  const PhaseState s0 = state_from_elements(el, m, 0.0);
  const Trajectory tr = flow_trajectory(kepler_field(m), 0.0, s0.to_vector(),
                                        orbital_period(el, m), {}, 20);
  for (const Sample& smp : tr.samples) {
    const PhaseState s = PhaseState::from_vector(smp.t, smp.x);
    EXPECT_LT(std::abs(energy(s, m) - energy(s0, m)), 1e-9);
    EXPECT_LT((angular_momentum(s) - angular_momentum(s0)).lpNorm<Eigen::Infinity>(), 1e-9);
    EXPECT_LT((eccentricity_vector(s, m) - eccentricity_vector(s0, m)).lpNorm<Eigen::Infinity>(),
              1e-9);
    EXPECT_LT(std::abs(swept_area_rate(s) - swept_area_rate(s0)), 1e-10);
  }
}

TEST(KeplerEquation, ZeroAndPi) {
  for (double e : {0.0, 0.3, 0.9, 0.999}) {
    EXPECT_EQ(solve_kepler_equation(0.0, e), 0.0);
    EXPECT_NEAR(solve_kepler_equation(pi, e), pi, 1e-15);
  }
}

TEST(KeplerEquation, MatchesBisectionOracle) {
  const double e_anom = solve_kepler_equation(1.0, 0.1, 1e-14);
  EXPECT_NEAR(e_anom, kKeplerRootM1E01, 1e-12);
}

TEST(KeplerEquation, ResidualAndBranchProperty) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> m(-20.0, 20.0), ecc(0.0, 0.99);
  for (int k = 0; k < 500; ++k) {
    const double mm = m(rng), e = ecc(rng);
    const double ea = solve_kepler_equation(mm, e, 1e-12);
    EXPECT_LT(std::abs(ea - e * std::sin(ea) - mm), 1e-12);
    EXPECT_GT(ea - mm, -pi);
    EXPECT_LE(ea - mm, pi);
  }
}

TEST(KeplerEquation, ImpossibleToleranceIsNoConvergence) {
  // A 1e-300 tolerance is met only when the residual rounds to exactly zero.
  EXPECT_THROW(solve_kepler_equation(2.0, 0.5, 1e-300), NoConvergence);
  for (double m : {0.7, 2.0, 3.0, 1e6 + 0.3}) {
    try {
      const double e = solve_kepler_equation(m, 0.5, 1e-300);
      EXPECT_EQ(e - 0.5 * std::sin(e) - m, 0.0);
    } catch (const NoConvergence&) {
    }
  }
}

TEST(KeplerEquation, RejectsHyperbolic) {
  EXPECT_THROW(solve_kepler_equation(1.0, 1.0), InvalidArgument);
}

TEST(Elements, CircularEquatorialIsDegenerate) {
  const OrbitalElements el = elements_from_state(make_state({1, 0, 0}, {0, 1, 0}), KeplerModel{});
  EXPECT_NEAR(el.sma, 1.0, 1e-15);
  EXPECT_NEAR(el.ecc, 0.0, 1e-15);
  EXPECT_EQ(el.raan, 0.0);
  EXPECT_EQ(el.argp, 0.0);
  EXPECT_TRUE(el.degenerate);
  EXPECT_FALSE(el.nonsingular());
}

TEST(Elements, InclinedEllipse) {
  const PhaseState s = make_state({1, 0, 0}, {0, 1.1 * std::cos(0.3), 1.1 * std::sin(0.3)});
  const OrbitalElements el = elements_from_state(s, KeplerModel{});
  EXPECT_NEAR(el.sma, 1.2658227848101266, 1e-12);
  EXPECT_NEAR(el.ecc, 0.21, 1e-14);
  EXPECT_NEAR(el.inc, 0.3, 1e-14);
  EXPECT_FALSE(el.degenerate);
  // Starting at perihelion on the ascending node.
  EXPECT_NEAR(el.raan, 0.0, 1e-14);
  EXPECT_NEAR(std::remainder(el.argp, two_pi), 0.0, 1e-12);
  EXPECT_NEAR(std::remainder(el.m0, two_pi), 0.0, 1e-12);
}

TEST(Elements, HyperbolicIsNonElliptic) {
  EXPECT_THROW(elements_from_state(make_state({1, 0, 0}, {0, 1.5, 0}), KeplerModel{}),
               NonElliptic);
}

TEST(Elements, RectilinearIsSingular) {
  EXPECT_THROW(elements_from_state(make_state({1, 0, 0}, {0.5, 0, 0}), KeplerModel{}),
               SingularElement);
}

TEST(Elements, AnglesNormalizedAtConstruction) {
  const OrbitalElements el(1.0, 0.1, 0.2, -0.5, 7.0, -pi);
  EXPECT_NEAR(el.raan, two_pi - 0.5, 1e-15);
  EXPECT_NEAR(el.argp, 7.0 - two_pi, 1e-15);
  EXPECT_NEAR(el.m0, pi, 1e-15);
  EXPECT_THROW(OrbitalElements(-1.0, 0.1, 0.2, 0, 0, 0), InvalidArgument);
  EXPECT_THROW(OrbitalElements(1.0, 1.0, 0.2, 0, 0, 0), InvalidArgument);
  EXPECT_THROW(OrbitalElements(1.0, 0.1, 4.0, 0, 0, 0), InvalidArgument);
}

double angle_gap(double a, double b) { return std::abs(std::remainder(a - b, two_pi)); }

OrbitalElements random_elements(std::mt19937_64& rng, double epoch = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {0.5 + 2.5 * u(rng), 0.02 + 0.9 * u(rng), 0.05 + 3.0 * u(rng),
          two_pi * u(rng),    two_pi * u(rng),     two_pi * u(rng), epoch};
}

TEST(Elements, RoundTripElementsStateElements) {
  const KeplerModel m{1.7};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> time(-30.0, 30.0);
  for (int k = 0; k < 200; ++k) {
    const OrbitalElements el = random_elements(rng, 0.4);
    const double t = time(rng);
    const OrbitalElements back = elements_from_state(state_from_elements(el, m, t), m, el.epoch);
    EXPECT_NEAR(back.sma, el.sma, 1e-10 * el.sma);
    EXPECT_NEAR(back.ecc, el.ecc, 1e-10);
    EXPECT_NEAR(back.inc, el.inc, 1e-10);
    EXPECT_LT(angle_gap(back.raan, el.raan), 1e-10);
    EXPECT_LT(angle_gap(back.argp, el.argp), 1e-10);
    EXPECT_LT(angle_gap(back.m0, el.m0), 1e-9);
  }
}

TEST(Elements, RoundTripStateElementsState) {
  const KeplerModel m;
  std::mt19937_64 rng(6);
  for (int k = 0; k < 200; ++k) {
    const PhaseState s = state_from_elements(random_elements(rng), m, 0.0);
    const PhaseState back = state_from_elements(elements_from_state(s, m), m, s.t);
    EXPECT_LT((back.to_vector() - s.to_vector()).lpNorm<Eigen::Infinity>(),
              1e-10 * s.to_vector().lpNorm<Eigen::Infinity>());
  }
}

TEST(Elements, AnalyticMatchesNumericalPropagation) {
  const KeplerModel m;
  std::mt19937_64 rng(8);
  for (int k = 0; k < 5; ++k) {
    const OrbitalElements el = random_elements(rng);
    const double period = orbital_period(el, m);
    const PhaseState s0 = state_from_elements(el, m, el.epoch);
    const Trajectory tr =
        flow_trajectory(kepler_field(m), el.epoch, s0.to_vector(), el.epoch + period, {}, 7);
    for (const Sample& smp : tr.samples) {
      const Vector analytic = state_from_elements(el, m, smp.t).to_vector();
      EXPECT_LT((analytic - smp.x).lpNorm<Eigen::Infinity>(), 1e-8);
    }
  }
}

TEST(Period, ThirdLaw) {
  const KeplerModel m;
  const OrbitalElements unit(1.0, 0.1, 0.2, 0, 0, 0), four(4.0, 0.1, 0.2, 0, 0, 0);
  EXPECT_DOUBLE_EQ(orbital_period(unit, m), two_pi);
  const double ratio = std::pow(orbital_period(four, m) / orbital_period(unit, m), 2);
  EXPECT_NEAR(ratio, 64.0, 64.0 * 1e-12);
  double reference = 0.0;
  for (double a : {0.5, 1.0, 2.0, 4.0}) {
    const double p = orbital_period(OrbitalElements(a, 0.3, 0.2, 0, 0, 0), m);
    const double c = p * p / (a * a * a);
    if (reference == 0.0) reference = c;
    EXPECT_NEAR(c / reference, 1.0, 1e-12);
  }
}

TEST(Period, SweptAreaRateOfUnitCircle) {
  EXPECT_DOUBLE_EQ(swept_area_rate(make_state({1, 0, 0}, {0, 1, 0})), 0.5);
}

}  // namespace
}  // namespace vcm
