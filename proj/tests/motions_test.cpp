#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vcm/motions.hpp"

namespace vcm {
namespace {

const KeplerModel kModel{};
const OrbitalElements kReference(1.3, 0.2, 0.4, 1.0, 2.0, 0.5, 0.0);

OrbitalElements random_elements(std::mt19937_64& rng, double epoch = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {0.6 + 2.0 * u(rng), 0.05 + 0.75 * u(rng), 0.1 + 2.9 * u(rng),
          two_pi * u(rng),    two_pi * u(rng),      two_pi * u(rng), epoch};
}

TEST(ModifiedFlow, AtEpochIsAnalyticState) {
  const MotionChart chart = kepler_chart(kModel);
  const PhaseState s = modified_flow(chart, kReference, 0.0);
  EXPECT_EQ(s.to_vector(), state_from_elements(kReference, kModel, 0.0).to_vector());
}

TEST(ModifiedFlow, CircularHalfPeriodIsAntipodal) {
  const MotionChart chart = kepler_chart(kModel);
  const OrbitalElements circ(1.0, 0.0, 0.3, 0.7, 0.0, 0.2, 0.0);
  const PhaseState a = modified_flow(chart, circ, 0.0);
  const PhaseState b = modified_flow(chart, circ, orbital_period(circ, kModel) / 2);
  EXPECT_LT((a.q + b.q).lpNorm<Eigen::Infinity>(), 1e-9);
  EXPECT_LT((a.p + b.p).lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(ModifiedFlow, IndependentOfRepresentative) {
  const MotionChart chart = kepler_chart(kModel, 0.0);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> time(-15.0, 15.0);
  for (int k = 0; k < 50; ++k) {
    const OrbitalElements el = random_elements(rng);
    const double t1 = time(rng), t2 = time(rng);
    // Re-extract the motion's coordinates from its state at t1, then move to t2.
    const OrbitalElements again = chart_elements(chart, modified_flow(chart, el, t1));
    const PhaseState direct = modified_flow(chart, el, t2);
    const PhaseState via = modified_flow(chart, again, t2);
    EXPECT_LT((direct.to_vector() - via.to_vector()).lpNorm<Eigen::Infinity>(), 1e-9);
  }
}

TEST(ModifiedFlow, MatchesNumericalFlow) {
  const MotionChart chart = kepler_chart(kModel, 0.5);
  std::mt19937_64 rng(22);
  for (int k = 0; k < 5; ++k) {
    const Vector el = random_elements(rng, 0.5).to_vector();
    const Vector x0 = chart.to_phase(el, 0.5);
    for (double t : {-3.0, 1.0, 6.0}) {
      const Vector numeric = flow(chart.field, 0.5, x0, t);
      EXPECT_LT((modified_flow(chart, el, t) - numeric).lpNorm<Eigen::Infinity>(), 1e-8);
    }
  }
}

TEST(ModifiedFlow, VectorFormRejectsSingularElements) {
  const MotionChart chart = kepler_chart(kModel);
  Vector el = kReference.to_vector();
  el[1] = 0.0;
  EXPECT_THROW(modified_flow(chart, el, 0.0), SingularElement);
}

TEST(Chart, DiffeomorphismRoundTrip) {
  const MotionChart chart = kepler_chart(kModel, 1.0);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> time(-20.0, 20.0);
  for (int k = 0; k < 100; ++k) {
    const Vector el = random_elements(rng, 1.0).to_vector();
    for (int j = 0; j < 5; ++j) {
      const double t = time(rng);
      Vector diff = chart.to_elements(chart.to_phase(el, t), t) - el;
      for (int i = 3; i < 6; ++i) diff[i] = std::remainder(diff[i], two_pi);
      EXPECT_LT(diff.lpNorm<Eigen::Infinity>(), 1e-9);
    }
  }
}

TEST(ChartJacobian, IdentityChart) {
  const MotionChart chart = identity_chart(3);
  Vector el(6);
  el << 0.3, -1.0, 2.0, 0.1, 0.2, -0.7;
  EXPECT_EQ(chart_jacobian(chart, el, 4.0).matrix, Matrix(Matrix::Identity(6, 6)));
  const ChartJacobian fd = chart_jacobian(chart, el, 4.0, Differentiation::finite_difference);
  EXPECT_LT((fd.matrix - Matrix::Identity(6, 6)).lpNorm<Eigen::Infinity>(), 1e-9);
  EXPECT_NEAR(fd.condition, 1.0, 1e-8);
}

TEST(ChartJacobian, OscillatorFiniteDifferencesMatchClosedForm) {
  const MotionChart chart = oscillator_chart(1.7, 0.2);
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 20; ++k) {
    Vector el(2);
    el << u(rng), u(rng);
    const double t = 3.0 * u(rng);
    const Matrix analytic = chart_jacobian(chart, el, t, Differentiation::analytic).matrix;
    const Matrix fd = chart_jacobian(chart, el, t, Differentiation::finite_difference).matrix;
    EXPECT_LT((analytic - fd).lpNorm<Eigen::Infinity>(), 1e-6);
    // Closed form: d(q, p)/d(q0, p0) is the propagator itself.
    const double c = std::cos(1.7 * (t - 0.2)), s = std::sin(1.7 * (t - 0.2));
    Matrix expected(2, 2);
    expected << c, s / 1.7, -1.7 * s, c;
    EXPECT_LT((analytic - expected).lpNorm<Eigen::Infinity>(), 1e-15);

    const Vector x = chart.to_phase(el, t);
    const Matrix inv_fd = inverse_chart_jacobian(chart, x, t, Differentiation::finite_difference);
    const Matrix inv = inverse_chart_jacobian(chart, x, t, Differentiation::analytic);
    EXPECT_LT((inv - inv_fd).lpNorm<Eigen::Infinity>(), 1e-6);
    EXPECT_LT((analytic * inv - Matrix::Identity(2, 2)).lpNorm<Eigen::Infinity>(), 1e-14);
  }
}

TEST(ChartJacobian, KeplerJacobianTimesInverseIsIdentity) {
  const MotionChart chart = kepler_chart(kModel);
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> time(0.0, 10.0);
  for (int k = 0; k < 20; ++k) {
    const Vector el = random_elements(rng).to_vector();
    const double t = time(rng);
    const ChartJacobian jac = chart_jacobian(chart, el, t);
    EXPECT_TRUE(std::isfinite(jac.condition));
    const Matrix inv = inverse_chart_jacobian(chart, chart.to_phase(el, t), t);
    EXPECT_LT((jac.matrix * inv - Matrix::Identity(6, 6)).lpNorm<Eigen::Infinity>(), 1e-5);
    EXPECT_LT((inv * jac.matrix - Matrix::Identity(6, 6)).lpNorm<Eigen::Infinity>(), 1e-5);
  }
}

TEST(ChartJacobian, AngleWrapDoesNotBreakInverse) {
  // raan, argp and m0 just below 2pi: the finite-difference seeds straddle 0.
  const MotionChart chart = kepler_chart(kModel);
  Vector el(6);
  el << 1.1, 0.3, 0.6, two_pi - 1e-9, two_pi - 2e-9, two_pi - 3e-9;
  const Matrix jac = chart_jacobian(chart, el, 0.0).matrix;
  const Matrix inv = inverse_chart_jacobian(chart, chart.to_phase(el, 0.0), 0.0);
  EXPECT_LT((jac * inv - Matrix::Identity(6, 6)).lpNorm<Eigen::Infinity>(), 1e-5);
}

TEST(ChartJacobian, SeedCrossingSingularityIsReported) {
  const MotionChart chart = kepler_chart(kModel);
  Vector el = kReference.to_vector();
  el[1] = 5e-8;  // inside the chart, but ecc - h < 1e-9
  EXPECT_THROW(chart_jacobian(chart, el, 0.0), SingularNeighborhood);
  el[1] = 0.0;
  EXPECT_THROW(chart_jacobian(chart, el, 0.0), SingularElement);
}

TEST(ChartJacobian, InverseAtCircularStateIsSingular) {
  const MotionChart chart = kepler_chart(kModel);
  Vector x(6);
  x << 1, 0, 0, 0, 0.8, 0.6;
  EXPECT_THROW(inverse_chart_jacobian(chart, x, 0.0), SingularElement);
}

TEST(Legendre, UnitMass) {
  EXPECT_EQ(legendre_transform(Vec3(1, 2, 3), Vec3(0, 0, 0), kModel), Vec3(0, 0, 0));
  EXPECT_EQ(legendre_transform(Vec3(1, 2, 3), Vec3(0, 1, 0), kModel), Vec3(0, 1, 0));
}

TEST(Legendre, QuadraticKineticEnergy) {
  const Eigen::Matrix3d mass = Eigen::Vector3d(2, 1, 1).asDiagonal();
  const Vec3 v(1, 1, 0);
  EXPECT_EQ(legendre_transform(mass, v), Vec3(2, 1, 0));
  // dT/dv by central differences of T = v' M v / 2.
  for (int i = 0; i < 3; ++i) {
    Vec3 plus = v, minus = v;
    plus[i] += 1e-6;
    minus[i] -= 1e-6;
    const double dt = (0.5 * plus.dot(mass * plus) - 0.5 * minus.dot(mass * minus)) / 2e-6;
    EXPECT_NEAR(legendre_transform(mass, v)[i], dt, 1e-9);
  }
}

}  // namespace
}  // namespace vcm
