#include <hjhomog/models.hpp>

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace homog {
namespace {

TEST(TonelliAudit, PresetsPass) {
  EXPECT_TRUE(check_tonelli(TonelliModel::flat(1)).pass);
  EXPECT_TRUE(check_tonelli(TonelliModel::flat(2)).pass);
  EXPECT_TRUE(check_tonelli(TonelliModel::pendulum(1.0)).pass);
  EXPECT_TRUE(check_tonelli(TonelliModel::aniso2d(1.0)).pass);
}

TEST(TonelliAudit, DoubleWellLagrangianFailsConvexity) {
  // (v^2 - 1)^2 is superlinear but concave between the wells.
  TonelliModel well = TonelliModel::custom(
      1,
      [](const Vec&, const Vec& v) {
        double s = v[0] * v[0] - 1.0;
        return s * s;
      },
      "double-well");
  TonelliReport report = check_tonelli(well);
  EXPECT_TRUE(report.superlinearity_pass);
  EXPECT_FALSE(report.convexity_pass);
  EXPECT_FALSE(report.pass);
  EXPECT_LT(report.min_second_difference, 0.0);
}

TEST(TonelliAudit, NonSuperlinearLagrangianCannotBeProbed) {
  // v^3 drops super-linearly for v < 0; the velocity-bound search that sizes
  // the probe radii has nowhere to stop.
  TonelliModel cubic = TonelliModel::custom(
      1, [](const Vec&, const Vec& v) { return v[0] * v[0] * v[0]; }, "cubic");
  EXPECT_THROW(check_tonelli(cubic), model_eval_error);
}

TEST(TonelliAudit, ReportCarriesSuperlinearityRows) {
  TonelliReport report = check_tonelli(TonelliModel::pendulum(1.0));
  ASSERT_FALSE(report.superlinearity.empty());
  EXPECT_TRUE(report.superlinearity_pass);
}

TEST(Legendre, QuadraticKineticEnergy) {
  // sup_v (p v - v^2/2) = p^2/2.
  TonelliModel flat = TonelliModel::flat(1);
  EXPECT_NEAR(legendre_transform(flat, vec1(0.3), vec1(1.0)), 0.5, 1e-8);
  EXPECT_NEAR(legendre_transform(flat, vec1(0.0), vec1(-2.0)), 2.0, 1e-8);
}

TEST(Legendre, MechanicalAddsPotentialAtThePoint) {
  // H(x, p) = p^2/2 + cos(2 pi x) for L = v^2/2 - cos(2 pi x).
  TonelliModel pend = TonelliModel::pendulum(1.0);
  EXPECT_NEAR(legendre_transform(pend, vec1(0.0), vec1(1.0)), 1.5, 1e-8);
  EXPECT_NEAR(legendre_transform(pend, vec1(0.5), vec1(0.0)), -1.0, 1e-8);
}

TEST(Legendre, QuarticLagrangian) {
  // L = v^4/4: maximizer of p v - v^4/4 at p=1 is v=1, value 3/4.
  TonelliModel quartic = TonelliModel::custom(
      1,
      [](const Vec&, const Vec& v) { return 0.25 * v[0] * v[0] * v[0] * v[0]; },
      "quartic");
  EXPECT_NEAR(legendre_transform(quartic, vec1(0.0), vec1(1.0)), 0.75, 1e-6);
}

TEST(LegendreInverse, QuadraticTableOnLatticePoint) {
  // Conjugating alpha(P) = P^2/2 sampled on a lattice containing P = 1
  // recovers beta(1) = 1/2 exactly.
  SampledFunction alpha = testing::sample_1d(-4.0, 4.0, 17, +[](double p) {
    return 0.5 * p * p;
  });
  EXPECT_DOUBLE_EQ(legendre_inverse(alpha, vec1(1.0)), 0.5);
  EXPECT_DOUBLE_EQ(legendre_inverse(alpha, vec1(0.0)), 0.0);
}

TEST(LegendreInverse, ConstantTableConjugatesAtZero) {
  // Ties with the boundary are fine; a constant table must conjugate to -c.
  SampledFunction alpha = testing::sample_1d(-2.0, 2.0, 9, +[](double) {
    return 0.7;
  });
  EXPECT_DOUBLE_EQ(legendre_inverse(alpha, vec1(0.0)), -0.7);
}

TEST(LegendreInverse, SlopeBeyondTheGridThrows) {
  SampledFunction alpha = testing::sample_1d(-4.0, 4.0, 17, +[](double p) {
    return 0.5 * p * p;
  });
  EXPECT_THROW(legendre_inverse(alpha, vec1(10.0)), window_error);
}

TEST(LegendreInverse, ReportsTheArgmaxNode) {
  SampledFunction alpha = testing::sample_1d(-4.0, 4.0, 17, +[](double p) {
    return 0.5 * p * p;
  });
  std::size_t argmax = 0;
  legendre_inverse(alpha, vec1(1.0), &argmax);
  EXPECT_DOUBLE_EQ(alpha.coords(argmax)[0], 1.0);
}

TEST(Fenchel, InequalityAndEqualityAtTheGradient) {
  TonelliModel pend = TonelliModel::pendulum(1.0);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> band(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vec x = vec1(unit(rng));
    Vec v = vec1(band(rng));
    Vec p = vec1(band(rng));
    double l = pend.lagrangian(x, v);
    double h = pend.hamiltonian(x, p);
    EXPECT_GE(l + h, p[0] * v[0] - 1e-9);
    // Equality at p = L_v(x, v) (= v for unit mass).
    Vec grad = pend.lagrangian_velocity_gradient(x, v);
    double h_at_grad = pend.hamiltonian(x, grad);
    EXPECT_NEAR(l + h_at_grad, grad[0] * v[0], 1e-8);
  }
}

TEST(EulerLagrange, FreeMotionIsExact) {
  TonelliModel flat = TonelliModel::flat(1);
  Trajectory t = euler_lagrange_integrate(flat, vec1(0.3), vec1(0.7), 1.0, 0.01);
  ASSERT_EQ(t.times.size(), 101u);
  EXPECT_NEAR(t.positions.back()[0], 0.3 + 0.7, 1e-12);
  for (const Vec& v : t.velocities) EXPECT_DOUBLE_EQ(v[0], 0.7);
  for (double e : t.energy) EXPECT_NEAR(e, 0.5 * 0.7 * 0.7, 1e-12);
  t.validate();
}

TEST(EulerLagrange, EquilibriumStaysPut) {
  // x = 1/2 is a critical point of cos(2 pi x); zero initial velocity stays.
  TonelliModel pend = TonelliModel::pendulum(1.0);
  Trajectory t = euler_lagrange_integrate(pend, vec1(0.5), vec1(0.0), 1.0, 0.01);
  for (const Vec& x : t.positions) EXPECT_NEAR(x[0], 0.5, 1e-12);
  for (const Vec& v : t.velocities) EXPECT_NEAR(v[0], 0.0, 1e-12);
}

TEST(EulerLagrange, EnergyDriftIsSecondOrder) {
  // Halving dt divides the worst energy drift by about four.
  TonelliModel pend = TonelliModel::pendulum(1.0);
  auto drift = [&](double dt) {
    Trajectory t = euler_lagrange_integrate(pend, vec1(0.1), vec1(0.5), 1.0, dt);
    double worst = 0.0;
    for (double e : t.energy) worst = std::max(worst, std::abs(e - t.energy[0]));
    return worst;
  };
  double coarse = drift(0.01);
  double fine = drift(0.005);
  ASSERT_GT(fine, 0.0);
  double ratio = coarse / fine;
  EXPECT_GE(ratio, 2.5);
  EXPECT_LE(ratio, 6.0);
}

TEST(EulerLagrange, TimeReversible) {
  TonelliModel pend = TonelliModel::pendulum(1.0);
  Trajectory fwd = euler_lagrange_integrate(pend, vec1(0.2), vec1(1.1), 1.0, 0.005);
  Trajectory back = euler_lagrange_integrate(
      pend, fwd.positions.back(), vec1(-fwd.velocities.back()[0]), 1.0, 0.005);
  EXPECT_NEAR(back.positions.back()[0], 0.2, 1e-10);
  EXPECT_NEAR(back.velocities.back()[0], -1.1, 1e-10);
}

TEST(EulerLagrange, NonMechanicalModelsAreRejected) {
  TonelliModel quartic = TonelliModel::custom(
      1,
      [](const Vec&, const Vec& v) { return 0.25 * v[0] * v[0] * v[0] * v[0]; },
      "quartic");
  EXPECT_THROW(euler_lagrange_integrate(quartic, vec1(0.0), vec1(1.0), 1.0, 0.01),
               unsupported_model_error);
}

TEST(EulerLagrange, StepLargerThanTenthOfHorizonRejected) {
  TonelliModel pend = TonelliModel::pendulum(1.0);
  EXPECT_THROW(euler_lagrange_integrate(pend, vec1(0.0), vec1(1.0), 0.05, 0.01),
               input_error);
}

TEST(PotentialTable, MatchesClosedFormAtNodes) {
  // 64-point table of cos(2 pi x) interpolates exactly at its own nodes.
  std::vector<double> samples(64);
  for (int i = 0; i < 64; ++i)
    samples[std::size_t(i)] = std::cos(2.0 * M_PI * i / 64.0);
  TonelliModel table = TonelliModel::from_potential_table(samples);
  TonelliModel pend = TonelliModel::pendulum(1.0);
  for (int i = 0; i < 64; ++i) {
    Vec x = vec1(double(i) / 64.0);
    EXPECT_NEAR(table.potential(x), pend.potential(x), 1e-15);
  }
  EXPECT_TRUE(table.mechanical());
}

TEST(SampledFunction, ValidateRejectsShapeMismatch) {
  SampledFunction bad;
  bad.k = 1;
  bad.lo = vec1(0.0);
  bad.hi = vec1(1.0);
  bad.points = {5, 1};
  bad.values.assign(4, 0.0);  // one short
  EXPECT_THROW(bad.validate(), input_error);
}

TEST(ModelShift, ShiftsTheLagrangianByAMomentumPairing) {
  TonelliModel pend = TonelliModel::pendulum(1.0);
  TonelliModel shifted = pend.shifted_by(vec1(2.0));
  Vec x = vec1(0.3), v = vec1(1.4);
  EXPECT_NEAR(shifted.lagrangian(x, v), pend.lagrangian(x, v) - 2.0 * v[0],
              1e-15);
}

}  // namespace
}  // namespace homog
