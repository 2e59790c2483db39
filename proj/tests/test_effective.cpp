#include <hjhomog/effective.hpp>

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace homog {
namespace {

TEST(Oracle1d, FreeModelIsExactlyQuadratic) {
  TonelliModel flat = TonelliModel::flat(1);
  EXPECT_NEAR(alpha_1d_oracle(flat, 1.3), 0.5 * 1.3 * 1.3, 1e-9);
  EXPECT_NEAR(alpha_1d_oracle(flat, -2.0), 2.0, 1e-9);
}

TEST(Oracle1d, PendulumFlatPartAndCriticalMomentum) {
  TonelliModel pend = TonelliModel::pendulum(1.0);
  // Below the critical momentum alpha sticks at max U = 1.
  EXPECT_DOUBLE_EQ(alpha_1d_oracle(pend, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(alpha_1d_oracle(pend, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(alpha_1d_oracle(pend, -1.0), 1.0);
  // P_c = integral of sqrt(2 (1 - cos 2 pi x)) = 4 / pi.
  EXPECT_NEAR(critical_momentum_1d(pend), 4.0 / M_PI, 1e-12);
}

TEST(Oracle1d, PendulumHighMomentumReference) {
  // Frozen from a reference run; the value sits just above P^2/2 = 50.
  TonelliModel pend = TonelliModel::pendulum(1.0);
  EXPECT_NEAR(alpha_1d_oracle(pend, 10.0), 50.002500078122, 1e-8);
}

TEST(Oracle1d, ConvexAndSuperlinearInMomentum) {
  TonelliModel pend = TonelliModel::pendulum(1.0);
  const double pairs[][2] = {{0.0, 1.0}, {1.0, 2.0}, {2.0, 3.0}, {0.5, 2.5}};
  for (const auto& pq : pairs) {
    double mid = alpha_1d_oracle(pend, 0.5 * (pq[0] + pq[1]));
    double chord =
        0.5 * (alpha_1d_oracle(pend, pq[0]) + alpha_1d_oracle(pend, pq[1]));
    EXPECT_LE(mid, chord + 1e-9);
  }
  double r2 = alpha_1d_oracle(pend, 2.0) / 2.0;
  double r4 = alpha_1d_oracle(pend, 4.0) / 4.0;
  double r8 = alpha_1d_oracle(pend, 8.0) / 8.0;
  EXPECT_LT(r2, r4);
  EXPECT_LT(r4, r8);
}

TEST(Oracle1d, RejectsTwoDimensionalModels) {
  EXPECT_THROW(alpha_1d_oracle(TonelliModel::aniso2d(1.0), 1.0),
               unsupported_model_error);
  EXPECT_THROW(critical_momentum_1d(TonelliModel::aniso2d(1.0)),
               unsupported_model_error);
}

TEST(LargeTime, FreeModelRecoversTheQuadratic) {
  // dt sets the velocity lattice h/dt; 0.05 keeps the quantization bias
  // (quantum/2)^2/2 below 1e-3.
  double est = alpha_large_T(TonelliModel::flat(1), vec1(1.0), 20.0, 0.05, 256);
  EXPECT_NEAR(est, 0.5, 0.01);
}

TEST(LargeTime, PendulumCriticalValueWithErrorBar) {
  double bar = 0.0;
  double est =
      alpha_large_T(TonelliModel::pendulum(1.0), vec1(0.0), 50.0, 0.02, 256,
                    1, &bar);
  EXPECT_NEAR(est, 1.0, 0.02);
  EXPECT_GT(bar, 0.0);
  EXPECT_LE(bar, 0.05);
  EXPECT_LE(std::abs(est - 1.0), bar + 5e-3);
}

TEST(LargeTime, ShortHorizonsAreRejected) {
  EXPECT_THROW(
      alpha_large_T(TonelliModel::pendulum(1.0), vec1(0.0), 1.0, 0.02, 128),
      convergence_error);
  EXPECT_THROW(
      alpha_large_T(TonelliModel::flat(1), vec1(1.0), 0.25, 0.1, 128),
      input_error);
}

TEST(MinMax, ExactWhenTheHamiltonianIsHomogeneous) {
  // H = p^2/2 has no x dependence: the zero profile is already optimal and
  // descent cannot beat it.
  EXPECT_DOUBLE_EQ(alpha_minmax(TonelliModel::flat(1), vec1(1.2), 64, 100),
                   0.72);
}

TEST(MinMax, PendulumCriticalValueIsTheInitialProfile) {
  // At P = 0 the zero corrector already attains max_x H(x, 0) = max U = 1,
  // the exact critical value.
  EXPECT_DOUBLE_EQ(alpha_minmax(TonelliModel::pendulum(1.0), vec1(0.0), 256,
                                2000),
                   1.0);
}

TEST(RouteAgreement, ThreeIndependentRoutesMeet) {
  // Closed form, large-time averaging, and variational descent come from
  // disjoint code paths; they must land on the same curve.
  TonelliModel pend = TonelliModel::pendulum(1.0);
  for (double P : {0.5, 2.0}) {
    double oracle = alpha_1d_oracle(pend, P);
    double large_t = alpha_large_T(pend, vec1(P), 30.0, 0.02, 256);
    double minmax = alpha_minmax(pend, vec1(P), 256, 20000);
    EXPECT_NEAR(large_t, oracle, 0.05) << "P = " << P;
    EXPECT_NEAR(minmax, oracle, 0.05) << "P = " << P;
    EXPECT_NEAR(minmax, large_t, 0.1) << "P = " << P;
  }
}

TEST(CellProblem, ResidualShrinksUnderJointRefinement) {
  // The residual carries an O(dt) bias plus a velocity-quantization part in
  // h/dt, so the halving test follows the diagonal where both shrink.
  TonelliModel pend = TonelliModel::pendulum(1.0);
  CellCorrectorResult coarse = cell_corrector(pend, vec1(0.0), 1.0, 256, 0.02);
  CellCorrectorResult mid = cell_corrector(pend, vec1(0.0), 1.0, 512, 0.01);
  CellCorrectorResult fine = cell_corrector(pend, vec1(0.0), 1.0, 1024, 0.005);
  ASSERT_TRUE(coarse.converged);
  ASSERT_TRUE(mid.converged);
  ASSERT_TRUE(fine.converged);
  double r1 = coarse.residual / mid.residual;
  double r2 = mid.residual / fine.residual;
  EXPECT_GE(r1, 1.4);
  EXPECT_LE(r1, 2.6);
  EXPECT_GE(r2, 1.4);
  EXPECT_LE(r2, 2.6);
}

TEST(CellProblem, PendulumResidualBoundAtReferenceResolution) {
  TonelliModel pend = TonelliModel::pendulum(1.0);
  CellCorrectorResult cell = cell_corrector(pend, vec1(0.0), 1.0, 512, 0.005);
  ASSERT_TRUE(cell.converged);
  EXPECT_LE(cell.residual, 5e-2);
  EXPECT_NEAR(cell.residual, 0.044319588152021971, 1e-12);
  // The reported residual is exactly the published functional of the iterate.
  EXPECT_DOUBLE_EQ(
      cell.residual,
      corrector_residual(pend, vec1(0.0), cell.corrector, 1.0));
  EXPECT_NEAR(cell.corrector.mean(), 0.0, 1e-12);
}

TEST(CellProblem, MomentumShiftCanLiveInTheModel) {
  // Folding P.v into the Lagrangian and running at P = 0 solves the same
  // cell problem; for the free model on a lattice-aligned step both give the
  // zero corrector exactly.
  TonelliModel flat = TonelliModel::flat(1);
  CellCorrectorResult via_p = cell_corrector(flat, vec1(0.5), 0.125, 256,
                                             1.0 / 128.0);
  CellCorrectorResult via_model = cell_corrector(flat.shifted_by(vec1(0.5)),
                                                 vec1(0.0), 0.125, 256,
                                                 1.0 / 128.0);
  EXPECT_DOUBLE_EQ(via_p.residual, 0.0);
  EXPECT_DOUBLE_EQ(via_model.residual, 0.0);
  EXPECT_DOUBLE_EQ(sup_distance(via_p.corrector, via_model.corrector), 0.0);

  // Below the critical momentum the one-sided slope field, and with it the
  // discrete residual floor, does not depend on the shift.
  TonelliModel pend = TonelliModel::pendulum(1.0);
  CellCorrectorResult base = cell_corrector(pend, vec1(0.0), 1.0, 512, 0.02);
  CellCorrectorResult shifted = cell_corrector(pend.shifted_by(vec1(0.3)),
                                               vec1(0.0), 1.0, 512, 0.02);
  EXPECT_NEAR(base.residual, shifted.residual, 1e-9);
}

TEST(Tabulation, OracleTableRoundTripsThroughTheEntryForm) {
  TonelliModel pend = TonelliModel::pendulum(1.0);
  SampledFunction samples = tabulate_alpha(pend, vec1(-2.0), vec1(2.0), {33, 1},
                                           AlphaRoute::Oracle1D);
  AlphaTable table = alpha_table_from_samples(samples, "oracle");
  ASSERT_EQ(table.entries.size(), 33u);
  EXPECT_EQ(table.entries.front().method, "oracle");
  SampledFunction back = samples_from_alpha_table(table);
  ASSERT_EQ(back.values.size(), samples.values.size());
  for (std::size_t i = 0; i < samples.values.size(); ++i)
    EXPECT_DOUBLE_EQ(back.values[i], samples.values[i]);
  EXPECT_DOUBLE_EQ(back.lo[0], samples.lo[0]);
  EXPECT_DOUBLE_EQ(back.hi[0], samples.hi[0]);
}

TEST(Tabulation, OracleRouteRejectsTwoDimensionalModels) {
  EXPECT_THROW(tabulate_alpha(TonelliModel::aniso2d(1.0), vec2(-1.0, -1.0),
                              vec2(1.0, 1.0), {5, 5}, AlphaRoute::Oracle1D),
               unsupported_model_error);
}

TEST(EffectiveLagrangian, ConjugateOfTheQuadraticOnLatticePoints) {
  SampledFunction alpha = testing::sample_1d(-4.0, 4.0, 161, +[](double p) {
    return 0.5 * p * p;
  });
  EXPECT_DOUBLE_EQ(beta_from_alpha(alpha, vec1(1.0)), 0.5);
  EXPECT_DOUBLE_EQ(beta_from_alpha(alpha, vec1(0.0)), 0.0);
  EXPECT_DOUBLE_EQ(beta_from_alpha(alpha, vec1(-2.0)), 2.0);
}

TEST(EffectiveLagrangian, ValueAtZeroVelocityIsMinusTheMinimum) {
  TonelliModel pend = TonelliModel::pendulum(1.0);
  SampledFunction alpha = tabulate_alpha(pend, vec1(-2.0), vec1(2.0), {33, 1},
                                         AlphaRoute::Oracle1D);
  EXPECT_DOUBLE_EQ(beta_from_alpha(alpha, vec1(0.0)), -1.0);
}

TEST(EffectiveLagrangian, DoubleConjugationReturnsWithinQuantization) {
  SampledFunction alpha = testing::sample_1d(-4.0, 4.0, 161, +[](double p) {
    return 0.5 * p * p;
  });
  SampledFunction beta = tabulate_beta(alpha, vec1(-2.0), vec1(2.0), {161, 1});
  double back = legendre_inverse(beta, vec1(1.3));
  EXPECT_NEAR(back, 0.5 * 1.3 * 1.3, 2e-3);
}

TEST(EffectiveLagrangian, BetaTableIsConvexAlongTheAxis) {
  TonelliModel pend = TonelliModel::pendulum(1.0);
  SampledFunction alpha = tabulate_alpha(pend, vec1(-3.0), vec1(3.0), {61, 1},
                                         AlphaRoute::Oracle1D);
  SampledFunction beta = tabulate_beta(alpha, vec1(-1.5), vec1(1.5), {61, 1});
  for (std::size_t i = 1; i + 1 < beta.values.size(); ++i)
    EXPECT_LE(beta.values[i],
              0.5 * (beta.values[i - 1] + beta.values[i + 1]) + 1e-9);
}

}  // namespace
}  // namespace homog
