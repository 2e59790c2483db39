#include <hjhomog/hj_grid.hpp>

#include <cmath>
#include <cstdlib>
#include <vector>

#include <gtest/gtest.h>

#include <hjhomog/effective.hpp>

#include "test_support.hpp"

namespace homog {
namespace {

ValueField torus_cone(const PeriodicGrid& grid, double apex, double sign) {
  return ValueField::sampled(grid, [=](const Vec& x) {
    return sign * std::abs(min_image(x[0] - apex));
  });
}

SampledFunction quadratic_beta(double lo, double hi, int points) {
  return testing::sample_1d(lo, hi, points, +[](double v) { return 0.5 * v * v; });
}

TEST(Grid, IndexingRoundTripsAndWraps) {
  PeriodicGrid g(2, 16);
  for (int i : {0, 3, 15})
    for (int j : {0, 7, 15}) {
      std::size_t idx = g.index(i, j);
      EXPECT_EQ(g.axis_index(idx, 0), i);
      EXPECT_EQ(g.axis_index(idx, 1), j);
      Vec x = g.coords(idx);
      EXPECT_DOUBLE_EQ(x[0], i / 16.0);
      EXPECT_DOUBLE_EQ(x[1], j / 16.0);
    }
  EXPECT_EQ(g.wrap(-1), 15);
  EXPECT_EQ(g.wrap(16), 0);
  EXPECT_EQ(g.index(-1, 16), g.index(15, 0));
  EXPECT_THROW(PeriodicGrid(3, 16), input_error);
  EXPECT_THROW(PeriodicGrid(1, 4), resolution_error);
}

TEST(Grid, ValueFieldValidatesAndCentersMean) {
  PeriodicGrid g(1, 8);
  EXPECT_THROW(ValueField(g, std::vector<double>(7, 0.0)), input_error);
  EXPECT_THROW(ValueField(g, std::vector<double>(8, NAN)), input_error);
  ValueField u(g, {1, 2, 3, 4, 5, 6, 7, 8});
  EXPECT_DOUBLE_EQ(u.mean(), 4.5);
  u.remove_mean();
  EXPECT_NEAR(u.mean(), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(u.max_value(), 3.5);
  EXPECT_DOUBLE_EQ(u.min_value(), -3.5);
  PeriodicGrid other(1, 16);
  EXPECT_THROW(
      sup_distance(u, ValueField(other, std::vector<double>(16, 0.0))),
      input_error);
}

TEST(LaxOleinik, ZeroIsAFixedPointOfTheFreeSemigroup) {
  // L(x, 0) = 0 for the kinetic-energy model, so the zero field is stationary.
  PeriodicGrid grid(1, 64);
  ValueField zero(grid, std::vector<double>(64, 0.0));
  ValueField stepped = lax_oleinik_step(zero, TonelliModel::flat(1), 0.05);
  for (std::size_t i = 0; i < grid.node_count(); ++i)
    EXPECT_DOUBLE_EQ(stepped[i], 0.0);
}

TEST(LaxOleinik, CommutesWithConstants) {
  PeriodicGrid grid(1, 128);
  TonelliModel pend = TonelliModel::pendulum(1.0);
  ValueField u = ValueField::sampled(
      grid, [](const Vec& x) { return std::sin(2.0 * M_PI * x[0]); });
  ValueField shifted(grid, [&] {
    std::vector<double> w(u.values());
    for (double& v : w) v += 3.7;
    return w;
  }());
  ValueField a = lax_oleinik_step(u, pend, 0.02);
  ValueField b = lax_oleinik_step(shifted, pend, 0.02);
  for (std::size_t i = 0; i < grid.node_count(); ++i)
    EXPECT_NEAR(b[i], a[i] + 3.7, 1e-13);
}

TEST(LaxOleinik, MonotoneWithZeroTolerance) {
  // Rounding a pointwise minimum is monotone, so ordering is preserved
  // exactly in floating point.
  PeriodicGrid grid(1, 128);
  TonelliModel pend = TonelliModel::pendulum(1.0);
  ValueField u = torus_cone(grid, 0.3, -1.0);
  ValueField v = ValueField::sampled(grid, [](const Vec& x) {
    return -std::abs(min_image(x[0] - 0.3)) +
           0.2 * std::abs(std::sin(2.0 * M_PI * x[0]));
  });
  ValueField tu = lax_oleinik_step(u, pend, 0.02);
  ValueField tv = lax_oleinik_step(v, pend, 0.02);
  for (std::size_t i = 0; i < grid.node_count(); ++i)
    EXPECT_LE(tu[i], tv[i]);
}

TEST(LaxOleinik, NonexpansiveInTheSupNorm) {
  PeriodicGrid grid(1, 128);
  TonelliModel pend = TonelliModel::pendulum(1.0);
  ValueField u = torus_cone(grid, 0.3, -1.0);
  ValueField v = ValueField::sampled(grid, [](const Vec& x) {
    return 0.5 * std::cos(4.0 * M_PI * x[0]);
  });
  double before = sup_distance(u, v);
  double after =
      sup_distance(lax_oleinik_step(u, pend, 0.02), lax_oleinik_step(v, pend, 0.02));
  EXPECT_LE(after, before + 1e-13);
}

TEST(LaxOleinik, FullWindowStepMatchesExhaustiveMinimization) {
  // At dt = 0.1 the velocity window covers the whole torus, so the step must
  // agree with a brute-force minimum over every node.
  PeriodicGrid grid(1, 256);
  TonelliModel flat = TonelliModel::flat(1);
  ValueField f = torus_cone(grid, 0.5, -1.0);
  const double dt = 0.1;

  LaxOleinikStepper stepper(flat, grid, dt);
  ValueField stepped = stepper.step(f);
  EXPECT_TRUE(stepper.last_stats().full_window);

  double gap = 0.0;
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    Vec x = grid.coords(i);
    double best = HUGE_VAL;
    for (std::size_t j = 0; j < grid.node_count(); ++j) {
      double v = min_image(x[0] - grid.coords(j)[0]) / dt;
      best = std::min(best, f[j] + dt * flat.lagrangian(x, vec1(v)));
    }
    gap = std::max(gap, std::abs(stepped[i] - best));
  }
  EXPECT_LE(gap, 1e-13);

  // One exact value: starting from the downward cone at 1/2, the minimum at
  // the apex moves to -t/2; the grid search pays at most h^2/(8t) extra.
  double apex = stepped[grid.index(128)];
  double h = grid.spacing();
  EXPECT_LE(std::abs(apex - (-dt / 2.0)), h * h / (8.0 * dt) + 1e-12);
}

TEST(LaxOleinik, OneBigStepConvergesToTwoHalfSteps) {
  // Semigroup consistency: sup |T_{2dt} f - T_dt T_dt f| shrinks under grid
  // refinement. Values frozen from a reference run.
  TonelliModel pend = TonelliModel::pendulum(1.0);
  const double expected[] = {1.52587890625e-3, 8.7229429702073702e-4,
                             6.1348451464271481e-4};
  double previous = HUGE_VAL;
  int row = 0;
  for (int n : {128, 256, 512}) {
    PeriodicGrid grid(1, n);
    ValueField f = torus_cone(grid, 0.5, 1.0);
    ValueField big = lax_oleinik_step(f, pend, 0.02);
    ValueField two = lax_oleinik_step(lax_oleinik_step(f, pend, 0.01), pend, 0.01);
    double gap = sup_distance(big, two);
    EXPECT_NEAR(gap, expected[row++], 1e-12);
    EXPECT_LE(gap, 2e-2);
    EXPECT_LT(gap, previous);
    previous = gap;
  }
}

TEST(SolveCauchy, OneRunMatchesTwoHalfRuns) {
  PeriodicGrid grid(1, 256);
  TonelliModel pend = TonelliModel::pendulum(1.0);
  ValueField f = torus_cone(grid, 0.5, 1.0);
  ValueField full = solve_cauchy(f, pend, 0.2, 0.01);
  ValueField half = solve_cauchy(solve_cauchy(f, pend, 0.1, 0.01), pend, 0.1, 0.01);
  EXPECT_DOUBLE_EQ(sup_distance(full, half), 0.0);
  EXPECT_NEAR(full.time(), 0.2, 1e-12);
}

TEST(SolveCauchy, HorizonMustBeAMultipleOfTheStep) {
  PeriodicGrid grid(1, 64);
  ValueField f(grid, std::vector<double>(64, 0.0));
  EXPECT_THROW(solve_cauchy(f, TonelliModel::flat(1), 0.25, 0.1), input_error);
}

TEST(SolveOscillatory, EpsOneReducesToTheCauchyProblem) {
  PeriodicGrid grid(1, 256);
  TonelliModel pend = TonelliModel::pendulum(1.0);
  ValueField f = torus_cone(grid, 0.5, 1.0);
  ValueField osc = solve_oscillatory(f, pend, 1.0, 0.2, 0.01);
  ValueField ref = solve_cauchy(f, pend, 0.2, 0.01);
  EXPECT_DOUBLE_EQ(sup_distance(osc, ref), 0.0);
}

TEST(SolveOscillatory, HomogeneousModelIsEpsIndependent) {
  // H(x/eps, p) = H(p) for the kinetic-energy model, so every eps gives the
  // same evolution.
  PeriodicGrid grid(1, 256);
  TonelliModel flat = TonelliModel::flat(1);
  ValueField f = torus_cone(grid, 0.5, 1.0);
  ValueField ref = solve_oscillatory(f, flat, 1.0, 0.2, 0.01);
  for (double eps : {0.5, 0.25}) {
    ValueField u = solve_oscillatory(f, flat, eps, 0.2, 0.01);
    EXPECT_DOUBLE_EQ(sup_distance(u, ref), 0.0);
  }
}

TEST(SolveOscillatory, RejectsBadEpsAndCoarseGrids) {
  PeriodicGrid grid(1, 64);
  ValueField f(grid, std::vector<double>(64, 0.0));
  TonelliModel flat = TonelliModel::flat(1);
  EXPECT_THROW(solve_oscillatory(f, flat, 0.3, 0.1, 0.1), input_error);
  EXPECT_THROW(solve_oscillatory(f, flat, 0.25, 0.1, 0.1), resolution_error);
  try {
    solve_oscillatory(f, flat, 0.25, 0.1, 0.1);
  } catch (const resolution_error& e) {
    EXPECT_EQ(e.required_n, 128);
  }
}

TEST(LaxOleinik, StepWindowNarrowerThanACellThrows) {
  PeriodicGrid grid(1, 256);
  ValueField f(grid, std::vector<double>(256, 0.0));
  try {
    lax_oleinik_step(f, TonelliModel::flat(1), 1e-6);
    FAIL() << "expected resolution_error";
  } catch (const resolution_error& e) {
    EXPECT_GT(e.required_n, 256);
  }
}

TEST(HopfLaxEffective, ClosedFormValuesOnTheQuadraticFront) {
  SampledFunction beta = quadratic_beta(-6.0, 6.0, 961);
  SampledFunction fzero =
      testing::sample_1d(-3.0, 3.0, 481, +[](double) { return 0.0; });
  SampledFunction faff =
      testing::sample_1d(-2.0, 3.0, 401, +[](double x) { return 1.5 * x; });
  SampledFunction fcone =
      testing::sample_1d(-3.0, 3.0, 481, +[](double x) { return std::abs(x); });

  // f = 0: the zero front is stationary.
  EXPECT_DOUBLE_EQ(hopf_lax_effective(fzero, beta, vec1(0.5), 1.0), 0.0);
  // f = 1.5 x: u = 1.5 y - t 1.5^2/2, here 0.75 - 0.5625 = 0.1875.
  EXPECT_DOUBLE_EQ(hopf_lax_effective(faff, beta, vec1(0.5), 0.5), 0.1875);
  // f = |x|: u(y, t) = |y|^2/(2t) inside |y| <= t, |y| - t/2 outside.
  EXPECT_DOUBLE_EQ(hopf_lax_effective(fcone, beta, vec1(0.5), 1.0), 0.125);
  EXPECT_DOUBLE_EQ(hopf_lax_effective(fcone, beta, vec1(2.0), 1.0), 1.5);
}

TEST(HopfLaxEffective, ReportsTheMinimizingFoot) {
  SampledFunction beta = quadratic_beta(-6.0, 6.0, 961);
  SampledFunction fcone =
      testing::sample_1d(-3.0, 3.0, 481, +[](double x) { return std::abs(x); });
  Vec foot{0.0, 0.0};
  hopf_lax_effective(fcone, beta, vec1(2.0), 1.0, &foot);
  // Outside the parabolic core the ray comes in from y - t sign(y).
  EXPECT_NEAR(foot[0], 1.0, 1e-12);
}

TEST(HopfLaxEffective, UndersizedWindowsThrow) {
  SampledFunction beta = quadratic_beta(-6.0, 6.0, 961);
  SampledFunction ftiny =
      testing::sample_1d(-0.5, 0.5, 41, +[](double x) { return 1.5 * x; });
  // Minimizer lands on the f-window boundary.
  EXPECT_THROW(hopf_lax_effective(ftiny, beta, vec1(0.5), 1.0), window_error);
  // Small t pushes candidate velocities (y - x)/t outside the beta window.
  SampledFunction fcone =
      testing::sample_1d(-3.0, 3.0, 481, +[](double x) { return std::abs(x); });
  EXPECT_THROW(hopf_lax_effective(fcone, beta, vec1(0.5), 0.1), window_error);
}

TEST(HopfLaxTorusField, ZeroDataStaysZero) {
  PeriodicGrid grid(1, 64);
  ValueField g(grid, std::vector<double>(64, 0.0));
  SampledFunction beta = quadratic_beta(-6.0, 6.0, 961);
  ValueField u = hopf_lax_torus_field(g, beta, 1.0, 3);
  for (std::size_t i = 0; i < grid.node_count(); ++i)
    EXPECT_DOUBLE_EQ(u[i], 0.0);
}

TEST(HopfLaxTorusField, LiftRadiusForUnitOscillationData) {
  SampledFunction beta = quadratic_beta(-6.0, 6.0, 961);
  // Translates beyond |k| = 3 cost more than the data oscillation can repay:
  // t beta(k/t) = k^2/2 > 2 once k > 2.
  EXPECT_EQ(needed_lift_radius(beta, 1.0, 1.0), 3);
}

TEST(Reconstruction, FreeAffineFamilyIsAnExactSolution) {
  // For H = p^2/2 with P on the step's velocity lattice the corrector is
  // zero and u_eps = a + P.x solves the scheme exactly.
  TonelliModel flat = TonelliModel::flat(1);
  CellCorrectorResult cell =
      cell_corrector(flat, vec1(0.5), 0.125, 256, 1.0 / 128.0);
  ASSERT_TRUE(cell.converged);
  EXPECT_EQ(cell.iterations, 1);
  EXPECT_DOUBLE_EQ(cell.residual, 0.0);

  ReconstructedSolution rec = reconstruct_affine_corrector(
      flat, vec1(0.5), 0.3, cell.corrector, 0.125, 0.25, 0.125);
  EXPECT_DOUBLE_EQ(rec.residual, 0.0);
  const PeriodicGrid& grid = rec.field.grid();
  for (std::size_t i = 0; i < grid.node_count(); ++i)
    EXPECT_DOUBLE_EQ(rec.field[i], 0.3 + 0.5 * grid.coords(i)[0]);
}

TEST(Reconstruction, ResidualHalvesWithEpsAtMatchedSteps) {
  // dt = tau eps is the step an eps-oscillatory solve would take; on that
  // schedule the one-step defect of a + P.x + eps v(x/eps) scales like eps.
  TonelliModel pend = TonelliModel::pendulum(1.0);
  CellCorrectorResult cell = cell_corrector(pend, vec1(0.0), 1.0, 512, 0.01);
  ASSERT_TRUE(cell.converged);

  const double tau = 0.02;
  const double expected[] = {2.3907599437908563e-4, 1.1953799718954282e-4,
                             5.9768998594771409e-5};
  double previous = HUGE_VAL;
  int row = 0;
  for (double eps : {0.25, 0.125, 0.0625}) {
    ReconstructedSolution rec = reconstruct_affine_corrector(
        pend, vec1(0.0), 0.0, cell.corrector, 1.0, eps, tau * eps);
    EXPECT_NEAR(rec.residual, expected[row++], 1e-12);
    EXPECT_LE(rec.residual, 5e-2);
    EXPECT_LE(rec.residual, previous + 1e-3);
    previous = rec.residual;
  }
}

TEST(Reconstruction, RejectsBadEps) {
  TonelliModel flat = TonelliModel::flat(1);
  CellCorrectorResult cell =
      cell_corrector(flat, vec1(0.5), 0.125, 256, 1.0 / 128.0);
  EXPECT_THROW(reconstruct_affine_corrector(flat, vec1(0.5), 0.0,
                                            cell.corrector, 0.125, 0.3, 0.01),
               input_error);
  EXPECT_THROW(reconstruct_affine_corrector(flat, vec1(0.5), 0.0,
                                            cell.corrector, 0.125, 1.5, 0.01),
               input_error);
}

TEST(Characteristics, AffineDataHasNoDefect) {
  PeriodicGrid grid(1, 512);
  TonelliModel flat = TonelliModel::flat(1);
  ValueField f =
      ValueField::sampled(grid, [](const Vec& x) { return 0.4 * x[0]; });
  Trajectory t = euler_lagrange_integrate(flat, vec1(0.5), vec1(0.4), 0.05, 0.005);
  EXPECT_LE(characteristics_check(f, flat, t), 1e-12);
}

TEST(Characteristics, GradientRidesSmoothCharacteristics) {
  // Before any crossing, Du along gamma equals L_v(gamma, gamma'). Frozen
  // worst defect from a reference run at n = 512, dt = T/10.
  PeriodicGrid grid(1, 512);
  TonelliModel flat = TonelliModel::flat(1);
  ValueField f = ValueField::sampled(
      grid, [](const Vec& x) { return 0.3 * std::sin(2.0 * M_PI * x[0]); });
  double worst = 0.0;
  for (double x0 : {0.0, 0.15, 0.33}) {
    double v0 = 0.3 * 2.0 * M_PI * std::cos(2.0 * M_PI * x0);
    Trajectory t = euler_lagrange_integrate(flat, vec1(x0), vec1(v0), 0.05, 0.005);
    double defect = characteristics_check(f, flat, t);
    EXPECT_LE(defect, 5e-2);
    worst = std::max(worst, defect);
  }
  EXPECT_NEAR(worst, 0.039301427620213381, 1e-12);
}

TEST(Characteristics, DefectBlowsUpPastACrossing) {
  // -cos data focuses characteristics near x = 1/2 around t ~ 0.04; a
  // trajectory continued past the caustic stops matching the gradient.
  PeriodicGrid grid(1, 512);
  TonelliModel flat = TonelliModel::flat(1);
  ValueField f = ValueField::sampled(
      grid, [](const Vec& x) { return -std::cos(2.0 * M_PI * x[0]); });
  double v0 = 2.0 * M_PI * std::sin(2.0 * M_PI * 0.45);
  Trajectory pre = euler_lagrange_integrate(flat, vec1(0.45), vec1(v0), 0.02, 0.002);
  Trajectory post = euler_lagrange_integrate(flat, vec1(0.45), vec1(v0), 0.06, 0.002);
  double before = characteristics_check(f, flat, pre);
  double after = characteristics_check(f, flat, post);
  EXPECT_NEAR(before, 0.048074424986471742, 1e-12);
  EXPECT_NEAR(after, 8.2210437902098796, 1e-9);
  EXPECT_GT(after, 10.0 * before);
}

}  // namespace
}  // namespace homog
