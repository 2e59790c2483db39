#include <benchmark/benchmark.h>

#include <cmath>

#include <hjhomog/cover.hpp>
#include <hjhomog/discrete_weakkam.hpp>
#include <hjhomog/effective.hpp>
#include <hjhomog/hj_grid.hpp>
#include <hjhomog/models.hpp>

namespace {

using namespace homog;

void BM_LaxStep1d(benchmark::State& state) {
  const int n = int(state.range(0));
  TonelliModel pend = TonelliModel::pendulum(1.0);
  PeriodicGrid grid(1, n);
  LaxOleinikStepper stepper(pend, grid, 0.02);
  ValueField u = ValueField::sampled(grid, [](const Vec& x) {
    return std::abs(min_image(x[0] - 0.5));
  });
  for (auto _ : state) {
    benchmark::DoNotOptimize(stepper.step(u));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_LaxStep1d)->Arg(256)->Arg(1024)->Arg(4096);

void BM_LaxStep2d(benchmark::State& state) {
  const int n = int(state.range(0));
  TonelliModel aniso = TonelliModel::aniso2d(1.0);
  PeriodicGrid grid(2, n);
  LaxOleinikStepper stepper(aniso, grid, 0.02);
  ValueField u = ValueField::sampled(grid, [](const Vec& x) {
    return std::abs(min_image(x[0] - 0.5)) + std::abs(min_image(x[1] - 0.5));
  });
  for (auto _ : state) {
    benchmark::DoNotOptimize(stepper.step(u));
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_LaxStep2d)->Arg(64)->Arg(128);

void BM_SolveCauchyPendulum(benchmark::State& state) {
  TonelliModel pend = TonelliModel::pendulum(1.0);
  PeriodicGrid grid(1, 256);
  ValueField f = ValueField::sampled(grid, [](const Vec& x) {
    return std::abs(min_image(x[0] - 0.5));
  });
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_cauchy(f, pend, 0.5, 0.01));
  }
}
BENCHMARK(BM_SolveCauchyPendulum);

void BM_LegendreTransform(benchmark::State& state) {
  TonelliModel quartic = TonelliModel::custom(
      1,
      [](const Vec&, const Vec& v) { return 0.25 * v[0] * v[0] * v[0] * v[0]; },
      "quartic");
  for (auto _ : state) {
    benchmark::DoNotOptimize(legendre_transform(quartic, vec1(0.0), vec1(1.0)));
  }
}
BENCHMARK(BM_LegendreTransform);

void BM_BetaFromAlpha(benchmark::State& state) {
  const int points = int(state.range(0));
  SampledFunction alpha;
  alpha.k = 1;
  alpha.lo = vec1(-6.0);
  alpha.hi = vec1(6.0);
  alpha.points = {points, 1};
  alpha.values.resize(std::size_t(points));
  for (int i = 0; i < points; ++i) {
    double p = -6.0 + 12.0 * double(i) / double(points - 1);
    alpha.values[std::size_t(i)] = 0.5 * p * p;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(beta_from_alpha(alpha, vec1(1.3)));
  }
  state.SetItemsProcessed(state.iterations() * points);
}
BENCHMARK(BM_BetaFromAlpha)->Arg(961)->Arg(9601);

void BM_AlphaDiscreteBisection(benchmark::State& state) {
  GraphComplex hed = hedlund_model(6, 0.1);
  HVec P = {1.0, 0.5, 0.0, 0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(alpha_discrete(hed, P));
  }
}
BENCHMARK(BM_AlphaDiscreteBisection);

void BM_AlphaKarp(benchmark::State& state) {
  GraphComplex ft = flat_torus_graph();
  HVec P = {1.0, 0.5, 0.0, 0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(alpha_karp(ft, P));
  }
}
BENCHMARK(BM_AlphaKarp);

void BM_CoverWindowDistances(benchmark::State& state) {
  const int radius = int(state.range(0));
  GraphComplex ft = flat_torus_graph();
  CoverWindow window = build_cover_window(ft, radius);
  std::size_t center = window.encode(0, lattice_zero());
  for (auto _ : state) {
    benchmark::DoNotOptimize(window.distances(center));
  }
  state.SetItemsProcessed(state.iterations() * window.node_count());
}
BENCHMARK(BM_CoverWindowDistances)->Arg(8)->Arg(32)->Arg(64);

void BM_StableNormHedlund(benchmark::State& state) {
  GraphComplex hed = hedlund_model(6, 0.1);
  LatticeVec z = {1, 1, 0, 0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(stable_norm_estimate(hed, z, {2, 4, 8}));
  }
}
BENCHMARK(BM_StableNormHedlund);

}  // namespace

BENCHMARK_MAIN();
