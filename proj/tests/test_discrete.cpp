#include <hjhomog/discrete_weakkam.hpp>

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace homog {
namespace {

HVec hp(double p0, double p1 = 0.0) { return {p0, p1, 0.0, 0.0}; }

// Ring of five nodes (wrap on the closing arc) plus a few directed chords
// with pseudorandom costs; unit lengths throughout so every route applies.
GraphComplex seeded_ring_graph(std::uint32_t seed) {
  GraphComplex g(5, 1);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> cost(0.0, 2.0);
  std::uniform_int_distribution<int> wrap(-1, 1);
  for (int v = 0; v < 5; ++v)
    g.add_arc(v, (v + 1) % 5, cost(rng), 1.0,
              {v == 4 ? 1 : 0, 0, 0, 0});
  const int chords[][2] = {{0, 2}, {2, 4}, {3, 1}, {4, 1}, {1, 0}};
  for (const auto& c : chords)
    g.add_arc(c[0], c[1], cost(rng), 1.0, {wrap(rng), 0, 0, 0});
  g.validate();
  return g;
}

// Audits a certificate against the graph it came from: a closed walk whose
// exact ratio is the reported value.
void check_certificate(const GraphComplex& g, const HVec& P,
                       const CycleCertificate& cert, double alpha) {
  ASSERT_FALSE(cert.arc_indices.empty());
  double gain = 0.0, length = 0.0;
  LatticeVec hom = lattice_zero();
  for (std::size_t i = 0; i < cert.arc_indices.size(); ++i) {
    const CoverArc& arc = g.arcs()[cert.arc_indices[i]];
    const CoverArc& next =
        g.arcs()[cert.arc_indices[(i + 1) % cert.arc_indices.size()]];
    EXPECT_EQ(arc.head, next.tail);
    gain += dot(P, arc.z, g.rank()) - arc.cost;
    length += arc.length;
    for (int a = 0; a < g.rank(); ++a) hom[a] += arc.z[a];
  }
  EXPECT_EQ(hom, cert.homology);
  EXPECT_NEAR(gain, cert.gain, 1e-12);
  EXPECT_NEAR(length, cert.length, 1e-12);
  EXPECT_NEAR(cert.ratio, cert.gain / cert.length, 1e-12);
  EXPECT_NEAR(cert.ratio, alpha, 1e-9);
  // The certified level makes the cycle exactly neutral.
  EXPECT_NEAR(-cert.gain + alpha * cert.length, 0.0, 1e-9);
}

TEST(AlphaDiscrete, SingleLoopRatio) {
  // One loop of cost 2: the forward cycle gives (P - 2)/1.
  GraphComplex g = circle_graph(2.0, 1.0);
  DiscreteAlphaResult r = alpha_discrete(g, hp(3.0));
  EXPECT_NEAR(r.alpha, 1.0, 1e-9);
  EXPECT_EQ(r.method, "bisection");
  check_certificate(g, hp(3.0), r.certificate, r.alpha);
  EXPECT_DOUBLE_EQ(alpha_karp(g, hp(3.0)), 1.0);
}

TEST(AlphaDiscrete, TwoLoopsGiveThePiecewiseLinearConjugate) {
  // The loop and its reverse: alpha(P) = max(P - 1, -P - 1) = |P| - 1.
  GraphComplex g = circle_graph(1.0, 1.0);
  for (double P : {0.0, 0.5, -2.0}) {
    EXPECT_NEAR(alpha_discrete(g, hp(P)).alpha, std::abs(P) - 1.0, 1e-9);
    EXPECT_NEAR(alpha_karp(g, hp(P)), std::abs(P) - 1.0, 1e-12);
  }
}

TEST(AlphaDiscrete, PureCostTriangle) {
  // Directed 3-cycle with costs 1, 2, 3 and no wrap: the only cycle has mean
  // cost 2, so alpha = -2 independently of P.
  GraphComplex g(3, 1);
  g.add_arc(0, 1, 1.0, 1.0);
  g.add_arc(1, 2, 2.0, 1.0);
  g.add_arc(2, 0, 3.0, 1.0);
  g.validate();
  EXPECT_DOUBLE_EQ(alpha_karp(g, hp(0.0)), -2.0);
  EXPECT_NEAR(alpha_discrete(g, hp(5.0)).alpha, -2.0, 1e-9);
  EXPECT_NEAR(alpha_bruteforce(g, hp(5.0)), -2.0, 1e-12);
}

TEST(AlphaDiscrete, ThreeRoutesAgreeOnSeededGraphs) {
  for (std::uint32_t seed : {11u, 29u, 47u}) {
    GraphComplex g = seeded_ring_graph(seed);
    for (double P : {0.0, 0.7, -1.3}) {
      DiscreteAlphaResult bis = alpha_discrete(g, hp(P));
      CycleCertificate karp_cert;
      double karp = alpha_karp(g, hp(P), &karp_cert);
      double brute = alpha_bruteforce(g, hp(P));
      EXPECT_NEAR(bis.alpha, karp, 1e-9) << "seed " << seed << " P " << P;
      EXPECT_NEAR(bis.alpha, brute, 1e-9) << "seed " << seed << " P " << P;
      check_certificate(g, hp(P), bis.certificate, bis.alpha);
      check_certificate(g, hp(P), karp_cert, karp);
      EXPECT_DOUBLE_EQ(karp_cert.ratio, karp);
    }
  }
}

TEST(AlphaDiscrete, KarpNeedsUnitLengths) {
  EXPECT_THROW(alpha_karp(circle_graph(1.0, 0.5), hp(0.0)), input_error);
}

TEST(GraphValidation, RejectsBrokenComplexes) {
  EXPECT_THROW(GraphComplex(0, 1), input_error);
  EXPECT_THROW(GraphComplex(1, 5), input_error);
  {
    GraphComplex g(2, 1);
    EXPECT_THROW(g.add_edge(0, 1, 1.0, -1.0), input_error);
    EXPECT_THROW(g.add_edge(0, 5, 1.0, 1.0), input_error);
  }
  {
    GraphComplex g(2, 1);
    g.add_arc(0, 1, 1.0, 1.0);  // no way back: not strongly connected
    EXPECT_THROW(g.validate(), input_error);
  }
}

TEST(ManePotential, CircleLevelsAroundTheCriticalValue) {
  GraphComplex g = circle_graph(1.0, 1.0);
  const double alpha = -1.0;  // alpha(0) = -cost
  // At the critical level the loop is neutral: the potential exists and the
  // empty walk is optimal at the base point.
  std::optional<double> at = mane_potential(g, hp(0.0), alpha, 0, 0);
  ASSERT_TRUE(at.has_value());
  EXPECT_DOUBLE_EQ(*at, 0.0);
  // Below it the loop is a negative cycle.
  EXPECT_FALSE(mane_potential(g, hp(0.0), alpha - 0.01, 0, 0).has_value());
  // Above it every closed walk has positive weight.
  std::optional<double> above = mane_potential(g, hp(0.0), alpha + 0.01, 0, 0);
  ASSERT_TRUE(above.has_value());
  EXPECT_DOUBLE_EQ(*above, 0.0);
}

TEST(ManePotential, BatchedVariantMatchesPointQueries) {
  GraphComplex g = seeded_ring_graph(11u);
  double alpha = alpha_discrete(g, hp(0.7)).alpha;
  std::optional<std::vector<double>> all =
      mane_potential_from(g, hp(0.7), alpha + 0.05, 0);
  ASSERT_TRUE(all.has_value());
  ASSERT_EQ(all->size(), 5u);
  for (int y = 0; y < 5; ++y) {
    std::optional<double> one = mane_potential(g, hp(0.7), alpha + 0.05, 0, y);
    ASSERT_TRUE(one.has_value());
    EXPECT_DOUBLE_EQ((*all)[std::size_t(y)], *one);
  }
  EXPECT_FALSE(mane_potential_from(g, hp(0.7), alpha - 0.05, 0).has_value());
}

TEST(DiscreteCorrector, CircleSolutionIsFlatAndTight) {
  GraphComplex g = circle_graph(1.0, 1.0);
  DiscretePotential pot = discrete_corrector(g, hp(0.0), -1.0);
  ASSERT_EQ(pot.u.size(), 1u);
  EXPECT_DOUBLE_EQ(pot.u[0], 0.0);
  ASSERT_EQ(pot.slack.size(), g.arcs().size());
  for (double s : pot.slack) EXPECT_NEAR(s, 0.0, 1e-12);
  EXPECT_NEAR(pot.min_slack, 0.0, 1e-12);
  EXPECT_NEAR(pot.cycle_min_slack, 0.0, 1e-12);
}

TEST(DiscreteCorrector, DominatedAndCalibratedOnSeededGraphs) {
  for (std::uint32_t seed : {11u, 29u}) {
    GraphComplex g = seeded_ring_graph(seed);
    for (double P : {0.0, 0.7}) {
      DiscreteAlphaResult r = alpha_discrete(g, hp(P));
      DiscretePotential pot = discrete_corrector(g, hp(P), r.alpha);
      ASSERT_EQ(pot.u.size(), 5u);
      ASSERT_EQ(pot.slack.size(), g.arcs().size());
      // Domination: u(head) <= u(tail) + cost - P.z + alpha l on every arc.
      for (std::size_t e = 0; e < g.arcs().size(); ++e) {
        const CoverArc& arc = g.arcs()[e];
        double slack = pot.u[std::size_t(arc.tail)] + arc.cost -
                       dot(hp(P), arc.z, 1) + r.alpha * arc.length -
                       pot.u[std::size_t(arc.head)];
        EXPECT_NEAR(slack, pot.slack[e], 1e-12);
        EXPECT_GE(slack, -1e-9);
      }
      // Calibration: the certifying cycle is tight.
      EXPECT_LE(pot.cycle_min_slack, 1e-6);
      EXPECT_GE(pot.cycle_min_slack, -1e-9);
      EXPECT_GE(pot.min_slack, -1e-9);
      EXPECT_NEAR(pot.alpha, r.alpha, 1e-12);
    }
  }
}

TEST(Tabulation, CircleTableIsTheKinkedConjugate) {
  SampledFunction table = tabulate_alpha_discrete(circle_graph(1.0, 1.0),
                                                  vec1(-2.0), vec1(2.0),
                                                  {41, 1});
  ASSERT_EQ(table.values.size(), 41u);
  for (int i = 0; i < 41; ++i) {
    double P = -2.0 + 0.1 * i;
    EXPECT_NEAR(table.values[std::size_t(i)], std::abs(P) - 1.0, 2e-9);
  }
  for (std::size_t i = 1; i + 1 < table.values.size(); ++i)
    EXPECT_LE(table.values[i],
              0.5 * (table.values[i - 1] + table.values[i + 1]) + 1e-9);
}

TEST(Tabulation, FlatTorusTableTakesTheLargerAxis) {
  SampledFunction table = tabulate_alpha_discrete(
      flat_torus_graph(), vec2(-1.0, -1.0), vec2(1.0, 1.0), {5, 5});
  ASSERT_EQ(table.values.size(), 25u);
  for (std::size_t idx = 0; idx < table.values.size(); ++idx) {
    Vec P = table.coords(idx);
    double expected = std::max(std::abs(P[0]), std::abs(P[1])) - 1.0;
    EXPECT_NEAR(table.values[idx], expected, 2e-9);
  }
}

TEST(CoverHomogenize, AffineDataReproducesExactly) {
  // f(y) = a + P.y is its own effective evolution up to the constant
  // -T alpha(P); the scheme reproduces it to rounding at every eps.
  GraphComplex g = circle_graph(1.0, 1.0);
  const double a = 0.3, P = 1.2;
  auto f = [=](const HVec& y) { return a + P * y[0]; };
  std::vector<CoverHomogenizeRow> rows =
      cover_homogenize(g, f, std::abs(P), {0.5, 0.25}, 2.0);
  ASSERT_EQ(rows.size(), 2u);
  for (const CoverHomogenizeRow& row : rows) {
    EXPECT_LE(row.sup_error, 1e-12);
    EXPECT_GT(row.compared, 0u);
    EXPECT_GT(row.window_radius, 0);
    EXPECT_NEAR(row.horizon, 2.0, 1e-12);
    EXPECT_GE(row.modulus, 0.0);
  }
}

}  // namespace
}  // namespace homog
