#include <hjhomog/io.hpp>

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace homog {
namespace {

TEST(Doubles, FormatParseRoundTripsBitwise) {
  const double cases[] = {0.0,   -0.0,   1.0 / 3.0, 1e-300, 1e300,
                          M_PI,  0.1,    -2.5e-8,   1.0,    -17.25,
                          5e-324 /* smallest subnormal */};
  for (double x : cases) {
    double back = parse_double(format_double(x));
    EXPECT_EQ(std::signbit(back), std::signbit(x)) << format_double(x);
    EXPECT_EQ(back, x) << format_double(x);
  }
  // Shortest form: no digit spam for representable decimals.
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_THROW(parse_double("not-a-number"), input_error);
  EXPECT_THROW(parse_double(""), input_error);
}

TEST(ValueFieldCsv, RoundTripsBitExact1d) {
  testing::TempDir dir("io-field-1d");
  PeriodicGrid grid(1, 64);
  std::mt19937 rng(123);
  std::uniform_real_distribution<double> band(-5.0, 5.0);
  std::vector<double> values(grid.node_count());
  for (double& v : values) v = band(rng);
  ValueField field(grid, values, 0.75);

  auto path = dir.path() / "field.csv";
  write_value_field_csv(path, field);
  ValueField back = read_value_field_csv(path);
  ASSERT_EQ(back.grid().dim(), 1);
  ASSERT_EQ(back.grid().n(), 64);
  EXPECT_EQ(back.time(), field.time());
  for (std::size_t i = 0; i < grid.node_count(); ++i)
    EXPECT_EQ(back[i], field[i]) << "node " << i;
}

TEST(ValueFieldCsv, RoundTripsBitExact2d) {
  testing::TempDir dir("io-field-2d");
  PeriodicGrid grid(2, 16);
  std::mt19937 rng(321);
  std::uniform_real_distribution<double> band(-1.0, 1.0);
  std::vector<double> values(grid.node_count());
  for (double& v : values) v = band(rng);
  ValueField field(grid, values, 0.0);

  auto path = dir.path() / "field.csv";
  write_value_field_csv(path, field);
  ValueField back = read_value_field_csv(path);
  ASSERT_EQ(back.grid().dim(), 2);
  ASSERT_EQ(back.grid().n(), 16);
  for (std::size_t i = 0; i < grid.node_count(); ++i)
    EXPECT_EQ(back[i], field[i]) << "node " << i;
}

TEST(ValueFieldCsv, MalformedFilesAreRejected) {
  testing::TempDir dir("io-field-bad");
  auto path = dir.path() / "bad.csv";
  testing::write_text_file(path, "index,x0,value\n0,0.0,1.0\n");
  EXPECT_THROW(read_value_field_csv(path), input_error);  // no header line
  testing::write_text_file(path, "# dim=1,n=8,time=0\nindex,x0,value\n0,0.0,oops\n");
  EXPECT_THROW(read_value_field_csv(path), input_error);  // unparsable value
  testing::write_text_file(path, "# dim=1,n=8,time=0\nindex,x0,value\n0,0.0,1.0\n");
  EXPECT_THROW(read_value_field_csv(path), input_error);  // rows missing
  EXPECT_THROW(read_value_field_csv(dir.path() / "missing.csv"), input_error);
}

TEST(AlphaTableCsv, RoundTripsBitExact) {
  testing::TempDir dir("io-alpha");
  AlphaTable table;
  table.dim = 1;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> band(-3.0, 3.0);
  for (int i = 0; i < 9; ++i) {
    AlphaEntry entry;
    entry.P = vec1(-2.0 + 0.5 * i);
    entry.alpha = band(rng);
    entry.method = i % 2 ? "large_T" : "minmax";
    entry.error_bar = std::abs(band(rng)) * 1e-3;
    table.entries.push_back(entry);
  }

  auto path = dir.path() / "alpha.csv";
  write_alpha_table_csv(path, table);
  AlphaTable back = read_alpha_table_csv(path);
  ASSERT_EQ(back.dim, 1);
  ASSERT_EQ(back.entries.size(), table.entries.size());
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    EXPECT_EQ(back.entries[i].P[0], table.entries[i].P[0]);
    EXPECT_EQ(back.entries[i].alpha, table.entries[i].alpha);
    EXPECT_EQ(back.entries[i].method, table.entries[i].method);
    EXPECT_EQ(back.entries[i].error_bar, table.entries[i].error_bar);
  }
}

TEST(GraphText, DirectedRoundTripPreservesEverything) {
  testing::TempDir dir("io-graph");
  GraphComplex g(3, 2);
  g.add_arc(0, 1, 0.25, 1.0, {1, -2, 0, 0});
  g.add_arc(1, 2, -0.5, 2.0, {0, 1, 0, 0});
  g.add_arc(2, 0, 1.75, 0.5, {-1, 1, 0, 0});

  auto path = dir.path() / "graph.txt";
  write_graph_text(path, g);
  GraphComplex back = read_graph_text(path);
  ASSERT_EQ(back.base_nodes(), 3);
  ASSERT_EQ(back.rank(), 2);
  ASSERT_EQ(back.arcs().size(), g.arcs().size());
  for (std::size_t e = 0; e < g.arcs().size(); ++e) {
    const CoverArc& a = g.arcs()[e];
    const CoverArc& b = back.arcs()[e];
    EXPECT_EQ(b.tail, a.tail);
    EXPECT_EQ(b.head, a.head);
    EXPECT_EQ(b.cost, a.cost);
    EXPECT_EQ(b.length, a.length);
    EXPECT_EQ(b.z, a.z);
  }
}

TEST(GraphText, SymmetricFormExpandsToReverseClosure) {
  testing::TempDir dir("io-graph-sym");
  auto path = dir.path() / "graph.txt";
  testing::write_text_file(path,
                           "1 2 1 symmetric\n"
                           "0 1 1.5 0.25 1\n");
  GraphComplex g = read_graph_text(path);
  ASSERT_EQ(g.arcs().size(), 2u);
  const CoverArc& fwd = g.arcs()[0];
  const CoverArc& rev = g.arcs()[1];
  EXPECT_EQ(fwd.tail, 0);
  EXPECT_EQ(fwd.head, 1);
  EXPECT_EQ(fwd.length, 1.5);
  EXPECT_EQ(fwd.cost, 0.25);
  EXPECT_EQ(fwd.z[0], 1);
  EXPECT_EQ(rev.tail, 1);
  EXPECT_EQ(rev.head, 0);
  EXPECT_EQ(rev.length, 1.5);
  EXPECT_EQ(rev.cost, 0.25);
  EXPECT_EQ(rev.z[0], -1);
}

TEST(GraphText, MalformedFilesAreRejected) {
  testing::TempDir dir("io-graph-bad");
  auto path = dir.path() / "graph.txt";
  testing::write_text_file(path, "2 1\n");  // missing arc count
  EXPECT_THROW(read_graph_text(path), input_error);
  testing::write_text_file(path, "1 1 1\n0 0 1.0 1.0\n");  // missing z column
  EXPECT_THROW(read_graph_text(path), input_error);
  testing::write_text_file(path, "1 1 2\n0 0 1.0 1.0 1\n");  // short file
  EXPECT_THROW(read_graph_text(path), input_error);
  testing::write_text_file(path, "9 1 0\n");  // rank beyond the maximum
  EXPECT_THROW(read_graph_text(path), input_error);
  EXPECT_THROW(read_graph_text(dir.path() / "missing.txt"), input_error);
}

TEST(GraphText, TorsionFactorsHaveNoTextForm) {
  testing::TempDir dir("io-graph-torsion");
  GraphComplex g = torsion_circle_graph(4, 1, 3);
  EXPECT_THROW(write_graph_text(dir.path() / "graph.txt", g), input_error);
}

}  // namespace
}  // namespace homog
