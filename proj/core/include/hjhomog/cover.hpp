#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hjhomog/errors.hpp"
#include "hjhomog/vec.hpp"

namespace homog {

// Largest supported rank of the free part of a deck group.
constexpr int kMaxRank = 4;

using LatticeVec = std::array<int, kMaxRank>;  // integer homology coordinates
using HVec = std::array<double, kMaxRank>;     // real homology coordinates

double dot(const HVec& a, const HVec& b, int k);
double dot(const HVec& a, const LatticeVec& b, int k);
double norm1(const HVec& a, int k);
int norm1(const LatticeVec& a, int k);
int norm_inf(const LatticeVec& a, int k);
LatticeVec lattice_zero();
HVec hvec_zero();
LatticeVec lattice_scale(const LatticeVec& z, int m, int k);

// A directed arc of the base graph. `z` is the increment of the free deck
// coordinate (wrap count) and `torsion` the increment of the finite part.
// `length` (> 0) is the metric edge length / traversal time; `cost` feeds
// the cycle and weak-KAM problems.
struct CoverArc {
  int tail = 0;
  int head = 0;
  double cost = 0.0;
  double length = 1.0;
  LatticeVec z = {0, 0, 0, 0};
  LatticeVec torsion = {0, 0, 0, 0};
};

enum class EdgeWeight { Length, Cost };

// A finite graph with arcs labeled by deck-group increments; equivalently, a
// presentation of a periodic graph with deck group Z^rank x prod Z_{a_j}.
// add_edge keeps reverse closure: each undirected edge appears as two
// opposite arcs with equal cost and length and negated labels.
class GraphComplex {
 public:
  GraphComplex(int base_nodes, int rank, std::vector<int> torsion = {});

  int base_nodes() const { return base_nodes_; }
  int rank() const { return rank_; }
  const std::vector<int>& torsion_moduli() const { return torsion_; }
  int torsion_rank() const { return int(torsion_.size()); }
  long long torsion_volume() const;

  // Adds the arc a->b and its reverse b->a with negated labels.
  void add_edge(int a, int b, double cost, double length,
                LatticeVec z = {0, 0, 0, 0}, LatticeVec torsion = {0, 0, 0, 0});
  // Adds a single directed arc.
  void add_arc(int a, int b, double cost, double length,
               LatticeVec z = {0, 0, 0, 0}, LatticeVec torsion = {0, 0, 0, 0});

  const std::vector<CoverArc>& arcs() const { return arcs_; }
  // Arcs leaving / entering `node`, as indices into arcs().
  const std::vector<std::uint32_t>& arcs_from(int node) const;
  const std::vector<std::uint32_t>& arcs_into(int node) const;

  double min_length() const;
  double max_length() const;
  int max_wrap() const;  // max over arcs of |z|_inf

  // Positive finite lengths, endpoints in range, strong connectivity.
  void validate() const;

 private:
  int base_nodes_;
  int rank_;
  std::vector<int> torsion_;
  std::vector<CoverArc> arcs_;
  mutable std::vector<std::vector<std::uint32_t>> out_;
  mutable std::vector<std::vector<std::uint32_t>> in_;
  mutable bool index_fresh_ = false;
  void refresh_index() const;
};

// Axis-aligned box of free deck coordinates, inclusive on both ends.
struct LatticeBox {
  LatticeVec lo = {0, 0, 0, 0};
  LatticeVec hi = {0, 0, 0, 0};
  long long volume(int rank) const;
  bool contains(const LatticeVec& n, int rank) const;
  // 1 if n sits on the boundary of the box (some active axis at lo or hi).
  bool on_boundary(const LatticeVec& n, int rank) const;
};

LatticeBox cube_box(int rank, int radius);

// A finite window of the cover: base node x free coordinate in `box` x
// torsion coordinate. Neighbors are generated on the fly from the base arcs;
// nothing quadratic in the window size is ever materialized. Arcs whose head
// leaves the box are dropped (truncated window), so window distances always
// dominate true cover distances.
class CoverWindow {
 public:
  CoverWindow(const GraphComplex& base, LatticeBox box);
  // The window only references the base graph; the caller keeps it alive.
  CoverWindow(GraphComplex&&, LatticeBox) = delete;

  const GraphComplex& base() const { return *base_; }
  const LatticeBox& box() const { return box_; }
  std::size_t node_count() const { return node_count_; }

  std::size_t encode(int v, const LatticeVec& n,
                     const LatticeVec& t = {0, 0, 0, 0}) const;
  void decode(std::size_t id, int* v, LatticeVec* n,
              LatticeVec* t = nullptr) const;

  // Single-source shortest-path distances (Dijkstra; both weight choices
  // must be nonnegative). Unreachable nodes hold +infinity. When
  // `touched_boundary` is given, it is set per node to whether the shortest
  // path to it passes through a box-boundary cell.
  std::vector<double> distances(std::size_t source,
                                EdgeWeight weight = EdgeWeight::Length,
                                std::vector<char>* touched_boundary =
                                    nullptr) const;

 private:
  const GraphComplex* base_;
  LatticeBox box_;
  LatticeVec span_ = {1, 1, 1, 1};
  std::size_t node_count_ = 0;
};

// The paper-facing window: cube |n|_inf <= R, so node_count is exactly
// base_nodes * (2R+1)^rank * torsion_volume.
CoverWindow build_cover_window(const GraphComplex& base, int radius);
CoverWindow build_cover_window(GraphComplex&&, int) = delete;

// Free deck coordinate of a window node (offset phi(v) = 0 for every base
// vertex), and its rescaling F_eps = eps * G.
HVec g_map(const CoverWindow& window, std::size_t node);
HVec f_epsilon(const CoverWindow& window, std::size_t node, double eps);

// Exact shortest-path value between two window nodes. Throws window_error
// when the target is unreachable inside the window, and input_error when the
// requested weight is negative on some arc.
double shortest_path_distance(const CoverWindow& window, std::size_t a,
                              std::size_t b,
                              EdgeWeight weight = EdgeWeight::Length);

// Distance in the free abelian cover between (v, 0) and (v, target). The
// window starts from the hull of {0, target} padded by `margin` and grows
// until the geodesic stays clear of the outermost shell; throws window_error
// with a suggested radius if that never happens.
double cover_distance(const GraphComplex& base, int v, const LatticeVec& target,
                      int margin = 1);

// Stable norm of an integer class by distance averaging along multiples:
// d_m = d(x, (m z) x) is subadditive, so d_m / m decreases toward the stable
// norm up to an additive O(1/m) access cost.
struct StableNormEstimate {
  std::vector<int> multiples;
  std::vector<double> ratios;   // d_m / m, aligned with multiples
  double estimate = 0.0;        // final ratio (largest multiple)
  double max_increase = 0.0;    // worst consecutive ratio increase
};
StableNormEstimate stable_norm_estimate(const GraphComplex& base,
                                        const LatticeVec& z,
                                        const std::vector<int>& multiples,
                                        int base_node = 0, int margin = 1);

// Three-tube model on an N^3 grid torus: all axis edges have cost = length
// = 1 except three pairwise-disjoint axis-aligned tubes with cost = length =
// delta, one tube per axis direction. Rank 3, no torsion. Tubes sit at
// (., 0, 0), (0, ., 1) and (1, 1, .), which are disjoint for every N >= 3.
GraphComplex hedlund_model(int n, double delta);
// 1 if the grid-torus edge starting at (i, j, k) along `axis` lies in a tube.
bool hedlund_tube_edge(int n, int i, int j, int k, int axis);
// Tube index (0, 1, 2) of an arc of hedlund_model, or -1 off the tubes.
int hedlund_tube_of_arc(const GraphComplex& base, std::uint32_t arc_index,
                        int n);

// One vertex with a single loop of the given cost and length; rank 1.
GraphComplex circle_graph(double cost = 1.0, double length = 1.0);
// One vertex with two unit loops labeled (1,0) and (0,1); rank 2.
GraphComplex flat_torus_graph();
// Cycle of m nodes (wrap labeled +e1) with a pendant path of `fin` nodes
// attached to node 0; rank 1. The fin is metrically visible but
// homologically invisible.
GraphComplex circle_with_fin_graph(int m, int fin, double fin_length = 1.0);
// circle_with_fin_graph plus a torsion handle at node 0: a loop advancing
// Z_a by one. Deck group Z x Z_a.
GraphComplex torsion_circle_graph(int m, int fin, int a,
                                  double handle_length = 1.0);

// Quasi-isometric comparison of the rescaled cover with its limit space.
// For each eps (window radius ceil(2/eps) + margin), sampled node pairs
// (x, y) are scored by |F_eps(x) - F_eps(y)|_1 against eps d(x, y):
//   B_eps  = max over pairs of |dF| / (eps d)        (multiplicative)
//   A_eps  = max over pairs of eps d / B_eps - |dF|, clamped at 0.
// All pairs inside the central fiber (free coordinate 0) are always
// included, so the rescaled fiber diameter obeys diam <= B_eps A_eps by
// construction; the row records it for direct assertion.
struct SpaceConvergenceRow {
  double eps = 0.0;
  double multiplicative = 0.0;  // B_eps
  double additive = 0.0;        // A_eps
  double normalized = 0.0;      // C_eps = A_eps / eps
  double fiber_diameter = 0.0;  // max over sampled fibers of eps diam
  std::size_t pairs = 0;
};
struct SpaceConvergenceReport {
  double multiplicative = 0.0;  // max over rows of B_eps
  std::vector<SpaceConvergenceRow> rows;
  bool additive_stable = false;  // max C_eps <= 2 min C_eps + 0.1
};
struct SpaceConvergenceOptions {
  int base_node = 0;
  int margin = 1;
  int extra_sources = 4;     // Dijkstra roots besides the anchor
  std::size_t min_pairs = 100;
  unsigned threads = 1;
};
SpaceConvergenceReport verify_space_convergence(
    const GraphComplex& base, const std::vector<double>& eps_list,
    const SpaceConvergenceOptions& options = {});

// Rescaled diameter of the torsion fibers per eps: nodes differing only in
// the torsion coordinate must collapse to one limit point.
struct TorsionCollapseRow {
  double eps = 0.0;
  double fiber_diameter = 0.0;  // eps x diameter of the central fiber
};
std::vector<TorsionCollapseRow> torsion_collapse_check(
    const GraphComplex& base, const std::vector<double>& eps_list,
    int base_node = 0, int margin = 2);

}  // namespace homog
