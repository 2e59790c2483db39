#include "hjhomog/cover.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <set>

namespace homog {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kWindowNodeBudget = std::size_t(1) << 27;

// Real gcd by Euclid; 0 entries are ignored. Returns 0 when every input is 0.
double real_gcd(double a, double b, double tol) {
  a = std::abs(a);
  b = std::abs(b);
  if (a < b) std::swap(a, b);
  while (b > tol) {
    double r = std::fmod(a, b);
    if (r > b - tol) r = 0.0;  // fmod landed a hair under b
    a = b;
    b = r;
  }
  return a;
}

}  // namespace

double dot(const HVec& a, const HVec& b, int k) {
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += a[i] * b[i];
  return s;
}

double dot(const HVec& a, const LatticeVec& b, int k) {
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += a[i] * double(b[i]);
  return s;
}

double norm1(const HVec& a, int k) {
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += std::abs(a[i]);
  return s;
}

int norm1(const LatticeVec& a, int k) {
  int s = 0;
  for (int i = 0; i < k; ++i) s += std::abs(a[i]);
  return s;
}

int norm_inf(const LatticeVec& a, int k) {
  int s = 0;
  for (int i = 0; i < k; ++i) s = std::max(s, std::abs(a[i]));
  return s;
}

LatticeVec lattice_zero() { return {0, 0, 0, 0}; }
HVec hvec_zero() { return {0.0, 0.0, 0.0, 0.0}; }

LatticeVec lattice_scale(const LatticeVec& z, int m, int k) {
  LatticeVec r = lattice_zero();
  for (int i = 0; i < k; ++i) r[i] = m * z[i];
  return r;
}

GraphComplex::GraphComplex(int base_nodes, int rank, std::vector<int> torsion)
    : base_nodes_(base_nodes), rank_(rank), torsion_(std::move(torsion)) {
  if (base_nodes < 1) throw input_error("graph: need at least one node");
  if (rank < 0 || rank > kMaxRank)
    throw input_error("graph: rank must lie in [0, " +
                      std::to_string(kMaxRank) + "]");
  if (int(torsion_.size()) > kMaxRank)
    throw input_error("graph: at most " + std::to_string(kMaxRank) +
                      " torsion factors");
  for (int a : torsion_)
    if (a < 1) throw input_error("graph: torsion moduli must be >= 1");
}

long long GraphComplex::torsion_volume() const {
  long long v = 1;
  for (int a : torsion_) v *= a;
  return v;
}

void GraphComplex::add_arc(int a, int b, double cost, double length,
                           LatticeVec z, LatticeVec torsion) {
  if (a < 0 || a >= base_nodes_ || b < 0 || b >= base_nodes_)
    throw input_error("graph: arc endpoint out of range");
  if (!(length > 0.0) || !std::isfinite(length))
    throw input_error("graph: arc length must be positive and finite");
  if (!std::isfinite(cost)) throw input_error("graph: arc cost must be finite");
  arcs_.push_back({a, b, cost, length, z, torsion});
  index_fresh_ = false;
}

void GraphComplex::add_edge(int a, int b, double cost, double length,
                            LatticeVec z, LatticeVec torsion) {
  add_arc(a, b, cost, length, z, torsion);
  LatticeVec nz = lattice_zero(), nt = lattice_zero();
  for (int i = 0; i < kMaxRank; ++i) {
    nz[i] = -z[i];
    nt[i] = -torsion[i];
  }
  add_arc(b, a, cost, length, nz, nt);
}

void GraphComplex::refresh_index() const {
  if (index_fresh_) return;
  out_.assign(base_nodes_, {});
  in_.assign(base_nodes_, {});
  for (std::uint32_t i = 0; i < arcs_.size(); ++i) {
    out_[arcs_[i].tail].push_back(i);
    in_[arcs_[i].head].push_back(i);
  }
  index_fresh_ = true;
}

const std::vector<std::uint32_t>& GraphComplex::arcs_from(int node) const {
  refresh_index();
  return out_[node];
}

const std::vector<std::uint32_t>& GraphComplex::arcs_into(int node) const {
  refresh_index();
  return in_[node];
}

double GraphComplex::min_length() const {
  if (arcs_.empty()) throw input_error("graph: no arcs");
  double m = kInf;
  for (const auto& a : arcs_) m = std::min(m, a.length);
  return m;
}

double GraphComplex::max_length() const {
  if (arcs_.empty()) throw input_error("graph: no arcs");
  double m = 0.0;
  for (const auto& a : arcs_) m = std::max(m, a.length);
  return m;
}

int GraphComplex::max_wrap() const {
  int m = 0;
  for (const auto& a : arcs_) m = std::max(m, norm_inf(a.z, rank_));
  return m;
}

void GraphComplex::validate() const {
  if (arcs_.empty()) throw input_error("graph: no arcs");
  refresh_index();
  // Strong connectivity: every node reaches node 0 and is reached from it.
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<char> seen(base_nodes_, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      const auto& adjacent = pass == 0 ? out_[v] : in_[v];
      for (std::uint32_t ai : adjacent) {
        int w = pass == 0 ? arcs_[ai].head : arcs_[ai].tail;
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
    for (int v = 0; v < base_nodes_; ++v)
      if (!seen[v])
        throw input_error("graph: not strongly connected (node " +
                          std::to_string(v) +
                          (pass == 0 ? " unreachable from node 0)"
                                     : " cannot reach node 0)"));
  }
}

long long LatticeBox::volume(int rank) const {
  long long v = 1;
  for (int a = 0; a < rank; ++a) {
    if (hi[a] < lo[a]) throw input_error("lattice box: hi < lo");
    v *= (long long)(hi[a] - lo[a] + 1);
  }
  return v;
}

bool LatticeBox::contains(const LatticeVec& n, int rank) const {
  for (int a = 0; a < rank; ++a)
    if (n[a] < lo[a] || n[a] > hi[a]) return false;
  return true;
}

bool LatticeBox::on_boundary(const LatticeVec& n, int rank) const {
  for (int a = 0; a < rank; ++a)
    if (n[a] == lo[a] || n[a] == hi[a]) return true;
  return false;
}

LatticeBox cube_box(int rank, int radius) {
  if (radius < 0) throw input_error("cube_box: negative radius");
  LatticeBox box;
  for (int a = 0; a < rank; ++a) {
    box.lo[a] = -radius;
    box.hi[a] = radius;
  }
  return box;
}

CoverWindow::CoverWindow(const GraphComplex& base, LatticeBox box)
    : base_(&base), box_(box) {
  std::size_t count = std::size_t(base.base_nodes());
  for (int a = 0; a < base.rank(); ++a) {
    if (box.hi[a] < box.lo[a]) throw input_error("cover window: hi < lo");
    span_[a] = box.hi[a] - box.lo[a] + 1;
    if (count > kWindowNodeBudget / std::size_t(span_[a]))
      throw window_error("cover window exceeds the node budget");
    count *= std::size_t(span_[a]);
  }
  for (int m : base.torsion_moduli()) {
    if (count > kWindowNodeBudget / std::size_t(m))
      throw window_error("cover window exceeds the node budget");
    count *= std::size_t(m);
  }
  if (count > kWindowNodeBudget)
    throw window_error("cover window exceeds the node budget");
  node_count_ = count;
}

std::size_t CoverWindow::encode(int v, const LatticeVec& n,
                                const LatticeVec& t) const {
  std::size_t id = std::size_t(v);
  for (int a = 0; a < base_->rank(); ++a) {
    if (n[a] < box_.lo[a] || n[a] > box_.hi[a])
      throw input_error("cover window: free coordinate outside the box");
    id = id * std::size_t(span_[a]) + std::size_t(n[a] - box_.lo[a]);
  }
  const auto& mods = base_->torsion_moduli();
  for (std::size_t j = 0; j < mods.size(); ++j) {
    int tj = ((t[j] % mods[j]) + mods[j]) % mods[j];
    id = id * std::size_t(mods[j]) + std::size_t(tj);
  }
  return id;
}

void CoverWindow::decode(std::size_t id, int* v, LatticeVec* n,
                         LatticeVec* t) const {
  const auto& mods = base_->torsion_moduli();
  LatticeVec tors = lattice_zero();
  for (int j = int(mods.size()) - 1; j >= 0; --j) {
    tors[j] = int(id % std::size_t(mods[j]));
    id /= std::size_t(mods[j]);
  }
  LatticeVec free = lattice_zero();
  for (int a = base_->rank() - 1; a >= 0; --a) {
    free[a] = box_.lo[a] + int(id % std::size_t(span_[a]));
    id /= std::size_t(span_[a]);
  }
  if (v) *v = int(id);
  if (n) *n = free;
  if (t) *t = tors;
}

std::vector<double> CoverWindow::distances(
    std::size_t source, EdgeWeight weight,
    std::vector<char>* touched_boundary) const {
  const GraphComplex& base = *base_;
  const int rank = base.rank();
  const auto& mods = base.torsion_moduli();
  auto arc_weight = [&](const CoverArc& a) {
    return weight == EdgeWeight::Length ? a.length : a.cost;
  };
  double max_w = 0.0, quantum = 0.0;
  for (const auto& a : base.arcs()) {
    double w = arc_weight(a);
    if (w < 0.0)
      throw input_error("cover window: negative arc weight in shortest paths");
    max_w = std::max(max_w, w);
    if (w > 0.0) quantum = real_gcd(quantum, w, 1e-9);
  }

  std::vector<double> dist(node_count_, kInf);
  std::vector<char> touched(node_count_, 0);
  dist[source] = 0.0;
  {
    LatticeVec n0;
    decode(source, nullptr, &n0, nullptr);
    touched[source] = box_.on_boundary(n0, rank) ? 1 : 0;
  }

  // Expands `cur`, relaxing implicit window arcs. Returns per-neighbor
  // improvements through the callback so both queue flavors share it.
  auto expand = [&](std::size_t cur, auto&& push) {
    int v;
    LatticeVec n, t;
    decode(cur, &v, &n, &t);
    double dcur = dist[cur];
    for (std::uint32_t ai : base.arcs_from(v)) {
      const CoverArc& arc = base.arcs()[ai];
      LatticeVec n2 = n;
      bool inside = true;
      for (int a = 0; a < rank; ++a) {
        n2[a] += arc.z[a];
        if (n2[a] < box_.lo[a] || n2[a] > box_.hi[a]) inside = false;
      }
      if (!inside) continue;  // truncated window: drop the clipped arc
      LatticeVec t2 = t;
      for (std::size_t j = 0; j < mods.size(); ++j)
        t2[j] += arc.torsion[j];
      std::size_t head = encode(arc.head, n2, t2);
      double cand = dcur + arc_weight(arc);
      char flag = char(touched[cur] || box_.on_boundary(n2, rank));
      if (cand < dist[head]) {
        dist[head] = cand;
        touched[head] = flag;
        push(head, cand);
      } else if (cand == dist[head] && flag < touched[head]) {
        // An equally short path that avoids the boundary clears the flag.
        touched[head] = flag;
      }
    }
  };

  // Bucket queue when the weights share a usable quantum, else binary heap.
  bool dial = quantum > 0.0 && max_w / quantum <= 1e5;
  if (dial) {
    std::vector<std::vector<std::size_t>> buckets(1);
    buckets[0].push_back(source);
    std::size_t live = 1;
    auto push = [&](std::size_t id, double d) {
      std::size_t b = std::size_t(std::llround(d / quantum));
      if (b >= buckets.size()) buckets.resize(b + 1);
      buckets[b].push_back(id);
      ++live;
    };
    for (std::size_t b = 0; live > 0 && b < buckets.size(); ++b) {
      // Index through buckets[b] each round: pushes can reallocate the
      // outer vector and also append to the current bucket.
      for (std::size_t i = 0; i < buckets[b].size(); ++i) {
        std::size_t cur = buckets[b][i];
        --live;
        if (std::size_t(std::llround(dist[cur] / quantum)) != b)
          continue;  // stale entry
        expand(cur, push);
      }
      buckets[b] = {};
    }
  } else {
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    heap.push({0.0, source});
    while (!heap.empty()) {
      auto [d, cur] = heap.top();
      heap.pop();
      if (d > dist[cur]) continue;
      expand(cur, [&](std::size_t id, double nd) { heap.push({nd, id}); });
    }
  }

  if (touched_boundary) *touched_boundary = std::move(touched);
  return dist;
}

CoverWindow build_cover_window(const GraphComplex& base, int radius) {
  base.validate();
  return CoverWindow(base, cube_box(base.rank(), radius));
}

HVec g_map(const CoverWindow& window, std::size_t node) {
  if (node >= window.node_count())
    throw input_error("g_map: node out of range");
  LatticeVec n;
  window.decode(node, nullptr, &n, nullptr);
  HVec g = hvec_zero();
  for (int a = 0; a < window.base().rank(); ++a) g[a] = double(n[a]);
  return g;
}

HVec f_epsilon(const CoverWindow& window, std::size_t node, double eps) {
  HVec g = g_map(window, node);
  for (int a = 0; a < window.base().rank(); ++a) g[a] *= eps;
  return g;
}

double shortest_path_distance(const CoverWindow& window, std::size_t a,
                              std::size_t b, EdgeWeight weight) {
  if (a >= window.node_count() || b >= window.node_count())
    throw input_error("shortest_path_distance: node out of range");
  std::vector<double> dist = window.distances(a, weight);
  if (!std::isfinite(dist[b]))
    throw window_error(
        "shortest_path_distance: target unreachable inside the window "
        "(enlarge the window)");
  return dist[b];
}

double cover_distance(const GraphComplex& base, int v, const LatticeVec& target,
                      int margin) {
  base.validate();
  if (v < 0 || v >= base.base_nodes())
    throw input_error("cover_distance: base node out of range");
  if (margin < 1) throw input_error("cover_distance: margin must be >= 1");
  const int rank = base.rank();
  for (int attempt = 0; attempt < 16; ++attempt) {
    int pad = margin + attempt;
    LatticeBox box;
    for (int a = 0; a < rank; ++a) {
      box.lo[a] = std::min(0, target[a]) - pad;
      box.hi[a] = std::max(0, target[a]) + pad;
    }
    CoverWindow window(base, box);  // throws window_error past the budget
    std::vector<char> touched;
    std::vector<double> dist =
        window.distances(window.encode(v, lattice_zero()), EdgeWeight::Length,
                         &touched);
    // The free abelian cover quotients the torsion part away: minimize over
    // the torsion fiber of the target.
    double best = kInf;
    bool best_touched = true;
    long long tv = base.torsion_volume();
    std::size_t first = window.encode(v, target);  // torsion coordinate 0
    for (long long t = 0; t < tv; ++t) {
      std::size_t id = first + std::size_t(t);
      if (dist[id] < best || (dist[id] == best && !touched[id])) {
        best = dist[id];
        best_touched = touched[id];
      }
    }
    if (std::isfinite(best) && !best_touched) return best;
  }
  throw window_error(
      "cover_distance: geodesic kept touching the window boundary; enlarge "
      "the margin",
      norm_inf(target, rank) + margin + 16);
}

StableNormEstimate stable_norm_estimate(const GraphComplex& base,
                                        const LatticeVec& z,
                                        const std::vector<int>& multiples,
                                        int base_node, int margin) {
  if (multiples.empty())
    throw input_error("stable_norm_estimate: empty multiple list");
  for (std::size_t i = 0; i < multiples.size(); ++i) {
    if (multiples[i] < 1)
      throw input_error("stable_norm_estimate: multiples must be positive");
    if (i > 0 && multiples[i] <= multiples[i - 1])
      throw input_error("stable_norm_estimate: multiples must increase");
  }
  StableNormEstimate out;
  out.multiples = multiples;
  for (int m : multiples) {
    double d = cover_distance(base, base_node,
                              lattice_scale(z, m, base.rank()), margin);
    out.ratios.push_back(d / double(m));
  }
  out.estimate = out.ratios.back();
  out.max_increase = 0.0;
  for (std::size_t i = 1; i < out.ratios.size(); ++i)
    out.max_increase =
        std::max(out.max_increase, out.ratios[i] - out.ratios[i - 1]);
  return out;
}

bool hedlund_tube_edge(int n, int i, int j, int k, int axis) {
  (void)n;
  switch (axis) {
    case 0: return j == 0 && k == 0;      // x-line (., 0, 0)
    case 1: return i == 0 && k == 1;      // y-line (0, ., 1)
    case 2: return i == 1 && j == 1;      // z-line (1, 1, .)
    default: throw input_error("hedlund_tube_edge: axis must be 0, 1 or 2");
  }
}

GraphComplex hedlund_model(int n, double delta) {
  if (n < 4) throw input_error("hedlund_model: need n >= 4");
  if (!(delta > 0.0) || !(delta < 1.0 / n))
    throw input_error("hedlund_model: delta must lie in (0, 1/n)");
  // The three tube lines must be pairwise disjoint.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        int on = (j == 0 && k == 0) + (i == 0 && k == 1) + (i == 1 && j == 1);
        if (on > 1)
          throw input_error("hedlund_model: tube collision at (" +
                            std::to_string(i) + "," + std::to_string(j) + "," +
                            std::to_string(k) + ")");
      }
  GraphComplex g(n * n * n, 3);
  auto id = [n](int i, int j, int k) { return (i * n + j) * n + k; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int axis = 0; axis < 3; ++axis) {
          int i2 = i + (axis == 0), j2 = j + (axis == 1), k2 = k + (axis == 2);
          LatticeVec z = lattice_zero();
          if (axis == 0 && i2 == n) z[0] = 1;
          if (axis == 1 && j2 == n) z[1] = 1;
          if (axis == 2 && k2 == n) z[2] = 1;
          double w = hedlund_tube_edge(n, i, j, k, axis) ? delta : 1.0;
          g.add_edge(id(i, j, k), id(i2 % n, j2 % n, k2 % n), w, w, z);
        }
  return g;
}

int hedlund_tube_of_arc(const GraphComplex& base, std::uint32_t arc_index,
                        int n) {
  if (arc_index >= base.arcs().size())
    throw input_error("hedlund_tube_of_arc: arc out of range");
  const CoverArc& arc = base.arcs()[arc_index];
  int ti = arc.tail / (n * n), tj = (arc.tail / n) % n, tk = arc.tail % n;
  int hi = arc.head / (n * n), hj = (arc.head / n) % n, hk = arc.head % n;
  int axis = ti != hi || arc.z[0] != 0   ? 0
             : tj != hj || arc.z[1] != 0 ? 1
                                         : 2;
  // Tube membership is a property of the undirected edge; the shared fixed
  // coordinates decide it regardless of orientation.
  switch (axis) {
    case 0:
      if (tj == 0 && tk == 0 && hj == 0 && hk == 0) return 0;
      break;
    case 1:
      if (ti == 0 && tk == 1 && hi == 0 && hk == 1) return 1;
      break;
    default:
      if (ti == 1 && tj == 1 && hi == 1 && hj == 1) return 2;
      break;
  }
  return -1;
}

GraphComplex circle_graph(double cost, double length) {
  GraphComplex g(1, 1);
  LatticeVec z = lattice_zero();
  z[0] = 1;
  g.add_edge(0, 0, cost, length, z);
  return g;
}

GraphComplex flat_torus_graph() {
  GraphComplex g(1, 2);
  LatticeVec e1 = lattice_zero(), e2 = lattice_zero();
  e1[0] = 1;
  e2[1] = 1;
  g.add_edge(0, 0, 1.0, 1.0, e1);
  g.add_edge(0, 0, 1.0, 1.0, e2);
  return g;
}

GraphComplex circle_with_fin_graph(int m, int fin, double fin_length) {
  if (m < 1) throw input_error("circle_with_fin_graph: need m >= 1");
  if (fin < 0) throw input_error("circle_with_fin_graph: need fin >= 0");
  if (!(fin_length > 0.0))
    throw input_error("circle_with_fin_graph: fin_length must be positive");
  GraphComplex g(m + fin, 1);
  LatticeVec e1 = lattice_zero();
  e1[0] = 1;
  for (int i = 0; i < m; ++i)
    g.add_edge(i, (i + 1) % m, 1.0, 1.0,
               i + 1 == m ? e1 : lattice_zero());
  for (int t = 0; t < fin; ++t)
    g.add_edge(t == 0 ? 0 : m + t - 1, m + t, fin_length, fin_length);
  return g;
}

GraphComplex torsion_circle_graph(int m, int fin, int a, double handle_length) {
  if (a < 2) throw input_error("torsion_circle_graph: need torsion order >= 2");
  if (!(handle_length > 0.0))
    throw input_error("torsion_circle_graph: handle_length must be positive");
  GraphComplex plain = circle_with_fin_graph(m, fin);
  GraphComplex g(plain.base_nodes(), 1, {a});
  for (std::size_t i = 0; i < plain.arcs().size(); ++i) {
    const CoverArc& arc = plain.arcs()[i];
    g.add_arc(arc.tail, arc.head, arc.cost, arc.length, arc.z, arc.torsion);
  }
  // Torsion handle: a loop at node 0 advancing the finite deck factor.
  LatticeVec t1 = lattice_zero();
  t1[0] = 1;
  g.add_edge(0, 0, handle_length, handle_length, lattice_zero(), t1);
  return g;
}

SpaceConvergenceReport verify_space_convergence(
    const GraphComplex& base, const std::vector<double>& eps_list,
    const SpaceConvergenceOptions& options) {
  base.validate();
  if (base.rank() < 1)
    throw input_error("verify_space_convergence: rank must be >= 1");
  if (eps_list.empty())
    throw input_error("verify_space_convergence: empty eps list");
  if (options.base_node < 0 || options.base_node >= base.base_nodes())
    throw input_error("verify_space_convergence: base node out of range");
  const int rank = base.rank();
  const int strip = base.max_wrap();

  SpaceConvergenceReport report;
  for (double eps : eps_list) {
    if (!(eps > 0.0))
      throw input_error("verify_space_convergence: eps must be positive");
    const int radius = int(std::ceil(2.0 / eps)) + options.margin;
    CoverWindow window = build_cover_window(base, radius);
    const LatticeBox& box = window.box();

    // Deterministic sources: the anchor plus points along the box diagonal.
    std::vector<std::size_t> sources;
    sources.push_back(window.encode(options.base_node, lattice_zero()));
    for (int s = 1; s <= options.extra_sources; ++s) {
      double frac = double(s) / double(options.extra_sources + 1);
      LatticeVec n = lattice_zero();
      for (int a = 0; a < rank; ++a)
        n[a] = int(std::lround((2.0 * frac - 1.0) * 0.5 * radius));
      int v = (options.base_node + s) % base.base_nodes();
      sources.push_back(window.encode(v, n));
    }

    SpaceConvergenceRow row;
    row.eps = eps;
    // Two passes over (source, node) pairs: B first, then A once B is known.
    // The distance fields are cached per source; nothing per-pair is stored.
    std::vector<std::vector<double>> dists(sources.size());
    std::vector<std::vector<char>> toucheds(sources.size());
    for (std::size_t s = 0; s < sources.size(); ++s)
      dists[s] = window.distances(sources[s], EdgeWeight::Length, &toucheds[s]);

    double max_ratio = 0.0, additive = 0.0, max_fiber_d = 0.0;
    std::size_t pair_count = 0;  // counted on the first pass only
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t s = 0; s < sources.size(); ++s) {
        const std::size_t src = sources[s];
        const std::vector<double>& dist = dists[s];
        const std::vector<char>& touched = toucheds[s];
        HVec fsrc = f_epsilon(window, src, eps);
        LatticeVec nsrc;
        window.decode(src, nullptr, &nsrc, nullptr);
        for (std::size_t y = 0; y < window.node_count(); ++y) {
          if (y == src || touched[y] || !std::isfinite(dist[y])) continue;
          LatticeVec ny;
          window.decode(y, nullptr, &ny, nullptr);
          bool interior = true;
          for (int a = 0; a < rank; ++a)
            if (ny[a] < box.lo[a] + strip || ny[a] > box.hi[a] - strip)
              interior = false;
          if (!interior) continue;
          HVec fy = f_epsilon(window, y, eps);
          double df = 0.0;
          for (int a = 0; a < rank; ++a) df += std::abs(fy[a] - fsrc[a]);
          double sd = eps * dist[y];
          if (pass == 0) {
            ++pair_count;
            if (sd > 0.0) max_ratio = std::max(max_ratio, df / sd);
            bool same_fiber = true;
            for (int a = 0; a < rank; ++a)
              if (ny[a] != nsrc[a]) same_fiber = false;
            if (same_fiber) max_fiber_d = std::max(max_fiber_d, sd);
          } else if (max_ratio > 0.0) {
            additive = std::max(additive, sd / max_ratio - df);
          }
        }
      }
      if (pass == 0 && pair_count < options.min_pairs)
        throw input_error(
            "verify_space_convergence: only " + std::to_string(pair_count) +
            " usable pairs (need " + std::to_string(options.min_pairs) +
            "); enlarge the window or relax the boundary strip");
    }

    row.multiplicative = max_ratio;
    row.additive = additive;
    row.normalized = additive / eps;
    row.fiber_diameter = max_fiber_d;
    row.pairs = pair_count;
    report.rows.push_back(row);
    report.multiplicative = std::max(report.multiplicative, max_ratio);
  }

  double cmin = kInf, cmax = 0.0;
  for (const auto& r : report.rows) {
    cmin = std::min(cmin, r.normalized);
    cmax = std::max(cmax, r.normalized);
  }
  report.additive_stable = cmax <= 2.0 * cmin + 0.1;
  return report;
}

std::vector<TorsionCollapseRow> torsion_collapse_check(
    const GraphComplex& base, const std::vector<double>& eps_list,
    int base_node, int margin) {
  base.validate();
  if (base_node < 0 || base_node >= base.base_nodes())
    throw input_error("torsion_collapse_check: base node out of range");
  if (eps_list.empty())
    throw input_error("torsion_collapse_check: empty eps list");

  // The central fiber F^-1(0) = {(v, 0, t)}: its graph-metric diameter does
  // not depend on eps, so compute it once on a window grown until no
  // shortest path clips the boundary.
  const long long tv = base.torsion_volume();
  const std::size_t fiber =
      std::size_t(base.base_nodes()) * std::size_t(tv);
  double diameter = 0.0;
  for (int attempt = 0;; ++attempt) {
    if (attempt >= 16)
      throw window_error(
          "torsion_collapse_check: fiber geodesics kept touching the window "
          "boundary");
    CoverWindow window(base, cube_box(base.rank(), margin + attempt));
    diameter = 0.0;
    bool clean = true;
    for (std::size_t s = 0; s < fiber && clean; ++s) {
      // Fiber nodes are contiguous from the zero-coordinate block of each v.
      int v = int(s / std::size_t(tv));
      LatticeVec t = lattice_zero();
      std::size_t rem = s % std::size_t(tv);
      const auto& mods = base.torsion_moduli();
      for (int j = int(mods.size()) - 1; j >= 0; --j) {
        t[j] = int(rem % std::size_t(mods[j]));
        rem /= std::size_t(mods[j]);
      }
      std::size_t src = window.encode(v, lattice_zero(), t);
      std::vector<char> touched;
      std::vector<double> dist =
          window.distances(src, EdgeWeight::Length, &touched);
      for (std::size_t s2 = 0; s2 < fiber; ++s2) {
        int v2 = int(s2 / std::size_t(tv));
        LatticeVec t2 = lattice_zero();
        std::size_t rem2 = s2 % std::size_t(tv);
        for (int j = int(mods.size()) - 1; j >= 0; --j) {
          t2[j] = int(rem2 % std::size_t(mods[j]));
          rem2 /= std::size_t(mods[j]);
        }
        std::size_t id = window.encode(v2, lattice_zero(), t2);
        if (!std::isfinite(dist[id]) || touched[id]) {
          clean = false;
          break;
        }
        diameter = std::max(diameter, dist[id]);
      }
    }
    if (clean) break;
  }

  std::vector<TorsionCollapseRow> rows;
  for (double eps : eps_list) {
    if (!(eps > 0.0))
      throw input_error("torsion_collapse_check: eps must be positive");
    rows.push_back({eps, eps * diameter});
  }
  return rows;
}

}  // namespace homog
