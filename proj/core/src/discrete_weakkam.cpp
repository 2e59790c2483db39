#include "hjhomog/discrete_weakkam.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "hjhomog/effective.hpp"
#include "hjhomog/hj_grid.hpp"

namespace homog {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Finds a strictly negative cycle of the arc weights, if one exists, by
// label-correcting relaxation from a virtual all-nodes source with the
// usual |V|-relaxations cutoff.
std::optional<std::vector<std::uint32_t>> find_negative_cycle(
    const GraphComplex& base, const std::vector<double>& weight) {
  const int V = base.base_nodes();
  std::vector<double> dist(V, 0.0);
  std::vector<std::int64_t> pred(V, -1);
  std::vector<int> hits(V, 0);
  std::vector<char> queued(V, 1);
  std::deque<int> queue;
  for (int v = 0; v < V; ++v) queue.push_back(v);

  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    queued[u] = 0;
    for (std::uint32_t ai : base.arcs_from(u)) {
      const CoverArc& arc = base.arcs()[ai];
      double cand = dist[u] + weight[ai];
      if (cand < dist[arc.head]) {
        dist[arc.head] = cand;
        pred[arc.head] = std::int64_t(ai);
        if (++hits[arc.head] > V) {
          // Walk predecessors V times to land on the cycle, then collect it.
          int cur = arc.head;
          for (int step = 0; step < V; ++step)
            cur = base.arcs()[std::size_t(pred[cur])].tail;
          std::vector<std::uint32_t> cycle;
          int start = cur;
          do {
            std::uint32_t a = std::uint32_t(pred[cur]);
            cycle.push_back(a);
            cur = base.arcs()[a].tail;
          } while (cur != start);
          std::reverse(cycle.begin(), cycle.end());
          return cycle;
        }
        if (!queued[arc.head]) {
          queued[arc.head] = 1;
          queue.push_back(arc.head);
        }
      }
    }
  }
  return std::nullopt;
}

CycleCertificate certificate_from_arcs(const GraphComplex& base,
                                       const HVec& P,
                                       std::vector<std::uint32_t> arcs) {
  CycleCertificate cert;
  cert.arc_indices = std::move(arcs);
  cert.homology = lattice_zero();
  for (std::uint32_t ai : cert.arc_indices) {
    const CoverArc& arc = base.arcs()[ai];
    cert.gain += dot(P, arc.z, base.rank()) - arc.cost;
    cert.length += arc.length;
    for (int a = 0; a < base.rank(); ++a) cert.homology[a] += arc.z[a];
  }
  cert.ratio = cert.gain / cert.length;
  return cert;
}

// Arc weights of the level-k problem: c - P.z + k l.
std::vector<double> level_weights(const GraphComplex& base, const HVec& P,
                                  double k) {
  std::vector<double> w(base.arcs().size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const CoverArc& arc = base.arcs()[i];
    w[i] = arc.cost - dot(P, arc.z, base.rank()) + k * arc.length;
  }
  return w;
}

}  // namespace

DiscreteAlphaResult alpha_discrete(const GraphComplex& base, const HVec& P,
                                   double tol) {
  base.validate();
  if (!(tol > 0.0)) throw input_error("alpha_discrete: tol must be positive");

  double lo = kInf, hi = -kInf;
  for (const auto& arc : base.arcs()) {
    double r = (dot(P, arc.z, base.rank()) - arc.cost) / arc.length;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  // A cycle ratio is a length-weighted mean of arc ratios, so [lo, hi]
  // brackets alpha. k is feasible iff no cycle is negative at level k.
  auto feasible = [&](double k) {
    return !find_negative_cycle(base, level_weights(base, P, k)).has_value();
  };

  std::optional<std::vector<std::uint32_t>> cycle;
  if (feasible(lo)) {
    // Degenerate bracket: every cycle sits at the common ratio.
    cycle = find_negative_cycle(base, level_weights(base, P, lo - tol));
  } else {
    if (!feasible(hi))
      throw internal_error("alpha_discrete: no feasible level in the bracket");
    for (int iter = 0; iter < 64 && hi - lo > tol; ++iter) {
      double mid = 0.5 * (lo + hi);
      (feasible(mid) ? hi : lo) = mid;
    }
    cycle = find_negative_cycle(base, level_weights(base, P, lo));
  }
  if (!cycle)
    throw internal_error("alpha_discrete: certifying cycle extraction failed");

  DiscreteAlphaResult result;
  result.P = P;
  result.certificate = certificate_from_arcs(base, P, std::move(*cycle));
  // Polish to the exact ratio of the certifying cycle; it lies within tol of
  // the bisection bracket and is attained by an explicit cycle.
  result.alpha = result.certificate.ratio;
  result.method = "bisection";
  return result;
}

double alpha_karp(const GraphComplex& base, const HVec& P,
                  CycleCertificate* certificate) {
  base.validate();
  const int V = base.base_nodes();
  if (V > 2048)
    throw input_error("alpha_karp: graph too large for the exact DP");
  for (const auto& arc : base.arcs())
    if (std::abs(arc.length - 1.0) > 1e-12)
      throw input_error("alpha_karp: needs unit arc lengths");

  // gain[s][v]: best total gain over walks with exactly s arcs ending at v,
  // from any start node (virtual source).
  std::vector<std::vector<double>> gain(V + 1,
                                        std::vector<double>(V, -kInf));
  for (int v = 0; v < V; ++v) gain[0][v] = 0.0;
  for (int s = 1; s <= V; ++s)
    for (std::size_t ai = 0; ai < base.arcs().size(); ++ai) {
      const CoverArc& arc = base.arcs()[ai];
      if (gain[s - 1][arc.tail] == -kInf) continue;
      double cand = gain[s - 1][arc.tail] + dot(P, arc.z, base.rank()) -
                    arc.cost;
      gain[s][arc.head] = std::max(gain[s][arc.head], cand);
    }

  double alpha = -kInf;
  for (int v = 0; v < V; ++v) {
    if (gain[V][v] == -kInf) continue;
    double worst = kInf;
    for (int s = 0; s < V; ++s) {
      if (gain[s][v] == -kInf) continue;
      worst = std::min(worst, (gain[V][v] - gain[s][v]) / double(V - s));
    }
    alpha = std::max(alpha, worst);
  }
  if (alpha == -kInf)
    throw internal_error("alpha_karp: no closed walk found");

  if (certificate) {
    auto cycle = find_negative_cycle(base, level_weights(base, P, alpha - 1e-9));
    if (!cycle)
      throw internal_error("alpha_karp: certificate extraction failed");
    *certificate = certificate_from_arcs(base, P, std::move(*cycle));
    if (std::abs(certificate->ratio - alpha) >
        1e-7 * std::max(1.0, std::abs(alpha)))
      throw internal_error("alpha_karp: certificate ratio disagrees with DP");
  }
  return alpha;
}

double alpha_bruteforce(const GraphComplex& base, const HVec& P) {
  base.validate();
  const int V = base.base_nodes();
  if (V > 12)
    throw input_error("alpha_bruteforce: graph too large for enumeration");

  double best = -kInf;
  // Depth-first enumeration of simple cycles whose minimal node is `start`.
  std::vector<char> on_path(V, 0);
  std::function<void(int, int, double, double)> walk = [&](int start, int node,
                                                           double gain,
                                                           double length) {
    for (std::uint32_t ai : base.arcs_from(node)) {
      const CoverArc& arc = base.arcs()[ai];
      double g = gain + dot(P, arc.z, base.rank()) - arc.cost;
      double l = length + arc.length;
      if (arc.head == start) {
        best = std::max(best, g / l);
      } else if (arc.head > start && !on_path[arc.head]) {
        on_path[arc.head] = 1;
        walk(start, arc.head, g, l);
        on_path[arc.head] = 0;
      }
    }
  };
  for (int start = 0; start < V; ++start) walk(start, start, 0.0, 0.0);
  if (best == -kInf)
    throw internal_error("alpha_bruteforce: no cycle found");
  return best;
}

SampledFunction tabulate_alpha_discrete(const GraphComplex& base, const Vec& lo,
                                        const Vec& hi,
                                        std::array<int, 2> points) {
  if (base.rank() != 1 && base.rank() != 2)
    throw input_error("tabulate_alpha_discrete: rank must be 1 or 2");
  SampledFunction table;
  table.k = base.rank();
  table.lo = lo;
  table.hi = hi;
  table.points = points;
  if (table.k == 1) table.points[1] = 1;
  table.values.resize(table.node_count());
  table.validate();
  for (std::size_t i = 0; i < table.node_count(); ++i) {
    Vec p = table.coords(i);
    HVec P = hvec_zero();
    P[0] = p[0];
    if (table.k > 1) P[1] = p[1];
    table.values[i] = alpha_discrete(base, P).alpha;
  }
  return table;
}

std::optional<std::vector<double>> mane_potential_from(const GraphComplex& base,
                                                       const HVec& P, double k,
                                                       int x) {
  base.validate();
  if (x < 0 || x >= base.base_nodes())
    throw input_error("mane_potential: node out of range");
  const int V = base.base_nodes();
  std::vector<double> w = level_weights(base, P, k);
  double scale = 1.0;
  for (double wi : w) scale = std::max(scale, std::abs(wi));

  std::vector<double> dist(V, kInf);
  dist[x] = 0.0;  // the empty walk
  bool changed = true;
  for (int round = 0; round < V - 1 && changed; ++round) {
    changed = false;
    for (std::size_t ai = 0; ai < base.arcs().size(); ++ai) {
      const CoverArc& arc = base.arcs()[ai];
      if (dist[arc.tail] == kInf) continue;
      double cand = dist[arc.tail] + w[ai];
      if (cand < dist[arc.head]) {
        dist[arc.head] = cand;
        changed = true;
      }
    }
  }
  if (changed) {
    // One more sweep: a further material improvement certifies a negative
    // cycle, i.e. k below the critical level. Rounding-size improvements at
    // the critical level itself are tolerated.
    for (std::size_t ai = 0; ai < base.arcs().size(); ++ai) {
      const CoverArc& arc = base.arcs()[ai];
      if (dist[arc.tail] == kInf) continue;
      if (dist[arc.tail] + w[ai] < dist[arc.head] - 1e-12 * scale)
        return std::nullopt;
    }
  }
  return dist;
}

std::optional<double> mane_potential(const GraphComplex& base, const HVec& P,
                                     double k, int x, int y) {
  if (y < 0 || y >= base.base_nodes())
    throw input_error("mane_potential: node out of range");
  auto dist = mane_potential_from(base, P, k, x);
  if (!dist) return std::nullopt;
  return (*dist)[y];
}

DiscretePotential discrete_corrector(const GraphComplex& base, const HVec& P,
                                     double alpha) {
  DiscreteAlphaResult exact = alpha_discrete(base, P, 1e-9);
  if (std::abs(exact.alpha - alpha) > 1e-6 * std::max(1.0, std::abs(alpha)))
    throw input_error(
        "discrete_corrector: alpha " + std::to_string(alpha) +
        " does not match the graph's critical value " +
        std::to_string(exact.alpha));
  // Work at the certifying cycle's exact ratio so its arcs are zero-slack.
  const double level = exact.alpha;

  std::vector<int> cycle_nodes;
  for (std::uint32_t ai : exact.certificate.arc_indices)
    cycle_nodes.push_back(base.arcs()[ai].tail);

  DiscretePotential result;
  result.alpha = level;
  result.certificate = exact.certificate;
  result.u.assign(base.base_nodes(), kInf);
  for (int w : cycle_nodes) {
    auto dist = mane_potential_from(base, P, level, w);
    if (!dist)
      throw internal_error(
          "discrete_corrector: negative cycle at the critical level");
    for (int v = 0; v < base.base_nodes(); ++v)
      result.u[v] = std::min(result.u[v], (*dist)[v]);
  }

  std::vector<double> w = level_weights(base, P, level);
  result.slack.resize(base.arcs().size());
  result.min_slack = kInf;
  for (std::size_t ai = 0; ai < base.arcs().size(); ++ai) {
    const CoverArc& arc = base.arcs()[ai];
    result.slack[ai] = result.u[arc.tail] + w[ai] - result.u[arc.head];
    result.min_slack = std::min(result.min_slack, result.slack[ai]);
  }
  result.cycle_min_slack = kInf;
  for (std::uint32_t ai : exact.certificate.arc_indices)
    result.cycle_min_slack = std::min(result.cycle_min_slack, result.slack[ai]);

  if (result.min_slack < -1e-9)
    throw internal_error(
        "discrete_corrector: slack " + std::to_string(result.min_slack) +
        " below tolerance; level resolution too loose");
  if (result.cycle_min_slack > 1e-6)
    throw internal_error(
        "discrete_corrector: certifying cycle is nowhere tight");
  return result;
}

std::vector<CoverHomogenizeRow> cover_homogenize(
    const GraphComplex& base, const std::function<double(const HVec&)>& f,
    double f_lipschitz, const std::vector<double>& eps_list, double T,
    const CoverHomogenizeOptions& options) {
  base.validate();
  const int k = base.rank();
  if (k != 1 && k != 2)
    throw input_error("cover_homogenize: rank must be 1 or 2");
  if (!(T > 0.0)) throw input_error("cover_homogenize: T must be positive");
  if (!(f_lipschitz >= 0.0))
    throw input_error("cover_homogenize: negative Lipschitz bound");
  if (options.base_vertex < 0 || options.base_vertex >= base.base_nodes())
    throw input_error("cover_homogenize: base vertex out of range");
  if (eps_list.empty())
    throw input_error("cover_homogenize: empty eps list");

  // Largest per-axis deck speed of any arc.
  double vmax = 0.0;
  for (const auto& arc : base.arcs())
    vmax = std::max(vmax, double(norm_inf(arc.z, k)) / arc.length);

  // Effective Hamiltonian and Lagrangian of the base complex, shared by all
  // eps. Beyond the reachable cone the conjugate has no interior maximizer;
  // those samples are parked at a huge value so the front never picks them.
  Vec p_lo{-options.p_radius, -options.p_radius};
  Vec p_hi{options.p_radius, options.p_radius};
  SampledFunction alpha = tabulate_alpha_discrete(
      base, p_lo, p_hi, {options.p_points, options.p_points});

  const double horizon_hint = T;
  double v_span = (2.0 * options.x_radius + horizon_hint * vmax + 1.0) /
                      horizon_hint +
                  1.0;
  const double v_spacing = k == 1 ? 1.0 / 32.0 : 1.0 / 16.0;
  int v_half = int(std::ceil(v_span / v_spacing));
  SampledFunction beta;
  beta.k = k;
  beta.lo = {-v_half * v_spacing, -v_half * v_spacing};
  beta.hi = {v_half * v_spacing, v_half * v_spacing};
  beta.points = {2 * v_half + 1, k == 1 ? 1 : 2 * v_half + 1};
  beta.values.resize(beta.node_count());
  for (std::size_t i = 0; i < beta.node_count(); ++i) {
    Vec v = beta.coords(i);
    try {
      beta.values[i] = beta_from_alpha(alpha, v);
    } catch (const window_error&) {
      beta.values[i] = 1e30;  // outside the reachable cone
    }
  }

  // Exact traversal times: quantize lengths by their real gcd.
  double quantum = 0.0;
  for (const auto& arc : base.arcs())
    quantum = quantum == 0.0
                  ? arc.length
                  : [&] {
                      double a = std::max(quantum, arc.length);
                      double b = std::min(quantum, arc.length);
                      while (b > 1e-9) {
                        double r = std::fmod(a, b);
                        if (r > b - 1e-9) r = 0.0;
                        a = b;
                        b = r;
                      }
                      return a;
                    }();
  if (!(quantum > base.min_length() / 1e6))
    throw input_error(
        "cover_homogenize: arc lengths have no usable common quantum");
  std::vector<long long> arc_ticks(base.arcs().size());
  long long max_ticks = 1;
  for (std::size_t ai = 0; ai < base.arcs().size(); ++ai) {
    arc_ticks[ai] = std::llround(base.arcs()[ai].length / quantum);
    max_ticks = std::max(max_ticks, arc_ticks[ai]);
  }

  std::vector<CoverHomogenizeRow> rows;
  for (double eps : eps_list) {
    if (!(eps > 0.0))
      throw input_error("cover_homogenize: eps must be positive");
    CoverHomogenizeRow row;
    row.eps = eps;

    const long long steps =
        (long long)(std::floor(T / (eps * quantum) + 1e-9));
    if (steps < 1)
      throw input_error("cover_homogenize: horizon shorter than one arc");
    if (steps > 10000000)
      throw input_error(
          "cover_homogenize: too many time quanta; coarsen the lengths");
    row.horizon = double(steps) * eps * quantum;

    const int strip = 2 * std::max(1, base.max_wrap());
    const int radius =
        int(std::ceil((options.x_radius + T * vmax) / eps)) + options.margin +
        strip;
    row.window_radius = radius;
    CoverWindow window = build_cover_window(base, radius);
    const std::size_t count = window.node_count();

    // v(x, j) on a ring buffer of max_ticks+1 slots: arcs reach back by
    // their own tick count; walks start at time zero with f(F_eps(x)).
    const int slots = int(max_ticks) + 1;
    std::vector<std::vector<double>> ring(
        slots, std::vector<double>(count, kInf));
    std::vector<double>& start = ring[0];
    for (std::size_t x = 0; x < count; ++x)
      start[x] = f(f_epsilon(window, x, eps));

    // Declared-Lipschitz audit on single arcs of the rescaled window.
    for (std::size_t x = 0; x < count; ++x) {
      int v;
      LatticeVec n, t;
      window.decode(x, &v, &n, &t);
      for (std::uint32_t ai : base.arcs_from(v)) {
        const CoverArc& arc = base.arcs()[ai];
        LatticeVec n2 = n;
        bool inside = true;
        for (int a = 0; a < k; ++a) {
          n2[a] += arc.z[a];
          if (!window.box().contains(n2, k)) inside = false;
        }
        if (!inside) continue;
        LatticeVec t2 = t;
        for (std::size_t j = 0; j < base.torsion_moduli().size(); ++j)
          t2[j] += arc.torsion[j];
        double gap = std::abs(start[window.encode(arc.head, n2, t2)] - start[x]);
        double allowed = f_lipschitz * eps * double(norm1(arc.z, k));
        if (gap > allowed * (1.0 + 1e-6) + 1e-12)
          throw input_error(
              "cover_homogenize: initial data violates the declared "
              "Lipschitz bound");
      }
    }

    for (long long j = 1; j <= steps; ++j) {
      std::vector<double>& cur = ring[j % slots];
      std::fill(cur.begin(), cur.end(), kInf);
      for (std::size_t x = 0; x < count; ++x) {
        int v;
        LatticeVec n, t;
        window.decode(x, &v, &n, &t);
        double best = kInf;
        for (std::uint32_t ai : base.arcs_into(v)) {
          const CoverArc& arc = base.arcs()[ai];
          if (arc_ticks[ai] > j) continue;
          LatticeVec n2 = n;
          bool inside = true;
          for (int a = 0; a < k; ++a) {
            n2[a] -= arc.z[a];
            if (!window.box().contains(n2, k)) inside = false;
          }
          if (!inside) continue;
          LatticeVec t2 = t;
          for (std::size_t jt = 0; jt < base.torsion_moduli().size(); ++jt)
            t2[jt] -= arc.torsion[jt];
          double prev =
              ring[(j - arc_ticks[ai]) % slots][window.encode(arc.tail, n2, t2)];
          if (prev == kInf) continue;
          best = std::min(best, prev + eps * arc.cost);
        }
        cur[x] = best;
      }
    }
    const std::vector<double>& final_values = ring[steps % slots];

    // Equicontinuity modulus over single arcs at the final time.
    double modulus = 0.0;
    for (std::size_t x = 0; x < count; ++x) {
      if (final_values[x] == kInf) continue;
      int v;
      LatticeVec n, t;
      window.decode(x, &v, &n, &t);
      for (std::uint32_t ai : base.arcs_from(v)) {
        const CoverArc& arc = base.arcs()[ai];
        LatticeVec n2 = n;
        bool inside = true;
        for (int a = 0; a < k; ++a) {
          n2[a] += arc.z[a];
          if (!window.box().contains(n2, k)) inside = false;
        }
        if (!inside) continue;
        LatticeVec t2 = t;
        for (std::size_t jt = 0; jt < base.torsion_moduli().size(); ++jt)
          t2[jt] += arc.torsion[jt];
        double other = final_values[window.encode(arc.head, n2, t2)];
        if (other == kInf) continue;
        modulus = std::max(modulus, std::abs(other - final_values[x]));
      }
    }
    row.modulus = modulus;

    // Reference front: f sampled on a dyadic lattice aligned with eps.
    const double f_spacing = eps * 0.5;
    const double f_radius = options.x_radius + T * vmax + 1.0;
    int f_half = int(std::ceil(f_radius / f_spacing));
    SampledFunction f_samples;
    f_samples.k = k;
    f_samples.lo = {-f_half * f_spacing, -f_half * f_spacing};
    f_samples.hi = {f_half * f_spacing, f_half * f_spacing};
    f_samples.points = {2 * f_half + 1, k == 1 ? 1 : 2 * f_half + 1};
    f_samples.values.resize(f_samples.node_count());
    for (std::size_t i = 0; i < f_samples.node_count(); ++i) {
      Vec y = f_samples.coords(i);
      HVec hy = hvec_zero();
      hy[0] = y[0];
      if (k > 1) hy[1] = y[1];
      f_samples.values[i] = f(hy);
    }

    double sup_error = 0.0;
    std::size_t compared = 0;
    const LatticeBox& box = window.box();
    for (std::size_t x = 0; x < count; ++x) {
      int v;
      LatticeVec n, t;
      window.decode(x, &v, &n, &t);
      if (v != options.base_vertex) continue;
      bool torsion_zero = true;
      for (std::size_t jt = 0; jt < base.torsion_moduli().size(); ++jt)
        if (t[jt] != 0) torsion_zero = false;
      if (!torsion_zero) continue;
      bool interior = true;
      for (int a = 0; a < k; ++a) {
        if (std::abs(double(n[a])) * eps > options.x_radius) interior = false;
        if (n[a] < box.lo[a] + strip || n[a] > box.hi[a] - strip)
          interior = false;
      }
      if (!interior || final_values[x] == kInf) continue;
      HVec pos = f_epsilon(window, x, eps);
      Vec y{pos[0], k > 1 ? pos[1] : 0.0};
      double reference = hopf_lax_effective(f_samples, beta, y, row.horizon);
      sup_error = std::max(sup_error, std::abs(final_values[x] - reference));
      ++compared;
      if (options.keep_samples)
        row.samples.push_back({pos, final_values[x], reference});
    }
    if (compared == 0)
      throw input_error(
          "cover_homogenize: comparison region is empty; widen x_radius or "
          "shrink eps");
    row.sup_error = sup_error;
    row.compared = compared;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace homog
