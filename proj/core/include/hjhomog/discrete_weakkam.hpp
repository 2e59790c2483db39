#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hjhomog/cover.hpp"
#include "hjhomog/models.hpp"

namespace homog {

// A cycle certifying a cycle-ratio value, stored as consecutive closed arc
// indices into base.arcs().
struct CycleCertificate {
  std::vector<std::uint32_t> arc_indices;
  double gain = 0.0;     // sum of P.z(e) - cost(e)
  double length = 0.0;   // sum of length(e)
  double ratio = 0.0;    // gain / length
  LatticeVec homology = {0, 0, 0, 0};
};

struct DiscreteAlphaResult {
  HVec P = {0, 0, 0, 0};
  double alpha = 0.0;
  CycleCertificate certificate;
  std::string method;  // "bisection" | "karp" | "bruteforce"
};

// Discrete effective Hamiltonian
//   alpha(P) = max over directed cycles of (sum P.z(e) - cost(e)) / sum length(e),
// by bisection on the level with negative-cycle detection (label-correcting),
// then polished to the exact ratio of the certifying cycle.
DiscreteAlphaResult alpha_discrete(const GraphComplex& base, const HVec& P,
                                   double tol = 1e-9);

// Same quantity for unit-length graphs via the maximum-mean-cycle dynamic
// program (exact walks of fixed arc count); an independent route used to
// cross-check alpha_discrete. Throws input_error on non-unit lengths.
double alpha_karp(const GraphComplex& base, const HVec& P,
                  CycleCertificate* certificate = nullptr);

// Exhaustive maximum over simple cycles (depth-first enumeration); only
// viable on small graphs, used as a brute-force oracle.
double alpha_bruteforce(const GraphComplex& base, const HVec& P);

// Sampled alpha(P) on a uniform momentum grid, suitable as input to
// beta_from_alpha / hopf_lax_effective. Rank 1 or 2 only.
SampledFunction tabulate_alpha_discrete(const GraphComplex& base, const Vec& lo,
                                        const Vec& hi,
                                        std::array<int, 2> points);

// Mane potential at level k: least weight of a walk from x to y under
//   w(e) = cost(e) - P.z(e) + k length(e).
// The empty walk is admissible when x == y. Returns nullopt when k is below
// the critical level (a negative cycle makes the infimum -infinity).
std::optional<double> mane_potential(const GraphComplex& base, const HVec& P,
                                     double k, int x, int y);
// All targets at once from one source.
std::optional<std::vector<double>> mane_potential_from(const GraphComplex& base,
                                                       const HVec& P, double k,
                                                       int x);

// Discrete weak-KAM solution at the critical level:
//   u(v) = min over w on the certifying cycle of mane_potential(w, v),
// dominated (every slack >= -1e-9) and tight somewhere on the cycle.
// slack(e) = u(tail) + cost(e) - P.z(e) + alpha length(e) - u(head).
struct DiscretePotential {
  std::vector<double> u;
  double alpha = 0.0;
  std::vector<double> slack;     // per arc, aligned with base.arcs()
  double min_slack = 0.0;        // over all arcs
  double cycle_min_slack = 0.0;  // over the certifying cycle's arcs
  CycleCertificate certificate;
};
DiscretePotential discrete_corrector(const GraphComplex& base, const HVec& P,
                                     double alpha);

// Finite-horizon cost propagation on a cover window with exact traversal
// times: an arc takes time eps * length(e) and costs eps * cost(e), and
//   v(x, T) = min over walks arriving at x with total time exactly T of
//             f(F_eps(start)) + eps sum cost.
// Compared per eps against the effective front
//   min over y of f(y) + T beta((F_eps(x) - y) / T),
// with beta the conjugate of the sampled discrete alpha. The comparison
// region keeps a strip of width 2 max|z| (rescaled) away from the window
// boundary.
struct CoverHomogenizeOptions {
  double p_radius = 3.0;      // momentum box for the internal alpha table
  int p_points = 33;          // per axis
  double x_radius = 0.75;     // comparison region, rescaled coordinates
  int base_vertex = 0;        // fiber on which values are compared
  int margin = 2;             // extra window padding, deck units
  bool keep_samples = false;  // dump per-node samples in the rows
  unsigned threads = 1;
};
struct CoverHomogenizeSample {
  HVec position = {0, 0, 0, 0};  // F_eps(x)
  double value = 0.0;
  double reference = 0.0;
};
struct CoverHomogenizeRow {
  double eps = 0.0;
  double horizon = 0.0;    // time actually reached (multiple of the quantum)
  double sup_error = 0.0;  // over the compared interior nodes
  double modulus = 0.0;    // max |dv| over single arcs (equicontinuity)
  long long window_radius = 0;
  std::size_t compared = 0;
  std::vector<CoverHomogenizeSample> samples;
};
std::vector<CoverHomogenizeRow> cover_homogenize(
    const GraphComplex& base, const std::function<double(const HVec&)>& f,
    double f_lipschitz, const std::vector<double>& eps_list, double T,
    const CoverHomogenizeOptions& options = {});

}  // namespace homog
