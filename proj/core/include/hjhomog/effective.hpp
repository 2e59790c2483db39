#pragma once

#include <string>
#include <vector>

#include "hjhomog/grid.hpp"
#include "hjhomog/hj_grid.hpp"
#include "hjhomog/models.hpp"

namespace homog {

// One momentum sample of the effective Hamiltonian, tagged with the route
// that produced it and a route-specific error bar (0 when none is available).
struct AlphaEntry {
  Vec P{0.0, 0.0};
  double alpha = 0.0;
  std::string method;
  double error_bar = 0.0;
};

struct AlphaTable {
  int dim = 1;
  std::vector<AlphaEntry> entries;
};

// Route 1: large-time averaging. Runs the shifted semigroup from zero data to
// time T and reads off alpha = -max_x u(x, T) / T; the max/min spread over x
// bounds the corrector-amplitude bias and is reported as the error bar.
// Throws convergence_error when spread / T exceeds 0.1 (T too small).
double alpha_large_T(const TonelliModel& model, const Vec& P, double T,
                     double dt, int n, unsigned threads = 1,
                     double* error_bar = nullptr);

// Route 2: variational min-max. Minimizes max_x H(x, P + Dw(x)) over
// zero-mean periodic w sampled on the grid (central-difference gradient) by
// subgradient descent with step 0.1 h / sqrt(iter); returns the best value
// seen, an upper bound on alpha(P) that tightens as iterations grow. Throws
// convergence_error if the running value rises for 100 consecutive steps.
double alpha_minmax(const TonelliModel& model, const Vec& P, int n,
                    int iterations);

// Route 3: closed form for 1-d mechanical models. Below the critical
// momentum P_c = integral of sqrt(2 (max U - U)) the value is max U; above,
// the energy E with integral of sqrt(2 (E - U)) equal to |P| is found by
// bisection to 1e-10 (composite Simpson, 4096 panels).
double alpha_1d_oracle(const TonelliModel& model, double P);
double critical_momentum_1d(const TonelliModel& model);

// Cell problem. Fixed-point iteration
//   v <- T_dt^{L_P} v + alpha dt, renormalized to zero mean each sweep,
// until the sup change per sweep drops below `tol` or the iteration cap is
// hit (then the best iterate is returned flagged non-converged). The
// residual is max_x |H(x, P + Dv) - alpha| with one-sided difference
// quotients (the corrector's kinks sit on grid nodes, where a centered
// quotient would see an O(1) defect).
struct CellCorrectorResult {
  ValueField corrector;
  double alpha = 0.0;      // the level the iteration was run at
  int iterations = 0;
  double final_change = 0.0;
  double residual = 0.0;
  bool converged = false;
};
CellCorrectorResult cell_corrector(const TonelliModel& model, const Vec& P,
                                   double alpha, int n, double dt,
                                   double tol = 1e-6,
                                   int max_iterations = 100000,
                                   unsigned threads = 1);

// The residual used by cell_corrector: per node, the best over one-sided
// difference-quotient combinations of |H(x, P + Dv) - alpha|, maximized
// over nodes.
double corrector_residual(const TonelliModel& model, const Vec& P,
                          const ValueField& corrector, double alpha);

enum class AlphaRoute { LargeT, MinMax, Oracle1D };

struct AlphaTabulateOptions {
  int n = 256;          // spatial resolution for the PDE routes
  double dt = 0.01;     // step for the PDE routes
  double T = 20.0;      // horizon for the large-time route
  int minmax_iterations = 40000;
  unsigned threads = 1;
};

// Samples alpha on a uniform momentum grid [lo, hi] with `points` per axis.
SampledFunction tabulate_alpha(const TonelliModel& model, const Vec& lo,
                               const Vec& hi, std::array<int, 2> points,
                               AlphaRoute route,
                               const AlphaTabulateOptions& options = {});

AlphaTable alpha_table_from_samples(const SampledFunction& samples,
                                    const std::string& method);
SampledFunction samples_from_alpha_table(const AlphaTable& table);

// Effective Lagrangian as the discrete conjugate of a sampled alpha:
//   beta(v) = max over momentum samples P of v.P - alpha(P).
double beta_from_alpha(const SampledFunction& alpha, const Vec& v);
SampledFunction tabulate_beta(const SampledFunction& alpha, const Vec& lo,
                              const Vec& hi, std::array<int, 2> points);

}  // namespace homog
