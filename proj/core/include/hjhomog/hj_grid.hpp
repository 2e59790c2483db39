#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hjhomog/grid.hpp"
#include "hjhomog/models.hpp"

namespace homog {

// Diagnostics of the most recent step.
struct LaxStepStats {
  int reach = 0;                // window half-width in nodes per axis
  double velocity_radius = 0.0; // velocity bound used to size the window
  bool full_window = false;     // window covered the whole torus
};

// Backward Lax-Oleinik semigroup on a periodic grid:
//   (T_dt u)(x) = min over |x - y| <= R dt of u(y) + dt L(x, (x - y)/dt),
// where y runs over grid nodes and x - y is the minimal-image difference.
// An optional momentum shift P replaces L by L - P.v, which is how affine
// data P.x + w(x) is advanced through its periodic part w. Ties in the
// minimization resolve to the lexicographically smallest offset.
class LaxOleinikStepper {
 public:
  LaxOleinikStepper(TonelliModel model, PeriodicGrid grid, double dt,
                    unsigned threads = 1, Vec shift = {0.0, 0.0});

  const PeriodicGrid& grid() const { return grid_; }
  const TonelliModel& model() const { return model_; }
  double dt() const { return dt_; }
  const LaxStepStats& last_stats() const { return stats_; }

  ValueField step(const ValueField& u) const;
  ValueField run(ValueField u, int steps) const;

 private:
  int window_reach(double lipschitz, double* velocity_radius,
                   bool* full_window) const;
  const std::vector<double>& offset_cost_table(int axis, int reach) const;
  ValueField step_separable(const ValueField& u, int reach,
                            bool full_window) const;
  ValueField step_direct(const ValueField& u, int reach,
                         bool full_window) const;

  TonelliModel model_;
  PeriodicGrid grid_;
  double dt_;
  unsigned threads_;
  Vec shift_;
  bool separable_;
  double rest_cost_max_;            // max over x of L(x, 0)
  std::vector<double> target_cost_; // dt * (x-dependent part), per node
  mutable LaxStepStats stats_;
  mutable std::vector<std::vector<double>> cost_cache_[2];  // [axis][reach]
};

// One semigroup step of length dt.
ValueField lax_oleinik_step(const ValueField& u, const TonelliModel& model,
                            double dt, unsigned threads = 1);

// Solves u_t + H(x, Du) = 0, u(., 0) = f, to time T (T must be a multiple
// of dt).
ValueField solve_cauchy(const ValueField& f, const TonelliModel& model,
                        double T, double dt, unsigned threads = 1);

// Solves the oscillatory problem u_t + H(x/eps, Du) = 0 on the unit torus;
// 1/eps must be an integer and the grid must resolve the fast scale
// (n >= 32/eps).
ValueField solve_oscillatory(const ValueField& f, const TonelliModel& model,
                             double eps, double T, double dt,
                             unsigned threads = 1);

// The m-fold compressed model H(m x, p) used by solve_oscillatory.
TonelliModel compress_model(const TonelliModel& model, int m);

// Effective-front evaluation
//   u(y, t) = min over sample nodes x of f(x) + t beta((y - x) / t),
// with f sampled on a box window of R^k and beta a sampled effective
// Lagrangian (evaluated by multilinear interpolation). A strict minimizer on
// the boundary of the f window raises window_error (window too small), and
// velocities outside the beta window raise window_error as well.
double hopf_lax_effective(const SampledFunction& f, const SampledFunction& beta,
                          const Vec& y, double t, Vec* argmin = nullptr);

// Batched torus variant: unrolls the periodic field g over +-lift_radius
// integer translates and applies the same minimization at every grid node.
ValueField hopf_lax_torus_field(const ValueField& g, const SampledFunction& beta,
                                double T, int lift_radius, unsigned threads = 1);

// Smallest translate radius beyond which the beta growth alone makes further
// translates lose the Hopf-Lax minimization, for data of given oscillation.
int needed_lift_radius(const SampledFunction& beta, double g_oscillation,
                       double T);

// u_eps(x, t=0) = a + P.x + eps v(x / eps) restricted to the fundamental
// domain, plus the one-step defect of the full family as a solution:
//   residual = sup |T_dt u_eps - (u_eps - alpha dt)|,
// evaluated through the exact rescaling onto the corrector's grid
// (defect of v at step dt/eps under the P-shifted unit-cell semigroup,
// times eps), which keeps the fast scale resolved uniformly in eps.
struct ReconstructedSolution {
  ValueField field;      // fundamental-domain values at time 0
  double residual = 0.0;
};
ReconstructedSolution reconstruct_affine_corrector(
    const TonelliModel& model, const Vec& P, double a,
    const ValueField& corrector, double alpha, double eps, double dt,
    unsigned threads = 1);

// Evolves f alongside a characteristic trajectory and reports
//   max over trajectory samples of | Du(gamma(t), t) - L_v(gamma(t), gamma'(t)) |,
// with Du taken by a least-squares combination of central differences
// (radius-4 stencil) at the nearest grid node. The solver is stepped with
// the trajectory's own time step.
double characteristics_check(const ValueField& f, const TonelliModel& model,
                             const Trajectory& trajectory,
                             unsigned threads = 1);

}  // namespace homog
