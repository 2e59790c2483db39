#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hjhomog/errors.hpp"
#include "hjhomog/vec.hpp"

namespace homog {

// A Lagrangian on the 1- or 2-torus, fiberwise convex and superlinear.
// Presets carry closed-form Hamiltonians; custom models fall back to a
// numerical Legendre transform. Mechanical models (kinetic energy with a
// diagonal mass matrix minus a potential) additionally support trajectory
// integration.
class TonelliModel {
 public:
  using Lagrangian = std::function<double(const Vec& x, const Vec& v)>;
  using Hamiltonian = std::function<double(const Vec& x, const Vec& p)>;
  using ScalarField = std::function<double(const Vec& x)>;
  using VectorField = std::function<Vec(const Vec& x)>;

  // L = |v|^2/2.
  static TonelliModel flat(int dim = 1);
  // L = v^2/2 - amplitude*cos(2 pi x) on the circle.
  static TonelliModel pendulum(double amplitude = 1.0);
  // L = (v1^2 + 2 v2^2)/2 - amplitude*cos(2 pi x1)cos(2 pi x2).
  static TonelliModel aniso2d(double amplitude = 1.0);
  // Mechanical circle model with the potential given by uniform samples on
  // [0,1), linearly interpolated.
  static TonelliModel from_potential_table(std::vector<double> samples,
                                           std::string id = "table");
  // Mechanical circle model with a closed-form potential.
  static TonelliModel mechanical_1d(ScalarField potential, std::string id,
                                    VectorField potential_gradient = nullptr);
  // General mechanical model: L = sum_a mass_a v_a^2 / 2 - potential(x).
  static TonelliModel mechanical(int dim, std::array<double, 2> mass,
                                 ScalarField potential, std::string id,
                                 VectorField potential_gradient = nullptr);
  // Arbitrary Lagrangian; the caller vouches for the Tonelli conditions
  // (check_tonelli can audit them). No trajectory support unless mechanical
  // data is attached.
  static TonelliModel custom(int dim, Lagrangian lagrangian, std::string id,
                             Hamiltonian hamiltonian = nullptr);

  int dim() const { return dim_; }
  const std::string& preset() const { return preset_; }
  bool mechanical() const { return mechanical_; }
  const std::array<double, 2>& mass() const { return mass_; }

  // Evaluates L(x, v); throws model_eval_error on a non-finite result.
  double lagrangian(const Vec& x, const Vec& v) const;

  // Closed form when available, otherwise the numerical Legendre transform.
  double hamiltonian(const Vec& x, const Vec& p) const;
  bool has_closed_hamiltonian() const { return bool(hamiltonian_); }

  // dL/dv. Closed form for mechanical models (M v), otherwise central
  // differences with step 1e-5.
  Vec lagrangian_velocity_gradient(const Vec& x, const Vec& v) const;

  // Smallest R in {1, 2, 4, ...} with L(x, R u)/R > slope + 1 for every
  // sampled x and probe direction u. Minimizers of u(y) + t L(x, (x-y)/t)
  // for slope-Lipschitz data then stay strictly inside |v| <= R.
  double v_bound(double slope) const;

  double potential(const Vec& x) const;
  Vec potential_gradient(const Vec& x) const;

  // L(x, v) - P.v with the Hamiltonian and velocity bound shifted to match.
  TonelliModel shifted_by(const Vec& P) const;

 private:
  TonelliModel() = default;

  int dim_ = 1;
  std::string preset_;
  Lagrangian lagrangian_;
  Hamiltonian hamiltonian_;
  bool mechanical_ = false;
  std::array<double, 2> mass_{1.0, 1.0};
  ScalarField potential_;
  VectorField potential_gradient_;
  std::function<double(double)> v_bound_override_;
  friend TonelliModel with_v_bound(TonelliModel, std::function<double(double)>);
};

// Test hook: replaces the velocity-bound search (e.g. to force boundary hits).
TonelliModel with_v_bound(TonelliModel model,
                          std::function<double(double)> bound);

struct SuperlinearityRow {
  double radius;       // probe speed
  double min_ratio;    // min over sampled x and directions of L(x, r u)/r
};

struct TonelliReport {
  double min_second_difference = 0.0;  // over the convexity scan
  double scan_step = 0.0;              // delta used for second differences
  Vec worst_x{0.0, 0.0};
  Vec worst_v{0.0, 0.0};
  std::vector<SuperlinearityRow> superlinearity;
  bool convexity_pass = false;
  bool superlinearity_pass = false;
  bool pass = false;
};

// Audits fiberwise convexity (second differences, tolerance -1e-9) and the
// superlinearity proxy on a sample grid. samples is per axis, at least 8.
TonelliReport check_tonelli(const TonelliModel& model, int samples = 16);

// H(x, p) = max_v [p.v - L(x, v)] by grid search over the v_bound(|p|) ball
// plus per-axis golden-section refinement to 1e-8. Throws radius_error when
// the coarse maximizer sits on the ball boundary.
double legendre_transform(const TonelliModel& model, const Vec& x,
                          const Vec& p);

// Uniform samples of a function on a box in R^k (k = 1 or 2), row-major with
// the last axis fastest. Used for sampled Hamiltonians and alpha tables.
struct SampledFunction {
  int k = 1;
  Vec lo{0.0, 0.0};
  Vec hi{0.0, 0.0};
  std::array<int, 2> points{1, 1};
  std::vector<double> values;

  std::size_t node_count() const {
    std::size_t n = 1;
    for (int d = 0; d < k; ++d) n *= std::size_t(points[d]);
    return n;
  }
  Vec coords(std::size_t index) const;
  double step(int axis) const {
    return points[axis] > 1 ? (hi[axis] - lo[axis]) / (points[axis] - 1) : 0.0;
  }
  void validate() const;
};

// Discrete convex conjugate sup_P [h.P - H(P)] over the sample grid. Throws
// window_error when a boundary sample strictly exceeds every interior one
// (the true conjugate needs a larger grid). Ties with the interior are fine,
// so a constant table conjugates correctly at h = 0.
double legendre_inverse(const SampledFunction& h_samples, const Vec& h,
                        std::size_t* argmax_index = nullptr);

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> positions;   // unwrapped
  std::vector<Vec> velocities;
  std::vector<double> energy;   // p.v - L along the trajectory

  void validate() const;
};

// Integrates the Euler-Lagrange flow of a mechanical model with the
// Stoermer-Verlet scheme (second order, time reversible). Throws
// unsupported_model_error when the model carries no mechanical data.
Trajectory euler_lagrange_integrate(const TonelliModel& model, const Vec& x0,
                                    const Vec& v0, double T, double dt);

}  // namespace homog
