#include "hjhomog/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <utility>

namespace homog {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kDerivativeStep = 1e-5;
constexpr double kGoldenTol = 1e-8;
constexpr double kInvPhi = 0.6180339887498948482;

std::vector<Vec> probe_directions(int dim) {
  if (dim == 1) return {vec1(1.0), vec1(-1.0)};
  std::vector<Vec> dirs;
  const double r = std::sqrt(0.5);
  dirs.push_back(vec2(1, 0));
  dirs.push_back(vec2(-1, 0));
  dirs.push_back(vec2(0, 1));
  dirs.push_back(vec2(0, -1));
  dirs.push_back(vec2(r, r));
  dirs.push_back(vec2(r, -r));
  dirs.push_back(vec2(-r, r));
  dirs.push_back(vec2(-r, -r));
  return dirs;
}

std::vector<Vec> sample_points(int dim, int per_axis) {
  std::vector<Vec> pts;
  if (dim == 1) {
    pts.reserve(per_axis);
    for (int i = 0; i < per_axis; ++i) pts.push_back(vec1(double(i) / per_axis));
  } else {
    pts.reserve(std::size_t(per_axis) * per_axis);
    for (int i = 0; i < per_axis; ++i)
      for (int j = 0; j < per_axis; ++j)
        pts.push_back(vec2(double(i) / per_axis, double(j) / per_axis));
  }
  return pts;
}

// Maximizes a concave 1-d function on [a, b] by golden-section search.
double golden_max(const std::function<double(double)>& f, double a, double b,
                  double tol, double* arg = nullptr) {
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  double mid = 0.5 * (a + b);
  double fm = f(mid);
  if (arg) *arg = mid;
  return std::max(fm, std::max(fc, fd));
}

}  // namespace

TonelliModel TonelliModel::flat(int dim) {
  if (dim != 1 && dim != 2) throw input_error("flat model: dim must be 1 or 2");
  TonelliModel m;
  m.dim_ = dim;
  m.preset_ = "flat";
  m.mechanical_ = true;
  m.mass_ = {1.0, 1.0};
  m.potential_ = [](const Vec&) { return 0.0; };
  m.potential_gradient_ = [](const Vec&) { return Vec{0.0, 0.0}; };
  if (dim == 1) {
    m.lagrangian_ = [](const Vec&, const Vec& v) { return 0.5 * v[0] * v[0]; };
    m.hamiltonian_ = [](const Vec&, const Vec& p) { return 0.5 * p[0] * p[0]; };
  } else {
    m.lagrangian_ = [](const Vec&, const Vec& v) {
      return 0.5 * (v[0] * v[0] + v[1] * v[1]);
    };
    m.hamiltonian_ = [](const Vec&, const Vec& p) {
      return 0.5 * (p[0] * p[0] + p[1] * p[1]);
    };
  }
  return m;
}

TonelliModel TonelliModel::pendulum(double amplitude) {
  TonelliModel m;
  m.dim_ = 1;
  m.preset_ = "pendulum";
  m.mechanical_ = true;
  m.mass_ = {1.0, 1.0};
  const double A = amplitude;
  m.potential_ = [A](const Vec& x) { return A * std::cos(kTwoPi * x[0]); };
  m.potential_gradient_ = [A](const Vec& x) {
    return vec1(-A * kTwoPi * std::sin(kTwoPi * x[0]));
  };
  m.lagrangian_ = [A](const Vec& x, const Vec& v) {
    return 0.5 * v[0] * v[0] - A * std::cos(kTwoPi * x[0]);
  };
  m.hamiltonian_ = [A](const Vec& x, const Vec& p) {
    return 0.5 * p[0] * p[0] + A * std::cos(kTwoPi * x[0]);
  };
  return m;
}

TonelliModel TonelliModel::aniso2d(double amplitude) {
  TonelliModel m;
  m.dim_ = 2;
  m.preset_ = "aniso2d";
  m.mechanical_ = true;
  m.mass_ = {1.0, 2.0};
  const double A = amplitude;
  m.potential_ = [A](const Vec& x) {
    return A * std::cos(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]);
  };
  m.potential_gradient_ = [A](const Vec& x) {
    return vec2(-A * kTwoPi * std::sin(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]),
                -A * kTwoPi * std::cos(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]));
  };
  m.lagrangian_ = [A](const Vec& x, const Vec& v) {
    return 0.5 * (v[0] * v[0] + 2.0 * v[1] * v[1]) -
           A * std::cos(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]);
  };
  m.hamiltonian_ = [A](const Vec& x, const Vec& p) {
    return 0.5 * (p[0] * p[0] + 0.5 * p[1] * p[1]) +
           A * std::cos(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]);
  };
  return m;
}

TonelliModel TonelliModel::from_potential_table(std::vector<double> samples,
                                                std::string id) {
  if (samples.size() < 2)
    throw input_error("potential table needs at least 2 samples");
  for (double s : samples)
    if (!std::isfinite(s)) throw input_error("potential table sample not finite");
  auto table = std::make_shared<std::vector<double>>(std::move(samples));
  auto U = [table](const Vec& x) {
    const auto& t = *table;
    const std::size_t n = t.size();
    double u = wrap_unit(x[0]) * double(n);
    std::size_t i = std::min<std::size_t>(std::size_t(u), n - 1);
    double frac = u - double(i);
    double a = t[i];
    double b = t[(i + 1) % n];
    return a + frac * (b - a);
  };
  return mechanical_1d(U, std::move(id));
}

TonelliModel TonelliModel::mechanical_1d(ScalarField potential, std::string id,
                                         VectorField potential_gradient) {
  return mechanical(1, {1.0, 1.0}, std::move(potential), std::move(id),
                    std::move(potential_gradient));
}

TonelliModel TonelliModel::mechanical(int dim, std::array<double, 2> mass,
                                      ScalarField potential, std::string id,
                                      VectorField potential_gradient) {
  if (dim != 1 && dim != 2)
    throw input_error("mechanical model: dim must be 1 or 2");
  for (int a = 0; a < dim; ++a)
    if (!(mass[a] > 0.0)) throw input_error("mechanical model: mass must be positive");
  if (!potential) throw input_error("mechanical model: potential required");
  TonelliModel m;
  m.dim_ = dim;
  m.preset_ = std::move(id);
  m.mechanical_ = true;
  m.mass_ = mass;
  m.potential_ = potential;
  m.potential_gradient_ = std::move(potential_gradient);
  if (dim == 1) {
    m.lagrangian_ = [potential, mass](const Vec& x, const Vec& v) {
      return 0.5 * mass[0] * v[0] * v[0] - potential(x);
    };
    m.hamiltonian_ = [potential, mass](const Vec& x, const Vec& p) {
      return 0.5 * p[0] * p[0] / mass[0] + potential(x);
    };
  } else {
    m.lagrangian_ = [potential, mass](const Vec& x, const Vec& v) {
      return 0.5 * (mass[0] * v[0] * v[0] + mass[1] * v[1] * v[1]) -
             potential(x);
    };
    m.hamiltonian_ = [potential, mass](const Vec& x, const Vec& p) {
      return 0.5 * (p[0] * p[0] / mass[0] + p[1] * p[1] / mass[1]) +
             potential(x);
    };
  }
  return m;
}

TonelliModel TonelliModel::custom(int dim, Lagrangian lagrangian,
                                  std::string id, Hamiltonian hamiltonian) {
  if (dim != 1 && dim != 2) throw input_error("custom model: dim must be 1 or 2");
  if (!lagrangian) throw input_error("custom model: lagrangian required");
  TonelliModel m;
  m.dim_ = dim;
  m.preset_ = std::move(id);
  m.lagrangian_ = std::move(lagrangian);
  m.hamiltonian_ = std::move(hamiltonian);
  return m;
}

TonelliModel with_v_bound(TonelliModel model,
                          std::function<double(double)> bound) {
  model.v_bound_override_ = std::move(bound);
  return model;
}

double TonelliModel::lagrangian(const Vec& x, const Vec& v) const {
  double value = lagrangian_(x, v);
  if (!std::isfinite(value))
    throw model_eval_error("lagrangian not finite at x=" + format_vec(x, dim_) +
                           ", v=" + format_vec(v, dim_));
  return value;
}

double TonelliModel::hamiltonian(const Vec& x, const Vec& p) const {
  if (hamiltonian_) {
    double value = hamiltonian_(x, p);
    if (!std::isfinite(value))
      throw model_eval_error("hamiltonian not finite at x=" +
                             format_vec(x, dim_) + ", p=" + format_vec(p, dim_));
    return value;
  }
  return legendre_transform(*this, x, p);
}

Vec TonelliModel::lagrangian_velocity_gradient(const Vec& x,
                                               const Vec& v) const {
  if (mechanical_) return {mass_[0] * v[0], dim_ > 1 ? mass_[1] * v[1] : 0.0};
  Vec g{0.0, 0.0};
  for (int d = 0; d < dim_; ++d) {
    Vec vp = v, vm = v;
    vp[d] += kDerivativeStep;
    vm[d] -= kDerivativeStep;
    g[d] = (lagrangian(x, vp) - lagrangian(x, vm)) / (2.0 * kDerivativeStep);
  }
  return g;
}

double TonelliModel::v_bound(double slope) const {
  double s = std::max(slope, 0.0);
  if (v_bound_override_) return v_bound_override_(s);
  auto dirs = probe_directions(dim_);
  auto pts = sample_points(dim_, 33);
  for (double R = 1.0; R <= double(1 << 20); R *= 2.0) {
    bool ok = true;
    for (const auto& x : pts) {
      for (const auto& u : dirs) {
        Vec v{R * u[0], R * u[1]};
        if (lagrangian(x, v) / R <= s + 1.0) {
          ok = false;
          break;
        }
      }
      if (!ok) break;
    }
    if (ok) return R;
  }
  throw model_eval_error(
      "velocity bound search exhausted; model is not superlinear at slope " +
      std::to_string(s));
}

double TonelliModel::potential(const Vec& x) const {
  if (!mechanical_ || !potential_)
    throw unsupported_model_error("model '" + preset_ + "' has no potential");
  return potential_(x);
}

Vec TonelliModel::potential_gradient(const Vec& x) const {
  if (!mechanical_ || !potential_)
    throw unsupported_model_error("model '" + preset_ + "' has no potential");
  if (potential_gradient_) return potential_gradient_(x);
  Vec g{0.0, 0.0};
  for (int d = 0; d < dim_; ++d) {
    Vec xp = x, xm = x;
    xp[d] += kDerivativeStep;
    xm[d] -= kDerivativeStep;
    g[d] = (potential_(xp) - potential_(xm)) / (2.0 * kDerivativeStep);
  }
  return g;
}

TonelliModel TonelliModel::shifted_by(const Vec& P) const {
  TonelliModel m;
  m.dim_ = dim_;
  m.preset_ = preset_ + "+shift";
  const TonelliModel base = *this;
  const Vec shift = P;
  const int dim = dim_;
  m.lagrangian_ = [base, shift, dim](const Vec& x, const Vec& v) {
    return base.lagrangian_(x, v) - dot(shift, v, dim);
  };
  if (hamiltonian_) {
    m.hamiltonian_ = [base, shift, dim](const Vec& x, const Vec& p) {
      Vec q{p[0] + shift[0], dim > 1 ? p[1] + shift[1] : 0.0};
      return base.hamiltonian_(x, q);
    };
  }
  const double pnorm = norm2(P, dim_);
  m.v_bound_override_ = [base, pnorm](double s) {
    return base.v_bound(s + pnorm);
  };
  return m;
}

TonelliReport check_tonelli(const TonelliModel& model, int samples) {
  if (samples < 8) throw input_error("check_tonelli: need at least 8 samples per axis");
  TonelliReport report;
  const int dim = model.dim();
  auto dirs = probe_directions(dim);
  auto pts = sample_points(dim, samples);

  // Convexity: second differences of t -> L(x, v + t u) on a symmetric scan.
  const double delta = 0.25;
  report.scan_step = delta;
  const double vmax = 8.0;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& x : pts) {
    for (const auto& u : dirs) {
      for (double t = -vmax; t <= vmax + 1e-12; t += delta) {
        Vec v0{t * u[0], t * u[1]};
        Vec vp{(t + delta) * u[0], (t + delta) * u[1]};
        Vec vm{(t - delta) * u[0], (t - delta) * u[1]};
        double second = model.lagrangian(x, vp) + model.lagrangian(x, vm) -
                        2.0 * model.lagrangian(x, v0);
        if (second < worst) {
          worst = second;
          report.worst_x = x;
          report.worst_v = v0;
        }
      }
    }
  }
  report.min_second_difference = worst;
  report.convexity_pass = worst >= -1e-9;

  // Superlinearity proxy: L(x, r u)/r strictly increasing over doubling radii.
  const double R = model.v_bound(1.0);
  bool superlinear = true;
  for (double r : {R, 2.0 * R, 4.0 * R}) {
    double min_ratio = std::numeric_limits<double>::infinity();
    for (const auto& x : pts)
      for (const auto& u : dirs)
        min_ratio =
            std::min(min_ratio, model.lagrangian(x, {r * u[0], r * u[1]}) / r);
    report.superlinearity.push_back({r, min_ratio});
  }
  for (std::size_t i = 0; i + 1 < report.superlinearity.size(); ++i) {
    // Strict increase is required pointwise in x; the per-radius minima are a
    // conservative summary, so compare them pointwise as well.
    for (const auto& x : pts) {
      for (const auto& u : dirs) {
        double r1 = report.superlinearity[i].radius;
        double r2 = report.superlinearity[i + 1].radius;
        double a = model.lagrangian(x, {r1 * u[0], r1 * u[1]}) / r1;
        double b = model.lagrangian(x, {r2 * u[0], r2 * u[1]}) / r2;
        if (!(b > a)) {
          superlinear = false;
          break;
        }
      }
      if (!superlinear) break;
    }
    if (!superlinear) break;
  }
  report.superlinearity_pass = superlinear;
  report.pass = report.convexity_pass && report.superlinearity_pass;
  return report;
}

double legendre_transform(const TonelliModel& model, const Vec& x,
                          const Vec& p) {
  const int dim = model.dim();
  const double R = model.v_bound(norm2(p, dim));
  const int per_axis = 33;
  const double step = 2.0 * R / (per_axis - 1);

  auto objective = [&](const Vec& v) {
    return dot(p, v, dim) - model.lagrangian(x, v);
  };

  Vec best_v{0.0, 0.0};
  double best = -std::numeric_limits<double>::infinity();
  std::array<int, 2> best_idx{0, 0};
  if (dim == 1) {
    for (int i = 0; i < per_axis; ++i) {
      Vec v = vec1(-R + i * step);
      double val = objective(v);
      if (val > best) {
        best = val;
        best_v = v;
        best_idx = {i, 0};
      }
    }
    if (best_idx[0] == 0 || best_idx[0] == per_axis - 1)
      throw radius_error("legendre maximizer at the search boundary |v| = " +
                         std::to_string(R));
    double arg = best_v[0];
    best = golden_max([&](double v) { return objective(vec1(v)); },
                      best_v[0] - step, best_v[0] + step, kGoldenTol, &arg);
    return best;
  }

  for (int i = 0; i < per_axis; ++i) {
    for (int j = 0; j < per_axis; ++j) {
      Vec v = vec2(-R + i * step, -R + j * step);
      double val = objective(v);
      if (val > best) {
        best = val;
        best_v = v;
        best_idx = {i, j};
      }
    }
  }
  for (int d = 0; d < 2; ++d)
    if (best_idx[d] == 0 || best_idx[d] == per_axis - 1)
      throw radius_error("legendre maximizer at the search boundary |v| = " +
                         std::to_string(R));
  // Coordinate-wise refinement; the objective is concave in v.
  Vec v = best_v;
  for (int sweep = 0; sweep < 4; ++sweep) {
    for (int d = 0; d < 2; ++d) {
      double arg = v[d];
      golden_max(
          [&](double t) {
            Vec w = v;
            w[d] = t;
            return objective(w);
          },
          v[d] - step, v[d] + step, kGoldenTol, &arg);
      v[d] = arg;
    }
  }
  return std::max(best, objective(v));
}

Vec SampledFunction::coords(std::size_t index) const {
  Vec c{lo[0], 0.0};
  if (k == 1) {
    c[0] = lo[0] + double(index) * step(0);
    return c;
  }
  std::size_t cols = std::size_t(points[1]);
  std::size_t i = index / cols;
  std::size_t j = index % cols;
  return vec2(lo[0] + double(i) * step(0), lo[1] + double(j) * step(1));
}

void SampledFunction::validate() const {
  if (k != 1 && k != 2) throw input_error("sampled function: k must be 1 or 2");
  for (int d = 0; d < k; ++d) {
    if (points[d] < 1) throw input_error("sampled function: empty axis");
    if (points[d] > 1 && !(hi[d] > lo[d]))
      throw input_error("sampled function: hi must exceed lo");
  }
  if (values.size() != node_count())
    throw input_error("sampled function: value count mismatch");
}

double legendre_inverse(const SampledFunction& h_samples, const Vec& h,
                        std::size_t* argmax_index) {
  h_samples.validate();
  const int k = h_samples.k;
  const std::size_t count = h_samples.node_count();

  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  double best_boundary = -std::numeric_limits<double>::infinity();
  double best_interior = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    Vec P = h_samples.coords(i);
    double val = dot(h, P, k) - h_samples.values[i];
    bool boundary = false;
    if (k == 1) {
      boundary = h_samples.points[0] > 1 &&
                 (i == 0 || i + 1 == std::size_t(h_samples.points[0]));
    } else {
      std::size_t cols = std::size_t(h_samples.points[1]);
      std::size_t r = i / cols, c = i % cols;
      boundary = (h_samples.points[0] > 1 &&
                  (r == 0 || r + 1 == std::size_t(h_samples.points[0]))) ||
                 (h_samples.points[1] > 1 &&
                  (c == 0 || c + 1 == std::size_t(h_samples.points[1])));
    }
    if (boundary)
      best_boundary = std::max(best_boundary, val);
    else
      best_interior = std::max(best_interior, val);
    if (val > best) {
      best = val;
      best_i = i;
    }
  }
  // A boundary sample that strictly beats every interior sample means the true
  // conjugate lives outside the grid.
  if (best_boundary > best_interior)
    throw window_error("conjugate maximizer at the sample-grid boundary; "
                       "enlarge the grid");
  if (argmax_index) *argmax_index = best_i;
  return best;
}

void Trajectory::validate() const {
  if (times.size() != positions.size() || times.size() != velocities.size() ||
      times.size() != energy.size())
    throw internal_error("trajectory: field lengths differ");
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    if (!(times[i] < times[i + 1]))
      throw internal_error("trajectory: times not strictly increasing");
}

Trajectory euler_lagrange_integrate(const TonelliModel& model, const Vec& x0,
                                    const Vec& v0, double T, double dt) {
  if (!model.mechanical())
    throw unsupported_model_error(
        "euler_lagrange_integrate: model '" + model.preset() +
        "' carries no derivatives (mechanical form required)");
  if (!(dt > 0.0) || !(T > 0.0))
    throw input_error("euler_lagrange_integrate: T and dt must be positive");
  if (dt > T / 10.0)
    throw input_error("euler_lagrange_integrate: dt must be at most T/10");
  long long steps = std::llround(T / dt);
  if (std::abs(double(steps) * dt - T) > 1e-9 * std::max(1.0, T))
    throw input_error("euler_lagrange_integrate: T must be a multiple of dt");

  const int dim = model.dim();
  const auto& mass = model.mass();
  auto accel = [&](const Vec& x) {
    Vec g = model.potential_gradient(x);
    return Vec{-g[0] / mass[0], dim > 1 ? -g[1] / mass[1] : 0.0};
  };
  auto record_energy = [&](const Vec& x, const Vec& v) {
    Vec p{mass[0] * v[0], dim > 1 ? mass[1] * v[1] : 0.0};
    return dot(p, v, dim) - model.lagrangian(x, v);
  };

  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.positions.reserve(steps + 1);
  traj.velocities.reserve(steps + 1);
  traj.energy.reserve(steps + 1);

  Vec x = x0, v = v0;
  traj.times.push_back(0.0);
  traj.positions.push_back(x);
  traj.velocities.push_back(v);
  traj.energy.push_back(record_energy(x, v));

  Vec a = accel(x);
  for (long long s = 1; s <= steps; ++s) {
    Vec vh{v[0] + 0.5 * dt * a[0], v[1] + 0.5 * dt * a[1]};
    x = {x[0] + dt * vh[0], x[1] + dt * vh[1]};
    Vec a2 = accel(x);
    v = {vh[0] + 0.5 * dt * a2[0], vh[1] + 0.5 * dt * a2[1]};
    a = a2;
    traj.times.push_back(double(s) * dt);
    traj.positions.push_back(x);
    traj.velocities.push_back(v);
    traj.energy.push_back(record_energy(x, v));
  }
  traj.validate();
  return traj;
}

}  // namespace homog
