#include "hjhomog/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"

#include "hjhomog/discrete_weakkam.hpp"
#include "hjhomog/hj_grid.hpp"
#include "hjhomog/io.hpp"

namespace homog {
namespace {

using nlohmann::json;

double norm2_k(const HVec& a, int k) {
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += a[i] * a[i];
  return std::sqrt(s);
}

HVec hvec_from_json(const json& node, const char* key) {
  if (!node.is_array() || node.size() < 1 || node.size() > kMaxRank)
    throw input_error(std::string("config: '") + key +
                      "' must be an array of 1.." + std::to_string(kMaxRank) +
                      " numbers");
  HVec out = hvec_zero();
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_number())
      throw input_error(std::string("config: '") + key + "' must be numeric");
    out[i] = node[i].get<double>();
  }
  return out;
}

json hvec_to_json(const HVec& v) {
  return json::array({v[0], v[1], v[2], v[3]});
}

void reject_unknown_keys(const json& node, const std::set<std::string>& known,
                         const std::string& where) {
  for (auto it = node.begin(); it != node.end(); ++it)
    if (!known.count(it.key()))
      throw input_error("config: unknown key '" + it.key() + "' in " + where);
}

// Conjugate of the sampled alpha on a padded velocity box. Velocities whose
// conjugate maximum sits on the momentum-box boundary lie outside the sampled
// reachable cone; they are parked at a huge value so minimizations pass over
// them instead of aborting.
SampledFunction padded_beta_table(const SampledFunction& alpha, double v_radius,
                                  int points) {
  SampledFunction beta;
  beta.k = alpha.k;
  beta.lo = {-v_radius, -v_radius};
  beta.hi = {v_radius, v_radius};
  beta.points = {points, alpha.k == 1 ? 1 : points};
  beta.values.resize(beta.node_count());
  for (std::size_t i = 0; i < beta.node_count(); ++i) {
    try {
      beta.values[i] = beta_from_alpha(alpha, beta.coords(i));
    } catch (const window_error&) {
      beta.values[i] = 1e30;
    }
  }
  return beta;
}

}  // namespace

double InitialDataSpec::evaluate(const HVec& y, int k) const {
  if (kind == "cone") {
    HVec d = hvec_zero();
    for (int i = 0; i < k; ++i) d[i] = y[i] - y0[i];
    return norm2_k(d, k);
  }
  if (kind == "affine") {
    double s = a;
    for (int i = 0; i < k; ++i) s += P[i] * y[i];
    return s;
  }
  if (kind == "quadratic") {
    HVec d = hvec_zero();
    for (int i = 0; i < k; ++i) d[i] = y[i] - y0[i];
    double r = norm2_k(d, k);
    return r * r;
  }
  throw input_error("initial data kind '" + kind + "' is not one of "
                    "cone|affine|quadratic");
}

double InitialDataSpec::evaluate_torus(const Vec& x, int dim) const {
  if (kind == "affine") {
    // Fundamental-domain lift; the seam discontinuity is the caller's
    // responsibility (P = 0 recovers a genuine torus function).
    double s = a;
    for (int i = 0; i < dim; ++i) s += P[i] * x[i];
    return s;
  }
  HVec lifted = hvec_zero();
  for (int i = 0; i < dim; ++i)
    lifted[i] = y0[i] + min_image(x[i] - wrap_unit(y0[i]));
  return evaluate(lifted, dim);
}

double InitialDataSpec::lipschitz(double radius, int k) const {
  if (kind == "cone") return 1.0;
  if (kind == "affine") return norm2_k(P, k);
  if (kind == "quadratic") return 2.0 * (radius + norm2_k(y0, k));
  throw input_error("initial data kind '" + kind + "' is not one of "
                    "cone|affine|quadratic");
}

void InitialDataSpec::validate() const {
  if (kind != "cone" && kind != "affine" && kind != "quadratic")
    throw input_error("initial data kind '" + kind + "' is not one of "
                      "cone|affine|quadratic");
}

ExperimentConfig ExperimentConfig::from_json_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open config: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_text(text);
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw input_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw input_error("config must be a JSON object");

  reject_unknown_keys(doc,
                      {"engine", "model", "amplitude", "graph", "initial",
                       "eps_list", "T", "dt", "n", "alpha_radius",
                       "alpha_points", "out", "seed", "threads"},
                      "the top level");
  ExperimentConfig config;
  if (doc.contains("engine")) config.engine = doc["engine"].get<std::string>();
  if (doc.contains("model")) config.model = doc["model"].get<std::string>();
  if (doc.contains("amplitude"))
    config.amplitude = doc["amplitude"].get<double>();
  if (doc.contains("graph")) config.graph = doc["graph"].get<std::string>();
  if (doc.contains("initial")) {
    const json& init = doc["initial"];
    if (!init.is_object())
      throw input_error("config: 'initial' must be an object");
    reject_unknown_keys(init, {"kind", "y0", "a", "P"}, "'initial'");
    if (init.contains("kind"))
      config.initial.kind = init["kind"].get<std::string>();
    if (init.contains("y0")) config.initial.y0 = hvec_from_json(init["y0"], "y0");
    if (init.contains("a")) config.initial.a = init["a"].get<double>();
    if (init.contains("P")) config.initial.P = hvec_from_json(init["P"], "P");
  }
  if (doc.contains("eps_list")) {
    config.eps_list.clear();
    for (const auto& e : doc["eps_list"]) {
      if (!e.is_number())
        throw input_error("config: 'eps_list' must be numeric");
      config.eps_list.push_back(e.get<double>());
    }
  }
  if (doc.contains("T")) config.T = doc["T"].get<double>();
  if (doc.contains("dt")) config.dt = doc["dt"].get<double>();
  if (doc.contains("n")) config.n = doc["n"].get<int>();
  if (doc.contains("alpha_radius"))
    config.alpha_radius = doc["alpha_radius"].get<double>();
  if (doc.contains("alpha_points"))
    config.alpha_points = doc["alpha_points"].get<int>();
  if (doc.contains("out")) config.out = doc["out"].get<std::string>();
  if (doc.contains("seed")) config.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("threads")) config.threads = doc["threads"].get<unsigned>();
  config.validate();
  return config;
}

std::string ExperimentConfig::to_json_text() const {
  json doc;
  doc["engine"] = engine;
  doc["model"] = model;
  doc["amplitude"] = amplitude;
  doc["graph"] = graph;
  doc["initial"] = {{"kind", initial.kind},
                    {"y0", hvec_to_json(initial.y0)},
                    {"a", initial.a},
                    {"P", hvec_to_json(initial.P)}};
  doc["eps_list"] = eps_list;
  doc["T"] = T;
  doc["dt"] = dt;
  doc["n"] = n;
  doc["alpha_radius"] = alpha_radius;
  doc["alpha_points"] = alpha_points;
  doc["out"] = out;
  doc["seed"] = seed;
  doc["threads"] = threads;
  return doc.dump(2) + "\n";
}

void ExperimentConfig::validate() const {
  if (engine != "continuous" && engine != "discrete")
    throw input_error("config: engine must be continuous|discrete");
  initial.validate();
  if (eps_list.empty()) throw input_error("config: eps_list is empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0))
      throw input_error("config: eps values must be positive");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
      throw input_error("config: eps_list must be strictly decreasing");
  }
  if (!(T > 0.0)) throw input_error("config: T must be positive");
  if (!(dt > 0.0)) throw input_error("config: dt must be positive");
  if (n < 8) throw input_error("config: n must be at least 8");
  if (!(alpha_radius > 0.0))
    throw input_error("config: alpha_radius must be positive");
  if (alpha_points < 2)
    throw input_error("config: alpha_points must be at least 2");
  if (threads < 1) throw input_error("config: threads must be at least 1");
  if (engine == "continuous") {
    if (model != "flat" && model != "pendulum" && model != "aniso2d")
      throw input_error("config: model must be flat|pendulum|aniso2d");
    if (!(amplitude > 0.0))
      throw input_error("config: amplitude must be positive");
    for (double eps : eps_list) {
      double inv = 1.0 / eps;
      if (std::abs(inv - std::round(inv)) > 1e-9 * inv)
        throw input_error(
            "config: 1/eps must be an integer for the continuous engine");
    }
  } else {
    if (graph.empty())
      throw input_error("config: the discrete engine needs a graph");
  }
}

TonelliModel ExperimentConfig::make_model() const {
  if (model == "flat") return TonelliModel::flat(1);
  if (model == "pendulum") return TonelliModel::pendulum(amplitude);
  if (model == "aniso2d") return TonelliModel::aniso2d(amplitude);
  throw input_error("config: model must be flat|pendulum|aniso2d");
}

GraphComplex ExperimentConfig::make_graph() const {
  if (graph == "circle") return circle_graph();
  if (graph == "flat_torus") return flat_torus_graph();
  if (std::filesystem::exists(graph)) return read_graph_text(graph);
  throw input_error("config: graph '" + graph +
                    "' is neither a preset (circle|flat_torus) nor a file");
}

namespace {

void finish_report(ConvergenceReport* report) {
  // Least-squares slope of log error vs log eps, with errors floored so the
  // exact cases do not blow up the fit.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = report->rows.size();
  for (const auto& row : report->rows) {
    double x = std::log(row.eps);
    double y = std::log(std::max(row.sup_error, 1e-16));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double denom = double(m) * sxx - sx * sx;
  report->fitted_slope = denom == 0.0 ? 0.0 : (double(m) * sxy - sx * sy) / denom;
  report->monotone = true;
  for (std::size_t i = 1; i < report->rows.size(); ++i)
    if (report->rows[i].sup_error >
        report->rows[i - 1].sup_error +
            1e-12 * std::max(1.0, report->rows[i - 1].sup_error))
      report->monotone = false;
}

void write_sample_errors_csv(const std::filesystem::path& path,
                             const std::vector<CoverHomogenizeSample>& samples,
                             int k) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot open for writing: " + path.string());
  out << (k == 1 ? "y0,value,reference,abs_error\n"
                 : "y0,y1,value,reference,abs_error\n");
  for (const auto& s : samples) {
    out << format_double(s.position[0]) << ',';
    if (k == 2) out << format_double(s.position[1]) << ',';
    out << format_double(s.value) << ',' << format_double(s.reference) << ','
        << format_double(std::abs(s.value - s.reference)) << "\n";
  }
}

}  // namespace

ConvergenceReport run_convergence_study(const ExperimentConfig& config) {
  config.validate();
  ConvergenceReport report;
  report.engine = config.engine;
  const bool emit = !config.out.empty();
  if (emit) std::filesystem::create_directories(config.out);

  try {
    if (config.engine == "continuous") {
      TonelliModel model = config.make_model();
      const int dim = model.dim();

      // The reference front is eps-independent: alpha from the model's own
      // best route, conjugated on a padded velocity box.
      AlphaRoute route = (dim == 1 && model.mechanical()) ? AlphaRoute::Oracle1D
                                                          : AlphaRoute::LargeT;
      AlphaTabulateOptions alpha_options;
      alpha_options.n = config.n;
      alpha_options.dt = config.dt;
      alpha_options.threads = config.threads;
      Vec p_lo{-config.alpha_radius, -config.alpha_radius};
      Vec p_hi{config.alpha_radius, config.alpha_radius};
      SampledFunction alpha =
          tabulate_alpha(model, p_lo, p_hi,
                         {config.alpha_points, config.alpha_points}, route,
                         alpha_options);
      const double v_radius = config.alpha_radius + 2.0;
      const int v_points =
          dim == 1 ? 1 + 2 * int(std::ceil(v_radius * 64)) : 129;
      SampledFunction beta = padded_beta_table(alpha, v_radius, v_points);

      for (std::size_t idx = 0; idx < config.eps_list.size(); ++idx) {
        const double eps = config.eps_list[idx];
        auto t0 = std::chrono::steady_clock::now();
        const int n_run =
            std::max(config.n, int(std::ceil(32.0 / eps)));
        PeriodicGrid grid(dim, n_run);
        std::vector<double> f_values(grid.node_count());
        for (std::size_t i = 0; i < grid.node_count(); ++i)
          f_values[i] = config.initial.evaluate_torus(grid.coords(i), dim);
        ValueField f(grid, std::move(f_values), 0.0);

        ValueField u = solve_oscillatory(f, model, eps, config.T, config.dt,
                                         config.threads);
        int lift =
            needed_lift_radius(beta, f.max_value() - f.min_value(), config.T);
        ValueField reference =
            hopf_lax_torus_field(f, beta, config.T, lift, config.threads);

        ConvergenceRow row;
        row.eps = eps;
        row.sup_error = sup_distance(u, reference);
        row.runtime_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        report.rows.push_back(row);
        if (emit) {
          std::vector<double> err(grid.node_count());
          for (std::size_t i = 0; i < grid.node_count(); ++i)
            err[i] = std::abs(u[i] - reference[i]);
          write_value_field_csv(
              std::filesystem::path(config.out) /
                  ("errors_eps" + std::to_string(idx) + ".csv"),
              ValueField(grid, std::move(err), config.T));
        }
      }
    } else {
      GraphComplex base = config.make_graph();
      const int k = base.rank();
      double vmax = 0.0;
      for (const auto& arc : base.arcs())
        vmax = std::max(vmax, double(norm_inf(arc.z, k)) / arc.length);

      CoverHomogenizeOptions options;
      options.p_radius = config.alpha_radius;
      options.p_points = config.alpha_points;
      options.keep_samples = emit;
      options.threads = config.threads;
      const double f_lip = config.initial.lipschitz(
          options.x_radius + config.T * vmax + 1.0, k);
      auto f = [&](const HVec& y) { return config.initial.evaluate(y, k); };

      for (std::size_t idx = 0; idx < config.eps_list.size(); ++idx) {
        const double eps = config.eps_list[idx];
        auto t0 = std::chrono::steady_clock::now();
        auto rows = cover_homogenize(base, f, f_lip, {eps}, config.T, options);
        ConvergenceRow row;
        row.eps = eps;
        row.sup_error = rows.at(0).sup_error;
        row.runtime_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        report.rows.push_back(row);
        if (emit)
          write_sample_errors_csv(
              std::filesystem::path(config.out) /
                  ("errors_eps" + std::to_string(idx) + ".csv"),
              rows.at(0).samples, k);
      }
    }
  } catch (...) {
    // Keep whatever rows finished on disk next to the failure.
    finish_report(&report);
    if (emit)
      write_convergence_report_csv(
          std::filesystem::path(config.out) / "report.csv", report);
    throw;
  }

  finish_report(&report);
  if (emit)
    write_convergence_report_csv(
        std::filesystem::path(config.out) / "report.csv", report);
  return report;
}

void write_convergence_report_csv(const std::filesystem::path& path,
                                  const ConvergenceReport& report) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot open for writing: " + path.string());
  out << "# engine=" << report.engine
      << ",fitted_slope=" << format_double(report.fitted_slope)
      << ",monotone=" << (report.monotone ? 1 : 0) << "\n";
  out << "eps,sup_error,runtime_seconds\n";
  for (const auto& row : report.rows)
    out << format_double(row.eps) << ',' << format_double(row.sup_error) << ','
        << format_double(row.runtime_seconds) << "\n";
  if (!out) throw input_error("write failed: " + path.string());
}

}  // namespace homog
