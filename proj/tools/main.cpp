// Command line front end: experiment configs in, CSV artifacts out.
//
// Exit codes: 0 success, 1 criterion/computation failure, 2 usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "hjhomog/acceptance.hpp"
#include "hjhomog/cover.hpp"
#include "hjhomog/discrete_weakkam.hpp"
#include "hjhomog/effective.hpp"
#include "hjhomog/harness.hpp"
#include "hjhomog/hj_grid.hpp"
#include "hjhomog/io.hpp"

namespace {

using namespace homog;

struct SharedFlags {
  std::string config_path;
  std::string out;
  unsigned threads = 0;        // 0 = keep the config's value
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_shared_flags(CLI::App* cmd, SharedFlags* flags, bool config_required) {
  auto* opt = cmd->add_option("--config", flags->config_path,
                              "experiment configuration (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--out", flags->out, "output directory");
  cmd->add_option("--threads", flags->threads, "worker thread count");
  cmd->add_option("--seed", flags->seed, "RNG seed override")
      ->each([flags](const std::string&) { flags->seed_set = true; });
}

ExperimentConfig load_config(const SharedFlags& flags) {
  ExperimentConfig config = ExperimentConfig::from_json_file(flags.config_path);
  if (!flags.out.empty()) config.out = flags.out;
  if (flags.threads > 0) config.threads = flags.threads;
  if (flags.seed_set) config.seed = flags.seed;
  return config;
}

std::filesystem::path out_dir(const ExperimentConfig& config) {
  std::filesystem::path dir = config.out.empty() ? "." : config.out;
  std::filesystem::create_directories(dir);
  return dir;
}

// The route the config's model is best served by: the closed-form quadrature
// for one-dimensional mechanical models, large-time averaging otherwise.
AlphaRoute route_for(const TonelliModel& model) {
  return (model.dim() == 1 && model.mechanical()) ? AlphaRoute::Oracle1D
                                                  : AlphaRoute::LargeT;
}

SampledFunction continuous_alpha_table(const ExperimentConfig& config,
                                       const TonelliModel& model) {
  AlphaTabulateOptions options;
  options.n = config.n;
  options.dt = config.dt;
  options.threads = config.threads;
  Vec lo{-config.alpha_radius, -config.alpha_radius};
  Vec hi{config.alpha_radius, config.alpha_radius};
  return tabulate_alpha(model, lo, hi, {config.alpha_points, config.alpha_points},
                        route_for(model), options);
}

int cmd_tonelli_check(const SharedFlags& flags) {
  ExperimentConfig config = load_config(flags);
  TonelliModel model = config.make_model();
  TonelliReport report = check_tonelli(model);
  std::cout << "model " << model.preset() << "\n"
            << "  convexity:      " << (report.convexity_pass ? "pass" : "FAIL")
            << " (min second difference " << report.min_second_difference
            << " at x=" << format_vec(report.worst_x, model.dim())
            << ", v=" << format_vec(report.worst_v, model.dim()) << ")\n"
            << "  superlinearity: "
            << (report.superlinearity_pass ? "pass" : "FAIL") << "\n";
  for (const auto& row : report.superlinearity)
    std::cout << "    speed " << row.radius << ": min L/|v| = " << row.min_ratio
              << "\n";
  return report.pass ? 0 : 1;
}

int cmd_alpha(const SharedFlags& flags) {
  ExperimentConfig config = load_config(flags);
  TonelliModel model = config.make_model();
  SampledFunction samples = continuous_alpha_table(config, model);
  const char* method =
      route_for(model) == AlphaRoute::Oracle1D ? "oracle-1d" : "large-T";
  AlphaTable table = alpha_table_from_samples(samples, method);
  auto path = out_dir(config) / "alpha.csv";
  write_alpha_table_csv(path, table);
  std::cout << "wrote " << table.entries.size() << " samples to "
            << path.string() << "\n";
  return 0;
}

int cmd_beta(const SharedFlags& flags) {
  ExperimentConfig config = load_config(flags);
  TonelliModel model = config.make_model();
  SampledFunction alpha = continuous_alpha_table(config, model);
  // Conjugate on a velocity box wide enough for every subgradient the
  // momentum box can produce; out-of-cone velocities are skipped.
  const double v_radius = config.alpha_radius + 1.0;
  const int points = config.alpha_points * 4 + 1;
  SampledFunction grid;
  grid.k = alpha.k;
  grid.lo = {-v_radius, -v_radius};
  grid.hi = {v_radius, v_radius};
  grid.points = {points, alpha.k == 1 ? 1 : points};

  AlphaTable table;
  table.dim = alpha.k;
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    Vec v = grid.coords(i);
    AlphaEntry entry;
    entry.P = v;  // abscissa column: velocity
    try {
      entry.alpha = beta_from_alpha(alpha, v);
    } catch (const window_error&) {
      continue;  // outside the sampled reachable cone
    }
    entry.method = "conjugate";
    table.entries.push_back(entry);
  }
  auto path = out_dir(config) / "beta.csv";
  write_alpha_table_csv(path, table);
  std::cout << "wrote " << table.entries.size() << " samples to "
            << path.string() << "\n";
  return 0;
}

int cmd_cell(const SharedFlags& flags) {
  ExperimentConfig config = load_config(flags);
  TonelliModel model = config.make_model();
  Vec P{config.initial.P[0], config.initial.P[1]};
  double alpha;
  if (route_for(model) == AlphaRoute::Oracle1D) {
    alpha = alpha_1d_oracle(model, P[0]);
  } else {
    alpha = alpha_large_T(model, P, 20.0, config.dt, config.n, config.threads);
  }
  CellCorrectorResult cell = cell_corrector(model, P, alpha, config.n,
                                            config.dt, 1e-6, 100000,
                                            config.threads);
  auto path = out_dir(config) / "corrector.csv";
  write_value_field_csv(path, cell.corrector);
  std::cout << "alpha = " << format_double(cell.alpha) << "\n"
            << "iterations = " << cell.iterations
            << (cell.converged ? "" : " (NOT converged)") << "\n"
            << "final change = " << format_double(cell.final_change) << "\n"
            << "residual sup |H(x, P + Dv) - alpha| = "
            << format_double(cell.residual) << "\n"
            << "wrote " << path.string() << "\n";
  return cell.converged ? 0 : 1;
}

int cmd_homogenize(const SharedFlags& flags, bool force_discrete) {
  ExperimentConfig config = load_config(flags);
  if (force_discrete) config.engine = "discrete";

  if (config.engine == "discrete") {
    // Full error table with the equicontinuity column.
    GraphComplex base = config.make_graph();
    const int k = base.rank();
    double vmax = 0.0;
    for (const auto& arc : base.arcs())
      vmax = std::max(vmax, double(norm_inf(arc.z, k)) / arc.length);
    CoverHomogenizeOptions options;
    options.p_radius = config.alpha_radius;
    options.p_points = config.alpha_points;
    options.threads = config.threads;
    const double f_lip = config.initial.lipschitz(
        options.x_radius + config.T * vmax + 1.0, k);
    auto f = [&](const HVec& y) { return config.initial.evaluate(y, k); };
    auto rows = cover_homogenize(base, f, f_lip, config.eps_list, config.T,
                                 options);

    auto path = out_dir(config) / "error_table.csv";
    std::ofstream out(path);
    if (!out) throw input_error("cannot open for writing: " + path.string());
    out << "eps,sup_error,equicontinuity_modulus,window_R\n";
    bool monotone = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out << format_double(rows[i].eps) << ','
          << format_double(rows[i].sup_error) << ','
          << format_double(rows[i].modulus) << ',' << rows[i].window_radius
          << "\n";
      std::cout << "eps=" << rows[i].eps << "  sup_error=" << rows[i].sup_error
                << "  modulus=" << rows[i].modulus
                << "  window_R=" << rows[i].window_radius << "\n";
      if (i && rows[i].sup_error >
                   rows[i - 1].sup_error +
                       1e-12 * std::max(1.0, rows[i - 1].sup_error))
        monotone = false;
    }
    std::cout << "wrote " << path.string() << "\n";
    if (!monotone) std::cout << "sup_error is not non-increasing\n";
    return monotone ? 0 : 1;
  }

  ConvergenceReport report = run_convergence_study(config);
  for (const auto& row : report.rows)
    std::cout << "eps=" << row.eps << "  sup_error=" << row.sup_error << "  ("
              << row.runtime_seconds << " s)\n";
  std::cout << "fitted slope = " << report.fitted_slope << "\n";
  if (!config.out.empty())
    std::cout << "wrote " << (std::filesystem::path(config.out) / "report.csv").string()
              << "\n";
  if (!report.monotone) std::cout << "sup_error is not non-increasing\n";
  return report.monotone ? 0 : 1;
}

int cmd_discrete_alpha(const SharedFlags& flags) {
  ExperimentConfig config = load_config(flags);
  if (config.graph.empty())
    throw input_error("discrete-alpha needs a graph in the config");
  GraphComplex base = config.make_graph();
  Vec lo{-config.alpha_radius, -config.alpha_radius};
  Vec hi{config.alpha_radius, config.alpha_radius};
  SampledFunction samples = tabulate_alpha_discrete(
      base, lo, hi, {config.alpha_points, config.alpha_points});
  AlphaTable table = alpha_table_from_samples(samples, "bisection");
  auto path = out_dir(config) / "alpha.csv";
  write_alpha_table_csv(path, table);
  std::cout << "wrote " << table.entries.size() << " samples to "
            << path.string() << "\n";
  return 0;
}

int cmd_stable_norm(const SharedFlags& flags, const std::string& klass,
                    const std::string& multiples) {
  ExperimentConfig config = load_config(flags);
  if (config.graph.empty())
    throw input_error("stable-norm needs a graph in the config");
  GraphComplex base = config.make_graph();

  LatticeVec h = lattice_zero();
  {
    std::istringstream in(klass);
    std::string token;
    int axis = 0;
    while (std::getline(in, token, ',')) {
      if (axis >= base.rank())
        throw input_error("--class has more entries than the graph rank");
      h[axis++] = int(std::stol(token));
    }
  }
  std::vector<int> m_list;
  {
    std::istringstream in(multiples);
    std::string token;
    while (std::getline(in, token, ',')) m_list.push_back(int(std::stol(token)));
  }

  StableNormEstimate estimate = stable_norm_estimate(base, h, m_list);
  for (std::size_t i = 0; i < estimate.multiples.size(); ++i)
    std::cout << "m=" << estimate.multiples[i]
              << "  d(m h)/m = " << format_double(estimate.ratios[i]) << "\n";
  std::cout << "stable norm estimate = " << format_double(estimate.estimate)
            << "  (worst consecutive increase " << estimate.max_increase
            << ")\n";
  return 0;
}

int cmd_cover_convergence(const SharedFlags& flags) {
  ExperimentConfig config = load_config(flags);
  if (config.graph.empty())
    throw input_error("cover-convergence needs a graph in the config");
  GraphComplex base = config.make_graph();

  SpaceConvergenceOptions options;
  options.threads = config.threads;
  SpaceConvergenceReport report =
      verify_space_convergence(base, config.eps_list, options);

  auto path = out_dir(config) / "space_convergence.csv";
  std::ofstream out(path);
  if (!out) throw input_error("cannot open for writing: " + path.string());
  out << "eps,B,A_eps,A_eps_over_eps,fiber_diameter,pairs\n";
  for (const auto& row : report.rows) {
    out << format_double(row.eps) << ',' << format_double(row.multiplicative)
        << ',' << format_double(row.additive) << ','
        << format_double(row.normalized) << ','
        << format_double(row.fiber_diameter) << ',' << row.pairs << "\n";
    std::cout << "eps=" << row.eps << "  B=" << row.multiplicative
              << "  A_eps=" << row.additive << "  A/eps=" << row.normalized
              << "  fiber=" << row.fiber_diameter << "  pairs=" << row.pairs
              << "\n";
  }
  std::cout << "overall B = " << report.multiplicative << ", A_eps/eps "
            << (report.additive_stable ? "stable" : "UNSTABLE") << "\n"
            << "wrote " << path.string() << "\n";

  bool fibers_ok = true;
  for (const auto& row : report.rows)
    if (row.fiber_diameter > report.multiplicative * row.additive + 1e-9)
      fibers_ok = false;
  return (report.additive_stable && fibers_ok) ? 0 : 1;
}

int cmd_accept(const SharedFlags& flags, const std::string& filter,
               bool tamper) {
  AcceptanceOptions options;
  options.filter = filter;
  options.threads = flags.threads > 0 ? flags.threads : 1;
  options.tamper_closed_form = tamper;
  auto results = run_acceptance_suite(options, std::cout);
  if (results.empty()) {
    std::cerr << "no criteria matched the filter\n";
    return 2;
  }
  for (const auto& result : results)
    if (!result.pass) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamilton-Jacobi homogenization toolkit"};
  app.require_subcommand(1);

  SharedFlags flags;
  std::string klass = "1";
  std::string multiples = "1,2,4,8,16";
  std::string filter;
  bool force_discrete = false;
  bool tamper = false;

  add_shared_flags(app.add_subcommand("tonelli-check",
                                      "audit convexity and superlinearity"),
                   &flags, true);
  add_shared_flags(
      app.add_subcommand("alpha", "tabulate the effective Hamiltonian"),
      &flags, true);
  add_shared_flags(
      app.add_subcommand("beta", "tabulate the effective Lagrangian"), &flags,
      true);
  add_shared_flags(app.add_subcommand("cell", "solve the cell problem"),
                   &flags, true);
  auto* homogenize =
      app.add_subcommand("homogenize", "run the eps-convergence study");
  add_shared_flags(homogenize, &flags, true);
  homogenize->add_flag("--discrete", force_discrete,
                       "use the graph engine regardless of the config");
  add_shared_flags(
      app.add_subcommand("discrete-alpha", "tabulate the cycle-ratio alpha"),
      &flags, true);
  auto* stable_norm =
      app.add_subcommand("stable-norm", "estimate a stable norm by multiples");
  add_shared_flags(stable_norm, &flags, true);
  stable_norm->add_option("--class", klass, "integer homology class, comma separated");
  stable_norm->add_option("--multiples", multiples, "multiples to average over");
  add_shared_flags(
      app.add_subcommand("cover-convergence",
                         "verify rescaled-cover space convergence"),
      &flags, true);
  auto* accept = app.add_subcommand("accept", "run the acceptance criteria");
  add_shared_flags(accept, &flags, false);
  accept->add_option("--filter", filter, "run only criteria whose id contains this");
  accept->add_flag("--tamper-closed-form", tamper,
                   "negative control: bias the closed-form oracle by +0.5");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand("tonelli-check")) return cmd_tonelli_check(flags);
    if (app.got_subcommand("alpha")) return cmd_alpha(flags);
    if (app.got_subcommand("beta")) return cmd_beta(flags);
    if (app.got_subcommand("cell")) return cmd_cell(flags);
    if (app.got_subcommand("homogenize"))
      return cmd_homogenize(flags, force_discrete);
    if (app.got_subcommand("discrete-alpha")) return cmd_discrete_alpha(flags);
    if (app.got_subcommand("stable-norm"))
      return cmd_stable_norm(flags, klass, multiples);
    if (app.got_subcommand("cover-convergence"))
      return cmd_cover_convergence(flags);
    if (app.got_subcommand("accept")) return cmd_accept(flags, filter, tamper);
  } catch (const input_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
