#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hjhomog/cover.hpp"
#include "hjhomog/effective.hpp"
#include "hjhomog/grid.hpp"
#include "hjhomog/models.hpp"

namespace homog {

// Initial-data presets shared by both engines: cone |y - y0| (minimal image
// on the torus for the continuous engine), affine a + P.y, and quadratic
// |y - y0|^2.
struct InitialDataSpec {
  std::string kind = "cone";  // cone | affine | quadratic
  HVec y0 = {0.5, 0.5, 0, 0};
  double a = 0.0;
  HVec P = {0, 0, 0, 0};

  double evaluate(const HVec& y, int k) const;          // on R^k
  double evaluate_torus(const Vec& x, int dim) const;   // minimal image
  double lipschitz(double radius, int k) const;
  void validate() const;
};

// Experiment description, loadable from JSON. Unknown keys are rejected.
struct ExperimentConfig {
  std::string engine = "continuous";  // continuous | discrete
  std::string model = "pendulum";     // flat | pendulum | aniso2d (continuous)
  double amplitude = 1.0;
  std::string graph;                  // preset name or path (discrete):
                                      // circle | flat_torus | <file.graph>
  InitialDataSpec initial;
  std::vector<double> eps_list = {0.25, 0.125};
  double T = 1.0;
  double dt = 0.01;
  int n = 256;
  double alpha_radius = 4.0;          // momentum box for the alpha table
  int alpha_points = 17;
  std::string out;                    // output directory ("" = no files)
  std::uint64_t seed = 0;
  unsigned threads = 1;

  static ExperimentConfig from_json_file(const std::filesystem::path& path);
  static ExperimentConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
  void validate() const;

  TonelliModel make_model() const;
  GraphComplex make_graph() const;
};

struct ConvergenceRow {
  double eps = 0.0;
  double sup_error = 0.0;
  double runtime_seconds = 0.0;
};

struct ConvergenceReport {
  std::string engine;
  std::vector<ConvergenceRow> rows;  // sorted by eps descending
  double fitted_slope = 0.0;         // of log error vs log eps
  bool monotone = false;             // sup_error non-increasing in the rows
};

// Runs solve_oscillatory (continuous) or cover_homogenize (discrete) per
// eps, with the reference front built from the engine's own alpha table, and
// assembles the report. When config.out is set, writes report.csv plus one
// per-node error file per eps whose maximum equals the row's sup_error.
ConvergenceReport run_convergence_study(const ExperimentConfig& config);

void write_convergence_report_csv(const std::filesystem::path& path,
                                  const ConvergenceReport& report);

}  // namespace homog
