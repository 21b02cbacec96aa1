// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "helmdg/config.hpp"
#include "helmdg/estimator.hpp"

namespace helmdg {

// Batch description: what to solve, on which mesh family, and how to iterate.
// Built from a ConfigMap; every physical parameter is validated on load.
struct StudyConfig {
  std::string kind;  // uniform_convergence | adaptive | gamma_ba_scaling |
                     // stability_sweep | solve
  // Either a manufactured case (with built-in domain, data, and truth) or a
  // custom domain with homogeneous-truth data.
  std::string case_name;  // plane_wave | corner_singular | constant | ""
  std::string domain;     // square | lshape | mesh file path ("" with a case)
  std::string boundary;   // dirichlet | neumann | robin (custom domain only)
  double mu = 1.0;        // custom-domain coefficients, single region
  Eigen::Matrix2d A = Eigen::Matrix2d::Identity();
  double gamma = 1.0;
  double omega = 1.0;       // custom domain only; cases fix their own omega
  cplx source = cplx(1.0, 0.0);  // custom-domain volume source (constant)

  int degree = 1;
  double beta0 = 10.0;

  std::vector<int> meshes = {2, 4, 8, 16};  // uniform / gamma sequences
  int initial_n = 1;                        // adaptive / solve / sweep
  long max_dofs = 20000;                    // adaptive budget
  int max_iterations = 30;                  // adaptive cap
  double theta_mark = 0.5;                  // Dörfler fraction, in (0,1)
  double sweep_min = 4.2, sweep_max = 4.7;  // stability sweep omega range
  int sweep_samples = 21;

  bool with_gamma = false;   // add approximation-factor columns to studies
  bool with_fields = false;  // write mesh/field/sample files per mesh
  std::string output_dir = "out";
};

// When `forced_kind` is nonempty the subcommand fixes the study kind and any
// study.kind key in the config is overridden.
StudyConfig load_study_config(const ConfigMap& cfg,
                              const std::string& forced_kind = "");

// The resolved problem: a manufactured case verbatim, or a synthetic case
// built from the custom domain (truth callbacks null).
ManufacturedCase resolve_problem(const StudyConfig& cfg);

// Tabular study result. Cells are doubles; NaN renders as an empty CSV cell.
// Wall-clock seconds are kept out of the main table so that repeated runs
// serialize byte-identically; they go to a separate timing sidecar.
struct ConvergenceRecord {
  std::string kind;
  std::string label;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> summary;
  std::vector<double> seconds;  // per row; sidecar only
};

void write_study_csv(const ConvergenceRecord& rec, std::ostream& out);
void write_timing_csv(const ConvergenceRecord& rec, std::ostream& out);

ConvergenceRecord run_uniform_study(const StudyConfig& cfg);
ConvergenceRecord run_adaptive(const StudyConfig& cfg);
ConvergenceRecord run_gamma_study(const StudyConfig& cfg);
ConvergenceRecord run_stability_sweep(const StudyConfig& cfg);

// Smallest index set with sum of eta_K^2 >= theta^2 * eta^2, chosen greedily
// by descending eta_K^2 with index order breaking ties.
std::vector<int> dorfler_mark(const std::vector<double>& eta_K_sq,
                              double theta);

// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(const std::vector<double>& x,
                        const std::vector<double>& y);

// Writes <base>.mesh, <base>.field, and <base>_samples.csv (vertex and edge
// midpoint values of the field per element, with eta_K when available).
void emit_fields(const Mesh& mesh, const BrokenField& u,
                 const EstimatorReport* rep, const std::string& base);

// Single solve with file outputs and a one-line summary on `log`.
void run_solve(const StudyConfig& cfg, std::ostream& log);

// Dispatch a study config (kind-dependent), writing CSV outputs under
// cfg.output_dir and a short summary on `log`.
void run_study_command(const StudyConfig& cfg, std::ostream& log);

}  // namespace helmdg
