// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <vector>

#include "helmdg/norms.hpp"
#include "helmdg/solver.hpp"

namespace helmdg {

// Residual estimator broken down per element. All term_* vectors hold the
// squared contribution of that term to eta_K^2, so that the Pythagorean
// aggregation eta^2 = sum_K eta_K^2 holds exactly by construction.
struct EstimatorReport {
  std::vector<double> term_volume;         // h_K^2/alpha_K volume residual
  std::vector<double> term_flux_jump;      // h_K/alpha_K conormal jumps
  std::vector<double> term_solution_jump;  // alpha_K/h_K solution jumps
  std::vector<double> term_dirichlet;      // alpha_F/h_F trace residual
  std::vector<double> term_neumann;        // h_F/alpha_F flux residual
  std::vector<double> term_robin;          // h_F/alpha_F impedance residual
  std::vector<double> eta_K;               // per-element estimator
  double eta = 0.0;

  // Non-conformity measured through the averaging operator, and the
  // weighted-jump upper bound for it.
  double rc_surrogate = 0.0;
  double rc_jump_bound = 0.0;

  // Data oscillation: per element the vertex-patch value osc_{K~}; the
  // total counts each element once. Empty until attach_oscillation.
  std::vector<double> osc_patch;
  double osc_total = 0.0;

  double effectivity = 0.0;
  bool degenerate = false;
};

// Assemble the six-term residual estimator for a discrete solution. The
// boundary data of the problem is subtracted inside the boundary residuals;
// null callbacks mean homogeneous data.
EstimatorReport compute_eta(const NormContext& n, const BrokenField& u_h,
                            const ScalarFn& f, const ScalarFn& g_dirichlet,
                            const BoundaryFn& g_neumann,
                            const BoundaryFn& g_robin, int quad_order = -1);

// Fill in osc_patch / osc_total for the given source term.
void attach_oscillation(EstimatorReport& report, const NormContext& n,
                        const ScalarFn& f, int quad_order = -1);

// eta divided by a trusted error. A zero error with zero eta is reported as
// effectivity 1 with the degenerate flag; zero error with nonzero eta as
// infinity. Stores the result in the report and returns it.
double effectivity(EstimatorReport& report, double error);

// Local error around each element: the energy norm of u - u_h over the
// vertex-sharing patch of K, using the plain broken gradient.
std::vector<double> patch_local_error(const NormContext& n,
                                      const BrokenField& u_h, const ScalarFn& u,
                                      const VectorFn& grad_u,
                                      int quad_order = -1);

// One row per element (id, six term magnitudes, eta_K) followed by a
// summary block of commented key=value lines.
void write_estimator_csv(const EstimatorReport& report, const Mesh& mesh,
                         std::ostream& out);

// Sampled approximation factors. The checked/tilde entries are measured;
// the combined quantities are definitions evaluated from them exactly.
struct ApproximationFactors {
  double check_g = 0.0;  // dual best-approximation factor, conforming part
  double check_d = 0.0;  // div-conforming part
  double tilde_g = 0.0;  // Robin-trace duals, conforming part
  double tilde_d = 0.0;  // Robin-trace duals, div-conforming part
  bool converged = true;
  int iterations = 0;

  double gba_g_sq() const { return 4.0 * check_g * check_g + 2.0 * tilde_g * tilde_g; }
  double gba_d_sq() const { return 4.0 * check_d * check_d + 2.0 * tilde_d * tilde_d; }
  double gba_check_sq() const { return check_g * check_g + check_d * check_d; }
  double gba_tilde_sq() const { return tilde_g * tilde_g + tilde_d * tilde_d; }
  double gba_sq() const { return gba_g_sq() + gba_d_sq(); }
  double gba_g() const;
  double gba_d() const;
  double gba_check() const;
  double gba_tilde() const;
  double gba() const;
};

// Measure the approximation factors on a mesh by maximizing the dual-problem
// projection residuals over discrete data. Dual reference solves run one
// uniform refinement finer with degree p + 1.
ApproximationFactors sample_gamma_ba(const Mesh& mesh,
                                     const CoefficientSet& coeffs, int degree);

// Reliability margins for one solve: R^2 combines the estimator (standing in
// for the conforming residual) with the non-conformity surrogate.
struct ReliabilityReport {
  double R = 0.0;
  double main_ratio = 0.0;        // energy error / (sqrt(1+gba^2) R)
  double weak_mu_ratio = 0.0;     // omega ||e||_mu / (gba_check R)
  double weak_robin_ratio = 0.0;  // omega^(1/2) ||e||_gamma / (gba_tilde R)
  bool robin_degenerate = false;  // no Robin faces: the ratio is 0/0
  bool pass = false;
};

ReliabilityReport reliability_check(double energy_err, double mu_err,
                                    double robin_err,
                                    const EstimatorReport& report,
                                    const ApproximationFactors& factors,
                                    double plausibility_bound = 100.0);

}  // namespace helmdg
