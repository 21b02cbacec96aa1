// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "helmdg/dg_operators.hpp"

namespace helmdg {

// Mesh-dependent weights entering the dagger norms. Kept separate from the
// Gram assembly so that a refined space can be measured with the weights of
// a coarser ancestor mesh.
struct NormWeights {
  std::vector<double> mass;      // per element: max(1, w^2h^2/th^2) * alpha/h^2
  std::vector<double> robin;     // per face: max(1, wh/th) * alpha/h, 0 off Robin
  std::vector<double> div_vol;   // per element: h^2/alpha
  std::vector<double> div_face;  // per face: h/alpha on Robin, 0 elsewhere
};

NormWeights native_weights(const Mesh& mesh, double omega,
                           const MeshScalars& scalars);

struct NormContext {
  const DgContext* ctx = nullptr;
  NormWeights weights;
  Eigen::SparseMatrix<double> G1;       // dagger-1 Gram on the broken space
  Eigen::SparseMatrix<double> E_omega;  // energy Gram on the broken space
};

NormContext make_norms(const DgContext& ctx);
NormContext make_norms(const DgContext& ctx, const NormWeights& weights);

double energy_norm(const NormContext& n, const Eigen::VectorXcd& broken);
double dagger1_norm(const NormContext& n, const Eigen::VectorXcd& broken);
double daggerdiv_norm(const NormContext& n, const DivConformingSpace& space,
                      const Eigen::VectorXcd& dofs);

// (G(phi), w) + (phi, div w) - (phi, w.n) over Robin faces.
cplx duality_pairing(const NormContext& n, const BrokenField& phi,
                     const DivConformingSpace& space,
                     const Eigen::VectorXcd& dofs);

// Dagger-1 best approximation of a broken field by a conforming one vanishing
// on the Dirichlet boundary. Returns the full nodal vector (constrained 0).
Eigen::VectorXcd project_g(const NormContext& n, const ConformingSpace& conf,
                           const Eigen::SparseMatrix<double>& embedding,
                           const Eigen::VectorXcd& broken);

// Dagger-div best approximation of an analytic flux by a member of the
// div-conforming space with vanishing Neumann trace; returns the error.
double best_div_error(const NormContext& n, const DivConformingSpace& space,
                      const VectorFn& flux, const ScalarFn& div_flux,
                      int quad_order = -1);

// Energy-norm best approximation of an analytic field by a conforming field
// vanishing on the Dirichlet boundary; returns the error.
double best_conforming_energy_error(const NormContext& n,
                                    const ConformingSpace& conf,
                                    const ScalarFn& u, const VectorFn& grad_u,
                                    int quad_order = -1);

// Nodal averaging onto the conforming space with Dirichlet nodes zeroed,
// as a sparse map from broken coefficients to conforming nodal values.
Eigen::SparseMatrix<double> averaging_matrix(const ConformingSpace& conf,
                                             const BrokenSpace& broken);

// ||v - E J v||_{dagger,1}: the computable non-conformity measure.
double nonconformity_surrogate(const NormContext& n,
                               const Eigen::SparseMatrix<double>& embedding,
                               const Eigen::SparseMatrix<double>& averaging,
                               const Eigen::VectorXcd& broken);

// Error measures against an analytic truth; the analytic part contributes its
// exact gradient, the discrete part its discrete gradient.
double energy_error(const NormContext& n, const BrokenField& u_h,
                    const ScalarFn& u, const VectorFn& grad_u,
                    int quad_order = -1);
double mu_l2_error(const NormContext& n, const BrokenField& u_h,
                   const ScalarFn& u, int quad_order = -1);
double robin_trace_error(const NormContext& n, const BrokenField& u_h,
                         const ScalarFn& u, int quad_order = -1);

// Smallest generalized eigenvalue of the penalization against the squared
// dagger-1 distance to the conforming subspace; the measured coercivity
// constant rho^2. Dense solve; guarded by a dof cap.
double coercivity_margin(const NormContext& n, const ConformingSpace& conf,
                         const Eigen::SparseMatrix<double>& embedding);

}  // namespace helmdg
