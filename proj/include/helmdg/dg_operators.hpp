// SPDX-License-Identifier: Apache-2.0
//
// Interior-penalty DG operators for the Helmholtz sesquilinear form: broken
// mass and stiffness matrices, face penalization, the lifting operator and
// the discrete gradient built from it, plus right-hand-side assembly with
// boundary data folded in consistently.

#pragma once

#include <Eigen/Sparse>

#include "helmdg/spaces.hpp"

namespace helmdg {

struct DgOptions {
  double beta0 = 10.0;            // penalty scale, beta_F = beta0 p^2 alpha_F
  bool lift_higher_order = false; // lift into degree p+1 instead of p
  int volume_quad = -1;           // -1: 2p+2
  int face_quad = -1;             // -1: 2p+2
  int data_quad = -1;             // -1: 2p+4 (source and boundary data)
};

// Everything assembled once per (mesh, coefficients, degree) triple. All
// matrices are real; the Helmholtz matrix combines them with complex scalars.
struct DgContext {
  const Mesh* mesh = nullptr;
  CoefficientSet coeffs;
  MeshScalars scalars;
  DgOptions opt;
  BrokenSpace scalar;  // degree p scalar space
  BrokenSpace lift;    // component space of the vector range of the lifting

  std::vector<Eigen::Matrix2d> JinvT;
  std::vector<double> detJ;

  // Vector fields over the lift basis: per element, x block then y block.
  int vec_block() const { return 2 * lift.basis.dim; }
  int vec_dim() const { return mesh->n_tris() * vec_block(); }
  int vec_off(int t, int comp) const {
    return t * vec_block() + comp * lift.basis.dim;
  }

  Eigen::SparseMatrix<double> M_mu;     // mu-weighted broken mass
  Eigen::SparseMatrix<double> R_gamma;  // gamma-weighted Robin face mass
  Eigen::SparseMatrix<double> MA_vec;   // A-weighted vector mass
  Eigen::SparseMatrix<double> MAinv_vec;  // A^{-1}-weighted vector mass
  Eigen::SparseMatrix<double> G0;       // broken gradient, scalar -> vector
  Eigen::SparseMatrix<double> L;        // lifting, scalar -> vector
  Eigen::SparseMatrix<double> Gop;      // discrete gradient G0 - L
  Eigen::SparseMatrix<double> P_pen;    // face penalty part of s_h
  Eigen::SparseMatrix<double> S_pen;    // s_h = P_pen - L^T MA_vec L
  Eigen::SparseMatrix<double> A_dg;     // Gop^T MA_vec Gop + S_pen

  double beta_F(int f) const;
};

DgContext make_context(const Mesh& mesh, const CoefficientSet& coeffs,
                       int degree, DgOptions opt = {});

// The same bilinear form assembled in its jump/average presentation:
// (A grad, grad) - consistency terms - symmetry terms + penalty. Coincides
// with A_dg for piecewise constant A and same-degree lifting.
Eigen::SparseMatrix<double> assemble_jump_form(const DgContext& ctx);

// Full sesquilinear form matrix: -omega^2 M_mu - i omega R_gamma + A_dg.
Eigen::SparseMatrix<cplx> helmholtz_matrix(const DgContext& ctx);

// Right-hand side: (f, v) + (g_N, v)_N + (g_R, v)_R and for Dirichlet data
// (beta_F / h_F)(g_D, v)_F - (g_D, A grad v . n)_F. Null callables mean
// homogeneous data.
Eigen::VectorXcd assemble_rhs(const DgContext& ctx, const ScalarFn& f,
                              const BoundaryFn& g_neumann = nullptr,
                              const BoundaryFn& g_robin = nullptr,
                              const ScalarFn& g_dirichlet = nullptr);

// Trace evaluations at global face parameter s (0 at the lower-id vertex).
// jump_scalar: interior faces phi_plus - phi_minus, Dirichlet faces the
// owner trace, 0 on Neumann/Robin faces (matching the form's jump set).
cplx jump_scalar(const DgContext& ctx, const BrokenField& field, int f,
                 double s);
cplx avg_Agrad_n(const DgContext& ctx, const BrokenField& field, int f,
                 double s);
// Difference of A grad(.) . n_F across an interior face.
cplx jump_Agrad_n(const DgContext& ctx, const BrokenField& field, int f,
                  double s);

// Vector coefficients (lift-space layout) of the lifting and the discrete
// gradient of a broken field.
Eigen::VectorXcd apply_lifting(const DgContext& ctx,
                               const Eigen::VectorXcd& coef);
Eigen::VectorXcd discrete_gradient(const DgContext& ctx,
                                   const Eigen::VectorXcd& coef);

// Lifting of an analytic Dirichlet trace: vector coefficients of the field
// defined by (lift, w) = (g, w . n_F) over all Dirichlet faces. Used when
// measuring errors against an exact solution with inhomogeneous Dirichlet
// data, whose jump on those faces is g rather than zero.
Eigen::VectorXcd lift_dirichlet_trace(const DgContext& ctx,
                                      const ScalarFn& g);

// Evaluation of a vector field stored in lift-space layout.
Eigen::Vector2cd eval_vec(const DgContext& ctx, const Eigen::VectorXcd& vec,
                          int t, const Eigen::Vector2d& xi);

}  // namespace helmdg
