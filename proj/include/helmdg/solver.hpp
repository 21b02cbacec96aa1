// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/SparseLU>
#include <memory>
#include <string>

#include "helmdg/norms.hpp"

namespace helmdg {

struct SolveInfo {
  double residual_rel = 0.0;
  double condition_estimate = 0.0;
};

// Direct sparse solve of the broken Helmholtz system. Throws NumericalError
// with the condition estimate attached when the matrix is near singular.
BrokenField solve_ipdg(const DgContext& ctx, const Eigen::VectorXcd& rhs,
                       SolveInfo* info = nullptr);

// Conforming discretization on the free nodes of a ConformingSpace.
struct ConformingSystem {
  const ConformingSpace* space = nullptr;
  CoefficientSet coeffs;
  Eigen::SparseMatrix<double> M_mu;     // free x free mass
  Eigen::SparseMatrix<double> R_gamma;  // free x free Robin trace mass
  Eigen::SparseMatrix<double> K_A;      // free x free stiffness
  Eigen::SparseMatrix<cplx> B;          // -w^2 M - iw R + K
  std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<cplx>>> lu;
  double condition_estimate = 0.0;
};

ConformingSystem assemble_conforming(const ConformingSpace& space,
                                     const CoefficientSet& coeffs);

// Primal solve with natural boundary data; returns the full nodal vector
// (constrained nodes zero).
Eigen::VectorXcd solve_conforming_primal(const ConformingSystem& sys,
                                         const ScalarFn& f,
                                         const BoundaryFn& g_neumann = nullptr,
                                         const BoundaryFn& g_robin = nullptr);

// Dual solve positioned in the second argument of the form: given free-node
// moments m_i of the dual data against the basis, returns nodal z with
// b(w, z) = (moments applied to w) for every conforming w.
Eigen::VectorXcd solve_conforming_adjoint(const ConformingSystem& sys,
                                          const Eigen::VectorXcd& m_free);

// Smallest singular value of the energy-normalized conforming form matrix,
// the discrete surrogate of the inf-sup constant 1/gamma_st.
double stability_probe(const ConformingSystem& sys);

// Smallest eigenvalue of the real symmetric pencil K w = lambda M w, M SPD.
// Dense below the cap, inverse iteration above it.
double smallest_pencil_eigenvalue(const Eigen::SparseMatrix<double>& K,
                                  const Eigen::SparseMatrix<double>& M);

// Hager-style 1-norm condition estimate using an existing factorization of a
// complex symmetric matrix.
double condest_1norm(const Eigen::SparseMatrix<cplx>& B,
                     Eigen::SparseLU<Eigen::SparseMatrix<cplx>>& lu);

// Largest absolute entry of E^T (rhs - B u): the residual of Galerkin
// orthogonality against the embedded conforming test space.
double conforming_residual(const DgContext& ctx,
                           const Eigen::SparseMatrix<double>& embedding,
                           const Eigen::VectorXcd& rhs, const BrokenField& u_h);

struct ManufacturedCase {
  std::string name;
  CoefficientSet coeffs;
  BoundaryRule boundary;
  std::function<Mesh(int)> mesh_family;  // n subdivisions -> mesh
  ScalarFn u;
  VectorFn grad_u;
  ScalarFn f;
  ScalarFn g_dirichlet;  // null when homogeneous
  BoundaryFn g_neumann;
  BoundaryFn g_robin;
  VectorFn flux;        // A grad u
  ScalarFn div_flux;    // div(A grad u)
  bool smooth = true;
  Eigen::Vector2d corner = Eigen::Vector2d::Zero();  // singular point
};

// Named cases: plane_wave (all-Robin unit square), corner_singular
// (all-Dirichlet L-shape), constant (all-Neumann unit square).
ManufacturedCase manufactured(const std::string& name);

// Convenience: assemble the manufactured right-hand side on a context.
Eigen::VectorXcd manufactured_rhs(const DgContext& ctx,
                                  const ManufacturedCase& mc);

}  // namespace helmdg
