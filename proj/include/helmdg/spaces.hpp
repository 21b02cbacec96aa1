// SPDX-License-Identifier: Apache-2.0
//
// Discrete spaces over a mesh: elementwise (broken) modal spaces, globally
// continuous Lagrange spaces with Dirichlet constraints, and BDM-type
// div-conforming spaces with Neumann constraints. Fields are coefficient
// vectors over these spaces together with evaluation helpers.

#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "helmdg/basis.hpp"
#include "helmdg/mesh.hpp"
#include "helmdg/quadrature.hpp"

namespace helmdg {

using ScalarFn = std::function<cplx(const Eigen::Vector2d&)>;
using VectorFn = std::function<Eigen::Vector2cd(const Eigen::Vector2d&)>;
// Boundary data evaluated at a point together with the outward unit normal.
using BoundaryFn =
    std::function<cplx(const Eigen::Vector2d&, const Eigen::Vector2d&)>;

// Discontinuous piecewise polynomials, one modal block per triangle.
struct BrokenSpace {
  const Mesh* mesh = nullptr;
  int degree = 0;
  ScalarBasis basis;

  int block() const { return basis.dim; }
  int dim() const { return mesh->n_tris() * basis.dim; }
  int offset(int t) const { return t * basis.dim; }
};

BrokenSpace make_broken_space(const Mesh& mesh, int degree);

struct BrokenField {
  const BrokenSpace* space = nullptr;
  Eigen::VectorXcd coef;

  cplx eval(int t, const Eigen::Vector2d& xi) const;
  // Physical gradient (the element map is affine).
  Eigen::Vector2cd grad(int t, const Eigen::Vector2d& xi) const;
};

// Elementwise L2 projection of a smooth function.
BrokenField project_broken(const BrokenSpace& space, const ScalarFn& fn,
                           int quad_order = -1);

// Continuous Lagrange space. Nodes are numbered vertices first, then
// (degree - 1) nodes per face ordered from the lower-id towards the
// higher-id endpoint, then element interiors. Fields over this space are
// full nodal vectors; the Dirichlet constraint is kept as a mask.
struct ConformingSpace {
  const Mesh* mesh = nullptr;
  int degree = 0;
  LagrangeBasis basis;
  int n_nodes = 0;
  std::vector<std::vector<int>> element_nodes;  // per tri, local -> global
  std::vector<Eigen::Vector2d> node_pos;
  std::vector<char> constrained;  // nodes on Dirichlet faces
  std::vector<int> free_index;    // node -> free slot, -1 when constrained
  int n_free = 0;

  cplx eval(int t, const Eigen::Vector2d& xi,
            const Eigen::VectorXcd& nodal) const;
  Eigen::Vector2cd grad(int t, const Eigen::Vector2d& xi,
                        const Eigen::VectorXcd& nodal) const;
};

ConformingSpace make_conforming_space(const Mesh& mesh, int degree);

// Nodal interpolation (all nodes, including constrained ones).
Eigen::VectorXcd interpolate_conforming(const ConformingSpace& space,
                                        const ScalarFn& fn);

// Sparse embedding of conforming nodal vectors into the broken space of the
// same degree on the same mesh: coef_broken = E * nodal.
Eigen::SparseMatrix<double> conforming_embedding(const ConformingSpace& conf,
                                                 const BrokenSpace& broken);

// BDM-type div-conforming space of vector polynomials of total degree
// <= degree. Global dofs: per face, degree + 1 moments of the normal trace
// against orthonormal Legendre polynomials in the global face
// parameterization (lower-id vertex towards higher-id vertex, normal n_F);
// per element, degree^2 - 1 interior moments. Normal-trace continuity holds
// because both neighbors see the same global face dofs.
struct DivConformingSpace {
  const Mesh* mesh = nullptr;
  int degree = 0;
  int face_dofs = 0;      // degree + 1
  int interior_dofs = 0;  // degree^2 - 1
  ScalarBasis scalar;     // monomial scaffolding of one component
  // Element basis: columns are the coefficients of the dual basis in the
  // vector monomial scaffolding (x-block first, then y-block).
  std::vector<Eigen::MatrixXd> elem_coef;
  std::vector<std::vector<int>> elem_dofs;  // per tri, local -> global
  std::vector<char> constrained;            // face dofs on Neumann faces
  std::vector<int> free_index;
  int n_free = 0;

  int dim() const {
    return mesh->n_faces() * face_dofs + mesh->n_tris() * interior_dofs;
  }
  Eigen::Vector2cd eval(int t, const Eigen::Vector2d& xi,
                        const Eigen::VectorXcd& dofs) const;
  cplx div(int t, const Eigen::Vector2d& xi,
           const Eigen::VectorXcd& dofs) const;
};

DivConformingSpace make_div_space(const Mesh& mesh, int degree);

// Interpolation by applying the dof functionals with quadrature.
Eigen::VectorXcd interpolate_div(const DivConformingSpace& space,
                                 const VectorFn& fn);

// Reference coordinate in triangle t of the point at global parameter s of
// face f (s = 0 at the lower-id endpoint). t must be an owner of f.
Eigen::Vector2d face_reference_point(const Mesh& mesh, int f, int t, double s);
int local_face_index(const Mesh& mesh, int t, int f);

// Prolongation of a broken field onto the broken space of a mesh refined
// from the field's mesh (fine_space's mesh must carry tri_parent into the
// coarse mesh). Exact when the fine degree is at least the coarse degree.
BrokenField prolong_broken(const BrokenField& coarse,
                           const BrokenSpace& fine_space);

// Evaluation of a coarse conforming field in the nodes of a conforming space
// on a refined mesh; exact for nested meshes.
Eigen::VectorXcd prolong_conforming(const ConformingSpace& coarse,
                                    const Eigen::VectorXcd& nodal,
                                    const ConformingSpace& fine);

// Text field format "helmdg-field v1": kind, degree, count, then one
// "re im" line per coefficient.
void write_field(std::ostream& os, const std::string& kind, int degree,
                 const Eigen::VectorXcd& coef);
struct FieldData {
  std::string kind;
  int degree = 0;
  Eigen::VectorXcd coef;
};
FieldData read_field(std::istream& is);
void write_field_file(const std::string& path, const std::string& kind,
                      int degree, const Eigen::VectorXcd& coef);
FieldData read_field_file(const std::string& path);

}  // namespace helmdg
