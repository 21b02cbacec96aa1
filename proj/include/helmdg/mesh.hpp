// SPDX-License-Identifier: Apache-2.0
//
// Matching triangular meshes with boundary classification, coefficient
// regions, newest-vertex bisection refinement, and the derived mesh/coefficient
// scalars used by the norms and estimator code.

#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "helmdg/common.hpp"

namespace helmdg {

enum class FaceLabel { Interior, Dirichlet, Neumann, Robin };

struct Face {
  int a = -1;  // vertex ids with a < b
  int b = -1;
  int t_plus = -1;   // owner whose outward normal is n_F (lower id of two)
  int t_minus = -1;  // second owner, -1 on the boundary
  FaceLabel label = FaceLabel::Interior;
  int patch = -1;  // Robin patch id, -1 otherwise
  Eigen::Vector2d normal = Eigen::Vector2d::Zero();  // unit, n_F
  double length = 0.0;
};

// Label assignment for one boundary edge, produced by a BoundaryRule.
struct BoundaryAssignment {
  FaceLabel label = FaceLabel::Dirichlet;
  int patch = -1;
};

// Callback classifying a boundary edge by its midpoint and outward normal.
using BoundaryRule =
    std::function<BoundaryAssignment(const Eigen::Vector2d& midpoint,
                                     const Eigen::Vector2d& outward_normal)>;

struct Mesh {
  std::vector<Eigen::Vector2d> vertices;
  // Triangles are stored positively oriented as (v0, v1, v2) where (v0, v1)
  // is the refinement edge and v2 the newest vertex.
  std::vector<std::array<int, 3>> tris;
  std::vector<int> region;  // coefficient region per triangle
  std::vector<Face> faces;
  // tri_face[t][i] is the face opposite local vertex i of triangle t.
  std::vector<std::array<int, 3>> tri_face;

  // Genealogy relative to the mesh this one was refined from. Empty vectors
  // on a mesh built from scratch.
  std::vector<int> tri_parent;                       // per triangle
  std::vector<std::array<int, 2>> vertex_parents;    // per vertex; {-1,-1} if inherited
  std::vector<int> bface_parent;                     // per face; boundary faces only, -1 otherwise
  int inherited_vertex_count = 0;

  int n_tris() const { return static_cast<int>(tris.size()); }
  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_faces() const { return static_cast<int>(faces.size()); }

  const Eigen::Vector2d& vertex(int t, int local) const {
    return vertices[tris[t][local]];
  }

  double area(int t) const;
  double h(int t) const;    // diameter (longest edge)
  double rho(int t) const;  // inradius
  Eigen::Matrix2d jacobian(int t) const;  // columns v1-v0, v2-v0

  // Inverse affine map of triangle t applied to a physical point.
  Eigen::Vector2d to_reference(int t, const Eigen::Vector2d& x) const;
  Eigen::Vector2d to_physical(int t, const Eigen::Vector2d& xi) const;

  bool has_robin_faces() const;
  bool has_label(FaceLabel l) const;
};

struct CoefficientSet {
  double omega = 1.0;
  std::vector<double> mu;                // per region, > 0
  std::vector<Eigen::Matrix2d> A;        // per region, SPD
  std::vector<double> gamma;             // per Robin patch, > 0

  // Smallest eigenvalue of A in the given region.
  double alpha(int region) const;
  void validate() const;
};

// Per-mesh derived coefficient data shared by the operator, norm, and
// estimator assembly paths.
struct MeshScalars {
  double h = 0.0;       // max over K of h_K
  double kappa = 0.0;   // max over K of h_K / rho_K
  std::vector<double> h_K;
  std::vector<double> area_K;
  std::vector<double> alpha_K;
  std::vector<double> mu_K;
  std::vector<double> theta_K;    // sqrt(alpha_K / mu_K)
  std::vector<double> alpha_F;    // all faces; interior: max of the two neighbors
  std::vector<double> gamma_F;    // Robin faces, 0 otherwise
  std::vector<double> theta_F;    // alpha_F / gamma_F on Robin faces, 0 otherwise
  // Maxima of omega h_K / theta_K over elements and omega h_F / theta_F over
  // Robin faces. The face maximum is 0 when there are no Robin faces, so that
  // max(1, .) terms reduce to 1.
  double omega_h_theta_K_star = 0.0;
  double omega_h_theta_F_star = 0.0;
};

// Builds a mesh from raw arrays. Triangles are re-oriented to be CCW and
// rotated so the refinement edge is the longest edge (ties broken by the
// lexicographically smallest sorted vertex pair) unless
// normalize_refinement_edges is false, in which case the stored (v0, v1)
// pair of each triangle is kept as the refinement edge.
Mesh build_mesh(std::vector<Eigen::Vector2d> vertices,
                std::vector<std::array<int, 3>> triangles,
                const BoundaryRule& boundary_spec,
                std::vector<int> region_of_triangle = {},
                bool normalize_refinement_edges = true);

// Variant with explicit per-edge boundary labels (used by the file reader).
struct BoundaryEdgeSpec {
  int a = -1;
  int b = -1;
  FaceLabel label = FaceLabel::Dirichlet;
  int patch = -1;
};
Mesh build_mesh(std::vector<Eigen::Vector2d> vertices,
                std::vector<std::array<int, 3>> triangles,
                const std::vector<BoundaryEdgeSpec>& boundary_edges,
                std::vector<int> region_of_triangle = {},
                bool normalize_refinement_edges = true);

// Newest-vertex bisection with closure. Every face of a marked triangle is
// split, and the closure keeps the triangulation matching. Children inherit
// region and boundary labels; genealogy fields of the result point into
// mesh. Throws InputError on an empty or out-of-range mark set.
Mesh refine(const Mesh& mesh, const std::vector<int>& marked);

Mesh refine_uniform(const Mesh& mesh);

MeshScalars mesh_scalars(const Mesh& mesh, const CoefficientSet& coeffs);

// Structured generators used by tests and the CLI presets.
Mesh unit_square_mesh(int n, const BoundaryRule& boundary_spec);
// L-shaped domain (-1,1)^2 minus the closed quadrant [0,1] x [-1,0];
// n cells per unit side.
Mesh l_shape_mesh(int n, const BoundaryRule& boundary_spec);

BoundaryRule all_faces(FaceLabel label, int patch = -1);

// Text format: "helmdg-mesh v1" header, vertex block, triangle block with
// region ids, boundary edge block with labels and patch ids.
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);
void write_mesh_file(const std::string& path, const Mesh& mesh);
Mesh read_mesh_file(const std::string& path);

}  // namespace helmdg
