// SPDX-License-Identifier: Apache-2.0
//
// Polynomial bases on the reference triangle: an L2-orthonormal modal basis
// for broken spaces and a lattice-node Lagrange basis for conforming spaces.

#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "helmdg/common.hpp"

namespace helmdg {

// Common machinery: each basis function is a linear combination of monomials
// x^a y^b, basis_i = sum_j coef(i, j) * mono_j.
struct ScalarBasis {
  int degree = 0;
  int dim = 0;
  std::vector<std::array<int, 2>> exponents;  // (a, b) per monomial
  Eigen::MatrixXd coef;                       // dim x dim

  Eigen::VectorXd eval(const Eigen::Vector2d& xi) const;
  // Rows are basis functions, columns the two reference derivatives.
  Eigen::MatrixXd eval_grad(const Eigen::Vector2d& xi) const;
  // Columns: d2/dx2, d2/dxdy, d2/dy2.
  Eigen::MatrixXd eval_hess(const Eigen::Vector2d& xi) const;
};

// Orthonormal with respect to L2 on the reference triangle, built from the
// exact monomial Gram matrix by Cholesky. On an affine element the physical
// mass matrix is |det J| times the identity.
ScalarBasis modal_basis(int degree);

struct LagrangeBasis : ScalarBasis {
  std::vector<Eigen::Vector2d> nodes;  // lattice (i/p, j/p), i + j <= p
  std::array<int, 3> vertex_node;      // node at local vertex k
  // Interior nodes of local edge k (the edge opposite vertex k), ordered
  // from vertex (k+1)%3 towards vertex (k+2)%3.
  std::array<std::vector<int>, 3> edge_nodes;
  std::vector<int> interior_nodes;
};

// Nodal basis on the uniform lattice, basis_i(node_k) = delta_ik.
LagrangeBasis lagrange_basis(int degree);

// Exact integral of x^a y^b over the reference triangle.
double reference_monomial_integral(int a, int b);

}  // namespace helmdg
