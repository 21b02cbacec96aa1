// SPDX-License-Identifier: Apache-2.0
//
// Quadrature on the reference triangle {x, y >= 0, x + y <= 1} and the
// reference edge [0, 1]. Rules of arbitrary exactness with positive weights.

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "helmdg/common.hpp"

namespace helmdg {

struct EdgeRule {
  std::vector<double> points;   // in [0, 1]
  std::vector<double> weights;  // sum to 1
  int exactness = 0;
};

struct TriangleRule {
  std::vector<Eigen::Vector2d> points;  // inside the reference triangle
  std::vector<double> weights;          // positive, sum to 1/2
  int exactness = 0;
};

// Gauss-Legendre rule on [0, 1] exact for polynomials of degree <= order.
EdgeRule edge_rule(int order);

// Rule on the reference triangle exact for total degree <= order. Orders
// <= 1 use the centroid rule; higher orders use a conical product of
// Gauss-Legendre rules, which keeps all weights positive at any order.
TriangleRule triangle_rule(int order);

}  // namespace helmdg
