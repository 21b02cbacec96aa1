// SPDX-License-Identifier: Apache-2.0

#include "helmdg/quadrature.hpp"

#include <cmath>

namespace helmdg {

namespace {

// Gauss-Legendre nodes and weights on [-1, 1] by the Golub-Welsch method:
// eigenvalues of the Jacobi matrix are the nodes, squared first eigenvector
// components give the weights.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw InputError("gauss_legendre: n must be >= 1");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    x[i] = es.eigenvalues()(i);
    double v0 = es.eigenvectors()(0, i);
    w[i] = 2.0 * v0 * v0;
  }
}

}  // namespace

EdgeRule edge_rule(int order) {
  if (order < 0) throw InputError("edge_rule: negative order");
  int n = (order + 2) / 2;  // 2n - 1 >= order
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  EdgeRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.points[i] = 0.5 * (x[i] + 1.0);
    rule.weights[i] = 0.5 * w[i];
  }
  rule.exactness = 2 * n - 1;
  return rule;
}

TriangleRule triangle_rule(int order) {
  if (order < 0) throw InputError("triangle_rule: negative order");
  TriangleRule rule;
  if (order <= 1) {
    rule.points = {Eigen::Vector2d(1.0 / 3.0, 1.0 / 3.0)};
    rule.weights = {0.5};
    rule.exactness = 1;
    return rule;
  }
  // Duffy substitution x = u (1 - v), y = v with Jacobian (1 - v). A degree
  // <= order integrand has degree <= order in u and <= order + 1 in v.
  int nu = (order + 2) / 2;
  int nv = (order + 3) / 2;
  std::vector<double> xu, wu, xv, wv;
  gauss_legendre(nu, xu, wu);
  gauss_legendre(nv, xv, wv);
  rule.points.reserve(nu * nv);
  rule.weights.reserve(nu * nv);
  for (int j = 0; j < nv; ++j) {
    double v = 0.5 * (xv[j] + 1.0);
    double wj = 0.5 * wv[j];
    for (int i = 0; i < nu; ++i) {
      double u = 0.5 * (xu[i] + 1.0);
      double wi = 0.5 * wu[i];
      rule.points.emplace_back(u * (1.0 - v), v);
      rule.weights.push_back(wi * wj * (1.0 - v));
    }
  }
  rule.exactness = std::min(2 * nu - 1, 2 * nv - 2);
  return rule;
}

}  // namespace helmdg
