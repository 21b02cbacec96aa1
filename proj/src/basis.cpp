// SPDX-License-Identifier: Apache-2.0

#include "helmdg/basis.hpp"

#include <cmath>

namespace helmdg {

namespace {

// Degrees are capped so every factorial in the monomial Gram matrix stays
// exactly representable in a double (18! < 2^53).
constexpr int kMaxDegree = 8;

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

std::vector<std::array<int, 2>> monomial_exponents(int degree) {
  std::vector<std::array<int, 2>> exps;
  exps.reserve((degree + 1) * (degree + 2) / 2);
  for (int d = 0; d <= degree; ++d) {
    for (int a = d; a >= 0; --a) exps.push_back({a, d - a});
  }
  return exps;
}

double ipow(double x, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= x;
  return r;
}

}  // namespace

double reference_monomial_integral(int a, int b) {
  return factorial(a) * factorial(b) / factorial(a + b + 2);
}

Eigen::VectorXd ScalarBasis::eval(const Eigen::Vector2d& xi) const {
  Eigen::VectorXd mono(dim);
  for (int j = 0; j < dim; ++j) {
    mono(j) = ipow(xi.x(), exponents[j][0]) * ipow(xi.y(), exponents[j][1]);
  }
  return coef * mono;
}

Eigen::MatrixXd ScalarBasis::eval_grad(const Eigen::Vector2d& xi) const {
  Eigen::MatrixXd dmono(dim, 2);
  for (int j = 0; j < dim; ++j) {
    int a = exponents[j][0], b = exponents[j][1];
    dmono(j, 0) = a == 0 ? 0.0 : a * ipow(xi.x(), a - 1) * ipow(xi.y(), b);
    dmono(j, 1) = b == 0 ? 0.0 : b * ipow(xi.x(), a) * ipow(xi.y(), b - 1);
  }
  return coef * dmono;
}

Eigen::MatrixXd ScalarBasis::eval_hess(const Eigen::Vector2d& xi) const {
  Eigen::MatrixXd d2(dim, 3);
  for (int j = 0; j < dim; ++j) {
    int a = exponents[j][0], b = exponents[j][1];
    d2(j, 0) = a < 2 ? 0.0
                     : a * (a - 1) * ipow(xi.x(), a - 2) * ipow(xi.y(), b);
    d2(j, 1) = (a == 0 || b == 0)
                   ? 0.0
                   : a * b * ipow(xi.x(), a - 1) * ipow(xi.y(), b - 1);
    d2(j, 2) = b < 2 ? 0.0
                     : b * (b - 1) * ipow(xi.x(), a) * ipow(xi.y(), b - 2);
  }
  return coef * d2;
}

ScalarBasis modal_basis(int degree) {
  if (degree < 0) throw InputError("modal_basis: negative degree");
  if (degree > kMaxDegree) {
    throw CapabilityError("modal_basis: degree above supported table");
  }
  ScalarBasis basis;
  basis.degree = degree;
  basis.exponents = monomial_exponents(degree);
  basis.dim = static_cast<int>(basis.exponents.size());
  Eigen::MatrixXd G(basis.dim, basis.dim);
  for (int j = 0; j < basis.dim; ++j) {
    for (int k = 0; k < basis.dim; ++k) {
      G(j, k) = reference_monomial_integral(
          basis.exponents[j][0] + basis.exponents[k][0],
          basis.exponents[j][1] + basis.exponents[k][1]);
    }
  }
  // One Cholesky pass loses digits to the conditioning of the monomial Gram
  // matrix at higher degrees; two refinement passes against the exact Gram
  // restore orthonormality to machine precision.
  basis.coef = Eigen::MatrixXd::Identity(basis.dim, basis.dim);
  for (int pass = 0; pass < 3; ++pass) {
    Eigen::MatrixXd Gb = basis.coef * G * basis.coef.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(Gb);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("modal_basis: monomial Gram matrix not SPD");
    }
    Eigen::MatrixXd L = llt.matrixL();
    basis.coef = L.triangularView<Eigen::Lower>().solve(basis.coef);
  }
  return basis;
}

LagrangeBasis lagrange_basis(int degree) {
  if (degree < 1) throw InputError("lagrange_basis: degree must be >= 1");
  if (degree > kMaxDegree) {
    throw CapabilityError("lagrange_basis: degree above supported table");
  }
  LagrangeBasis basis;
  basis.degree = degree;
  basis.exponents = monomial_exponents(degree);
  basis.dim = static_cast<int>(basis.exponents.size());
  int p = degree;
  auto lattice_index = [p](int i, int j) {
    return j * (p + 1) - j * (j - 1) / 2 + i;
  };
  basis.nodes.resize(basis.dim);
  for (int j = 0; j <= p; ++j) {
    for (int i = 0; i <= p - j; ++i) {
      basis.nodes[lattice_index(i, j)] =
          Eigen::Vector2d(double(i) / p, double(j) / p);
    }
  }
  basis.vertex_node = {lattice_index(0, 0), lattice_index(p, 0),
                       lattice_index(0, p)};
  for (int s = 1; s < p; ++s) {
    basis.edge_nodes[0].push_back(lattice_index(p - s, s));  // v1 -> v2
    basis.edge_nodes[1].push_back(lattice_index(0, p - s));  // v2 -> v0
    basis.edge_nodes[2].push_back(lattice_index(s, 0));      // v0 -> v1
  }
  for (int j = 1; j < p; ++j) {
    for (int i = 1; i + j < p; ++i) {
      basis.interior_nodes.push_back(lattice_index(i, j));
    }
  }

  Eigen::MatrixXd V(basis.dim, basis.dim);
  for (int k = 0; k < basis.dim; ++k) {
    for (int j = 0; j < basis.dim; ++j) {
      V(k, j) = ipow(basis.nodes[k].x(), basis.exponents[j][0]) *
                ipow(basis.nodes[k].y(), basis.exponents[j][1]);
    }
  }
  // coef * V^T = I so that basis_i(node_k) = delta_ik.
  basis.coef = V.transpose().partialPivLu().solve(
      Eigen::MatrixXd::Identity(basis.dim, basis.dim));
  return basis;
}

}  // namespace helmdg
