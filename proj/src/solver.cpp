// SPDX-License-Identifier: Apache-2.0

#include "helmdg/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>
#include <cmath>

namespace helmdg {

namespace {

constexpr double kCondLimit = 1e12;

double one_norm(const Eigen::SparseMatrix<cplx>& m) {
  double best = 0.0;
  for (int k = 0; k < m.outerSize(); ++k) {
    double col = 0.0;
    for (Eigen::SparseMatrix<cplx>::InnerIterator it(m, k); it; ++it) {
      col += std::abs(it.value());
    }
    best = std::max(best, col);
  }
  return best;
}

}  // namespace

double condest_1norm(const Eigen::SparseMatrix<cplx>& B,
                     Eigen::SparseLU<Eigen::SparseMatrix<cplx>>& lu) {
  int n = B.rows();
  if (n == 0) return 0.0;
  Eigen::VectorXcd x = Eigen::VectorXcd::Constant(n, cplx(1.0 / n, 0.0));
  double est = 0.0;
  int last_j = -1;
  for (int iter = 0; iter < 5; ++iter) {
    Eigen::VectorXcd y = lu.solve(x);
    est = y.cwiseAbs().sum();
    Eigen::VectorXcd xi(n);
    for (int i = 0; i < n; ++i) {
      double a = std::abs(y(i));
      xi(i) = a > 0.0 ? y(i) / a : cplx(1.0, 0.0);
    }
    // B is symmetric, so B^{-H} xi = conj(B^{-1} conj(xi)).
    Eigen::VectorXcd z = lu.solve(xi.conjugate()).conjugate();
    int j = 0;
    double zmax = z.cwiseAbs().maxCoeff(&j);
    if (zmax <= (z.adjoint() * x).real().value() + 1e-14 * est || j == last_j) {
      break;
    }
    x.setZero();
    x(j) = 1.0;
    last_j = j;
  }
  return est * one_norm(B);
}

BrokenField solve_ipdg(const DgContext& ctx, const Eigen::VectorXcd& rhs,
                       SolveInfo* info) {
  Eigen::SparseMatrix<cplx> B = helmholtz_matrix(ctx);
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
  lu.compute(B);
  if (lu.info() != Eigen::Success) {
    throw NumericalError("Helmholtz factorization failed (matrix singular?)");
  }
  double cond = condest_1norm(B, lu);
  if (cond > kCondLimit) {
    throw NumericalError("Helmholtz system near singular", cond);
  }
  Eigen::VectorXcd x = lu.solve(rhs);
  double rhs_norm = rhs.norm();
  double res = (B * x - rhs).norm() / (rhs_norm > 0.0 ? rhs_norm : 1.0);
  if (info) {
    info->residual_rel = res;
    info->condition_estimate = cond;
  }
  BrokenField u;
  u.space = &ctx.scalar;
  u.coef = x;
  return u;
}

ConformingSystem assemble_conforming(const ConformingSpace& space,
                                     const CoefficientSet& coeffs) {
  if (space.n_free == 0) {
    throw InputError("conforming solve requires free nodes");
  }
  const Mesh& mesh = *space.mesh;
  ConformingSystem sys;
  sys.space = &space;
  sys.coeffs = coeffs;
  int nloc = space.basis.dim;
  int quad = 2 * space.degree + 2;
  TriangleRule vol = triangle_rule(quad);
  EdgeRule er = edge_rule(quad);

  std::vector<Eigen::Triplet<double>> tm, tr, tk;
  for (int t = 0; t < mesh.n_tris(); ++t) {
    const Eigen::Matrix2d& A = coeffs.A[mesh.region[t]];
    double mu = coeffs.mu[mesh.region[t]];
    double detJ = 2.0 * mesh.area(t);
    Eigen::Matrix2d JinvT = mesh.jacobian(t).inverse().transpose();
    Eigen::MatrixXd me = Eigen::MatrixXd::Zero(nloc, nloc);
    Eigen::MatrixXd ke = Eigen::MatrixXd::Zero(nloc, nloc);
    for (size_t q = 0; q < vol.points.size(); ++q) {
      Eigen::VectorXd v = space.basis.eval(vol.points[q]);
      Eigen::MatrixXd gref = space.basis.eval_grad(vol.points[q]);
      Eigen::MatrixXd gphys(nloc, 2);
      for (int i = 0; i < nloc; ++i) {
        gphys.row(i) = (JinvT * gref.row(i).transpose()).transpose();
      }
      double w = vol.weights[q] * detJ;
      me += (w * mu) * v * v.transpose();
      ke += w * gphys * A.transpose() * gphys.transpose();
    }
    const std::vector<int>& nodes = space.element_nodes[t];
    for (int i = 0; i < nloc; ++i) {
      int gi = space.free_index[nodes[i]];
      if (gi < 0) continue;
      for (int j = 0; j < nloc; ++j) {
        int gj = space.free_index[nodes[j]];
        if (gj < 0) continue;
        tm.emplace_back(gi, gj, me(i, j));
        tk.emplace_back(gi, gj, ke(i, j));
      }
    }
  }
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const Face& face = mesh.faces[f];
    if (face.label != FaceLabel::Robin) continue;
    double gam = coeffs.gamma[face.patch];
    int t = face.t_plus;
    const std::vector<int>& nodes = space.element_nodes[t];
    Eigen::MatrixXd fe = Eigen::MatrixXd::Zero(nloc, nloc);
    for (size_t q = 0; q < er.points.size(); ++q) {
      Eigen::VectorXd v = space.basis.eval(
          face_reference_point(mesh, f, t, er.points[q]));
      fe += (er.weights[q] * face.length * gam) * v * v.transpose();
    }
    for (int i = 0; i < nloc; ++i) {
      int gi = space.free_index[nodes[i]];
      if (gi < 0) continue;
      for (int j = 0; j < nloc; ++j) {
        int gj = space.free_index[nodes[j]];
        if (gj < 0) continue;
        tr.emplace_back(gi, gj, fe(i, j));
      }
    }
  }
  int n = space.n_free;
  sys.M_mu.resize(n, n);
  sys.M_mu.setFromTriplets(tm.begin(), tm.end());
  sys.R_gamma.resize(n, n);
  sys.R_gamma.setFromTriplets(tr.begin(), tr.end());
  sys.K_A.resize(n, n);
  sys.K_A.setFromTriplets(tk.begin(), tk.end());
  double w = coeffs.omega;
  sys.B = (-w * w) * sys.M_mu.cast<cplx>() +
          cplx(0.0, -w) * sys.R_gamma.cast<cplx>() + sys.K_A.cast<cplx>();
  sys.lu = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<cplx>>>();
  sys.lu->compute(sys.B);
  if (sys.lu->info() != Eigen::Success) {
    throw NumericalError("conforming factorization failed");
  }
  sys.condition_estimate = condest_1norm(sys.B, *sys.lu);
  if (sys.condition_estimate > kCondLimit) {
    throw NumericalError("conforming system near singular",
                         sys.condition_estimate);
  }
  return sys;
}

Eigen::VectorXcd solve_conforming_primal(const ConformingSystem& sys,
                                         const ScalarFn& f,
                                         const BoundaryFn& g_neumann,
                                         const BoundaryFn& g_robin) {
  const ConformingSpace& space = *sys.space;
  const Mesh& mesh = *space.mesh;
  int nloc = space.basis.dim;
  int quad = 2 * space.degree + 4;
  TriangleRule vol = triangle_rule(quad);
  EdgeRule er = edge_rule(quad);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(space.n_free);
  if (f) {
    for (int t = 0; t < mesh.n_tris(); ++t) {
      double detJ = 2.0 * mesh.area(t);
      const std::vector<int>& nodes = space.element_nodes[t];
      for (size_t q = 0; q < vol.points.size(); ++q) {
        cplx fv = f(mesh.to_physical(t, vol.points[q]));
        Eigen::VectorXd v = space.basis.eval(vol.points[q]);
        double w = vol.weights[q] * detJ;
        for (int i = 0; i < nloc; ++i) {
          int gi = space.free_index[nodes[i]];
          if (gi >= 0) rhs(gi) += w * fv * v(i);
        }
      }
    }
  }
  for (int fc = 0; fc < mesh.n_faces(); ++fc) {
    const Face& face = mesh.faces[fc];
    const BoundaryFn* g = nullptr;
    if (face.label == FaceLabel::Neumann && g_neumann) g = &g_neumann;
    if (face.label == FaceLabel::Robin && g_robin) g = &g_robin;
    if (!g) continue;
    int t = face.t_plus;
    const std::vector<int>& nodes = space.element_nodes[t];
    for (size_t q = 0; q < er.points.size(); ++q) {
      Eigen::Vector2d xi = face_reference_point(mesh, fc, t, er.points[q]);
      Eigen::Vector2d x = mesh.to_physical(t, xi);
      cplx gv = (*g)(x, face.normal);
      Eigen::VectorXd v = space.basis.eval(xi);
      double w = er.weights[q] * face.length;
      for (int i = 0; i < nloc; ++i) {
        int gi = space.free_index[nodes[i]];
        if (gi >= 0) rhs(gi) += w * gv * v(i);
      }
    }
  }
  Eigen::VectorXcd xf = sys.lu->solve(rhs);
  Eigen::VectorXcd nodal = Eigen::VectorXcd::Zero(space.n_nodes);
  for (int g = 0; g < space.n_nodes; ++g) {
    int i = space.free_index[g];
    if (i >= 0) nodal(g) = xf(i);
  }
  return nodal;
}

Eigen::VectorXcd solve_conforming_adjoint(const ConformingSystem& sys,
                                          const Eigen::VectorXcd& m_free) {
  // b(w, z) = sum_i conj(w_i) m_i for all w reduces to B conj(z) = conj(m).
  Eigen::VectorXcd zf = sys.lu->solve(m_free.conjugate()).conjugate();
  const ConformingSpace& space = *sys.space;
  Eigen::VectorXcd nodal = Eigen::VectorXcd::Zero(space.n_nodes);
  for (int g = 0; g < space.n_nodes; ++g) {
    int i = space.free_index[g];
    if (i >= 0) nodal(g) = zf(i);
  }
  return nodal;
}

double stability_probe(const ConformingSystem& sys) {
  int n = sys.space->n_free;
  double w = sys.coeffs.omega;
  Eigen::SparseMatrix<double> ge =
      w * w * sys.M_mu + w * sys.R_gamma + sys.K_A;
  if (n <= 2000) {
    Eigen::MatrixXd g = Eigen::MatrixXd(ge);
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (g + g.transpose()));
    if (llt.info() != Eigen::Success) {
      throw NumericalError("energy Gram not positive definite");
    }
    Eigen::MatrixXcd lc = Eigen::MatrixXd(llt.matrixL()).cast<cplx>();
    Eigen::MatrixXcd x =
        lc.triangularView<Eigen::Lower>().solve(Eigen::MatrixXcd(sys.B));
    Eigen::MatrixXcd normalized =
        lc.triangularView<Eigen::Lower>().solve(x.transpose()).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(normalized);
    return svd.singularValues().minCoeff();
  }
  // The smallest singular value solves the pencil (B^H G^{-1} B) x =
  // sigma^2 G x; inverse iteration applies B^{-1} G B^{-H} G, with
  // B^{-H} y = conj(B^{-1} conj(y)) through the symmetric factorization.
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> gfac(ge);
  if (gfac.info() != Eigen::Success) {
    throw NumericalError("energy Gram not positive definite");
  }
  auto apply_g = [&](const Eigen::VectorXcd& v) {
    return (ge * v.real()).cast<cplx>() +
           cplx(0.0, 1.0) * (ge * v.imag()).cast<cplx>();
  };
  Pcg32 rng(17);
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.unit_disc();
  v /= v.norm();
  double sigma = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::VectorXcd t1 = apply_g(v);
    Eigen::VectorXcd t2 = sys.lu->solve(t1.conjugate()).conjugate();
    Eigen::VectorXcd next = sys.lu->solve(apply_g(t2));
    next /= next.norm();
    Eigen::VectorXcd bv = sys.B * next;
    Eigen::VectorXcd gs = (gfac.solve(bv.real())).cast<cplx>() +
                          cplx(0.0, 1.0) * (gfac.solve(bv.imag())).cast<cplx>();
    double num = (bv.adjoint() * gs).real().value();
    double den = (next.adjoint() * apply_g(next)).real().value();
    double est = std::sqrt(std::max(0.0, num / den));
    if (iter > 3 && std::abs(est - sigma) <= 1e-8 * est) {
      sigma = est;
      break;
    }
    sigma = est;
    v = next;
  }
  return sigma;
}

double smallest_pencil_eigenvalue(const Eigen::SparseMatrix<double>& K,
                                  const Eigen::SparseMatrix<double>& M) {
  int n = K.rows();
  if (n == 0) throw InputError("empty pencil");
  if (n <= 2500) {
    Eigen::MatrixXd kd = Eigen::MatrixXd(K);
    Eigen::MatrixXd md = Eigen::MatrixXd(M);
    kd = 0.5 * (kd + kd.transpose()).eval();
    md = 0.5 * (md + md.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(kd, md);
    if (ges.info() != Eigen::Success) {
      throw NumericalError("pencil eigensolve failed");
    }
    return ges.eigenvalues().minCoeff();
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
  if (ldlt.info() != Eigen::Success) {
    throw NumericalError("pencil factorization failed");
  }
  Pcg32 rng(23);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.uniform(-1.0, 1.0);
  v /= v.norm();
  double lambda = 0.0;
  for (int iter = 0; iter < 500; ++iter) {
    Eigen::VectorXd y = ldlt.solve(M * v);
    double raleigh = v.dot(M * v) / y.dot(M * v);
    y /= y.norm();
    if (iter > 5 && std::abs(raleigh - lambda) <= 1e-10 * std::abs(raleigh)) {
      lambda = raleigh;
      break;
    }
    lambda = raleigh;
    v = y;
  }
  return lambda;
}

double conforming_residual(const DgContext& ctx,
                           const Eigen::SparseMatrix<double>& embedding,
                           const Eigen::VectorXcd& rhs,
                           const BrokenField& u_h) {
  Eigen::SparseMatrix<cplx> B = helmholtz_matrix(ctx);
  Eigen::VectorXcd r = rhs - B * u_h.coef;
  Eigen::VectorXcd proj = embedding.transpose().cast<cplx>() * r;
  return proj.size() > 0 ? proj.cwiseAbs().maxCoeff() : 0.0;
}

Eigen::VectorXcd manufactured_rhs(const DgContext& ctx,
                                  const ManufacturedCase& mc) {
  return assemble_rhs(ctx, mc.f, mc.g_neumann, mc.g_robin, mc.g_dirichlet);
}

}  // namespace helmdg
