// SPDX-License-Identifier: Apache-2.0
//
// Sampled approximation factors. Dual problems are solved on a reference
// discretization one uniform refinement finer with degree p + 1; projection
// residuals are measured in the dagger norms of the working mesh, so the
// fine-space Gram matrices below all carry coarse-mesh weights.

#include "helmdg/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "helmdg/dg_operators.hpp"

namespace helmdg {

namespace {

constexpr int kDenseEigCap = 1500;
constexpr int kPowerCap = 200;
constexpr int kPowerBlock = 4;
constexpr double kPowerTol = 1e-6;
constexpr double kPowerResTol = 2e-3;

Eigen::MatrixXd reference_mass(const ScalarBasis& basis) {
  TriangleRule rule = triangle_rule(2 * basis.degree + 2);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(basis.dim, basis.dim);
  for (size_t q = 0; q < rule.points.size(); ++q) {
    Eigen::VectorXd v = basis.eval(rule.points[q]);
    M += rule.weights[q] * v * v.transpose();
  }
  return M;
}

// Orthonormal Legendre values on [0, 1], orders 0..degree.
Eigen::VectorXd legendre01(int degree, double s) {
  Eigen::VectorXd raw(degree + 1);
  double x = 2.0 * s - 1.0;
  for (int k = 0; k <= degree; ++k) {
    if (k == 0) {
      raw(k) = 1.0;
    } else if (k == 1) {
      raw(k) = x;
    } else {
      raw(k) =
          ((2.0 * k - 1.0) * x * raw(k - 1) - (k - 1.0) * raw(k - 2)) / k;
    }
  }
  for (int k = 0; k <= degree; ++k) raw(k) *= std::sqrt(2.0 * k + 1.0);
  return raw;
}

// Values of the local div-conforming basis of element t at a reference point.
void div_basis_values(const DivConformingSpace& space, int t,
                      const Eigen::Vector2d& xi, Eigen::VectorXd& bx,
                      Eigen::VectorXd& by) {
  int nm = space.scalar.dim;
  Eigen::VectorXd sv = space.scalar.eval(xi);
  const Eigen::MatrixXd& c = space.elem_coef[t];
  bx = c.topRows(nm).transpose() * sv;
  by = c.bottomRows(nm).transpose() * sv;
}

Eigen::SparseMatrix<double> scatter_matrix(const std::vector<int>& free_index,
                                           int n_full, int n_free) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < n_full; ++i) {
    if (free_index[i] >= 0) trip.emplace_back(i, free_index[i], 1.0);
  }
  Eigen::SparseMatrix<double> S(n_full, n_free);
  S.setFromTriplets(trip.begin(), trip.end());
  return S;
}

void push_block(std::vector<Eigen::Triplet<double>>& out, int r0, int c0,
                const Eigen::MatrixXd& block) {
  for (int i = 0; i < block.rows(); ++i) {
    for (int j = 0; j < block.cols(); ++j) {
      if (block(i, j) != 0.0) out.emplace_back(r0 + i, c0 + j, block(i, j));
    }
  }
}

// Residual of the G-orthogonal projection onto range(P): applies
// G - G P (P^T G P)^{-1} P^T G. An empty projection space degenerates to G.
struct ResidualForm {
  const Eigen::SparseMatrix<double>* G = nullptr;
  Eigen::SparseMatrix<double> P;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> core;
  bool has_space = false;

  void init(const Eigen::SparseMatrix<double>& gram,
            const Eigen::SparseMatrix<double>& basis) {
    G = &gram;
    P = basis;
    has_space = P.cols() > 0;
    if (has_space) {
      Eigen::SparseMatrix<double> K =
          Eigen::SparseMatrix<double>(P.transpose() * (*G * P));
      core.compute(K);
      if (core.info() != Eigen::Success) {
        throw NumericalError("projection Gram factorization failed");
      }
    }
  }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const {
    Eigen::VectorXcd r = *G * v;
    if (has_space) {
      Eigen::VectorXcd m = P.transpose() * r;
      Eigen::VectorXcd c(m.size());
      c.real() = core.solve(m.real().eval());
      c.imag() = core.solve(m.imag().eval());
      r -= *G * (P * c);
    }
    return r;
  }
};

struct EigResult {
  double lambda = 0.0;
  bool converged = true;
  int iterations = 0;
};

// Largest eigenvalue of the Hermitian pencil (T, M) by block subspace
// iteration on M^{-1} T with Rayleigh-Ritz extraction. A block rides out
// clustered leading eigenvalues, where the single-vector power method
// stagnates below its tolerance.
template <typename ApplyT>
EigResult power_max(const ApplyT& apply_T,
                    const Eigen::SparseMatrix<double>& M, int n,
                    unsigned seed) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> mfac(M);
  if (mfac.info() != Eigen::Success) {
    throw NumericalError("mass factorization failed in power iteration");
  }
  const int b = std::min(kPowerBlock, n);
  Pcg32 rng(seed);
  Eigen::MatrixXcd Y(n, b);
  for (int j = 0; j < b; ++j)
    for (int i = 0; i < n; ++i) Y(i, j) = rng.unit_disc();

  auto m_mult = [&](const Eigen::MatrixXcd& Z) {
    Eigen::MatrixXcd out(n, Z.cols());
    out.real() = M * Z.real().eval();
    out.imag() = M * Z.imag().eval();
    return out;
  };

  EigResult res;
  res.converged = false;
  double lambda_prev = 0.0;
  Eigen::MatrixXcd X(n, b);
  for (int it = 0; it < kPowerCap; ++it) {
    // M-orthonormalize the block through the Gram eigendecomposition;
    // near-dependent columns are damped rather than dropped.
    Eigen::MatrixXcd G = Y.adjoint() * m_mult(Y);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> gram(0.5 * (G + G.adjoint()));
    const double floor = std::max(gram.eigenvalues().maxCoeff(), 1e-300) * 1e-14;
    Eigen::VectorXd inv_sqrt(b);
    for (int j = 0; j < b; ++j)
      inv_sqrt(j) = 1.0 / std::sqrt(std::max(gram.eigenvalues()(j), floor));
    Y = (Y * gram.eigenvectors() * inv_sqrt.asDiagonal()).eval();

    for (int j = 0; j < b; ++j) X.col(j) = apply_T(Y.col(j));
    Eigen::MatrixXcd H = Y.adjoint() * X;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ritz(0.5 * (H + H.adjoint()));
    res.lambda = ritz.eigenvalues().maxCoeff();
    res.iterations = it + 1;
    if (it > 0 && std::abs(res.lambda - lambda_prev) <=
                      kPowerTol * std::max(std::abs(res.lambda), 1e-30)) {
      res.converged = true;
      break;
    }
    if (it > 0) {
      // Residual certificate for the top Ritz pair: a pencil eigenvalue lies
      // within the M^{-1}-norm residual of lambda, so a small residual pins
      // the value even while the vector keeps rotating inside a tight
      // leading cluster and the increment test above never fires.
      Eigen::VectorXcd u = ritz.eigenvectors().col(b - 1);
      Eigen::VectorXcd w = X * u;
      Eigen::VectorXcd v = Y * u;
      Eigen::VectorXcd rho(n);
      rho.real() = w.real() - res.lambda * (M * v.real().eval());
      rho.imag() = w.imag() - res.lambda * (M * v.imag().eval());
      Eigen::VectorXcd z(n);
      z.real() = mfac.solve(rho.real().eval());
      z.imag() = mfac.solve(rho.imag().eval());
      const double r = std::sqrt(std::max(0.0, (rho.adjoint() * z)(0).real()));
      if (r <= kPowerResTol * std::max(res.lambda, 1e-30)) {
        res.converged = true;
        break;
      }
    }
    lambda_prev = res.lambda;
    for (int j = 0; j < b; ++j) {
      Y.col(j).real() = mfac.solve(X.col(j).real().eval());
      Y.col(j).imag() = mfac.solve(X.col(j).imag().eval());
    }
  }
  return res;
}

template <typename ApplyT>
EigResult dense_max(const ApplyT& apply_T, const Eigen::MatrixXcd& M, int n) {
  Eigen::MatrixXcd T(n, n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
    e(j) = 1.0;
    T.col(j) = apply_T(e);
  }
  T = 0.5 * (T + T.adjoint()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> eig(T, M);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("generalized eigensolver failed");
  }
  EigResult res;
  res.lambda = eig.eigenvalues().maxCoeff();
  return res;
}

}  // namespace

ApproximationFactors sample_gamma_ba(const Mesh& mesh,
                                     const CoefficientSet& coeffs,
                                     int degree) {
  double omega = coeffs.omega;
  BrokenSpace cb = make_broken_space(mesh, degree);
  MeshScalars sc = mesh_scalars(mesh, coeffs);
  NormWeights cw = native_weights(mesh, omega, sc);
  ConformingSpace conf_c = make_conforming_space(mesh, degree);
  DivConformingSpace bdm = make_div_space(mesh, degree);

  Mesh fine = refine_uniform(mesh);
  int pf = degree + 1;
  DgContext ctxf = make_context(fine, coeffs, pf);
  ConformingSpace conf_f = make_conforming_space(fine, pf);
  ConformingSystem sysf = assemble_conforming(conf_f, coeffs);

  // Dagger-norm weights of the working mesh transported to the fine spaces.
  NormWeights wf;
  wf.mass.resize(fine.n_tris());
  wf.div_vol.resize(fine.n_tris());
  for (int t = 0; t < fine.n_tris(); ++t) {
    int parent = fine.tri_parent[t];
    wf.mass[t] = cw.mass[parent];
    wf.div_vol[t] = cw.div_vol[parent];
  }
  wf.robin.assign(fine.n_faces(), 0.0);
  wf.div_face.assign(fine.n_faces(), 0.0);
  for (int f = 0; f < fine.n_faces(); ++f) {
    if (fine.faces[f].label != FaceLabel::Robin) continue;
    int parent = fine.bface_parent[f];
    wf.robin[f] = cw.robin[parent];
    wf.div_face[f] = cw.div_face[parent];
  }
  NormContext nf = make_norms(ctxf, wf);

  int nb_f = ctxf.scalar.dim();
  int nv_f = ctxf.vec_dim();
  int nl = ctxf.lift.basis.dim;
  int nq_vol = 2 * (ctxf.lift.degree + 1) + 4;
  TriangleRule vol = triangle_rule(nq_vol);
  EdgeRule er = edge_rule(nq_vol);
  Eigen::MatrixXd mref_s = reference_mass(ctxf.scalar.basis);
  Eigen::PartialPivLU<Eigen::MatrixXd> mref_s_lu(mref_s);
  Eigen::MatrixXd mref_l = reference_mass(ctxf.lift.basis);
  Eigen::PartialPivLU<Eigen::MatrixXd> mref_l_lu(mref_l);

  // Per fine element: parent and the pullback of quadrature points.
  std::vector<std::vector<Eigen::Vector2d>> coarse_pts(fine.n_tris());
  for (int t = 0; t < fine.n_tris(); ++t) {
    int parent = fine.tri_parent[t];
    coarse_pts[t].resize(vol.points.size());
    for (size_t q = 0; q < vol.points.size(); ++q) {
      coarse_pts[t][q] =
          mesh.to_reference(parent, fine.to_physical(t, vol.points[q]));
    }
  }

  // Mixed mu-mass between the fine conforming space (free nodes) and the
  // coarse broken space, plus the prolongation of coarse broken fields.
  std::vector<Eigen::Triplet<double>> t_mcb, t_pff;
  for (int t = 0; t < fine.n_tris(); ++t) {
    int parent = fine.tri_parent[t];
    double mu = coeffs.mu[fine.region[t]];
    Eigen::MatrixXd mom =
        Eigen::MatrixXd::Zero(ctxf.scalar.basis.dim, cb.basis.dim);
    for (size_t q = 0; q < vol.points.size(); ++q) {
      Eigen::VectorXd fc = conf_f.basis.eval(vol.points[q]);
      Eigen::VectorXd cbv = cb.basis.eval(coarse_pts[t][q]);
      Eigen::VectorXd fm = ctxf.scalar.basis.eval(vol.points[q]);
      double w = vol.weights[q] * ctxf.detJ[t];
      for (int i = 0; i < conf_f.basis.dim; ++i) {
        int fi = conf_f.free_index[conf_f.element_nodes[t][i]];
        if (fi < 0) continue;
        for (int j = 0; j < cb.basis.dim; ++j) {
          t_mcb.emplace_back(fi, cb.offset(parent) + j,
                             w * mu * fc(i) * cbv(j));
        }
      }
      mom += (vol.weights[q] * fm) * cbv.transpose();
    }
    push_block(t_pff, ctxf.scalar.offset(t), cb.offset(parent),
               mref_s_lu.solve(mom));
  }
  Eigen::SparseMatrix<double> Mcb(conf_f.n_free, cb.dim());
  Mcb.setFromTriplets(t_mcb.begin(), t_mcb.end());
  Eigen::SparseMatrix<double> Pff(nb_f, cb.dim());
  Pff.setFromTriplets(t_pff.begin(), t_pff.end());

  // Fine-broken representations of the two discrete test spaces.
  Eigen::SparseMatrix<double> EfS =
      conforming_embedding(conf_f, ctxf.scalar) *
      scatter_matrix(conf_f.free_index, conf_f.n_nodes, conf_f.n_free);
  Eigen::SparseMatrix<double> Pg =
      Pff * (conforming_embedding(conf_c, cb) *
             scatter_matrix(conf_c.free_index, conf_c.n_nodes, conf_c.n_free));

  ResidualForm g_res;
  g_res.init(nf.G1, Pg);

  // Divergence of fine vector fields, componentwise from the reference
  // derivative expansion over the lift basis.
  Eigen::MatrixXd wxi = Eigen::MatrixXd::Zero(nl, nl);
  Eigen::MatrixXd weta = wxi;
  for (size_t q = 0; q < vol.points.size(); ++q) {
    Eigen::VectorXd v = ctxf.lift.basis.eval(vol.points[q]);
    Eigen::MatrixXd g = ctxf.lift.basis.eval_grad(vol.points[q]);
    wxi += vol.weights[q] * v * g.col(0).transpose();
    weta += vol.weights[q] * v * g.col(1).transpose();
  }
  Eigen::MatrixXd dxi = mref_l_lu.solve(wxi);
  Eigen::MatrixXd deta = mref_l_lu.solve(weta);
  std::vector<Eigen::Triplet<double>> t_df, t_wdiv, t_htr;
  for (int t = 0; t < fine.n_tris(); ++t) {
    const Eigen::Matrix2d& Ji = ctxf.JinvT[t];
    push_block(t_df, ctxf.lift.offset(t), ctxf.vec_off(t, 0),
               Ji(0, 0) * dxi + Ji(0, 1) * deta);
    push_block(t_df, ctxf.lift.offset(t), ctxf.vec_off(t, 1),
               Ji(1, 0) * dxi + Ji(1, 1) * deta);
    push_block(t_wdiv, ctxf.lift.offset(t), ctxf.lift.offset(t),
               wf.div_vol[t] * ctxf.detJ[t] * mref_l);
  }
  for (int f = 0; f < fine.n_faces(); ++f) {
    const Face& face = fine.faces[f];
    if (face.label != FaceLabel::Robin) continue;
    int t = face.t_plus;
    Eigen::MatrixXd fmass = Eigen::MatrixXd::Zero(nl, nl);
    for (size_t q = 0; q < er.points.size(); ++q) {
      Eigen::Vector2d xi = face_reference_point(fine, f, t, er.points[q]);
      Eigen::VectorXd v = ctxf.lift.basis.eval(xi);
      fmass += er.weights[q] * v * v.transpose();
    }
    fmass *= wf.div_face[f] * face.length;
    double nx = face.normal.x(), ny = face.normal.y();
    push_block(t_htr, ctxf.vec_off(t, 0), ctxf.vec_off(t, 0), nx * nx * fmass);
    push_block(t_htr, ctxf.vec_off(t, 0), ctxf.vec_off(t, 1), nx * ny * fmass);
    push_block(t_htr, ctxf.vec_off(t, 1), ctxf.vec_off(t, 0), ny * nx * fmass);
    push_block(t_htr, ctxf.vec_off(t, 1), ctxf.vec_off(t, 1), ny * ny * fmass);
  }
  Eigen::SparseMatrix<double> DF(ctxf.lift.dim(), nv_f);
  DF.setFromTriplets(t_df.begin(), t_df.end());
  Eigen::SparseMatrix<double> Wdiv(ctxf.lift.dim(), ctxf.lift.dim());
  Wdiv.setFromTriplets(t_wdiv.begin(), t_wdiv.end());
  Eigen::SparseMatrix<double> Htr(nv_f, nv_f);
  Htr.setFromTriplets(t_htr.begin(), t_htr.end());
  Eigen::SparseMatrix<double> Hd =
      ctxf.MAinv_vec + Eigen::SparseMatrix<double>(DF.transpose() * Wdiv * DF) +
      Htr;

  // Coarse div-conforming basis prolonged into the fine vector space.
  std::vector<std::vector<int>> children(mesh.n_tris());
  for (int t = 0; t < fine.n_tris(); ++t) {
    children[fine.tri_parent[t]].push_back(t);
  }
  std::vector<Eigen::Triplet<double>> t_pb;
  for (int tc = 0; tc < mesh.n_tris(); ++tc) {
    int nloc = static_cast<int>(bdm.elem_dofs[tc].size());
    for (int tf : children[tc]) {
      Eigen::MatrixXd momx = Eigen::MatrixXd::Zero(nl, nloc);
      Eigen::MatrixXd momy = momx;
      for (size_t q = 0; q < vol.points.size(); ++q) {
        Eigen::Vector2d xic =
            mesh.to_reference(tc, fine.to_physical(tf, vol.points[q]));
        Eigen::VectorXd bx, by;
        div_basis_values(bdm, tc, xic, bx, by);
        Eigen::VectorXd fm = ctxf.lift.basis.eval(vol.points[q]);
        momx += (vol.weights[q] * fm) * bx.transpose();
        momy += (vol.weights[q] * fm) * by.transpose();
      }
      Eigen::MatrixXd cx = mref_l_lu.solve(momx);
      Eigen::MatrixXd cy = mref_l_lu.solve(momy);
      for (int l = 0; l < nloc; ++l) {
        int fi = bdm.free_index[bdm.elem_dofs[tc][l]];
        if (fi < 0) continue;
        for (int i = 0; i < nl; ++i) {
          if (cx(i, l) != 0.0) {
            t_pb.emplace_back(ctxf.vec_off(tf, 0) + i, fi, cx(i, l));
          }
          if (cy(i, l) != 0.0) {
            t_pb.emplace_back(ctxf.vec_off(tf, 1) + i, fi, cy(i, l));
          }
        }
      }
    }
  }
  Eigen::SparseMatrix<double> Pb(nv_f, bdm.n_free);
  Pb.setFromTriplets(t_pb.begin(), t_pb.end());
  ResidualForm d_res;
  d_res.init(Hd, Pb);

  // Gradient of fine conforming fields, scaled by A, in the vector space.
  std::vector<Eigen::Triplet<double>> t_dv;
  for (int t = 0; t < fine.n_tris(); ++t) {
    const Eigen::Matrix2d& A = coeffs.A[fine.region[t]];
    const Eigen::Matrix2d& Ji = ctxf.JinvT[t];
    Eigen::MatrixXd momx = Eigen::MatrixXd::Zero(nl, conf_f.basis.dim);
    Eigen::MatrixXd momy = momx;
    for (size_t q = 0; q < vol.points.size(); ++q) {
      Eigen::VectorXd fm = ctxf.lift.basis.eval(vol.points[q]);
      Eigen::MatrixXd lg = conf_f.basis.eval_grad(vol.points[q]);
      for (int i = 0; i < conf_f.basis.dim; ++i) {
        Eigen::Vector2d gp = Ji * lg.row(i).transpose();
        Eigen::Vector2d ag = A * gp;
        momx.col(i) += (vol.weights[q] * ag.x()) * fm;
        momy.col(i) += (vol.weights[q] * ag.y()) * fm;
      }
    }
    Eigen::MatrixXd cx = mref_l_lu.solve(momx);
    Eigen::MatrixXd cy = mref_l_lu.solve(momy);
    for (int i = 0; i < conf_f.basis.dim; ++i) {
      int fi = conf_f.free_index[conf_f.element_nodes[t][i]];
      if (fi < 0) continue;
      for (int r = 0; r < nl; ++r) {
        if (cx(r, i) != 0.0) {
          t_dv.emplace_back(ctxf.vec_off(t, 0) + r, fi, cx(r, i));
        }
        if (cy(r, i) != 0.0) {
          t_dv.emplace_back(ctxf.vec_off(t, 1) + r, fi, cy(r, i));
        }
      }
    }
  }
  Eigen::SparseMatrix<double> Dv(nv_f, conf_f.n_free);
  Dv.setFromTriplets(t_dv.begin(), t_dv.end());

  // Coarse broken mu-mass for normalizing the dual data.
  Eigen::MatrixXd mref_c = reference_mass(cb.basis);
  std::vector<Eigen::Triplet<double>> t_mmu;
  for (int t = 0; t < mesh.n_tris(); ++t) {
    double dj = std::abs(mesh.jacobian(t).determinant());
    push_block(t_mmu, cb.offset(t), cb.offset(t),
               coeffs.mu[mesh.region[t]] * dj * mref_c);
  }
  Eigen::SparseMatrix<double> Mmu(cb.dim(), cb.dim());
  Mmu.setFromTriplets(t_mmu.begin(), t_mmu.end());

  auto solve_fine = [&](const Eigen::VectorXcd& m) {
    return Eigen::VectorXcd(sysf.lu->solve(m));
  };
  auto solve_fine_adj = [&](const Eigen::VectorXcd& m) {
    return Eigen::VectorXcd(sysf.lu->solve(m.conjugate()).conjugate());
  };

  ApproximationFactors out;

  auto apply_g = [&](const Eigen::VectorXcd& y) {
    Eigen::VectorXcd s = solve_fine(Mcb * y);
    Eigen::VectorXcd r = g_res.apply(EfS * s);
    Eigen::VectorXcd t = solve_fine_adj(EfS.transpose() * r);
    return Eigen::VectorXcd(omega * omega * (Mcb.transpose() * t));
  };
  auto apply_d = [&](const Eigen::VectorXcd& y) {
    Eigen::VectorXcd s = solve_fine(Mcb * y);
    Eigen::VectorXcd r = d_res.apply(Dv * s);
    Eigen::VectorXcd t = solve_fine_adj(Dv.transpose() * r);
    return Eigen::VectorXcd(omega * omega * (Mcb.transpose() * t));
  };

  if (cb.dim() <= kDenseEigCap) {
    Eigen::MatrixXcd mmu_dense =
        Eigen::MatrixXd(Mmu).cast<cplx>();
    EigResult rg = dense_max(apply_g, mmu_dense, cb.dim());
    EigResult rd = dense_max(apply_d, mmu_dense, cb.dim());
    out.check_g = std::sqrt(std::max(0.0, rg.lambda));
    out.check_d = std::sqrt(std::max(0.0, rd.lambda));
  } else {
    EigResult rg = power_max(apply_g, Mmu, cb.dim(), 211u);
    EigResult rd = power_max(apply_d, Mmu, cb.dim(), 223u);
    out.check_g = std::sqrt(std::max(0.0, rg.lambda));
    out.check_d = std::sqrt(std::max(0.0, rd.lambda));
    out.converged = rg.converged && rd.converged;
    out.iterations = std::max(rg.iterations, rd.iterations);
  }

  // Robin-trace duals. Without Robin faces the tilde factors are exactly 0.
  std::vector<int> robin_faces;
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (mesh.faces[f].label == FaceLabel::Robin) robin_faces.push_back(f);
  }
  if (!robin_faces.empty()) {
    int per_face = degree + 1;
    int n_psi = static_cast<int>(robin_faces.size()) * per_face;
    std::vector<int> face_slot(mesh.n_faces(), -1);
    Eigen::VectorXd psi_mass(n_psi);
    for (size_t i = 0; i < robin_faces.size(); ++i) {
      int f = robin_faces[i];
      face_slot[f] = static_cast<int>(i) * per_face;
      double gam = coeffs.gamma[mesh.faces[f].patch];
      for (int k = 0; k < per_face; ++k) {
        psi_mass(face_slot[f] + k) = gam * mesh.faces[f].length;
      }
    }
    std::vector<Eigen::Triplet<double>> t_mrb;
    for (int ff = 0; ff < fine.n_faces(); ++ff) {
      const Face& face = fine.faces[ff];
      if (face.label != FaceLabel::Robin) continue;
      int cf = fine.bface_parent[ff];
      const Face& cface = mesh.faces[cf];
      Eigen::Vector2d va = mesh.vertices[cface.a];
      Eigen::Vector2d dir =
          (mesh.vertices[cface.b] - va) / cface.length;
      double gam = coeffs.gamma[face.patch];
      int t = face.t_plus;
      for (size_t q = 0; q < er.points.size(); ++q) {
        Eigen::Vector2d xi = face_reference_point(fine, ff, t, er.points[q]);
        Eigen::Vector2d x = fine.to_physical(t, xi);
        double s_c = (x - va).dot(dir) / cface.length;
        Eigen::VectorXd psi = legendre01(degree, s_c);
        Eigen::VectorXd fc = conf_f.basis.eval(xi);
        double w = er.weights[q] * face.length * gam;
        for (int i = 0; i < conf_f.basis.dim; ++i) {
          int fi = conf_f.free_index[conf_f.element_nodes[t][i]];
          if (fi < 0) continue;
          for (int k = 0; k < per_face; ++k) {
            t_mrb.emplace_back(fi, face_slot[cf] + k, w * fc(i) * psi(k));
          }
        }
      }
    }
    Eigen::SparseMatrix<double> Mrb(conf_f.n_free, n_psi);
    Mrb.setFromTriplets(t_mrb.begin(), t_mrb.end());

    auto apply_tg = [&](const Eigen::VectorXcd& y) {
      Eigen::VectorXcd s = solve_fine(Mrb * y);
      Eigen::VectorXcd r = g_res.apply(EfS * s);
      Eigen::VectorXcd t = solve_fine_adj(EfS.transpose() * r);
      return Eigen::VectorXcd(omega * (Mrb.transpose() * t));
    };
    auto apply_td = [&](const Eigen::VectorXcd& y) {
      Eigen::VectorXcd s = solve_fine(Mrb * y);
      Eigen::VectorXcd r = d_res.apply(Dv * s);
      Eigen::VectorXcd t = solve_fine_adj(Dv.transpose() * r);
      return Eigen::VectorXcd(omega * (Mrb.transpose() * t));
    };
    Eigen::MatrixXcd mpsi = psi_mass.asDiagonal().toDenseMatrix().cast<cplx>();
    EigResult rg = dense_max(apply_tg, mpsi, n_psi);
    EigResult rd = dense_max(apply_td, mpsi, n_psi);
    out.tilde_g = std::sqrt(std::max(0.0, rg.lambda));
    out.tilde_d = std::sqrt(std::max(0.0, rd.lambda));
  }
  return out;
}

}  // namespace helmdg
