// SPDX-License-Identifier: Apache-2.0

#include "helmdg/norms.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>
#include <limits>

namespace helmdg {

namespace {

Eigen::MatrixXd reference_mass(const ScalarBasis& basis, int quad_order) {
  TriangleRule rule = triangle_rule(quad_order);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(basis.dim, basis.dim);
  for (size_t q = 0; q < rule.points.size(); ++q) {
    Eigen::VectorXd v = basis.eval(rule.points[q]);
    m += rule.weights[q] * v * v.transpose();
  }
  return m;
}

// v^H S v for real symmetric S and complex v.
double quad_form(const Eigen::SparseMatrix<double>& s,
                 const Eigen::VectorXcd& v) {
  Eigen::VectorXd re = v.real();
  Eigen::VectorXd im = v.imag();
  return re.dot(s * re) + im.dot(s * im);
}

Eigen::VectorXcd apply_real(const Eigen::SparseMatrix<double>& s,
                            const Eigen::VectorXcd& v) {
  return (s * v.real()).cast<cplx>() + cplx(0.0, 1.0) * (s * v.imag());
}

// Local basis value rows of the div-conforming space at a reference point:
// bx, by hold component values, bdiv the physical divergence.
void div_basis_rows(const DivConformingSpace& space, int t,
                    const Eigen::Vector2d& xi, Eigen::VectorXd& bx,
                    Eigen::VectorXd& by, Eigen::VectorXd& bdiv) {
  int nm = space.scalar.dim;
  Eigen::VectorXd sv = space.scalar.eval(xi);
  Eigen::MatrixXd sg = space.scalar.eval_grad(xi);
  Eigen::Matrix2d JinvT = space.mesh->jacobian(t).inverse().transpose();
  Eigen::VectorXd gx(nm), gy(nm);
  for (int i = 0; i < nm; ++i) {
    Eigen::Vector2d gp = JinvT * sg.row(i).transpose();
    gx(i) = gp.x();
    gy(i) = gp.y();
  }
  const Eigen::MatrixXd& c = space.elem_coef[t];
  bx = c.topRows(nm).transpose() * sv;
  by = c.bottomRows(nm).transpose() * sv;
  bdiv = c.topRows(nm).transpose() * gx + c.bottomRows(nm).transpose() * gy;
}

struct FreeSolve {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool ok = false;
};

}  // namespace

NormWeights native_weights(const Mesh& mesh, double omega,
                           const MeshScalars& s) {
  NormWeights w;
  int nt = mesh.n_tris();
  int nf = mesh.n_faces();
  w.mass.resize(nt);
  w.div_vol.resize(nt);
  for (int t = 0; t < nt; ++t) {
    double r = omega * s.h_K[t] / s.theta_K[t];
    w.mass[t] = std::max(1.0, r * r) * s.alpha_K[t] / (s.h_K[t] * s.h_K[t]);
    w.div_vol[t] = s.h_K[t] * s.h_K[t] / s.alpha_K[t];
  }
  w.robin.assign(nf, 0.0);
  w.div_face.assign(nf, 0.0);
  for (int f = 0; f < nf; ++f) {
    const Face& face = mesh.faces[f];
    if (face.label != FaceLabel::Robin) continue;
    double r = omega * face.length / s.theta_F[f];
    w.robin[f] = std::max(1.0, r) * s.alpha_F[f] / face.length;
    w.div_face[f] = face.length / s.alpha_F[f];
  }
  return w;
}

NormContext make_norms(const DgContext& ctx) {
  return make_norms(ctx, native_weights(*ctx.mesh, ctx.coeffs.omega,
                                        ctx.scalars));
}

NormContext make_norms(const DgContext& ctx, const NormWeights& weights) {
  NormContext n;
  n.ctx = &ctx;
  n.weights = weights;
  const Mesh& mesh = *ctx.mesh;
  const ScalarBasis& basis = ctx.scalar.basis;
  int nd = basis.dim;
  int quad = 2 * ctx.scalar.degree + 2;
  Eigen::MatrixXd mref = reference_mass(basis, quad);

  std::vector<Eigen::Triplet<double>> trip;
  for (int t = 0; t < mesh.n_tris(); ++t) {
    double wm = weights.mass[t] * ctx.detJ[t];
    int off = ctx.scalar.offset(t);
    for (int i = 0; i < nd; ++i) {
      for (int j = 0; j < nd; ++j) {
        double v = wm * mref(i, j);
        if (v != 0.0) trip.emplace_back(off + i, off + j, v);
      }
    }
  }
  EdgeRule er = edge_rule(quad);
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (weights.robin[f] == 0.0) continue;
    const Face& face = mesh.faces[f];
    int t = face.t_plus;
    int off = ctx.scalar.offset(t);
    Eigen::MatrixXd fm = Eigen::MatrixXd::Zero(nd, nd);
    for (size_t q = 0; q < er.points.size(); ++q) {
      Eigen::VectorXd v =
          basis.eval(face_reference_point(mesh, f, t, er.points[q]));
      fm += er.weights[q] * v * v.transpose();
    }
    fm *= weights.robin[f] * face.length;
    for (int i = 0; i < nd; ++i) {
      for (int j = 0; j < nd; ++j) {
        if (fm(i, j) != 0.0) trip.emplace_back(off + i, off + j, fm(i, j));
      }
    }
  }
  int dim = ctx.scalar.dim();
  Eigen::SparseMatrix<double> mass_part(dim, dim);
  mass_part.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseMatrix<double> grad_part =
      ctx.Gop.transpose() * (ctx.MA_vec * ctx.Gop).eval();
  n.G1 = mass_part + grad_part;
  n.E_omega = ctx.coeffs.omega * ctx.coeffs.omega * ctx.M_mu +
              ctx.coeffs.omega * ctx.R_gamma + grad_part;
  return n;
}

double energy_norm(const NormContext& n, const Eigen::VectorXcd& broken) {
  return std::sqrt(std::max(0.0, quad_form(n.E_omega, broken)));
}

double dagger1_norm(const NormContext& n, const Eigen::VectorXcd& broken) {
  return std::sqrt(std::max(0.0, quad_form(n.G1, broken)));
}

double daggerdiv_norm(const NormContext& n, const DivConformingSpace& space,
                      const Eigen::VectorXcd& dofs) {
  const Mesh& mesh = *space.mesh;
  TriangleRule vol = triangle_rule(2 * (space.degree + 1) + 2);
  double acc = 0.0;
  for (int t = 0; t < mesh.n_tris(); ++t) {
    Eigen::Matrix2d Ainv = n.ctx->coeffs.A[mesh.region[t]].inverse();
    double detJ = 2.0 * mesh.area(t);
    for (size_t q = 0; q < vol.points.size(); ++q) {
      Eigen::Vector2cd w = space.eval(t, vol.points[q], dofs);
      cplx dv = space.div(t, vol.points[q], dofs);
      Eigen::Vector2cd aw = Ainv.cast<cplx>() * w;
      double winv = (aw.x() * std::conj(w.x()) + aw.y() * std::conj(w.y()))
                        .real();
      acc += vol.weights[q] * detJ *
             (winv + n.weights.div_vol[t] * std::norm(dv));
    }
  }
  EdgeRule er = edge_rule(2 * (space.degree + 1) + 2);
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (n.weights.div_face[f] == 0.0) continue;
    const Face& face = mesh.faces[f];
    for (size_t q = 0; q < er.points.size(); ++q) {
      Eigen::Vector2d xi =
          face_reference_point(mesh, f, face.t_plus, er.points[q]);
      Eigen::Vector2cd w = space.eval(face.t_plus, xi, dofs);
      cplx wn = w.x() * face.normal.x() + w.y() * face.normal.y();
      acc += er.weights[q] * face.length * n.weights.div_face[f] *
             std::norm(wn);
    }
  }
  return std::sqrt(std::max(0.0, acc));
}

cplx duality_pairing(const NormContext& n, const BrokenField& phi,
                     const DivConformingSpace& space,
                     const Eigen::VectorXcd& dofs) {
  const DgContext& ctx = *n.ctx;
  const Mesh& mesh = *ctx.mesh;
  Eigen::VectorXcd g = discrete_gradient(ctx, phi.coef);
  int order = 2 * std::max(ctx.lift.degree, space.degree + 1) + 2;
  TriangleRule vol = triangle_rule(order);
  cplx acc = 0.0;
  for (int t = 0; t < mesh.n_tris(); ++t) {
    for (size_t q = 0; q < vol.points.size(); ++q) {
      const Eigen::Vector2d& xi = vol.points[q];
      Eigen::Vector2cd gv = eval_vec(ctx, g, t, xi);
      Eigen::Vector2cd w = space.eval(t, xi, dofs);
      cplx dv = space.div(t, xi, dofs);
      cplx ph = phi.eval(t, xi);
      acc += vol.weights[q] * ctx.detJ[t] *
             (gv.x() * std::conj(w.x()) + gv.y() * std::conj(w.y()) +
              ph * std::conj(dv));
    }
  }
  EdgeRule er = edge_rule(order);
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const Face& face = mesh.faces[f];
    if (face.label != FaceLabel::Robin) continue;
    for (size_t q = 0; q < er.points.size(); ++q) {
      Eigen::Vector2d xi =
          face_reference_point(mesh, f, face.t_plus, er.points[q]);
      cplx ph = phi.eval(face.t_plus, xi);
      Eigen::Vector2cd w = space.eval(face.t_plus, xi, dofs);
      cplx wn = w.x() * face.normal.x() + w.y() * face.normal.y();
      acc -= er.weights[q] * face.length * ph * std::conj(wn);
    }
  }
  return acc;
}

Eigen::VectorXcd project_g(const NormContext& n, const ConformingSpace& conf,
                           const Eigen::SparseMatrix<double>& embedding,
                           const Eigen::VectorXcd& broken) {
  Eigen::VectorXcd nodal = Eigen::VectorXcd::Zero(conf.n_nodes);
  if (conf.n_free == 0) return nodal;
  Eigen::SparseMatrix<double> a =
      embedding.transpose() * (n.G1 * embedding).eval();
  Eigen::VectorXcd rhs_full =
      embedding.transpose().cast<cplx>() * apply_real(n.G1, broken);

  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it) {
      int i = conf.free_index[it.row()];
      int j = conf.free_index[it.col()];
      if (i >= 0 && j >= 0) trip.emplace_back(i, j, it.value());
    }
  }
  Eigen::SparseMatrix<double> aff(conf.n_free, conf.n_free);
  aff.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(aff);
  if (ldlt.info() != Eigen::Success) {
    throw NumericalError("dagger-1 projection Gram factorization failed");
  }
  Eigen::VectorXd rr(conf.n_free), ri(conf.n_free);
  for (int g = 0; g < conf.n_nodes; ++g) {
    int i = conf.free_index[g];
    if (i >= 0) {
      rr(i) = rhs_full(g).real();
      ri(i) = rhs_full(g).imag();
    }
  }
  Eigen::VectorXd xr = ldlt.solve(rr);
  Eigen::VectorXd xi = ldlt.solve(ri);
  for (int g = 0; g < conf.n_nodes; ++g) {
    int i = conf.free_index[g];
    if (i >= 0) nodal(g) = cplx(xr(i), xi(i));
  }
  return nodal;
}

double best_div_error(const NormContext& n, const DivConformingSpace& space,
                      const VectorFn& flux, const ScalarFn& div_flux,
                      int quad_order) {
  const Mesh& mesh = *space.mesh;
  if (quad_order < 0) quad_order = 2 * (space.degree + 1) + 6;
  TriangleRule vol = triangle_rule(quad_order);
  EdgeRule er = edge_rule(quad_order);
  int nloc = 3 * space.face_dofs + space.interior_dofs;

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXcd moment = Eigen::VectorXcd::Zero(space.dim());
  double target_sq = 0.0;
  Eigen::VectorXd bx, by, bdiv;
  for (int t = 0; t < mesh.n_tris(); ++t) {
    Eigen::Matrix2d Ainv = n.ctx->coeffs.A[mesh.region[t]].inverse();
    double detJ = 2.0 * mesh.area(t);
    double wd = n.weights.div_vol[t];
    Eigen::MatrixXd ge = Eigen::MatrixXd::Zero(nloc, nloc);
    Eigen::VectorXcd me = Eigen::VectorXcd::Zero(nloc);
    for (size_t q = 0; q < vol.points.size(); ++q) {
      div_basis_rows(space, t, vol.points[q], bx, by, bdiv);
      Eigen::VectorXd ax = Ainv(0, 0) * bx + Ainv(0, 1) * by;
      Eigen::VectorXd ay = Ainv(1, 0) * bx + Ainv(1, 1) * by;
      double w = vol.weights[q] * detJ;
      ge += w * (ax * bx.transpose() + ay * by.transpose() +
                 wd * bdiv * bdiv.transpose());
      Eigen::Vector2d x = mesh.to_physical(t, vol.points[q]);
      Eigen::Vector2cd tv = flux(x);
      cplx td = div_flux(x);
      Eigen::Vector2cd atv = Ainv.cast<cplx>() * tv;
      me += w * (bx.cast<cplx>() * std::conj(atv.x()) +
                 by.cast<cplx>() * std::conj(atv.y()) +
                 wd * bdiv.cast<cplx>() * std::conj(td));
      target_sq += w * ((atv.x() * std::conj(tv.x()) +
                         atv.y() * std::conj(tv.y()))
                            .real() +
                        wd * std::norm(td));
    }
    const std::vector<int>& dofs = space.elem_dofs[t];
    for (int i = 0; i < nloc; ++i) {
      moment(dofs[i]) += me(i);
      for (int j = 0; j < nloc; ++j) {
        trip.emplace_back(dofs[i], dofs[j], ge(i, j));
      }
    }
  }
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (n.weights.div_face[f] == 0.0) continue;
    const Face& face = mesh.faces[f];
    int t = face.t_plus;
    const std::vector<int>& dofs = space.elem_dofs[t];
    for (size_t q = 0; q < er.points.size(); ++q) {
      Eigen::Vector2d xi = face_reference_point(mesh, f, t, er.points[q]);
      div_basis_rows(space, t, xi, bx, by, bdiv);
      Eigen::VectorXd bn = face.normal.x() * bx + face.normal.y() * by;
      double w = er.weights[q] * face.length * n.weights.div_face[f];
      Eigen::Vector2d x = mesh.to_physical(t, xi);
      Eigen::Vector2cd tv = flux(x);
      cplx tn = tv.x() * face.normal.x() + tv.y() * face.normal.y();
      for (int i = 0; i < nloc; ++i) {
        moment(dofs[i]) += w * bn(i) * std::conj(tn);
        for (int j = 0; j < nloc; ++j) {
          trip.emplace_back(dofs[i], dofs[j], w * bn(i) * bn(j));
        }
      }
      target_sq += w * std::norm(tn);
    }
  }

  if (space.n_free == 0) return std::sqrt(std::max(0.0, target_sq));
  std::vector<Eigen::Triplet<double>> ftrip;
  for (const auto& tr : trip) {
    int i = space.free_index[tr.row()];
    int j = space.free_index[tr.col()];
    if (i >= 0 && j >= 0) ftrip.emplace_back(i, j, tr.value());
  }
  Eigen::SparseMatrix<double> gff(space.n_free, space.n_free);
  gff.setFromTriplets(ftrip.begin(), ftrip.end());
  Eigen::VectorXd mr(space.n_free), mi(space.n_free);
  for (int d = 0; d < space.dim(); ++d) {
    int i = space.free_index[d];
    if (i >= 0) {
      mr(i) = moment(d).real();
      mi(i) = moment(d).imag();
    }
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(gff);
  if (ldlt.info() != Eigen::Success) {
    throw NumericalError("dagger-div Gram factorization failed");
  }
  double reduced = mr.dot(ldlt.solve(mr)) + mi.dot(ldlt.solve(mi));
  return std::sqrt(std::max(0.0, target_sq - reduced));
}

double best_conforming_energy_error(const NormContext& n,
                                    const ConformingSpace& conf,
                                    const ScalarFn& u, const VectorFn& grad_u,
                                    int quad_order) {
  const DgContext& ctx = *n.ctx;
  const Mesh& mesh = *conf.mesh;
  double omega = ctx.coeffs.omega;
  if (quad_order < 0) quad_order = 2 * conf.degree + 6;
  TriangleRule vol = triangle_rule(quad_order);
  EdgeRule er = edge_rule(quad_order);
  int nloc = conf.basis.dim;

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXcd moment = Eigen::VectorXcd::Zero(conf.n_nodes);
  double target_sq = 0.0;
  for (int t = 0; t < mesh.n_tris(); ++t) {
    const Eigen::Matrix2d& A = ctx.coeffs.A[mesh.region[t]];
    double mu = ctx.coeffs.mu[mesh.region[t]];
    double detJ = 2.0 * mesh.area(t);
    Eigen::Matrix2d JinvT = mesh.jacobian(t).inverse().transpose();
    Eigen::MatrixXd ge = Eigen::MatrixXd::Zero(nloc, nloc);
    Eigen::VectorXcd me = Eigen::VectorXcd::Zero(nloc);
    for (size_t q = 0; q < vol.points.size(); ++q) {
      Eigen::VectorXd v = conf.basis.eval(vol.points[q]);
      Eigen::MatrixXd gref = conf.basis.eval_grad(vol.points[q]);
      Eigen::MatrixXd gphys(nloc, 2);
      for (int i = 0; i < nloc; ++i) {
        gphys.row(i) = (JinvT * gref.row(i).transpose()).transpose();
      }
      Eigen::MatrixXd ag = gphys * A.transpose();
      double w = vol.weights[q] * detJ;
      ge += w * (omega * omega * mu * v * v.transpose() +
                 ag * gphys.transpose());
      Eigen::Vector2d x = mesh.to_physical(t, vol.points[q]);
      cplx uv = u(x);
      Eigen::Vector2cd gu = grad_u(x);
      Eigen::Vector2cd agu = A.cast<cplx>() * gu;
      me += w * (omega * omega * mu * std::conj(uv) * v.cast<cplx>() +
                 gphys.cast<cplx>() *
                     Eigen::Vector2cd(std::conj(agu.x()), std::conj(agu.y())));
      target_sq += w * (omega * omega * mu * std::norm(uv) +
                        (agu.x() * std::conj(gu.x()) +
                         agu.y() * std::conj(gu.y()))
                            .real());
    }
    const std::vector<int>& nodes = conf.element_nodes[t];
    for (int i = 0; i < nloc; ++i) {
      moment(nodes[i]) += me(i);
      for (int j = 0; j < nloc; ++j) {
        trip.emplace_back(nodes[i], nodes[j], ge(i, j));
      }
    }
  }
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const Face& face = mesh.faces[f];
    if (face.label != FaceLabel::Robin) continue;
    double gam = ctx.coeffs.gamma[face.patch];
    int t = face.t_plus;
    const std::vector<int>& nodes = conf.element_nodes[t];
    for (size_t q = 0; q < er.points.size(); ++q) {
      Eigen::Vector2d xi = face_reference_point(mesh, f, t, er.points[q]);
      Eigen::VectorXd v = conf.basis.eval(xi);
      double w = er.weights[q] * face.length * omega * gam;
      Eigen::Vector2d x = mesh.to_physical(t, xi);
      cplx uv = u(x);
      for (int i = 0; i < nloc; ++i) {
        moment(nodes[i]) += w * v(i) * std::conj(uv);
        for (int j = 0; j < nloc; ++j) {
          trip.emplace_back(nodes[i], nodes[j], w * v(i) * v(j));
        }
      }
      target_sq += w * std::norm(uv);
    }
  }

  if (conf.n_free == 0) return std::sqrt(std::max(0.0, target_sq));
  std::vector<Eigen::Triplet<double>> ftrip;
  for (const auto& tr : trip) {
    int i = conf.free_index[tr.row()];
    int j = conf.free_index[tr.col()];
    if (i >= 0 && j >= 0) ftrip.emplace_back(i, j, tr.value());
  }
  Eigen::SparseMatrix<double> gff(conf.n_free, conf.n_free);
  gff.setFromTriplets(ftrip.begin(), ftrip.end());
  Eigen::VectorXd mr(conf.n_free), mi(conf.n_free);
  for (int g = 0; g < conf.n_nodes; ++g) {
    int i = conf.free_index[g];
    if (i >= 0) {
      mr(i) = moment(g).real();
      mi(i) = moment(g).imag();
    }
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(gff);
  if (ldlt.info() != Eigen::Success) {
    throw NumericalError("energy Gram factorization failed");
  }
  double reduced = mr.dot(ldlt.solve(mr)) + mi.dot(ldlt.solve(mi));
  return std::sqrt(std::max(0.0, target_sq - reduced));
}

Eigen::SparseMatrix<double> averaging_matrix(const ConformingSpace& conf,
                                             const BrokenSpace& broken) {
  if (conf.mesh != broken.mesh || conf.degree != broken.degree) {
    throw InputError("averaging requires matching mesh and degree");
  }
  const Mesh& mesh = *conf.mesh;
  std::vector<int> count(conf.n_nodes, 0);
  for (int t = 0; t < mesh.n_tris(); ++t) {
    for (int g : conf.element_nodes[t]) count[g] += 1;
  }
  std::vector<Eigen::Triplet<double>> trip;
  int nloc = conf.basis.dim;
  for (int t = 0; t < mesh.n_tris(); ++t) {
    int off = broken.offset(t);
    for (int k = 0; k < nloc; ++k) {
      int g = conf.element_nodes[t][k];
      if (conf.constrained[g]) continue;
      Eigen::VectorXd v = broken.basis.eval(conf.basis.nodes[k]);
      double w = 1.0 / count[g];
      for (int j = 0; j < broken.basis.dim; ++j) {
        if (v(j) != 0.0) trip.emplace_back(g, off + j, w * v(j));
      }
    }
  }
  Eigen::SparseMatrix<double> m(conf.n_nodes, broken.dim());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

double nonconformity_surrogate(const NormContext& n,
                               const Eigen::SparseMatrix<double>& embedding,
                               const Eigen::SparseMatrix<double>& averaging,
                               const Eigen::VectorXcd& broken) {
  Eigen::VectorXcd nodal = apply_real(averaging, broken);
  Eigen::VectorXcd r = broken - apply_real(embedding, nodal);
  return dagger1_norm(n, r);
}

double energy_error(const NormContext& n, const BrokenField& u_h,
                    const ScalarFn& u, const VectorFn& grad_u,
                    int quad_order) {
  const DgContext& ctx = *n.ctx;
  const Mesh& mesh = *ctx.mesh;
  double omega = ctx.coeffs.omega;
  if (quad_order < 0) quad_order = 2 * ctx.scalar.degree + 6;
  Eigen::VectorXcd g = discrete_gradient(ctx, u_h.coef);
  // The Dirichlet jump of the error is g_D - trace(u_h), so the exact
  // solution contributes the lifting of its own boundary trace.
  bool has_dirichlet = false;
  for (const Face& face : mesh.faces) {
    if (face.label == FaceLabel::Dirichlet) has_dirichlet = true;
  }
  Eigen::VectorXcd lift_u;
  if (has_dirichlet) lift_u = lift_dirichlet_trace(ctx, u);
  TriangleRule vol = triangle_rule(quad_order);
  double acc = 0.0;
  for (int t = 0; t < mesh.n_tris(); ++t) {
    const Eigen::Matrix2d& A = ctx.coeffs.A[mesh.region[t]];
    double mu = ctx.coeffs.mu[mesh.region[t]];
    for (size_t q = 0; q < vol.points.size(); ++q) {
      const Eigen::Vector2d& xi = vol.points[q];
      Eigen::Vector2d x = mesh.to_physical(t, xi);
      cplx e = u(x) - u_h.eval(t, xi);
      Eigen::Vector2cd eg = grad_u(x) - eval_vec(ctx, g, t, xi);
      if (has_dirichlet) eg -= eval_vec(ctx, lift_u, t, xi);
      Eigen::Vector2cd aeg = A.cast<cplx>() * eg;
      acc += vol.weights[q] * ctx.detJ[t] *
             (omega * omega * mu * std::norm(e) +
              (aeg.x() * std::conj(eg.x()) + aeg.y() * std::conj(eg.y()))
                  .real());
    }
  }
  EdgeRule er = edge_rule(quad_order);
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const Face& face = mesh.faces[f];
    if (face.label != FaceLabel::Robin) continue;
    double gam = ctx.coeffs.gamma[face.patch];
    for (size_t q = 0; q < er.points.size(); ++q) {
      Eigen::Vector2d xi =
          face_reference_point(mesh, f, face.t_plus, er.points[q]);
      Eigen::Vector2d x = mesh.to_physical(face.t_plus, xi);
      cplx e = u(x) - u_h.eval(face.t_plus, xi);
      acc += er.weights[q] * face.length * omega * gam * std::norm(e);
    }
  }
  return std::sqrt(std::max(0.0, acc));
}

double mu_l2_error(const NormContext& n, const BrokenField& u_h,
                   const ScalarFn& u, int quad_order) {
  const DgContext& ctx = *n.ctx;
  const Mesh& mesh = *ctx.mesh;
  if (quad_order < 0) quad_order = 2 * ctx.scalar.degree + 6;
  TriangleRule vol = triangle_rule(quad_order);
  double acc = 0.0;
  for (int t = 0; t < mesh.n_tris(); ++t) {
    double mu = ctx.coeffs.mu[mesh.region[t]];
    for (size_t q = 0; q < vol.points.size(); ++q) {
      Eigen::Vector2d x = mesh.to_physical(t, vol.points[q]);
      cplx e = u(x) - u_h.eval(t, vol.points[q]);
      acc += vol.weights[q] * ctx.detJ[t] * mu * std::norm(e);
    }
  }
  return std::sqrt(std::max(0.0, acc));
}

double robin_trace_error(const NormContext& n, const BrokenField& u_h,
                         const ScalarFn& u, int quad_order) {
  const DgContext& ctx = *n.ctx;
  const Mesh& mesh = *ctx.mesh;
  if (quad_order < 0) quad_order = 2 * ctx.scalar.degree + 6;
  EdgeRule er = edge_rule(quad_order);
  double acc = 0.0;
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const Face& face = mesh.faces[f];
    if (face.label != FaceLabel::Robin) continue;
    double gam = ctx.coeffs.gamma[face.patch];
    for (size_t q = 0; q < er.points.size(); ++q) {
      Eigen::Vector2d xi =
          face_reference_point(mesh, f, face.t_plus, er.points[q]);
      Eigen::Vector2d x = mesh.to_physical(face.t_plus, xi);
      cplx e = u(x) - u_h.eval(face.t_plus, xi);
      acc += er.weights[q] * face.length * gam * std::norm(e);
    }
  }
  return std::sqrt(std::max(0.0, acc));
}

double coercivity_margin(const NormContext& n, const ConformingSpace& conf,
                         const Eigen::SparseMatrix<double>& embedding) {
  const DgContext& ctx = *n.ctx;
  int dim = ctx.scalar.dim();
  if (dim > 2500) {
    throw CapabilityError("coercivity margin limited to 2500 broken dofs");
  }
  Eigen::MatrixXd s = Eigen::MatrixXd(ctx.S_pen);
  s = 0.5 * (s + s.transpose()).eval();
  Eigen::MatrixXd g1 = Eigen::MatrixXd(n.G1);
  g1 = 0.5 * (g1 + g1.transpose()).eval();

  Eigen::MatrixXd ef(dim, conf.n_free);
  if (conf.n_free > 0) {
    Eigen::MatrixXd efull = Eigen::MatrixXd(embedding);
    for (int g = 0; g < conf.n_nodes; ++g) {
      int i = conf.free_index[g];
      if (i >= 0) ef.col(i) = efull.col(g);
    }
  }
  Eigen::MatrixXd t;
  if (conf.n_free > 0) {
    Eigen::MatrixXd ge = g1 * ef;
    Eigen::MatrixXd core = ef.transpose() * ge;
    t = g1 - ge * core.ldlt().solve(ge.transpose());
  } else {
    t = g1;
  }
  t = 0.5 * (t + t.transpose()).eval();

  int nc = dim - conf.n_free;
  if (nc <= 0) return std::numeric_limits<double>::infinity();
  Eigen::MatrixXd q2;
  if (conf.n_free > 0) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(ef);
    Eigen::MatrixXd q = qr.householderQ();
    q2 = q.rightCols(nc);
  } else {
    q2 = Eigen::MatrixXd::Identity(dim, dim);
  }
  Eigen::MatrixXd ss = q2.transpose() * s * q2;
  Eigen::MatrixXd ts = q2.transpose() * t * q2;
  ss = 0.5 * (ss + ss.transpose()).eval();
  ts = 0.5 * (ts + ts.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(ss, ts);
  if (ges.info() != Eigen::Success) {
    throw NumericalError("coercivity eigensolve failed");
  }
  return ges.eigenvalues().minCoeff();
}

}  // namespace helmdg
