// SPDX-License-Identifier: Apache-2.0

#include "helmdg/dg_operators.hpp"

#include <cmath>

namespace helmdg {

namespace {

Eigen::MatrixXd reference_mass(const ScalarBasis& basis) {
  TriangleRule rule = triangle_rule(2 * basis.degree + 2);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(basis.dim, basis.dim);
  for (size_t q = 0; q < rule.points.size(); ++q) {
    Eigen::VectorXd v = basis.eval(rule.points[q]);
    M += rule.weights[q] * v * v.transpose();
  }
  return M;
}

struct FaceSide {
  int t;
  double weight;  // jump sign or average coefficient
};

void push_block(std::vector<Eigen::Triplet<double>>& trips, int row0, int col0,
                const Eigen::MatrixXd& block) {
  for (int i = 0; i < block.rows(); ++i) {
    for (int j = 0; j < block.cols(); ++j) {
      double v = block(i, j);
      if (v != 0.0) trips.emplace_back(row0 + i, col0 + j, v);
    }
  }
}

}  // namespace

double DgContext::beta_F(int f) const {
  double p = static_cast<double>(scalar.degree);
  return opt.beta0 * p * p * scalars.alpha_F[f];
}

DgContext make_context(const Mesh& mesh, const CoefficientSet& coeffs,
                       int degree, DgOptions opt) {
  if (degree < 1) throw InputError("make_context: degree must be >= 1");
  coeffs.validate();
  DgContext ctx;
  ctx.mesh = &mesh;
  ctx.coeffs = coeffs;
  ctx.scalars = mesh_scalars(mesh, coeffs);
  ctx.opt = opt;
  ctx.scalar = make_broken_space(mesh, degree);
  ctx.lift = make_broken_space(mesh, opt.lift_higher_order ? degree + 1 : degree);

  int nt = mesh.n_tris();
  ctx.JinvT.resize(nt);
  ctx.detJ.resize(nt);
  for (int t = 0; t < nt; ++t) {
    Eigen::Matrix2d J = mesh.jacobian(t);
    ctx.JinvT[t] = J.inverse().transpose();
    ctx.detJ[t] = std::abs(J.determinant());
  }

  int ms = ctx.scalar.block();
  int ml = ctx.lift.basis.dim;
  int N = ctx.scalar.dim();
  int NV = ctx.vec_dim();

  int vol_order = opt.volume_quad >= 0 ? opt.volume_quad : 2 * ctx.lift.degree + 2;
  int face_order = opt.face_quad >= 0 ? opt.face_quad : 2 * ctx.lift.degree + 2;
  TriangleRule vol = triangle_rule(vol_order);
  EdgeRule face_rule = edge_rule(face_order);
  int nq = static_cast<int>(vol.points.size());
  int nqf = static_cast<int>(face_rule.points.size());

  Eigen::MatrixXd svals(nq, ms), lvals(nq, ml);
  std::vector<Eigen::MatrixXd> sgrads(nq);
  for (int q = 0; q < nq; ++q) {
    svals.row(q) = ctx.scalar.basis.eval(vol.points[q]).transpose();
    lvals.row(q) = ctx.lift.basis.eval(vol.points[q]).transpose();
    sgrads[q] = ctx.scalar.basis.eval_grad(vol.points[q]);
  }
  Eigen::MatrixXd Mref_l = reference_mass(ctx.lift.basis);
  Eigen::PartialPivLU<Eigen::MatrixXd> Mref_l_lu(Mref_l);

  // Volume matrices.
  std::vector<Eigen::Triplet<double>> t_mmu, t_mavec, t_mainv, t_g0, t_minv;
  for (int t = 0; t < nt; ++t) {
    double dj = ctx.detJ[t];
    const Eigen::Matrix2d& A = coeffs.A[mesh.region[t]];
    Eigen::Matrix2d Ainv = A.inverse();
    double mu = ctx.scalars.mu_K[t];

    Eigen::MatrixXd Ms = Eigen::MatrixXd::Zero(ms, ms);
    for (int q = 0; q < nq; ++q) {
      Ms += vol.weights[q] * svals.row(q).transpose() * svals.row(q);
    }
    push_block(t_mmu, ctx.scalar.offset(t), ctx.scalar.offset(t), mu * dj * Ms);

    Eigen::MatrixXd Ml = dj * Mref_l;
    Eigen::MatrixXd Ml_inv = Mref_l_lu.solve(
        Eigen::MatrixXd::Identity(ml, ml)) / dj;
    for (int c1 = 0; c1 < 2; ++c1) {
      for (int c2 = 0; c2 < 2; ++c2) {
        push_block(t_mavec, ctx.vec_off(t, c1), ctx.vec_off(t, c2),
                   A(c1, c2) * Ml);
        push_block(t_mainv, ctx.vec_off(t, c1), ctx.vec_off(t, c2),
                   Ainv(c1, c2) * Ml);
      }
      push_block(t_minv, ctx.vec_off(t, c1), ctx.vec_off(t, c1), Ml_inv);
    }

    // Broken gradient: modal coefficients of each physical derivative.
    Eigen::MatrixXd Wx = Eigen::MatrixXd::Zero(ml, ms);
    Eigen::MatrixXd Wy = Eigen::MatrixXd::Zero(ml, ms);
    for (int q = 0; q < nq; ++q) {
      for (int j = 0; j < ms; ++j) {
        Eigen::Vector2d g = ctx.JinvT[t] * sgrads[q].row(j).transpose();
        Wx.col(j) += vol.weights[q] * g.x() * lvals.row(q).transpose();
        Wy.col(j) += vol.weights[q] * g.y() * lvals.row(q).transpose();
      }
    }
    push_block(t_g0, ctx.vec_off(t, 0), ctx.scalar.offset(t),
               Mref_l_lu.solve(Wx));
    push_block(t_g0, ctx.vec_off(t, 1), ctx.scalar.offset(t),
               Mref_l_lu.solve(Wy));
  }
  ctx.M_mu.resize(N, N);
  ctx.M_mu.setFromTriplets(t_mmu.begin(), t_mmu.end());
  ctx.MA_vec.resize(NV, NV);
  ctx.MA_vec.setFromTriplets(t_mavec.begin(), t_mavec.end());
  ctx.MAinv_vec.resize(NV, NV);
  ctx.MAinv_vec.setFromTriplets(t_mainv.begin(), t_mainv.end());
  ctx.G0.resize(NV, N);
  ctx.G0.setFromTriplets(t_g0.begin(), t_g0.end());
  Eigen::SparseMatrix<double> Minv_vec(NV, NV);
  Minv_vec.setFromTriplets(t_minv.begin(), t_minv.end());

  // Face matrices: Robin mass, penalty, and the lifting moment matrix.
  std::vector<Eigen::Triplet<double>> t_rg, t_pen, t_lift;
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const Face& face = mesh.faces[f];
    double len = face.length;

    if (face.label == FaceLabel::Robin) {
      int t = face.t_plus;
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(ms, ms);
      for (int q = 0; q < nqf; ++q) {
        Eigen::Vector2d xi =
            face_reference_point(mesh, f, t, face_rule.points[q]);
        Eigen::VectorXd v = ctx.scalar.basis.eval(xi);
        M += face_rule.weights[q] * v * v.transpose();
      }
      push_block(t_rg, ctx.scalar.offset(t), ctx.scalar.offset(t),
                 ctx.scalars.gamma_F[f] * len * M);
      continue;
    }
    if (face.label == FaceLabel::Neumann) continue;

    std::vector<FaceSide> phi_sides, w_sides;
    if (face.label == FaceLabel::Interior) {
      phi_sides = {{face.t_plus, 1.0}, {face.t_minus, -1.0}};
      w_sides = {{face.t_plus, 0.5}, {face.t_minus, 0.5}};
    } else {  // Dirichlet
      phi_sides = {{face.t_plus, 1.0}};
      w_sides = {{face.t_plus, 1.0}};
    }

    // Traces of scalar and lift bases at each quadrature point per side.
    std::vector<Eigen::MatrixXd> sv(phi_sides.size(), Eigen::MatrixXd(nqf, ms));
    std::vector<Eigen::MatrixXd> lv(w_sides.size(), Eigen::MatrixXd(nqf, ml));
    for (size_t sidei = 0; sidei < phi_sides.size(); ++sidei) {
      for (int q = 0; q < nqf; ++q) {
        Eigen::Vector2d xi = face_reference_point(mesh, f, phi_sides[sidei].t,
                                                  face_rule.points[q]);
        sv[sidei].row(q) = ctx.scalar.basis.eval(xi).transpose();
      }
    }
    for (size_t sidei = 0; sidei < w_sides.size(); ++sidei) {
      for (int q = 0; q < nqf; ++q) {
        Eigen::Vector2d xi = face_reference_point(mesh, f, w_sides[sidei].t,
                                                  face_rule.points[q]);
        lv[sidei].row(q) = ctx.lift.basis.eval(xi).transpose();
      }
    }

    // Penalty: beta_F / h_F with h_F = len cancels the face measure.
    double beta = ctx.beta_F(f);
    for (size_t si = 0; si < phi_sides.size(); ++si) {
      for (size_t sj = 0; sj < phi_sides.size(); ++sj) {
        Eigen::MatrixXd blockM = Eigen::MatrixXd::Zero(ms, ms);
        for (int q = 0; q < nqf; ++q) {
          blockM += face_rule.weights[q] * sv[si].row(q).transpose() *
                    sv[sj].row(q);
        }
        blockM *= beta * phi_sides[si].weight * phi_sides[sj].weight;
        push_block(t_pen, ctx.scalar.offset(phi_sides[si].t),
                   ctx.scalar.offset(phi_sides[sj].t), blockM);
      }
    }

    // Lifting moments: rows (w, both components), cols (phi).
    for (size_t sw = 0; sw < w_sides.size(); ++sw) {
      for (size_t sp = 0; sp < phi_sides.size(); ++sp) {
        Eigen::MatrixXd blockM = Eigen::MatrixXd::Zero(ml, ms);
        for (int q = 0; q < nqf; ++q) {
          blockM += face_rule.weights[q] * lv[sw].row(q).transpose() *
                    sv[sp].row(q);
        }
        blockM *= len * w_sides[sw].weight * phi_sides[sp].weight;
        push_block(t_lift, ctx.vec_off(w_sides[sw].t, 0),
                   ctx.scalar.offset(phi_sides[sp].t), face.normal.x() * blockM);
        push_block(t_lift, ctx.vec_off(w_sides[sw].t, 1),
                   ctx.scalar.offset(phi_sides[sp].t), face.normal.y() * blockM);
      }
    }
  }
  ctx.R_gamma.resize(N, N);
  ctx.R_gamma.setFromTriplets(t_rg.begin(), t_rg.end());
  ctx.P_pen.resize(N, N);
  ctx.P_pen.setFromTriplets(t_pen.begin(), t_pen.end());
  Eigen::SparseMatrix<double> R_lift(NV, N);
  R_lift.setFromTriplets(t_lift.begin(), t_lift.end());

  ctx.L = Minv_vec * R_lift;
  ctx.Gop = ctx.G0 - ctx.L;
  Eigen::SparseMatrix<double> MAL = ctx.MA_vec * ctx.L;
  ctx.S_pen = ctx.P_pen - Eigen::SparseMatrix<double>(ctx.L.transpose() * MAL);
  Eigen::SparseMatrix<double> MAG = ctx.MA_vec * ctx.Gop;
  ctx.A_dg = Eigen::SparseMatrix<double>(ctx.Gop.transpose() * MAG) + ctx.S_pen;
  return ctx;
}

Eigen::SparseMatrix<double> assemble_jump_form(const DgContext& ctx) {
  const Mesh& mesh = *ctx.mesh;
  int ms = ctx.scalar.block();
  int N = ctx.scalar.dim();
  int vol_order =
      ctx.opt.volume_quad >= 0 ? ctx.opt.volume_quad : 2 * ctx.lift.degree + 2;
  int face_order =
      ctx.opt.face_quad >= 0 ? ctx.opt.face_quad : 2 * ctx.lift.degree + 2;
  TriangleRule vol = triangle_rule(vol_order);
  EdgeRule face_rule = edge_rule(face_order);
  int nq = static_cast<int>(vol.points.size());
  int nqf = static_cast<int>(face_rule.points.size());

  std::vector<Eigen::Triplet<double>> trips;

  for (int t = 0; t < mesh.n_tris(); ++t) {
    const Eigen::Matrix2d& A = ctx.coeffs.A[mesh.region[t]];
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(ms, ms);
    for (int q = 0; q < nq; ++q) {
      Eigen::MatrixXd g = ctx.scalar.basis.eval_grad(vol.points[q]);
      Eigen::MatrixXd gp(ms, 2);
      for (int j = 0; j < ms; ++j) {
        gp.row(j) = (ctx.JinvT[t] * g.row(j).transpose()).transpose();
      }
      K += vol.weights[q] * gp * A * gp.transpose();
    }
    push_block(trips, ctx.scalar.offset(t), ctx.scalar.offset(t),
               ctx.detJ[t] * K);
  }

  for (int f = 0; f < mesh.n_faces(); ++f) {
    const Face& face = mesh.faces[f];
    if (face.label == FaceLabel::Neumann || face.label == FaceLabel::Robin) {
      continue;
    }
    double len = face.length;
    std::vector<FaceSide> jump_sides, avg_sides;
    if (face.label == FaceLabel::Interior) {
      jump_sides = {{face.t_plus, 1.0}, {face.t_minus, -1.0}};
      avg_sides = {{face.t_plus, 0.5}, {face.t_minus, 0.5}};
    } else {
      jump_sides = {{face.t_plus, 1.0}};
      avg_sides = {{face.t_plus, 1.0}};
    }

    // Traces: values and conormal derivatives A grad(.) . n_F per side.
    auto values = [&](int t) {
      Eigen::MatrixXd V(nqf, ms);
      for (int q = 0; q < nqf; ++q) {
        V.row(q) = ctx.scalar.basis
                       .eval(face_reference_point(mesh, f, t,
                                                  face_rule.points[q]))
                       .transpose();
      }
      return V;
    };
    auto conormal = [&](int t) {
      const Eigen::Matrix2d& A = ctx.coeffs.A[mesh.region[t]];
      Eigen::MatrixXd D(nqf, ms);
      for (int q = 0; q < nqf; ++q) {
        Eigen::MatrixXd g = ctx.scalar.basis.eval_grad(
            face_reference_point(mesh, f, t, face_rule.points[q]));
        for (int j = 0; j < ms; ++j) {
          Eigen::Vector2d gp = ctx.JinvT[t] * g.row(j).transpose();
          D(q, j) = (A * gp).dot(face.normal);
        }
      }
      return D;
    };

    std::vector<Eigen::MatrixXd> jv, av;
    for (const auto& s : jump_sides) jv.push_back(values(s.t));
    for (const auto& s : avg_sides) av.push_back(conormal(s.t));

    double beta = ctx.beta_F(f);
    for (size_t si = 0; si < jump_sides.size(); ++si) {
      for (size_t sj = 0; sj < jump_sides.size(); ++sj) {
        Eigen::MatrixXd blockM = Eigen::MatrixXd::Zero(ms, ms);
        for (int q = 0; q < nqf; ++q) {
          blockM += face_rule.weights[q] * jv[si].row(q).transpose() *
                    jv[sj].row(q);
        }
        push_block(trips, ctx.scalar.offset(jump_sides[si].t),
                   ctx.scalar.offset(jump_sides[sj].t),
                   beta * jump_sides[si].weight * jump_sides[sj].weight *
                       blockM);
      }
    }
    // -(avg A grad phi . n, jump v) and its transpose partner.
    for (size_t sv = 0; sv < jump_sides.size(); ++sv) {
      for (size_t sp = 0; sp < avg_sides.size(); ++sp) {
        Eigen::MatrixXd blockM = Eigen::MatrixXd::Zero(ms, ms);
        for (int q = 0; q < nqf; ++q) {
          blockM += face_rule.weights[q] * jv[sv].row(q).transpose() *
                    av[sp].row(q);
        }
        blockM *= len * jump_sides[sv].weight * avg_sides[sp].weight;
        // rows test (v), cols trial (phi)
        push_block(trips, ctx.scalar.offset(jump_sides[sv].t),
                   ctx.scalar.offset(avg_sides[sp].t), -blockM);
        push_block(trips, ctx.scalar.offset(avg_sides[sp].t),
                   ctx.scalar.offset(jump_sides[sv].t), -blockM.transpose());
      }
    }
  }

  Eigen::SparseMatrix<double> Aj(N, N);
  Aj.setFromTriplets(trips.begin(), trips.end());
  return Aj;
}

Eigen::SparseMatrix<cplx> helmholtz_matrix(const DgContext& ctx) {
  double w = ctx.coeffs.omega;
  Eigen::SparseMatrix<cplx> B =
      ctx.A_dg.cast<cplx>() - (w * w) * ctx.M_mu.cast<cplx>();
  B -= cplx(0.0, w) * ctx.R_gamma.cast<cplx>();
  return B;
}

Eigen::VectorXcd assemble_rhs(const DgContext& ctx, const ScalarFn& f,
                              const BoundaryFn& g_neumann,
                              const BoundaryFn& g_robin,
                              const ScalarFn& g_dirichlet) {
  const Mesh& mesh = *ctx.mesh;
  int ms = ctx.scalar.block();
  int data_order =
      ctx.opt.data_quad >= 0 ? ctx.opt.data_quad : 2 * ctx.scalar.degree + 4;
  TriangleRule vol = triangle_rule(data_order);
  EdgeRule face_rule = edge_rule(data_order);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(ctx.scalar.dim());

  if (f) {
    for (int t = 0; t < mesh.n_tris(); ++t) {
      for (size_t q = 0; q < vol.points.size(); ++q) {
        cplx fv = f(mesh.to_physical(t, vol.points[q]));
        Eigen::VectorXd v = ctx.scalar.basis.eval(vol.points[q]);
        rhs.segment(ctx.scalar.offset(t), ms) +=
            (vol.weights[q] * ctx.detJ[t] * fv) * v.cast<cplx>();
      }
    }
  }

  for (int fidx = 0; fidx < mesh.n_faces(); ++fidx) {
    const Face& face = mesh.faces[fidx];
    if (face.t_minus >= 0) continue;
    int t = face.t_plus;
    double len = face.length;
    if (face.label == FaceLabel::Neumann || face.label == FaceLabel::Robin) {
      const BoundaryFn& g =
          face.label == FaceLabel::Neumann ? g_neumann : g_robin;
      if (!g) continue;
      for (size_t q = 0; q < face_rule.points.size(); ++q) {
        double s = face_rule.points[q];
        Eigen::Vector2d xi = face_reference_point(mesh, fidx, t, s);
        Eigen::Vector2d x = mesh.to_physical(t, xi);
        cplx gv = g(x, face.normal);
        Eigen::VectorXd v = ctx.scalar.basis.eval(xi);
        rhs.segment(ctx.scalar.offset(t), ms) +=
            (face_rule.weights[q] * len * gv) * v.cast<cplx>();
      }
    } else if (face.label == FaceLabel::Dirichlet) {
      if (!g_dirichlet) continue;
      const Eigen::Matrix2d& A = ctx.coeffs.A[mesh.region[t]];
      double beta = ctx.beta_F(fidx);
      for (size_t q = 0; q < face_rule.points.size(); ++q) {
        double s = face_rule.points[q];
        Eigen::Vector2d xi = face_reference_point(mesh, fidx, t, s);
        Eigen::Vector2d x = mesh.to_physical(t, xi);
        cplx gv = g_dirichlet(x);
        Eigen::VectorXd v = ctx.scalar.basis.eval(xi);
        Eigen::MatrixXd g = ctx.scalar.basis.eval_grad(xi);
        Eigen::VectorXd conormal(ms);
        for (int j = 0; j < ms; ++j) {
          Eigen::Vector2d gp = ctx.JinvT[t] * g.row(j).transpose();
          conormal(j) = (A * gp).dot(face.normal);
        }
        // (beta_F / h_F)(g, v)_F with the face measure cancelling h_F.
        rhs.segment(ctx.scalar.offset(t), ms) +=
            (face_rule.weights[q] * beta * gv) * v.cast<cplx>();
        rhs.segment(ctx.scalar.offset(t), ms) -=
            (face_rule.weights[q] * len * gv) * conormal.cast<cplx>();
      }
    }
  }
  return rhs;
}

cplx jump_scalar(const DgContext& ctx, const BrokenField& field, int f,
                 double s) {
  const Mesh& mesh = *ctx.mesh;
  const Face& face = mesh.faces[f];
  if (face.label == FaceLabel::Neumann || face.label == FaceLabel::Robin) {
    return 0.0;
  }
  cplx up =
      field.eval(face.t_plus, face_reference_point(mesh, f, face.t_plus, s));
  if (face.label == FaceLabel::Dirichlet) return up;
  cplx um =
      field.eval(face.t_minus, face_reference_point(mesh, f, face.t_minus, s));
  return up - um;
}

cplx avg_Agrad_n(const DgContext& ctx, const BrokenField& field, int f,
                 double s) {
  const Mesh& mesh = *ctx.mesh;
  const Face& face = mesh.faces[f];
  auto conormal = [&](int t) {
    const Eigen::Matrix2d& A = ctx.coeffs.A[mesh.region[t]];
    Eigen::Vector2cd g = field.grad(t, face_reference_point(mesh, f, t, s));
    return (A(0, 0) * g.x() + A(0, 1) * g.y()) * face.normal.x() +
           (A(1, 0) * g.x() + A(1, 1) * g.y()) * face.normal.y();
  };
  if (face.t_minus < 0) return conormal(face.t_plus);
  return 0.5 * (conormal(face.t_plus) + conormal(face.t_minus));
}

cplx jump_Agrad_n(const DgContext& ctx, const BrokenField& field, int f,
                  double s) {
  const Mesh& mesh = *ctx.mesh;
  const Face& face = mesh.faces[f];
  if (face.t_minus < 0) {
    throw InputError("jump_Agrad_n: boundary face");
  }
  auto conormal = [&](int t) {
    const Eigen::Matrix2d& A = ctx.coeffs.A[mesh.region[t]];
    Eigen::Vector2cd g = field.grad(t, face_reference_point(mesh, f, t, s));
    return (A(0, 0) * g.x() + A(0, 1) * g.y()) * face.normal.x() +
           (A(1, 0) * g.x() + A(1, 1) * g.y()) * face.normal.y();
  };
  return conormal(face.t_plus) - conormal(face.t_minus);
}

Eigen::VectorXcd apply_lifting(const DgContext& ctx,
                               const Eigen::VectorXcd& coef) {
  return ctx.L.cast<cplx>() * coef;
}

Eigen::VectorXcd discrete_gradient(const DgContext& ctx,
                                   const Eigen::VectorXcd& coef) {
  return ctx.Gop.cast<cplx>() * coef;
}

Eigen::VectorXcd lift_dirichlet_trace(const DgContext& ctx,
                                      const ScalarFn& g) {
  const Mesh& mesh = *ctx.mesh;
  int ml = ctx.lift.basis.dim;
  Eigen::VectorXcd r = Eigen::VectorXcd::Zero(ctx.vec_dim());
  EdgeRule er = edge_rule(2 * ctx.lift.degree + 6);
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const Face& face = mesh.faces[f];
    if (face.label != FaceLabel::Dirichlet) continue;
    int t = face.t_plus;
    for (size_t q = 0; q < er.points.size(); ++q) {
      Eigen::Vector2d xi = face_reference_point(mesh, f, t, er.points[q]);
      cplx gv = g(mesh.to_physical(t, xi));
      Eigen::VectorXd lv = ctx.lift.basis.eval(xi);
      cplx w = er.weights[q] * face.length * gv;
      for (int j = 0; j < ml; ++j) {
        r(ctx.vec_off(t, 0) + j) += w * lv(j) * face.normal.x();
        r(ctx.vec_off(t, 1) + j) += w * lv(j) * face.normal.y();
      }
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> mref(reference_mass(ctx.lift.basis));
  for (int t = 0; t < mesh.n_tris(); ++t) {
    for (int comp = 0; comp < 2; ++comp) {
      Eigen::VectorXcd seg = r.segment(ctx.vec_off(t, comp), ml);
      Eigen::VectorXd re = mref.solve(seg.real().eval());
      Eigen::VectorXd im = mref.solve(seg.imag().eval());
      r.segment(ctx.vec_off(t, comp), ml) =
          (re.cast<cplx>() + cplx(0.0, 1.0) * im.cast<cplx>()) / ctx.detJ[t];
    }
  }
  return r;
}

Eigen::Vector2cd eval_vec(const DgContext& ctx, const Eigen::VectorXcd& vec,
                          int t, const Eigen::Vector2d& xi) {
  Eigen::VectorXd v = ctx.lift.basis.eval(xi);
  Eigen::Vector2cd out = Eigen::Vector2cd::Zero();
  for (int i = 0; i < ctx.lift.basis.dim; ++i) {
    out.x() += vec(ctx.vec_off(t, 0) + i) * v(i);
    out.y() += vec(ctx.vec_off(t, 1) + i) * v(i);
  }
  return out;
}

}  // namespace helmdg
