// SPDX-License-Identifier: Apache-2.0

#include "helmdg/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <utility>

#include "helmdg/dg_operators.hpp"

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

// div(A grad u_h) at a reference point of element t, for piecewise
// constant A: contract A with the physical Hessian.
cplx div_A_grad(const DgContext& ctx, const BrokenField& field, int t,
                const Eigen::Vector2d& xi) {
  const Eigen::Matrix2d& A = ctx.coeffs.A[ctx.mesh->region[t]];
  Eigen::MatrixXd href = ctx.scalar.basis.eval_hess(xi);
  const Eigen::VectorXcd& c = field.coef;
  int off = ctx.scalar.offset(t);
  cplx hxx = 0.0, hxy = 0.0, hyy = 0.0;
  for (int j = 0; j < ctx.scalar.basis.dim; ++j) {
    hxx += c(off + j) * href(j, 0);
    hxy += c(off + j) * href(j, 1);
    hyy += c(off + j) * href(j, 2);
  }
  Eigen::Matrix2cd hr;
  hr << hxx, hxy, hxy, hyy;
  const Eigen::Matrix2d& Ji = ctx.JinvT[t];
  Eigen::Matrix2cd hp = Ji.cast<cplx>() * hr * Ji.transpose().cast<cplx>();
  return A(0, 0) * hp(0, 0) + (A(0, 1) + A(1, 0)) * hp(0, 1) +
         A(1, 1) * hp(1, 1);
}

cplx conormal_trace(const DgContext& ctx, const BrokenField& field, int t,
                    const Eigen::Vector2d& xi, const Eigen::Vector2d& n) {
  const Eigen::Matrix2d& A = ctx.coeffs.A[ctx.mesh->region[t]];
  Eigen::Vector2cd g = field.grad(t, xi);
  return (A(0, 0) * g.x() + A(0, 1) * g.y()) * n.x() +
         (A(1, 0) * g.x() + A(1, 1) * g.y()) * n.y();
}

// Elements sharing at least one vertex with each element, itself included.
std::vector<std::vector<int>> vertex_patches(const Mesh& mesh) {
  std::vector<std::vector<int>> at_vertex(mesh.n_vertices());
  for (int t = 0; t < mesh.n_tris(); ++t) {
    for (int v : mesh.tris[t]) at_vertex[v].push_back(t);
  }
  std::vector<std::vector<int>> patch(mesh.n_tris());
  for (int t = 0; t < mesh.n_tris(); ++t) {
    for (int v : mesh.tris[t]) {
      for (int s : at_vertex[v]) patch[t].push_back(s);
    }
    std::sort(patch[t].begin(), patch[t].end());
    patch[t].erase(std::unique(patch[t].begin(), patch[t].end()),
                   patch[t].end());
  }
  return patch;
}

void append_num(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  line += buf;
}

}  // namespace

EstimatorReport compute_eta(const NormContext& n, const BrokenField& u_h,
                            const ScalarFn& f, const ScalarFn& g_dirichlet,
                            const BoundaryFn& g_neumann,
                            const BoundaryFn& g_robin, int quad_order) {
  const DgContext& ctx = *n.ctx;
  const Mesh& mesh = *ctx.mesh;
  const MeshScalars& sc = ctx.scalars;
  double omega = ctx.coeffs.omega;
  if (quad_order < 0) quad_order = 2 * ctx.scalar.degree + 6;
  int nt = mesh.n_tris();

  EstimatorReport rep;
  rep.term_volume.assign(nt, 0.0);
  rep.term_flux_jump.assign(nt, 0.0);
  rep.term_solution_jump.assign(nt, 0.0);
  rep.term_dirichlet.assign(nt, 0.0);
  rep.term_neumann.assign(nt, 0.0);
  rep.term_robin.assign(nt, 0.0);
  rep.eta_K.assign(nt, 0.0);

  TriangleRule vol = triangle_rule(quad_order);
  for (int t = 0; t < nt; ++t) {
    double mu = sc.mu_K[t];
    double acc = 0.0;
    for (size_t q = 0; q < vol.points.size(); ++q) {
      const Eigen::Vector2d& xi = vol.points[q];
      Eigen::Vector2d x = mesh.to_physical(t, xi);
      cplx r = omega * omega * mu * u_h.eval(t, xi) +
               div_A_grad(ctx, u_h, t, xi);
      if (f) r += f(x);
      acc += vol.weights[q] * ctx.detJ[t] * std::norm(r);
    }
    rep.term_volume[t] =
        sc.h_K[t] * sc.h_K[t] / sc.alpha_K[t] * acc;
  }

  EdgeRule er = edge_rule(quad_order);
  double rc_jumps = 0.0;
  for (int fc = 0; fc < mesh.n_faces(); ++fc) {
    const Face& face = mesh.faces[fc];
    int tp = face.t_plus;
    if (face.label == FaceLabel::Interior) {
      int tm = face.t_minus;
      double flux_sq = 0.0, jump_sq = 0.0;
      for (size_t q = 0; q < er.points.size(); ++q) {
        double s = er.points[q];
        double w = er.weights[q] * face.length;
        flux_sq += w * std::norm(jump_Agrad_n(ctx, u_h, fc, s));
        jump_sq += w * std::norm(jump_scalar(ctx, u_h, fc, s));
      }
      for (int t : {tp, tm}) {
        rep.term_flux_jump[t] += sc.h_K[t] / sc.alpha_K[t] * flux_sq;
        rep.term_solution_jump[t] += sc.alpha_K[t] / sc.h_K[t] * jump_sq;
        rc_jumps += sc.alpha_K[t] / sc.h_K[t] * jump_sq;
      }
      continue;
    }
    double res_sq = 0.0, trace_sq = 0.0;
    for (size_t q = 0; q < er.points.size(); ++q) {
      Eigen::Vector2d xi = face_reference_point(mesh, fc, tp, er.points[q]);
      Eigen::Vector2d x = mesh.to_physical(tp, xi);
      double w = er.weights[q] * face.length;
      cplx uv = u_h.eval(tp, xi);
      switch (face.label) {
        case FaceLabel::Dirichlet: {
          cplx r = uv;
          if (g_dirichlet) r -= g_dirichlet(x);
          res_sq += w * std::norm(r);
          trace_sq += w * std::norm(uv);
          break;
        }
        case FaceLabel::Neumann: {
          cplx r = conormal_trace(ctx, u_h, tp, xi, face.normal);
          if (g_neumann) r -= g_neumann(x, face.normal);
          res_sq += w * std::norm(r);
          break;
        }
        default: {  // Robin
          cplx r = conormal_trace(ctx, u_h, tp, xi, face.normal) -
                   cplx(0.0, omega) * sc.gamma_F[fc] * uv;
          if (g_robin) r -= g_robin(x, face.normal);
          res_sq += w * std::norm(r);
          break;
        }
      }
    }
    if (face.label == FaceLabel::Dirichlet) {
      rep.term_dirichlet[tp] += sc.alpha_F[fc] / face.length * res_sq;
      rc_jumps += sc.alpha_K[tp] / sc.h_K[tp] * trace_sq;
    } else if (face.label == FaceLabel::Neumann) {
      rep.term_neumann[tp] += face.length / sc.alpha_F[fc] * res_sq;
    } else {
      rep.term_robin[tp] += face.length / sc.alpha_F[fc] * res_sq;
    }
  }

  double total_sq = 0.0;
  for (int t = 0; t < nt; ++t) {
    double sq = rep.term_volume[t] + rep.term_flux_jump[t] +
                rep.term_solution_jump[t] + rep.term_dirichlet[t] +
                rep.term_neumann[t] + rep.term_robin[t];
    rep.eta_K[t] = std::sqrt(sq);
    total_sq += sq;
  }
  rep.eta = std::sqrt(total_sq);

  ConformingSpace conf = make_conforming_space(mesh, ctx.scalar.degree);
  Eigen::SparseMatrix<double> E = conforming_embedding(conf, ctx.scalar);
  Eigen::SparseMatrix<double> J = averaging_matrix(conf, ctx.scalar);
  rep.rc_surrogate = nonconformity_surrogate(n, E, J, u_h.coef);
  double amp = std::max(
      {1.0, sc.omega_h_theta_F_star,
       sc.omega_h_theta_K_star * sc.omega_h_theta_K_star});
  rep.rc_jump_bound = std::sqrt(amp * rc_jumps);
  return rep;
}

void attach_oscillation(EstimatorReport& rep, const NormContext& n,
                        const ScalarFn& f, int quad_order) {
  const DgContext& ctx = *n.ctx;
  const Mesh& mesh = *ctx.mesh;
  if (quad_order < 0) quad_order = 2 * ctx.scalar.degree + 8;
  int nt = mesh.n_tris();
  std::vector<double> elem(nt, 0.0);
  if (f) {
    TriangleRule vol = triangle_rule(quad_order);
    Eigen::PartialPivLU<Eigen::MatrixXd> mref(
        reference_mass(ctx.scalar.basis));
    int m = ctx.scalar.basis.dim;
    size_t nq = vol.points.size();
    Eigen::MatrixXd vals(nq, m);
    for (size_t q = 0; q < nq; ++q) {
      vals.row(q) = ctx.scalar.basis.eval(vol.points[q]).transpose();
    }
    std::vector<cplx> fv(nq);
    for (int t = 0; t < nt; ++t) {
      Eigen::VectorXcd mom = Eigen::VectorXcd::Zero(m);
      for (size_t q = 0; q < nq; ++q) {
        fv[q] = f(mesh.to_physical(t, vol.points[q]));
        mom += (vol.weights[q] * fv[q]) * vals.row(q).transpose().cast<cplx>();
      }
      // Best polynomial fit on the reference domain; the minimum is taken as
      // the quadrature sum of the pointwise residual, which stays exact to
      // roundoff when f itself lies in the space.
      Eigen::VectorXcd coef(m);
      coef.real() = mref.solve(mom.real().eval());
      coef.imag() = mref.solve(mom.imag().eval());
      double min_sq = 0.0;
      for (size_t q = 0; q < nq; ++q) {
        cplx fit = (vals.row(q).cast<cplx>() * coef).value();
        min_sq += vol.weights[q] * std::norm(fv[q] - fit);
      }
      min_sq *= ctx.detJ[t];
      elem[t] = ctx.scalars.h_K[t] * ctx.scalars.h_K[t] *
                ctx.scalars.mu_K[t] * min_sq;
    }
  }
  std::vector<std::vector<int>> patch = vertex_patches(mesh);
  rep.osc_patch.assign(nt, 0.0);
  double total = 0.0;
  for (int t = 0; t < nt; ++t) {
    double acc = 0.0;
    for (int s : patch[t]) acc += elem[s];
    rep.osc_patch[t] = std::sqrt(acc);
    total += elem[t];
  }
  rep.osc_total = std::sqrt(total);
}

double effectivity(EstimatorReport& rep, double error) {
  if (error == 0.0) {
    rep.degenerate = true;
    rep.effectivity =
        rep.eta == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  } else {
    rep.effectivity = rep.eta / error;
  }
  return rep.effectivity;
}

std::vector<double> patch_local_error(const NormContext& n,
                                      const BrokenField& u_h, const ScalarFn& u,
                                      const VectorFn& grad_u, int quad_order) {
  const DgContext& ctx = *n.ctx;
  const Mesh& mesh = *ctx.mesh;
  double omega = ctx.coeffs.omega;
  if (quad_order < 0) quad_order = 2 * ctx.scalar.degree + 6;
  int nt = mesh.n_tris();
  std::vector<double> elem(nt, 0.0);
  TriangleRule vol = triangle_rule(quad_order);
  for (int t = 0; t < nt; ++t) {
    const Eigen::Matrix2d& A = ctx.coeffs.A[mesh.region[t]];
    double mu = ctx.scalars.mu_K[t];
    double acc = 0.0;
    for (size_t q = 0; q < vol.points.size(); ++q) {
      const Eigen::Vector2d& xi = vol.points[q];
      Eigen::Vector2d x = mesh.to_physical(t, xi);
      cplx e = u(x) - u_h.eval(t, xi);
      Eigen::Vector2cd eg = grad_u(x) - u_h.grad(t, xi);
      Eigen::Vector2cd aeg = A.cast<cplx>() * eg;
      acc += vol.weights[q] * ctx.detJ[t] *
             (omega * omega * mu * std::norm(e) +
              (aeg.x() * std::conj(eg.x()) + aeg.y() * std::conj(eg.y()))
                  .real());
    }
    elem[t] = acc;
  }
  EdgeRule er = edge_rule(quad_order);
  for (int fc = 0; fc < mesh.n_faces(); ++fc) {
    const Face& face = mesh.faces[fc];
    if (face.label != FaceLabel::Robin) continue;
    int t = face.t_plus;
    double acc = 0.0;
    for (size_t q = 0; q < er.points.size(); ++q) {
      Eigen::Vector2d xi = face_reference_point(mesh, fc, t, er.points[q]);
      cplx e = u(mesh.to_physical(t, xi)) - u_h.eval(t, xi);
      acc += er.weights[q] * face.length * std::norm(e);
    }
    elem[t] += omega * ctx.scalars.gamma_F[fc] * acc;
  }
  std::vector<std::vector<int>> patch = vertex_patches(mesh);
  std::vector<double> out(nt, 0.0);
  for (int t = 0; t < nt; ++t) {
    double acc = 0.0;
    for (int s : patch[t]) acc += elem[s];
    out[t] = std::sqrt(acc);
  }
  return out;
}

void write_estimator_csv(const EstimatorReport& rep, const Mesh& mesh,
                         std::ostream& out) {
  out << "# helmdg-estimator v1\n";
  out << "# columns: element,volume,flux_jump,solution_jump,dirichlet,"
         "neumann,robin,eta_K\n";
  for (int t = 0; t < mesh.n_tris(); ++t) {
    std::string line = std::to_string(t);
    for (double sq :
         {rep.term_volume[t], rep.term_flux_jump[t], rep.term_solution_jump[t],
          rep.term_dirichlet[t], rep.term_neumann[t], rep.term_robin[t]}) {
      line += ',';
      append_num(line, std::sqrt(sq));
    }
    line += ',';
    append_num(line, rep.eta_K[t]);
    out << line << '\n';
  }
  const std::pair<const char*, double> summary[] = {
      {"eta", rep.eta},
      {"rc_surrogate", rep.rc_surrogate},
      {"rc_jump_bound", rep.rc_jump_bound},
      {"osc_total", rep.osc_total},
      {"effectivity", rep.effectivity}};
  for (const auto& [key, value] : summary) {
    std::string line = "# ";
    line += key;
    line += '=';
    append_num(line, value);
    out << line << '\n';
  }
  out << "# degenerate=" << (rep.degenerate ? 1 : 0) << '\n';
}

double ApproximationFactors::gba_g() const { return std::sqrt(gba_g_sq()); }
double ApproximationFactors::gba_d() const { return std::sqrt(gba_d_sq()); }
double ApproximationFactors::gba_check() const {
  return std::sqrt(gba_check_sq());
}
double ApproximationFactors::gba_tilde() const {
  return std::sqrt(gba_tilde_sq());
}
double ApproximationFactors::gba() const { return std::sqrt(gba_sq()); }

ReliabilityReport reliability_check(double energy_err, double mu_err,
                                    double robin_err,
                                    const EstimatorReport& rep,
                                    const ApproximationFactors& factors,
                                    double plausibility_bound) {
  ReliabilityReport out;
  out.R = std::sqrt(rep.eta * rep.eta +
                    rep.rc_surrogate * rep.rc_surrogate);
  auto ratio = [](double num, double denom) {
    if (denom == 0.0) {
      return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return num / denom;
  };
  out.main_ratio =
      ratio(energy_err, std::sqrt(1.0 + factors.gba_sq()) * out.R);
  out.weak_mu_ratio = ratio(mu_err, factors.gba_check() * out.R);
  double tilde = factors.gba_tilde();
  if (tilde == 0.0 && robin_err == 0.0) {
    out.robin_degenerate = true;
    out.weak_robin_ratio = 0.0;
  } else {
    out.weak_robin_ratio = ratio(robin_err, tilde * out.R);
  }
  out.pass = out.main_ratio <= plausibility_bound &&
             out.weak_mu_ratio <= plausibility_bound &&
             out.weak_robin_ratio <= plausibility_bound;
  return out;
}

}  // namespace helmdg
