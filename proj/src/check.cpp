// SPDX-License-Identifier: Apache-2.0

#include "helmdg/check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "helmdg/norms.hpp"
#include "helmdg/solver.hpp"

namespace helmdg {
namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

void report(std::ostream& log, int& failures, const std::string& name,
            const std::string& stats, double value, double bound) {
  const bool ok = value <= bound;
  log << name << ": " << stats << " max " << sci(value) << " tol " << sci(bound)
      << (ok ? " PASS" : " FAIL") << "\n";
  if (!ok) ++failures;
}

BoundaryRule mixed_rule() {
  return [](const Eigen::Vector2d&, const Eigen::Vector2d& n) {
    BoundaryAssignment ba;
    if (n.y() < -0.5) {
      ba.label = FaceLabel::Neumann;
    } else if (n.x() > 0.5) {
      ba.label = FaceLabel::Robin;
      ba.patch = 0;
    } else {
      ba.label = FaceLabel::Dirichlet;
    }
    return ba;
  };
}

CoefficientSet reference_coeffs() {
  CoefficientSet coeffs;
  coeffs.omega = 1.7;
  coeffs.mu = {1.3};
  Eigen::Matrix2d A;
  A << 1.4, 0.2, 0.2, 0.9;
  coeffs.A = {A};
  coeffs.gamma = {0.8};
  return coeffs;
}

Eigen::VectorXcd random_cvec(Pcg32& rng, int n) {
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i)
    v[i] = cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  return v;
}

double max_abs(const Eigen::SparseMatrix<double>& m) {
  double out = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
      out = std::max(out, std::abs(it.value()));
  return out;
}

// The lifting is pinned by its face moments: against every member of the
// vector test space, the mass moment of the lifted field equals the jump
// moment of the scalar field. Both sides are rebuilt here from quadrature,
// independently of the operator assembly.
void check_lifting(std::ostream& log, int& failures) {
  struct Cfg {
    int n, p, fields;
  };
  const Cfg cfgs[] = {{16, 1, 168}, {8, 2, 166}, {4, 3, 166}};
  Pcg32 rng(101u);
  double worst = 0.0;
  int total = 0;
  for (const Cfg& cfg : cfgs) {
    Mesh mesh = unit_square_mesh(cfg.n, mixed_rule());
    DgContext ctx = make_context(mesh, reference_coeffs(), cfg.p);
    const ScalarBasis& lb = ctx.lift.basis;
    const int nl = lb.dim;

    TriangleRule tr = triangle_rule(2 * ctx.lift.degree + 2);
    Eigen::MatrixXd mref = Eigen::MatrixXd::Zero(nl, nl);
    for (std::size_t q = 0; q < tr.points.size(); ++q) {
      Eigen::VectorXd v = lb.eval(tr.points[q]);
      mref += tr.weights[q] * v * v.transpose();
    }

    EdgeRule er = edge_rule(2 * std::max(ctx.lift.degree, cfg.p) + 4);
    const int nqf = int(er.points.size());
    std::vector<Eigen::Triplet<double>> tm;
    struct Side {
      int t;
      double w;
    };
    for (int f = 0; f < mesh.n_faces(); ++f) {
      const Face& face = mesh.faces[f];
      if (face.label == FaceLabel::Neumann || face.label == FaceLabel::Robin)
        continue;
      std::vector<Side> phi_sides, w_sides;
      if (face.label == FaceLabel::Interior) {
        phi_sides = {{face.t_plus, 1.0}, {face.t_minus, -1.0}};
        w_sides = {{face.t_plus, 0.5}, {face.t_minus, 0.5}};
      } else {
        phi_sides = {{face.t_plus, 1.0}};
        w_sides = {{face.t_plus, 1.0}};
      }
      for (const Side& sw : w_sides) {
        for (const Side& sp : phi_sides) {
          Eigen::MatrixXd block = Eigen::MatrixXd::Zero(nl, ctx.scalar.block());
          for (int q = 0; q < nqf; ++q) {
            const double s = er.points[q];
            Eigen::VectorXd lv =
                lb.eval(face_reference_point(mesh, f, sw.t, s));
            Eigen::VectorXd sv = ctx.scalar.basis.eval(
                face_reference_point(mesh, f, sp.t, s));
            block += er.weights[q] * lv * sv.transpose();
          }
          block *= face.length * sw.w * sp.w;
          for (int comp = 0; comp < 2; ++comp) {
            const double nc = comp == 0 ? face.normal.x() : face.normal.y();
            for (int i = 0; i < nl; ++i)
              for (int j = 0; j < ctx.scalar.block(); ++j)
                tm.emplace_back(ctx.vec_off(sw.t, comp) + i,
                                ctx.scalar.offset(sp.t) + j, nc * block(i, j));
          }
        }
      }
    }
    Eigen::SparseMatrix<double> R(ctx.vec_dim(), ctx.scalar.dim());
    R.setFromTriplets(tm.begin(), tm.end());
    Eigen::SparseMatrix<cplx> Rc = R.cast<cplx>();

    for (int k = 0; k < cfg.fields; ++k) {
      Eigen::VectorXcd phi = random_cvec(rng, ctx.scalar.dim());
      Eigen::VectorXcd lift = apply_lifting(ctx, phi);
      Eigen::VectorXcd lhs(ctx.vec_dim());
      for (int t = 0; t < mesh.n_tris(); ++t)
        for (int comp = 0; comp < 2; ++comp)
          lhs.segment(ctx.vec_off(t, comp), nl) =
              ctx.detJ[t] * mref * lift.segment(ctx.vec_off(t, comp), nl);
      Eigen::VectorXcd rhs = Rc * phi;
      const double rel = (lhs - rhs).lpNorm<Eigen::Infinity>() /
                         std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
      worst = std::max(worst, rel);
      ++total;
    }
  }
  report(log, failures, "check 1 lifting-identity",
         "fields " + std::to_string(total), worst, 1e-10);
}

void check_form_equivalence(std::ostream& log, int& failures) {
  Pcg32 rng(202u);
  double worst = 0.0;
  for (int c = 0; c < 10; ++c) {
    const int n = 3 + (c % 4);
    const int p = 1 + (c % 3);
    CoefficientSet coeffs;
    coeffs.omega = rng.uniform(0.5, 3.0);
    coeffs.mu = {rng.uniform(0.5, 2.0)};
    const double a11 = rng.uniform(0.5, 2.0);
    const double a22 = rng.uniform(0.5, 2.0);
    const double a12 = rng.uniform(-0.4, 0.4) * std::sqrt(a11 * a22);
    Eigen::Matrix2d A;
    A << a11, a12, a12, a22;
    coeffs.A = {A};
    coeffs.gamma = {rng.uniform(0.3, 2.0)};
    DgOptions opt;
    opt.beta0 = rng.uniform(5.0, 25.0);
    Mesh mesh = unit_square_mesh(n, mixed_rule());
    DgContext ctx = make_context(mesh, coeffs, p, opt);
    Eigen::SparseMatrix<double> J = assemble_jump_form(ctx);
    Eigen::SparseMatrix<double> D = ctx.A_dg - J;
    worst = std::max(worst, max_abs(D) / max_abs(ctx.A_dg));
  }
  report(log, failures, "check 2 form-equivalence", "configs 10", worst, 1e-10);
}

void check_norm_inequalities(std::ostream& log, int& failures) {
  struct Cfg {
    int n, p;
  };
  const Cfg cfgs[] = {{2, 1}, {4, 2}, {8, 1}};
  Pcg32 rng(303u);
  double worst_dual = 0.0, worst_ctrl = 0.0;
  int pairs = 0;
  for (const Cfg& cfg : cfgs) {
    Mesh mesh = unit_square_mesh(cfg.n, mixed_rule());
    DgContext ctx = make_context(mesh, reference_coeffs(), cfg.p);
    NormContext nc = make_norms(ctx);
    DivConformingSpace bdm = make_div_space(mesh, cfg.p);
    for (int k = 0; k < 1000; ++k) {
      BrokenField phi{&ctx.scalar, random_cvec(rng, ctx.scalar.dim())};
      Eigen::VectorXcd w = random_cvec(rng, bdm.dim());
      for (int i = 0; i < bdm.dim(); ++i)
        if (bdm.constrained[i]) w[i] = 0.0;
      const double d1 = dagger1_norm(nc, phi.coef);
      const double dd = daggerdiv_norm(nc, bdm, w);
      const double pr = std::abs(duality_pairing(nc, phi, bdm, w));
      worst_dual = std::max(worst_dual,
                            (pr - d1 * dd) / std::max(1.0, d1 * dd));
      const double en = energy_norm(nc, phi.coef);
      worst_ctrl = std::max(worst_ctrl, (en - d1) / std::max(1.0, d1));
      ++pairs;
    }
  }
  report(log, failures, "check 3 norm-duality",
         "pairs " + std::to_string(pairs), worst_dual, 1e-12);
  report(log, failures, "check 3 norm-control",
         "pairs " + std::to_string(pairs), worst_ctrl, 1e-12);
}

void check_conformity(std::ostream& log, int& failures) {
  struct Cfg {
    int n, p;
  };
  const Cfg cfgs[] = {{4, 1}, {4, 2}, {6, 3}};
  Pcg32 rng(404u);
  double worst_ident = 0.0, worst_pair = 0.0;
  int fields = 0;
  for (const Cfg& cfg : cfgs) {
    Mesh mesh = unit_square_mesh(cfg.n, mixed_rule());
    DgContext ctx = make_context(mesh, reference_coeffs(), cfg.p);
    NormContext nc = make_norms(ctx);
    ConformingSpace conf = make_conforming_space(mesh, cfg.p);
    Eigen::SparseMatrix<cplx> E =
        conforming_embedding(conf, ctx.scalar).cast<cplx>();
    DivConformingSpace bdm = make_div_space(mesh, cfg.p);
    const double smax = max_abs(ctx.S_pen);
    for (int k = 0; k < 20; ++k) {
      Eigen::VectorXcd z = random_cvec(rng, conf.n_nodes);
      for (int i = 0; i < conf.n_nodes; ++i)
        if (conf.constrained[i]) z[i] = 0.0;
      Eigen::VectorXcd broken = E * z;
      BrokenField v{&ctx.scalar, broken};

      const double g0scale = std::max(
          1.0, Eigen::VectorXcd(ctx.G0.cast<cplx>() * broken)
                   .lpNorm<Eigen::Infinity>());
      const double lift_rel =
          Eigen::VectorXcd(apply_lifting(ctx, broken)).lpNorm<Eigen::Infinity>() /
          g0scale;
      const double spen_rel =
          Eigen::VectorXcd(ctx.S_pen.cast<cplx>() * broken)
              .lpNorm<Eigen::Infinity>() /
          std::max(1.0, smax * broken.lpNorm<Eigen::Infinity>());
      double jump_rel = 0.0;
      const double zscale = std::max(1.0, z.lpNorm<Eigen::Infinity>());
      for (int f = 0; f < mesh.n_faces(); ++f) {
        const Face& face = mesh.faces[f];
        if (face.label == FaceLabel::Neumann || face.label == FaceLabel::Robin)
          continue;
        for (int s = 0; s < 3; ++s)
          jump_rel = std::max(
              jump_rel, std::abs(jump_scalar(ctx, v, f, rng.uniform())) / zscale);
      }
      worst_ident = std::max({worst_ident, lift_rel, spen_rel, jump_rel});

      Eigen::VectorXcd sigma = random_cvec(rng, bdm.dim());
      for (int i = 0; i < bdm.dim(); ++i)
        if (bdm.constrained[i]) sigma[i] = 0.0;
      const double scale = std::max(
          1.0, dagger1_norm(nc, broken) * daggerdiv_norm(nc, bdm, sigma));
      worst_pair = std::max(
          worst_pair, std::abs(duality_pairing(nc, v, bdm, sigma)) / scale);
      ++fields;
    }
  }
  report(log, failures, "check 4 conformity",
         "fields " + std::to_string(fields), worst_ident, 1e-11);
  report(log, failures, "check 4 conforming-pairing",
         "fields " + std::to_string(fields), worst_pair, 1e-10);
}

void check_orthogonality(std::ostream& log, int& failures) {
  const char* names[] = {"plane_wave", "corner_singular", "constant"};
  double worst = 0.0;
  for (const char* name : names) {
    ManufacturedCase mc = manufactured(name);
    Mesh mesh = mc.mesh_family(4);
    DgContext ctx = make_context(mesh, mc.coeffs, 2);
    Eigen::VectorXcd rhs = manufactured_rhs(ctx, mc);
    BrokenField u = solve_ipdg(ctx, rhs);
    Eigen::SparseMatrix<cplx> B = helmholtz_matrix(ctx);
    Eigen::VectorXcd residual = B * u.coef - rhs;
    ConformingSpace conf = make_conforming_space(mesh, 2);
    Eigen::SparseMatrix<cplx> E =
        conforming_embedding(conf, ctx.scalar).cast<cplx>();
    Eigen::VectorXcd nodal = E.transpose() * residual;
    double maxfree = 0.0;
    for (int i = 0; i < conf.n_nodes; ++i)
      if (conf.free_index[i] >= 0)
        maxfree = std::max(maxfree, std::abs(nodal[i]));
    worst = std::max(worst, maxfree / rhs.lpNorm<Eigen::Infinity>());
  }
  report(log, failures, "check 5 galerkin-orthogonality", "cases 3", worst,
         1e-9);
}

}  // namespace

int run_check(std::ostream& log) {
  int failures = 0;
  log << "helmdg check: invariant suite (fixed seeds)\n";
  check_lifting(log, failures);
  check_form_equivalence(log, failures);
  check_norm_inequalities(log, failures);
  check_conformity(log, failures);
  check_orthogonality(log, failures);
  log << "check summary: "
      << (failures == 0 ? "PASS" : "FAIL (" + std::to_string(failures) + ")")
      << "\n";
  return failures;
}

}  // namespace helmdg
