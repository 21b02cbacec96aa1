// SPDX-License-Identifier: Apache-2.0

#include "helmdg/spaces.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace helmdg {

namespace {

// Reference mass matrix of a basis (near identity for the modal basis).
Eigen::MatrixXd reference_mass(const ScalarBasis& basis) {
  TriangleRule rule = triangle_rule(2 * basis.degree + 2);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(basis.dim, basis.dim);
  for (size_t q = 0; q < rule.points.size(); ++q) {
    Eigen::VectorXd v = basis.eval(rule.points[q]);
    M += rule.weights[q] * v * v.transpose();
  }
  return M;
}

// Coefficients of the orthonormal shifted Legendre polynomials on [0, 1] in
// the monomial basis, built by the three-term recurrence.
Eigen::MatrixXd shifted_legendre(int count) {
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(count, count);
  // P_m(2x - 1) recurrence in monomial coefficients.
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(count, count);
  P(0, 0) = 1.0;
  if (count > 1) {
    P(1, 0) = -1.0;
    P(1, 1) = 2.0;
  }
  for (int m = 1; m + 1 < count; ++m) {
    // (m+1) P_{m+1} = (2m+1)(2x-1) P_m - m P_{m-1}
    for (int k = 0; k <= m; ++k) {
      P(m + 1, k + 1) += (2.0 * m + 1.0) * 2.0 * P(m, k) / (m + 1.0);
      P(m + 1, k) -= (2.0 * m + 1.0) * P(m, k) / (m + 1.0);
      P(m + 1, k) -= m * P(m - 1, k) / (m + 1.0);
    }
  }
  for (int m = 0; m < count; ++m) {
    C.row(m) = std::sqrt(2.0 * m + 1.0) * P.row(m);
  }
  return C;
}

double eval_poly_row(const Eigen::MatrixXd& C, int row, double x) {
  double r = 0.0;
  double xp = 1.0;
  for (int k = 0; k < C.cols(); ++k) {
    r += C(row, k) * xp;
    xp *= x;
  }
  return r;
}

}  // namespace

BrokenSpace make_broken_space(const Mesh& mesh, int degree) {
  BrokenSpace s;
  s.mesh = &mesh;
  s.degree = degree;
  s.basis = modal_basis(degree);
  return s;
}

cplx BrokenField::eval(int t, const Eigen::Vector2d& xi) const {
  Eigen::VectorXd v = space->basis.eval(xi);
  cplx r = 0.0;
  for (int i = 0; i < space->block(); ++i) {
    r += coef(space->offset(t) + i) * v(i);
  }
  return r;
}

Eigen::Vector2cd BrokenField::grad(int t, const Eigen::Vector2d& xi) const {
  Eigen::MatrixXd g = space->basis.eval_grad(xi);
  Eigen::Matrix2d JinvT =
      space->mesh->jacobian(t).inverse().transpose();
  Eigen::Vector2cd r = Eigen::Vector2cd::Zero();
  for (int i = 0; i < space->block(); ++i) {
    Eigen::Vector2d gp = JinvT * g.row(i).transpose();
    r += coef(space->offset(t) + i) * gp;
  }
  return r;
}

BrokenField project_broken(const BrokenSpace& space, const ScalarFn& fn,
                           int quad_order) {
  if (quad_order < 0) quad_order = 2 * space.degree + 2;
  TriangleRule rule = triangle_rule(quad_order);
  Eigen::MatrixXd vals(rule.points.size(), space.block());
  for (size_t q = 0; q < rule.points.size(); ++q) {
    vals.row(q) = space.basis.eval(rule.points[q]).transpose();
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> Mlu(reference_mass(space.basis));
  BrokenField field;
  field.space = &space;
  field.coef.resize(space.dim());
  const Mesh& mesh = *space.mesh;
  for (int t = 0; t < mesh.n_tris(); ++t) {
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(space.block());
    for (size_t q = 0; q < rule.points.size(); ++q) {
      cplx f = fn(mesh.to_physical(t, rule.points[q]));
      // |det J| cancels between the mass matrix and the load.
      rhs += rule.weights[q] * f * vals.row(q).transpose().cast<cplx>();
    }
    field.coef.segment(space.offset(t), space.block()) =
        Mlu.solve(rhs.real()).cast<cplx>() +
        cplx(0, 1) * Mlu.solve(rhs.imag()).cast<cplx>();
  }
  return field;
}

ConformingSpace make_conforming_space(const Mesh& mesh, int degree) {
  ConformingSpace s;
  s.mesh = &mesh;
  s.degree = degree;
  s.basis = lagrange_basis(degree);
  int p = degree;
  int per_face = p - 1;
  int per_interior = static_cast<int>(s.basis.interior_nodes.size());
  s.n_nodes = mesh.n_vertices() + mesh.n_faces() * per_face +
              mesh.n_tris() * per_interior;
  s.node_pos.assign(s.n_nodes, Eigen::Vector2d::Zero());
  s.element_nodes.assign(mesh.n_tris(), std::vector<int>(s.basis.dim, -1));

  for (int v = 0; v < mesh.n_vertices(); ++v) s.node_pos[v] = mesh.vertices[v];

  for (int t = 0; t < mesh.n_tris(); ++t) {
    auto& map = s.element_nodes[t];
    for (int k = 0; k < 3; ++k) {
      map[s.basis.vertex_node[k]] = mesh.tris[t][k];
    }
    for (int e = 0; e < 3; ++e) {
      int f = mesh.tri_face[t][e];
      const Face& face = mesh.faces[f];
      int g1 = mesh.tris[t][(e + 1) % 3];  // local start of edge e
      bool forward = (g1 == face.a);
      int base = mesh.n_vertices() + f * per_face;
      for (int sidx = 0; sidx < per_face; ++sidx) {
        int global = base + (forward ? sidx : per_face - 1 - sidx);
        map[s.basis.edge_nodes[e][sidx]] = global;
        s.node_pos[global] =
            mesh.to_physical(t, s.basis.nodes[s.basis.edge_nodes[e][sidx]]);
      }
    }
    int base = mesh.n_vertices() + mesh.n_faces() * per_face + t * per_interior;
    for (int j = 0; j < per_interior; ++j) {
      map[s.basis.interior_nodes[j]] = base + j;
      s.node_pos[base + j] =
          mesh.to_physical(t, s.basis.nodes[s.basis.interior_nodes[j]]);
    }
  }

  s.constrained.assign(s.n_nodes, 0);
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const Face& face = mesh.faces[f];
    if (face.label != FaceLabel::Dirichlet) continue;
    s.constrained[face.a] = 1;
    s.constrained[face.b] = 1;
    int base = mesh.n_vertices() + f * per_face;
    for (int sidx = 0; sidx < per_face; ++sidx) s.constrained[base + sidx] = 1;
  }
  s.free_index.assign(s.n_nodes, -1);
  s.n_free = 0;
  for (int g = 0; g < s.n_nodes; ++g) {
    if (!s.constrained[g]) s.free_index[g] = s.n_free++;
  }
  return s;
}

cplx ConformingSpace::eval(int t, const Eigen::Vector2d& xi,
                           const Eigen::VectorXcd& nodal) const {
  Eigen::VectorXd v = basis.eval(xi);
  cplx r = 0.0;
  for (int k = 0; k < basis.dim; ++k) r += nodal(element_nodes[t][k]) * v(k);
  return r;
}

Eigen::Vector2cd ConformingSpace::grad(int t, const Eigen::Vector2d& xi,
                                       const Eigen::VectorXcd& nodal) const {
  Eigen::MatrixXd g = basis.eval_grad(xi);
  Eigen::Matrix2d JinvT = mesh->jacobian(t).inverse().transpose();
  Eigen::Vector2cd r = Eigen::Vector2cd::Zero();
  for (int k = 0; k < basis.dim; ++k) {
    Eigen::Vector2d gp = JinvT * g.row(k).transpose();
    r += nodal(element_nodes[t][k]) * gp;
  }
  return r;
}

Eigen::VectorXcd interpolate_conforming(const ConformingSpace& space,
                                        const ScalarFn& fn) {
  Eigen::VectorXcd nodal(space.n_nodes);
  for (int g = 0; g < space.n_nodes; ++g) nodal(g) = fn(space.node_pos[g]);
  return nodal;
}

Eigen::SparseMatrix<double> conforming_embedding(const ConformingSpace& conf,
                                                 const BrokenSpace& broken) {
  if (conf.mesh != broken.mesh || conf.degree != broken.degree) {
    throw InputError("conforming_embedding: mismatched spaces");
  }
  // Modal coefficients of each reference Lagrange function; identical on
  // every element because the map is affine.
  TriangleRule rule = triangle_rule(2 * broken.degree + 2);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(broken.block(), conf.basis.dim);
  for (size_t q = 0; q < rule.points.size(); ++q) {
    Eigen::VectorXd vm = broken.basis.eval(rule.points[q]);
    Eigen::VectorXd vl = conf.basis.eval(rule.points[q]);
    W += rule.weights[q] * vm * vl.transpose();
  }
  Eigen::MatrixXd B =
      Eigen::PartialPivLU<Eigen::MatrixXd>(reference_mass(broken.basis))
          .solve(W);
  std::vector<Eigen::Triplet<double>> trips;
  const Mesh& mesh = *broken.mesh;
  trips.reserve(mesh.n_tris() * broken.block() * conf.basis.dim);
  for (int t = 0; t < mesh.n_tris(); ++t) {
    for (int j = 0; j < conf.basis.dim; ++j) {
      int col = conf.element_nodes[t][j];
      for (int i = 0; i < broken.block(); ++i) {
        double v = B(i, j);
        if (std::abs(v) > 1e-14) {
          trips.emplace_back(broken.offset(t) + i, col, v);
        }
      }
    }
  }
  Eigen::SparseMatrix<double> E(broken.dim(), conf.n_nodes);
  E.setFromTriplets(trips.begin(), trips.end());
  return E;
}

namespace {

// Applies the BDM dof functionals of element t to a vector field given in
// reference coordinates. Row layout: for each local edge e, face moments
// 0..p, then interior grad-family and curl-family moments.
struct DivDofEngine {
  const Mesh* mesh;
  int degree;
  Eigen::MatrixXd legendre;  // orthonormal on [0,1]
  EdgeRule face_rule;
  TriangleRule cell_rule;
  ScalarBasis grad_fam;  // degree-1 modal, constant dropped when applying
  ScalarBasis curl_fam;  // degree-2 modal (empty for degree < 2)

  DivDofEngine(const Mesh& m, int p)
      : mesh(&m),
        degree(p),
        legendre(shifted_legendre(p + 1)),
        face_rule(edge_rule(2 * p + 2)),
        cell_rule(triangle_rule(2 * p + 2)) {
    grad_fam = modal_basis(p >= 1 ? p - 1 : 0);
    curl_fam = modal_basis(p >= 2 ? p - 2 : 0);
  }

  int n_interior() const { return degree * degree - 1; }
  int n_local() const { return 3 * (degree + 1) + n_interior(); }

  // fn maps a reference point of t to a (complex) vector in physical frame.
  Eigen::VectorXcd apply(
      int t,
      const std::function<Eigen::Vector2cd(const Eigen::Vector2d&)>& fn) const {
    int p = degree;
    Eigen::VectorXcd out(n_local());
    int row = 0;
    for (int e = 0; e < 3; ++e) {
      int f = mesh->tri_face[t][e];
      const Face& face = mesh->faces[f];
      for (int m = 0; m <= p; ++m) {
        cplx acc = 0.0;
        for (size_t q = 0; q < face_rule.points.size(); ++q) {
          double s = face_rule.points[q];
          Eigen::Vector2d xi = face_reference_point(*mesh, f, t, s);
          Eigen::Vector2cd w = fn(xi);
          cplx wn = w.x() * face.normal.x() + w.y() * face.normal.y();
          acc += face_rule.weights[q] * wn * eval_poly_row(legendre, m, s);
        }
        out(row++) = acc;
      }
    }
    if (n_interior() == 0) return out;

    Eigen::Matrix2d J = mesh->jacobian(t);
    Eigen::Matrix2d JinvT = J.inverse().transpose();
    double detJ = std::abs(J.determinant());
    double h = mesh->h(t);
    double area = mesh->area(t);
    // Grad family: (h/|K|) integral of w . grad q for non-constant q.
    for (int k = 1; k < grad_fam.dim; ++k) {
      cplx acc = 0.0;
      for (size_t q = 0; q < cell_rule.points.size(); ++q) {
        const Eigen::Vector2d& xi = cell_rule.points[q];
        Eigen::Vector2cd w = fn(xi);
        Eigen::Vector2d gq =
            JinvT * grad_fam.eval_grad(xi).row(k).transpose();
        acc += cell_rule.weights[q] * (w.x() * gq.x() + w.y() * gq.y());
      }
      out(row++) = acc * detJ * h / area;
    }
    // Curl family: (h/|K|) integral of w . curl(bubble * r).
    if (degree >= 2) {
      for (int k = 0; k < curl_fam.dim; ++k) {
        cplx acc = 0.0;
        for (size_t q = 0; q < cell_rule.points.size(); ++q) {
          const Eigen::Vector2d& xi = cell_rule.points[q];
          Eigen::Vector2cd w = fn(xi);
          double l1 = 1.0 - xi.x() - xi.y(), l2 = xi.x(), l3 = xi.y();
          double b = l1 * l2 * l3;
          Eigen::Vector2d gb(l3 * (l1 - l2), l2 * (l1 - l3));
          double r = curl_fam.eval(xi)(k);
          Eigen::Vector2d gr = curl_fam.eval_grad(xi).row(k).transpose();
          Eigen::Vector2d gphi_ref = b * gr + r * gb;
          Eigen::Vector2d gphi = JinvT * gphi_ref;
          Eigen::Vector2d curl(gphi.y(), -gphi.x());
          acc += cell_rule.weights[q] * (w.x() * curl.x() + w.y() * curl.y());
        }
        out(row++) = acc * detJ * h / area;
      }
    }
    return out;
  }
};

}  // namespace

DivConformingSpace make_div_space(const Mesh& mesh, int degree) {
  if (degree < 1) throw InputError("make_div_space: degree must be >= 1");
  DivConformingSpace s;
  s.mesh = &mesh;
  s.degree = degree;
  s.face_dofs = degree + 1;
  s.interior_dofs = degree * degree - 1;
  s.scalar = modal_basis(degree);
  int nloc = 3 * s.face_dofs + s.interior_dofs;
  int nvec = 2 * s.scalar.dim;
  if (nloc != nvec) throw Error("make_div_space: dof count mismatch");

  DivDofEngine engine(mesh, degree);
  s.elem_coef.resize(mesh.n_tris());
  s.elem_dofs.assign(mesh.n_tris(), std::vector<int>(nloc, -1));
  int interior_base = mesh.n_faces() * s.face_dofs;
  for (int t = 0; t < mesh.n_tris(); ++t) {
    // Scaffolding: x-component modal block then y-component modal block.
    Eigen::MatrixXd V(nloc, nvec);
    for (int j = 0; j < nvec; ++j) {
      int comp = j < s.scalar.dim ? 0 : 1;
      int idx = comp == 0 ? j : j - s.scalar.dim;
      auto fn = [&](const Eigen::Vector2d& xi) {
        Eigen::Vector2cd w = Eigen::Vector2cd::Zero();
        w(comp) = s.scalar.eval(xi)(idx);
        return w;
      };
      V.col(j) = engine.apply(t, fn).real();
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(V);
    Eigen::MatrixXd C = lu.solve(Eigen::MatrixXd::Identity(nloc, nloc));
    double resid = (V * C - Eigen::MatrixXd::Identity(nloc, nloc))
                       .cwiseAbs()
                       .maxCoeff();
    if (!(resid < 1e-6)) {
      throw NumericalError("make_div_space: singular dof matrix");
    }
    s.elem_coef[t] = C;

    auto& map = s.elem_dofs[t];
    int row = 0;
    for (int e = 0; e < 3; ++e) {
      int f = mesh.tri_face[t][e];
      for (int m = 0; m <= degree; ++m) map[row++] = f * s.face_dofs + m;
    }
    for (int j = 0; j < s.interior_dofs; ++j) {
      map[row++] = interior_base + t * s.interior_dofs + j;
    }
  }

  s.constrained.assign(s.dim(), 0);
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (mesh.faces[f].label != FaceLabel::Neumann) continue;
    for (int m = 0; m < s.face_dofs; ++m) s.constrained[f * s.face_dofs + m] = 1;
  }
  s.free_index.assign(s.dim(), -1);
  s.n_free = 0;
  for (int d = 0; d < s.dim(); ++d) {
    if (!s.constrained[d]) s.free_index[d] = s.n_free++;
  }
  return s;
}

Eigen::Vector2cd DivConformingSpace::eval(int t, const Eigen::Vector2d& xi,
                                          const Eigen::VectorXcd& dofs) const {
  int nloc = 3 * face_dofs + interior_dofs;
  Eigen::VectorXcd local(nloc);
  for (int k = 0; k < nloc; ++k) local(k) = dofs(elem_dofs[t][k]);
  Eigen::VectorXcd a = elem_coef[t].cast<cplx>() * local;
  Eigen::VectorXd v = scalar.eval(xi);
  Eigen::Vector2cd w = Eigen::Vector2cd::Zero();
  for (int i = 0; i < scalar.dim; ++i) {
    w.x() += a(i) * v(i);
    w.y() += a(scalar.dim + i) * v(i);
  }
  return w;
}

cplx DivConformingSpace::div(int t, const Eigen::Vector2d& xi,
                             const Eigen::VectorXcd& dofs) const {
  int nloc = 3 * face_dofs + interior_dofs;
  Eigen::VectorXcd local(nloc);
  for (int k = 0; k < nloc; ++k) local(k) = dofs(elem_dofs[t][k]);
  Eigen::VectorXcd a = elem_coef[t].cast<cplx>() * local;
  Eigen::MatrixXd g = scalar.eval_grad(xi);
  Eigen::Matrix2d JinvT = mesh->jacobian(t).inverse().transpose();
  cplx d = 0.0;
  for (int i = 0; i < scalar.dim; ++i) {
    Eigen::Vector2d gp = JinvT * g.row(i).transpose();
    d += a(i) * gp.x() + a(scalar.dim + i) * gp.y();
  }
  return d;
}

Eigen::VectorXcd interpolate_div(const DivConformingSpace& space,
                                 const VectorFn& fn) {
  const Mesh& mesh = *space.mesh;
  DivDofEngine engine(mesh, space.degree);
  Eigen::VectorXcd dofs = Eigen::VectorXcd::Zero(space.dim());
  // Face dofs straight from the global face parameterization.
  EdgeRule rule = edge_rule(4 * space.degree + 4);
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const Face& face = mesh.faces[f];
    const Eigen::Vector2d& xa = mesh.vertices[face.a];
    const Eigen::Vector2d& xb = mesh.vertices[face.b];
    for (int m = 0; m <= space.degree; ++m) {
      cplx acc = 0.0;
      for (size_t q = 0; q < rule.points.size(); ++q) {
        double s = rule.points[q];
        Eigen::Vector2cd w = fn(xa + s * (xb - xa));
        cplx wn = w.x() * face.normal.x() + w.y() * face.normal.y();
        acc += rule.weights[q] * wn * eval_poly_row(engine.legendre, m, s);
      }
      dofs(f * space.face_dofs + m) = acc;
    }
  }
  int interior_base = mesh.n_faces() * space.face_dofs;
  for (int t = 0; t < mesh.n_tris(); ++t) {
    if (space.interior_dofs == 0) break;
    auto fn_ref = [&](const Eigen::Vector2d& xi) {
      return fn(mesh.to_physical(t, xi));
    };
    Eigen::VectorXcd all = engine.apply(t, fn_ref);
    for (int j = 0; j < space.interior_dofs; ++j) {
      dofs(interior_base + t * space.interior_dofs + j) =
          all(3 * space.face_dofs + j);
    }
  }
  return dofs;
}

int local_face_index(const Mesh& mesh, int t, int f) {
  for (int k = 0; k < 3; ++k) {
    if (mesh.tri_face[t][k] == f) return k;
  }
  throw InputError("local_face_index: face does not belong to triangle");
}

Eigen::Vector2d face_reference_point(const Mesh& mesh, int f, int t, double s) {
  const Face& face = mesh.faces[f];
  Eigen::Vector2d x =
      mesh.vertices[face.a] + s * (mesh.vertices[face.b] - mesh.vertices[face.a]);
  return mesh.to_reference(t, x);
}

BrokenField prolong_broken(const BrokenField& coarse,
                           const BrokenSpace& fine_space) {
  const Mesh& fine = *fine_space.mesh;
  const Mesh& coarse_mesh = *coarse.space->mesh;
  if (static_cast<int>(fine.tri_parent.size()) != fine.n_tris()) {
    throw InputError("prolong_broken: fine mesh carries no genealogy");
  }
  if (fine_space.degree < coarse.space->degree) {
    throw InputError("prolong_broken: fine degree below coarse degree");
  }
  TriangleRule rule = triangle_rule(2 * fine_space.degree + 2);
  Eigen::MatrixXd vals(rule.points.size(), fine_space.block());
  for (size_t q = 0; q < rule.points.size(); ++q) {
    vals.row(q) = fine_space.basis.eval(rule.points[q]).transpose();
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> Mlu(reference_mass(fine_space.basis));
  BrokenField out;
  out.space = &fine_space;
  out.coef.resize(fine_space.dim());
  for (int t = 0; t < fine.n_tris(); ++t) {
    int parent = fine.tri_parent[t];
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(fine_space.block());
    for (size_t q = 0; q < rule.points.size(); ++q) {
      Eigen::Vector2d x = fine.to_physical(t, rule.points[q]);
      cplx val = coarse.eval(parent, coarse_mesh.to_reference(parent, x));
      rhs += rule.weights[q] * val * vals.row(q).transpose().cast<cplx>();
    }
    out.coef.segment(fine_space.offset(t), fine_space.block()) =
        Mlu.solve(rhs.real()).cast<cplx>() +
        cplx(0, 1) * Mlu.solve(rhs.imag()).cast<cplx>();
  }
  return out;
}

Eigen::VectorXcd prolong_conforming(const ConformingSpace& coarse,
                                    const Eigen::VectorXcd& nodal,
                                    const ConformingSpace& fine) {
  const Mesh& fine_mesh = *fine.mesh;
  const Mesh& coarse_mesh = *coarse.mesh;
  if (static_cast<int>(fine_mesh.tri_parent.size()) != fine_mesh.n_tris()) {
    throw InputError("prolong_conforming: fine mesh carries no genealogy");
  }
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(fine.n_nodes);
  std::vector<char> done(fine.n_nodes, 0);
  for (int t = 0; t < fine_mesh.n_tris(); ++t) {
    int parent = fine_mesh.tri_parent[t];
    for (int k = 0; k < fine.basis.dim; ++k) {
      int g = fine.element_nodes[t][k];
      if (done[g]) continue;
      done[g] = 1;
      Eigen::Vector2d xi_c =
          coarse_mesh.to_reference(parent, fine.node_pos[g]);
      out(g) = coarse.eval(parent, xi_c, nodal);
    }
  }
  return out;
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_field(std::ostream& os, const std::string& kind, int degree,
                 const Eigen::VectorXcd& coef) {
  os << "helmdg-field v1\n";
  os << kind << " " << degree << " " << coef.size() << "\n";
  for (Eigen::Index i = 0; i < coef.size(); ++i) {
    os << fmt_double(coef(i).real()) << " " << fmt_double(coef(i).imag())
       << "\n";
  }
}

FieldData read_field(std::istream& is) {
  std::string header;
  std::getline(is, header);
  while (!header.empty() && (header.back() == '\r' || header.back() == ' ')) {
    header.pop_back();
  }
  if (header != "helmdg-field v1") {
    throw SpecificationError("field file: bad header, expected 'helmdg-field v1'");
  }
  FieldData data;
  long count = 0;
  if (!(is >> data.kind >> data.degree >> count) || count < 0) {
    throw SpecificationError("field file: bad descriptor line");
  }
  data.coef.resize(count);
  for (long i = 0; i < count; ++i) {
    double re = 0.0, im = 0.0;
    if (!(is >> re >> im)) {
      throw SpecificationError("field file: truncated coefficient block");
    }
    data.coef(i) = cplx(re, im);
  }
  return data;
}

void write_field_file(const std::string& path, const std::string& kind,
                      int degree, const Eigen::VectorXcd& coef) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open for writing: " + path);
  write_field(os, kind, degree, coef);
  if (!os) throw Error("write failed: " + path);
}

FieldData read_field_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open for reading: " + path);
  return read_field(is);
}

}  // namespace helmdg
