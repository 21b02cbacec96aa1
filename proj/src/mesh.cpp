// SPDX-License-Identifier: Apache-2.0

#include "helmdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace helmdg {

namespace {

constexpr double kGeomTol = 1e-12;

using EdgeKey = std::pair<int, int>;

EdgeKey edge_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

struct BoundaryInfo {
  FaceLabel label = FaceLabel::Dirichlet;
  int patch = -1;
  int parent_face = -1;
};

double cross2(const Eigen::Vector2d& u, const Eigen::Vector2d& v) {
  return u.x() * v.y() - u.y() * v.x();
}

// Computes faces, adjacency, and normals from the triangle list. Boundary
// faces are classified through `lookup` (explicit map) or `rule`; exactly one
// of the two must be provided.
void finalize_faces(Mesh& m, const std::map<EdgeKey, BoundaryInfo>* lookup,
                    const BoundaryRule* rule) {
  m.faces.clear();
  m.tri_face.assign(m.tris.size(), {-1, -1, -1});
  std::map<EdgeKey, int> face_of;

  for (int t = 0; t < m.n_tris(); ++t) {
    const auto& tri = m.tris[t];
    for (int k = 0; k < 3; ++k) {
      int a = tri[(k + 1) % 3];
      int b = tri[(k + 2) % 3];
      EdgeKey key = edge_key(a, b);
      auto it = face_of.find(key);
      if (it == face_of.end()) {
        Face f;
        f.a = key.first;
        f.b = key.second;
        f.t_plus = t;
        face_of.emplace(key, static_cast<int>(m.faces.size()));
        m.tri_face[t][k] = static_cast<int>(m.faces.size());
        m.faces.push_back(f);
      } else {
        Face& f = m.faces[it->second];
        if (f.t_minus >= 0) {
          throw StructuralError("edge shared by more than two triangles");
        }
        f.t_minus = t;
        m.tri_face[t][k] = it->second;
      }
    }
  }

  m.bface_parent.assign(m.faces.size(), -1);
  for (auto& f : m.faces) {
    const Eigen::Vector2d& xa = m.vertices[f.a];
    const Eigen::Vector2d& xb = m.vertices[f.b];
    f.length = (xb - xa).norm();
    if (f.length <= kGeomTol) {
      throw GeometryError("degenerate (zero-length) face");
    }
    Eigen::Vector2d tangent = (xb - xa) / f.length;
    Eigen::Vector2d n(tangent.y(), -tangent.x());
    Eigen::Vector2d centroid = (m.vertex(f.t_plus, 0) + m.vertex(f.t_plus, 1) +
                                m.vertex(f.t_plus, 2)) /
                               3.0;
    Eigen::Vector2d mid = 0.5 * (xa + xb);
    if (n.dot(mid - centroid) < 0.0) n = -n;
    f.normal = n;

    if (f.t_minus < 0) {
      BoundaryAssignment assign;
      int parent_face = -1;
      if (lookup) {
        auto it = lookup->find(edge_key(f.a, f.b));
        if (it == lookup->end()) {
          throw SpecificationError("unlabeled boundary edge");
        }
        assign.label = it->second.label;
        assign.patch = it->second.patch;
        parent_face = it->second.parent_face;
      } else {
        assign = (*rule)(mid, n);
      }
      if (assign.label == FaceLabel::Interior) {
        throw SpecificationError("boundary edge labeled as interior");
      }
      f.label = assign.label;
      f.patch = (f.label == FaceLabel::Robin) ? std::max(assign.patch, 0) : -1;
      int fid = static_cast<int>(&f - m.faces.data());
      m.bface_parent[fid] = parent_face;
    }
  }
}

void check_geometry(const Mesh& m) {
  for (int v = 0; v < m.n_vertices(); ++v) {
    for (int w = v + 1; w < m.n_vertices(); ++w) {
      if ((m.vertices[v] - m.vertices[w]).norm() <= kGeomTol) {
        throw StructuralError("coincident vertices");
      }
    }
  }
  // A vertex lying strictly inside another triangle's edge means two
  // triangles meet along part of an edge only (hanging node).
  for (const auto& f : m.faces) {
    const Eigen::Vector2d& xa = m.vertices[f.a];
    const Eigen::Vector2d& xb = m.vertices[f.b];
    Eigen::Vector2d d = xb - xa;
    double len2 = d.squaredNorm();
    for (int v = 0; v < m.n_vertices(); ++v) {
      if (v == f.a || v == f.b) continue;
      double s = d.dot(m.vertices[v] - xa) / len2;
      if (s <= 0.0 || s >= 1.0) continue;
      Eigen::Vector2d foot = xa + s * d;
      if ((m.vertices[v] - foot).norm() <= kGeomTol) {
        throw StructuralError("vertex lies inside an edge: mesh is not matching");
      }
    }
  }
}

void orient_and_pick_refinement_edges(Mesh& m, bool normalize) {
  for (int t = 0; t < m.n_tris(); ++t) {
    auto& tri = m.tris[t];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] < 0 || tri[k] >= m.n_vertices()) {
        throw InputError("triangle vertex index out of range");
      }
    }
    Eigen::Vector2d e1 = m.vertices[tri[1]] - m.vertices[tri[0]];
    Eigen::Vector2d e2 = m.vertices[tri[2]] - m.vertices[tri[0]];
    double twice_area = cross2(e1, e2);
    if (std::abs(twice_area) <= kGeomTol) {
      throw GeometryError("zero-area triangle");
    }
    if (twice_area < 0.0) {
      std::swap(tri[0], tri[1]);  // keeps the {v0, v1} refinement edge
    }
    if (!normalize) continue;

    // Rotate so that the refinement edge (v0, v1) is the longest edge; ties
    // go to the lexicographically smallest sorted vertex pair.
    double best_len = -1.0;
    int best_rot = 0;
    EdgeKey best_key{-1, -1};
    std::array<int, 3> cur = tri;
    for (int r = 0; r < 3; ++r) {
      double len = (m.vertices[cur[1]] - m.vertices[cur[0]]).norm();
      EdgeKey key = edge_key(cur[0], cur[1]);
      bool better = false;
      if (len > best_len * (1.0 + 1e-12) && len - best_len > 1e-12 * len) {
        better = true;
      } else if (std::abs(len - best_len) <= 1e-12 * std::max(len, best_len)) {
        better = key < best_key;
      }
      if (better) {
        best_len = len;
        best_rot = r;
        best_key = key;
      }
      cur = {cur[1], cur[2], cur[0]};
    }
    for (int r = 0; r < best_rot; ++r) {
      tri = {tri[1], tri[2], tri[0]};
    }
  }
}

Mesh build_mesh_impl(std::vector<Eigen::Vector2d> vertices,
                     std::vector<std::array<int, 3>> triangles,
                     const std::map<EdgeKey, BoundaryInfo>* lookup,
                     const BoundaryRule* rule, std::vector<int> region,
                     bool normalize, bool full_check) {
  Mesh m;
  m.vertices = std::move(vertices);
  m.tris = std::move(triangles);
  if (m.tris.empty()) throw InputError("mesh has no triangles");
  if (region.empty()) region.assign(m.tris.size(), 0);
  if (region.size() != m.tris.size()) {
    throw InputError("region list length does not match triangle count");
  }
  m.region = std::move(region);
  orient_and_pick_refinement_edges(m, normalize);
  finalize_faces(m, lookup, rule);
  if (full_check) check_geometry(m);
  return m;
}

}  // namespace

double Mesh::area(int t) const {
  return 0.5 * std::abs(cross2(vertex(t, 1) - vertex(t, 0),
                               vertex(t, 2) - vertex(t, 0)));
}

double Mesh::h(int t) const {
  double a = (vertex(t, 1) - vertex(t, 0)).norm();
  double b = (vertex(t, 2) - vertex(t, 1)).norm();
  double c = (vertex(t, 0) - vertex(t, 2)).norm();
  return std::max({a, b, c});
}

double Mesh::rho(int t) const {
  double a = (vertex(t, 1) - vertex(t, 0)).norm();
  double b = (vertex(t, 2) - vertex(t, 1)).norm();
  double c = (vertex(t, 0) - vertex(t, 2)).norm();
  return 2.0 * area(t) / (a + b + c);
}

Eigen::Matrix2d Mesh::jacobian(int t) const {
  Eigen::Matrix2d J;
  J.col(0) = vertex(t, 1) - vertex(t, 0);
  J.col(1) = vertex(t, 2) - vertex(t, 0);
  return J;
}

Eigen::Vector2d Mesh::to_reference(int t, const Eigen::Vector2d& x) const {
  return jacobian(t).partialPivLu().solve(x - vertex(t, 0));
}

Eigen::Vector2d Mesh::to_physical(int t, const Eigen::Vector2d& xi) const {
  return vertex(t, 0) + jacobian(t) * xi;
}

bool Mesh::has_robin_faces() const { return has_label(FaceLabel::Robin); }

bool Mesh::has_label(FaceLabel l) const {
  for (const auto& f : faces) {
    if (f.label == l) return true;
  }
  return false;
}

double CoefficientSet::alpha(int region) const {
  if (region < 0 || region >= static_cast<int>(A.size())) {
    throw InputError("coefficient region out of range");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(A[region]);
  return es.eigenvalues().minCoeff();
}

void CoefficientSet::validate() const {
  if (omega <= 0.0) throw InputError("omega must be positive");
  if (mu.empty() || mu.size() != A.size()) {
    throw InputError("coefficient region lists are empty or inconsistent");
  }
  for (double m : mu) {
    if (!(m > 0.0)) throw InputError("mu must be positive in every region");
  }
  for (const auto& mat : A) {
    if ((mat - mat.transpose()).norm() > 1e-12 * mat.norm()) {
      throw InputError("A must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(mat);
    if (!(es.eigenvalues().minCoeff() > 0.0)) {
      throw InputError("A must be positive definite in every region");
    }
  }
  for (double g : gamma) {
    if (!(g > 0.0)) throw InputError("gamma must be positive in every patch");
  }
}

Mesh build_mesh(std::vector<Eigen::Vector2d> vertices,
                std::vector<std::array<int, 3>> triangles,
                const BoundaryRule& boundary_spec,
                std::vector<int> region_of_triangle,
                bool normalize_refinement_edges) {
  return build_mesh_impl(std::move(vertices), std::move(triangles), nullptr,
                         &boundary_spec, std::move(region_of_triangle),
                         normalize_refinement_edges, true);
}

Mesh build_mesh(std::vector<Eigen::Vector2d> vertices,
                std::vector<std::array<int, 3>> triangles,
                const std::vector<BoundaryEdgeSpec>& boundary_edges,
                std::vector<int> region_of_triangle,
                bool normalize_refinement_edges) {
  std::map<EdgeKey, BoundaryInfo> lookup;
  for (const auto& spec : boundary_edges) {
    BoundaryInfo info;
    info.label = spec.label;
    info.patch = spec.patch;
    lookup[edge_key(spec.a, spec.b)] = info;
  }
  return build_mesh_impl(std::move(vertices), std::move(triangles), &lookup,
                         nullptr, std::move(region_of_triangle),
                         normalize_refinement_edges, true);
}

Mesh refine(const Mesh& mesh, const std::vector<int>& marked) {
  if (marked.empty()) throw InputError("refine: empty mark set");
  std::vector<char> tri_marked(mesh.n_tris(), 0);
  for (int t : marked) {
    if (t < 0 || t >= mesh.n_tris()) {
      throw InputError("refine: marked triangle id out of range");
    }
    tri_marked[t] = 1;
  }

  std::vector<char> face_marked(mesh.n_faces(), 0);
  for (int t = 0; t < mesh.n_tris(); ++t) {
    if (!tri_marked[t]) continue;
    for (int k = 0; k < 3; ++k) face_marked[mesh.tri_face[t][k]] = 1;
  }
  // Closure: a triangle with any marked face must have its refinement face
  // marked too, so that every split goes through the refinement edge.
  for (bool changed = true; changed;) {
    changed = false;
    for (int t = 0; t < mesh.n_tris(); ++t) {
      int ref_face = mesh.tri_face[t][2];
      if (face_marked[ref_face]) continue;
      if (face_marked[mesh.tri_face[t][0]] || face_marked[mesh.tri_face[t][1]]) {
        face_marked[ref_face] = 1;
        changed = true;
      }
    }
  }

  Mesh out;
  out.vertices = mesh.vertices;
  out.inherited_vertex_count = mesh.n_vertices();
  out.vertex_parents.assign(mesh.n_vertices(), {-1, -1});
  std::vector<int> midpoint(mesh.n_faces(), -1);
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (!face_marked[f]) continue;
    const Face& face = mesh.faces[f];
    midpoint[f] = out.n_vertices();
    out.vertices.push_back(0.5 * (mesh.vertices[face.a] + mesh.vertices[face.b]));
    out.vertex_parents.push_back({face.a, face.b});
  }

  auto push = [&out](int a, int b, int c, int region, int parent) {
    out.tris.push_back({a, b, c});
    out.region.push_back(region);
    out.tri_parent.push_back(parent);
  };

  for (int t = 0; t < mesh.n_tris(); ++t) {
    const auto& tri = mesh.tris[t];
    int a = tri[0], b = tri[1], c = tri[2];
    int fab = mesh.tri_face[t][2];
    int fbc = mesh.tri_face[t][0];
    int fca = mesh.tri_face[t][1];
    int reg = mesh.region[t];
    if (!face_marked[fab]) {
      push(a, b, c, reg, t);
      continue;
    }
    int m = midpoint[fab];
    // First child (c, a, m); its refinement edge (c, a) is an original edge
    // of the parent and is bisected in turn when marked.
    if (face_marked[fca]) {
      int mca = midpoint[fca];
      push(m, c, mca, reg, t);
      push(a, m, mca, reg, t);
    } else {
      push(c, a, m, reg, t);
    }
    if (face_marked[fbc]) {
      int mbc = midpoint[fbc];
      push(m, b, mbc, reg, t);
      push(c, m, mbc, reg, t);
    } else {
      push(b, c, m, reg, t);
    }
  }

  std::map<EdgeKey, BoundaryInfo> lookup;
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const Face& face = mesh.faces[f];
    if (face.t_minus >= 0) continue;
    BoundaryInfo info;
    info.label = face.label;
    info.patch = face.patch;
    info.parent_face = f;
    if (face_marked[f]) {
      int m = midpoint[f];
      lookup[edge_key(face.a, m)] = info;
      lookup[edge_key(m, face.b)] = info;
    } else {
      lookup[edge_key(face.a, face.b)] = info;
    }
  }

  finalize_faces(out, &lookup, nullptr);
  return out;
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<int> all(mesh.n_tris());
  for (int t = 0; t < mesh.n_tris(); ++t) all[t] = t;
  return refine(mesh, all);
}

MeshScalars mesh_scalars(const Mesh& mesh, const CoefficientSet& coeffs) {
  coeffs.validate();
  MeshScalars s;
  int nt = mesh.n_tris();
  s.h_K.resize(nt);
  s.area_K.resize(nt);
  s.alpha_K.resize(nt);
  s.mu_K.resize(nt);
  s.theta_K.resize(nt);
  std::vector<double> alpha_by_region(coeffs.A.size());
  for (size_t r = 0; r < coeffs.A.size(); ++r) {
    alpha_by_region[r] = coeffs.alpha(static_cast<int>(r));
  }
  for (int t = 0; t < nt; ++t) {
    int r = mesh.region[t];
    if (r < 0 || r >= static_cast<int>(coeffs.A.size())) {
      throw InputError("mesh references a coefficient region that is not defined");
    }
    s.h_K[t] = mesh.h(t);
    s.area_K[t] = mesh.area(t);
    s.alpha_K[t] = alpha_by_region[r];
    s.mu_K[t] = coeffs.mu[r];
    s.theta_K[t] = std::sqrt(s.alpha_K[t] / s.mu_K[t]);
    s.h = std::max(s.h, s.h_K[t]);
    s.kappa = std::max(s.kappa, s.h_K[t] / mesh.rho(t));
    s.omega_h_theta_K_star = std::max(
        s.omega_h_theta_K_star, coeffs.omega * s.h_K[t] / s.theta_K[t]);
  }
  int nf = mesh.n_faces();
  s.alpha_F.resize(nf);
  s.gamma_F.assign(nf, 0.0);
  s.theta_F.assign(nf, 0.0);
  for (int f = 0; f < nf; ++f) {
    const Face& face = mesh.faces[f];
    double alpha = s.alpha_K[face.t_plus];
    if (face.t_minus >= 0) {
      alpha = std::max(alpha, s.alpha_K[face.t_minus]);
    }
    s.alpha_F[f] = alpha;
    if (face.label == FaceLabel::Robin) {
      if (face.patch < 0 || face.patch >= static_cast<int>(coeffs.gamma.size())) {
        throw InputError("mesh references a Robin patch that is not defined");
      }
      s.gamma_F[f] = coeffs.gamma[face.patch];
      s.theta_F[f] = s.alpha_F[f] / s.gamma_F[f];
      s.omega_h_theta_F_star = std::max(
          s.omega_h_theta_F_star, coeffs.omega * face.length / s.theta_F[f]);
    }
  }
  return s;
}

Mesh unit_square_mesh(int n, const BoundaryRule& boundary_spec) {
  if (n < 1) throw InputError("unit_square_mesh: n must be >= 1");
  std::vector<Eigen::Vector2d> verts;
  verts.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      verts.emplace_back(double(i) / n, double(j) / n);
    }
  }
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::array<int, 3>> tris;
  tris.reserve(2 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      int v00 = vid(i, j), v10 = vid(i + 1, j);
      int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      tris.push_back({v00, v10, v11});
      tris.push_back({v00, v11, v01});
    }
  }
  return build_mesh(std::move(verts), std::move(tris), boundary_spec);
}

Mesh l_shape_mesh(int n, const BoundaryRule& boundary_spec) {
  if (n < 1) throw InputError("l_shape_mesh: n must be >= 1");
  int g = 2 * n;  // cells per side of the bounding square
  std::vector<int> vmap((g + 1) * (g + 1), -1);
  std::vector<Eigen::Vector2d> verts;
  std::vector<std::array<int, 3>> tris;
  auto gidx = [g](int i, int j) { return j * (g + 1) + i; };
  auto coord = [n](int i) { return double(i) / n - 1.0; };
  auto get_vertex = [&](int i, int j) {
    int& v = vmap[gidx(i, j)];
    if (v < 0) {
      v = static_cast<int>(verts.size());
      verts.emplace_back(coord(i), coord(j));
    }
    return v;
  };
  for (int j = 0; j < g; ++j) {
    for (int i = 0; i < g; ++i) {
      double cx = coord(i) + 0.5 / n;
      double cy = coord(j) + 0.5 / n;
      if (cx > 0.0 && cy < 0.0) continue;  // removed quadrant
      int v00 = get_vertex(i, j), v10 = get_vertex(i + 1, j);
      int v01 = get_vertex(i, j + 1), v11 = get_vertex(i + 1, j + 1);
      tris.push_back({v00, v10, v11});
      tris.push_back({v00, v11, v01});
    }
  }
  return build_mesh(std::move(verts), std::move(tris), boundary_spec);
}

BoundaryRule all_faces(FaceLabel label, int patch) {
  return [label, patch](const Eigen::Vector2d&, const Eigen::Vector2d&) {
    BoundaryAssignment a;
    a.label = label;
    a.patch = patch;
    return a;
  };
}

namespace {

char label_char(FaceLabel l) {
  switch (l) {
    case FaceLabel::Dirichlet: return 'D';
    case FaceLabel::Neumann: return 'N';
    case FaceLabel::Robin: return 'R';
    default: return '?';
  }
}

FaceLabel parse_label(const std::string& s) {
  if (s == "D") return FaceLabel::Dirichlet;
  if (s == "N") return FaceLabel::Neumann;
  if (s == "R") return FaceLabel::Robin;
  throw SpecificationError("mesh file: unknown boundary label '" + s + "'");
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << "helmdg-mesh v1\n";
  os << mesh.n_vertices() << "\n";
  for (const auto& v : mesh.vertices) {
    os << fmt_double(v.x()) << " " << fmt_double(v.y()) << "\n";
  }
  os << mesh.n_tris() << "\n";
  for (int t = 0; t < mesh.n_tris(); ++t) {
    const auto& tri = mesh.tris[t];
    os << tri[0] << " " << tri[1] << " " << tri[2] << " " << mesh.region[t]
       << "\n";
  }
  int nb = 0;
  for (const auto& f : mesh.faces) {
    if (f.t_minus < 0) ++nb;
  }
  os << nb << "\n";
  for (const auto& f : mesh.faces) {
    if (f.t_minus >= 0) continue;
    os << f.a << " " << f.b << " " << label_char(f.label) << " "
       << std::max(f.patch, 0) << "\n";
  }
}

Mesh read_mesh(std::istream& is) {
  std::string header;
  std::getline(is, header);
  // Tolerate trailing whitespace/CR in the header line.
  while (!header.empty() && (header.back() == '\r' || header.back() == ' ')) {
    header.pop_back();
  }
  if (header != "helmdg-mesh v1") {
    throw SpecificationError("mesh file: bad header, expected 'helmdg-mesh v1'");
  }
  int nv = 0;
  if (!(is >> nv) || nv < 3) throw SpecificationError("mesh file: bad vertex count");
  std::vector<Eigen::Vector2d> verts(nv);
  for (int i = 0; i < nv; ++i) {
    if (!(is >> verts[i].x() >> verts[i].y())) {
      throw SpecificationError("mesh file: truncated vertex block");
    }
  }
  int nt = 0;
  if (!(is >> nt) || nt < 1) throw SpecificationError("mesh file: bad triangle count");
  std::vector<std::array<int, 3>> tris(nt);
  std::vector<int> region(nt, 0);
  for (int t = 0; t < nt; ++t) {
    if (!(is >> tris[t][0] >> tris[t][1] >> tris[t][2] >> region[t])) {
      throw SpecificationError("mesh file: truncated triangle block");
    }
  }
  int nb = 0;
  if (!(is >> nb) || nb < 0) throw SpecificationError("mesh file: bad boundary count");
  std::vector<BoundaryEdgeSpec> boundary(nb);
  for (int i = 0; i < nb; ++i) {
    std::string label;
    if (!(is >> boundary[i].a >> boundary[i].b >> label >> boundary[i].patch)) {
      throw SpecificationError("mesh file: truncated boundary block");
    }
    boundary[i].label = parse_label(label);
  }
  // Keep the stored refinement edges so a refined mesh survives a round trip
  // with its bisection state intact.
  return build_mesh(std::move(verts), std::move(tris), boundary,
                    std::move(region), /*normalize_refinement_edges=*/false);
}

void write_mesh_file(const std::string& path, const Mesh& mesh) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open for writing: " + path);
  write_mesh(os, mesh);
  if (!os) throw Error("write failed: " + path);
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open for reading: " + path);
  return read_mesh(is);
}

}  // namespace helmdg
