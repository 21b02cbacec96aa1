// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "helmdg/mesh.hpp"

using namespace helmdg;

namespace {

double total_area(const Mesh& m) {
  double a = 0.0;
  for (int t = 0; t < m.n_tris(); ++t) a += m.area(t);
  return a;
}

bool all_ccw(const Mesh& m) {
  for (int t = 0; t < m.n_tris(); ++t) {
    Eigen::Vector2d e1 = m.vertex(t, 1) - m.vertex(t, 0);
    Eigen::Vector2d e2 = m.vertex(t, 2) - m.vertex(t, 0);
    if (e1.x() * e2.y() - e1.y() * e2.x() <= 0.0) return false;
  }
  return true;
}

// Rebuilding from raw arrays reruns the full matching checks.
void check_rebuildable(const Mesh& m) {
  std::vector<BoundaryEdgeSpec> boundary;
  for (const auto& f : m.faces) {
    if (f.t_minus >= 0) continue;
    boundary.push_back({f.a, f.b, f.label, f.patch});
  }
  Mesh rebuilt = build_mesh(m.vertices, m.tris, boundary, m.region, false);
  CHECK(rebuilt.n_tris() == m.n_tris());
  CHECK(rebuilt.n_faces() == m.n_faces());
}

BoundaryRule left_robin_rest_neumann() {
  return [](const Eigen::Vector2d& mid, const Eigen::Vector2d&) {
    BoundaryAssignment a;
    if (mid.x() < 1e-12) {
      a.label = FaceLabel::Robin;
      a.patch = 0;
    } else {
      a.label = FaceLabel::Neumann;
    }
    return a;
  };
}

}  // namespace

TEST_CASE("unit square counts and geometry") {
  Mesh m = unit_square_mesh(1, all_faces(FaceLabel::Dirichlet));
  CHECK(m.n_vertices() == 4);
  CHECK(m.n_tris() == 2);
  CHECK(m.n_faces() == 5);
  CHECK(total_area(m) == doctest::Approx(1.0));
  CHECK(all_ccw(m));
  // The refinement edge of both triangles is the diagonal (the longest edge).
  for (int t = 0; t < 2; ++t) {
    double ref_len = (m.vertex(t, 1) - m.vertex(t, 0)).norm();
    CHECK(ref_len == doctest::Approx(std::sqrt(2.0)));
  }

  Mesh m4 = unit_square_mesh(4, all_faces(FaceLabel::Dirichlet));
  CHECK(m4.n_tris() == 32);
  CHECK(m4.n_vertices() == 25);
  CHECK(total_area(m4) == doctest::Approx(1.0));
  int boundary_faces = 0;
  for (const auto& f : m4.faces) {
    if (f.t_minus < 0) ++boundary_faces;
  }
  CHECK(boundary_faces == 16);
}

TEST_CASE("boundary rules classify by midpoint") {
  Mesh m4 = unit_square_mesh(4, left_robin_rest_neumann());
  int robin = 0, neumann = 0;
  for (const auto& f : m4.faces) {
    if (f.label == FaceLabel::Robin) ++robin;
    if (f.label == FaceLabel::Neumann) ++neumann;
  }
  CHECK(robin == 4);
  CHECK(neumann == 12);

  Mesh m8 = unit_square_mesh(8, left_robin_rest_neumann());
  robin = neumann = 0;
  for (const auto& f : m8.faces) {
    if (f.label == FaceLabel::Robin) ++robin;
    if (f.label == FaceLabel::Neumann) ++neumann;
  }
  CHECK(robin == 8);
  CHECK(neumann == 24);
}

TEST_CASE("face normals are unit outward for the plus side") {
  Mesh m = unit_square_mesh(3, all_faces(FaceLabel::Dirichlet));
  for (const auto& f : m.faces) {
    CHECK(f.normal.norm() == doctest::Approx(1.0));
    Eigen::Vector2d centroid = (m.vertex(f.t_plus, 0) + m.vertex(f.t_plus, 1) +
                                m.vertex(f.t_plus, 2)) /
                               3.0;
    Eigen::Vector2d mid = 0.5 * (m.vertices[f.a] + m.vertices[f.b]);
    CHECK(f.normal.dot(mid - centroid) > 0.0);
    CHECK(f.t_plus >= 0);
    if (f.t_minus >= 0) CHECK(f.t_plus < f.t_minus);
  }
}

TEST_CASE("tri_face is the face opposite each local vertex") {
  Mesh m = unit_square_mesh(2, all_faces(FaceLabel::Dirichlet));
  for (int t = 0; t < m.n_tris(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const Face& f = m.faces[m.tri_face[t][k]];
      std::set<int> fv{f.a, f.b};
      std::set<int> expect{m.tris[t][(k + 1) % 3], m.tris[t][(k + 2) % 3]};
      CHECK(fv == expect);
    }
  }
}

TEST_CASE("structural and specification errors") {
  // Two triangles meeting along part of an edge (hanging node).
  std::vector<Eigen::Vector2d> verts = {{0, 0}, {1, 0}, {2, 0}, {0, 1}, {1, -1}};
  std::vector<std::array<int, 3>> tris = {{0, 1, 3}, {0, 2, 4}};
  CHECK_THROWS_AS(build_mesh(verts, tris, all_faces(FaceLabel::Dirichlet)),
                  StructuralError);

  // Zero-area triangle.
  std::vector<Eigen::Vector2d> verts2 = {{0, 0}, {1, 0}, {2, 0}};
  std::vector<std::array<int, 3>> tris2 = {{0, 1, 2}};
  CHECK_THROWS_AS(build_mesh(verts2, tris2, all_faces(FaceLabel::Dirichlet)),
                  GeometryError);

  // Unlabeled boundary edge in the explicit-list variant.
  std::vector<Eigen::Vector2d> verts3 = {{0, 0}, {1, 0}, {0, 1}};
  std::vector<std::array<int, 3>> tris3 = {{0, 1, 2}};
  std::vector<BoundaryEdgeSpec> partial = {
      {0, 1, FaceLabel::Dirichlet, -1}, {1, 2, FaceLabel::Dirichlet, -1}};
  CHECK_THROWS_AS(build_mesh(verts3, tris3, partial), SpecificationError);

  // Edge shared by three triangles.
  std::vector<Eigen::Vector2d> verts4 = {{0, 0}, {1, 0}, {0, 1}, {0, -1}, {-1, 0.5}};
  std::vector<std::array<int, 3>> tris4 = {{0, 1, 2}, {0, 1, 3}, {0, 1, 4}};
  CHECK_THROWS_AS(build_mesh(verts4, tris4, all_faces(FaceLabel::Dirichlet)),
                  StructuralError);
}

TEST_CASE("newest vertex bisection: uniform refinement quadruples") {
  Mesh m = unit_square_mesh(1, all_faces(FaceLabel::Dirichlet));
  Mesh r1 = refine_uniform(m);
  CHECK(r1.n_tris() == 8);
  CHECK(total_area(r1) == doctest::Approx(1.0));
  CHECK(all_ccw(r1));
  check_rebuildable(r1);

  Mesh r2 = refine_uniform(r1);
  CHECK(r2.n_tris() == 32);
  CHECK(total_area(r2) == doctest::Approx(1.0));
  CHECK(all_ccw(r2));
  check_rebuildable(r2);
}

TEST_CASE("structured meshes halve h under uniform refinement") {
  Mesh m = unit_square_mesh(2, all_faces(FaceLabel::Dirichlet));
  CoefficientSet coeffs;
  coeffs.omega = 1.0;
  coeffs.mu = {1.0};
  coeffs.A = {Eigen::Matrix2d::Identity()};
  double h0 = mesh_scalars(m, coeffs).h;
  CHECK(h0 == doctest::Approx(std::sqrt(2.0) / 2));
  Mesh r = refine_uniform(m);
  double h1 = mesh_scalars(r, coeffs).h;
  CHECK(h1 == doctest::Approx(h0 / 2));
  Mesh r2 = refine_uniform(r);
  CHECK(mesh_scalars(r2, coeffs).h == doctest::Approx(h0 / 4));
}

TEST_CASE("local refinement stays matching through closure") {
  Mesh m = unit_square_mesh(4, all_faces(FaceLabel::Dirichlet));
  Mesh r = refine(m, {5});
  CHECK(r.n_tris() > m.n_tris());
  CHECK(total_area(r) == doctest::Approx(1.0));
  CHECK(all_ccw(r));
  check_rebuildable(r);

  // Genealogy: every triangle has a parent, every new vertex two parents.
  CHECK(static_cast<int>(r.tri_parent.size()) == r.n_tris());
  CHECK(r.inherited_vertex_count == m.n_vertices());
  for (int v = 0; v < r.n_vertices(); ++v) {
    if (v < m.n_vertices()) {
      CHECK(r.vertex_parents[v][0] == -1);
    } else {
      int pa = r.vertex_parents[v][0];
      int pb = r.vertex_parents[v][1];
      REQUIRE(pa >= 0);
      REQUIRE(pb >= 0);
      Eigen::Vector2d mid = 0.5 * (m.vertices[pa] + m.vertices[pb]);
      CHECK((r.vertices[v] - mid).norm() < 1e-14);
    }
  }
}

TEST_CASE("refinement marks validate") {
  Mesh m = unit_square_mesh(1, all_faces(FaceLabel::Dirichlet));
  CHECK_THROWS_AS(refine(m, {}), InputError);
  CHECK_THROWS_AS(refine(m, {7}), InputError);
}

TEST_CASE("boundary labels survive refinement") {
  Mesh m = unit_square_mesh(2, left_robin_rest_neumann());
  Mesh r = refine_uniform(refine_uniform(m));
  int robin = 0, neumann = 0;
  for (const auto& f : r.faces) {
    if (f.t_minus >= 0) {
      CHECK(f.label == FaceLabel::Interior);
      continue;
    }
    Eigen::Vector2d mid = 0.5 * (r.vertices[f.a] + r.vertices[f.b]);
    if (f.label == FaceLabel::Robin) {
      ++robin;
      CHECK(f.patch == 0);
      CHECK(mid.x() == doctest::Approx(0.0));
    } else {
      CHECK(f.label == FaceLabel::Neumann);
      ++neumann;
    }
  }
  CHECK(robin == 8);
  CHECK(neumann == 24);
}

TEST_CASE("L-shaped mesh counts and area") {
  Mesh m = l_shape_mesh(1, all_faces(FaceLabel::Dirichlet));
  CHECK(m.n_tris() == 6);
  CHECK(total_area(m) == doctest::Approx(3.0));
  Mesh m2 = l_shape_mesh(2, all_faces(FaceLabel::Dirichlet));
  CHECK(m2.n_tris() == 24);
  CHECK(total_area(m2) == doctest::Approx(3.0));
  CHECK(all_ccw(m2));
  check_rebuildable(m2);
}

TEST_CASE("coefficient scalars") {
  Mesh m = unit_square_mesh(2, left_robin_rest_neumann());
  CoefficientSet coeffs;
  coeffs.omega = 3.0;
  coeffs.mu = {2.0};
  Eigen::Matrix2d A;
  A << 4.0, 1.0, 1.0, 2.0;
  coeffs.A = {A};
  coeffs.gamma = {0.5};
  MeshScalars s = mesh_scalars(m, coeffs);
  double alpha = 3.0 - std::sqrt(2.0);  // smaller eigenvalue of A
  CHECK(s.alpha_K[0] == doctest::Approx(alpha));
  CHECK(s.theta_K[0] == doctest::Approx(std::sqrt(alpha / 2.0)));
  for (int f = 0; f < m.n_faces(); ++f) {
    CHECK(s.alpha_F[f] == doctest::Approx(alpha));
    if (m.faces[f].label == FaceLabel::Robin) {
      CHECK(s.gamma_F[f] == doctest::Approx(0.5));
      CHECK(s.theta_F[f] == doctest::Approx(alpha / 0.5));
    } else {
      CHECK(s.gamma_F[f] == 0.0);
    }
  }
  CHECK(s.omega_h_theta_F_star ==
        doctest::Approx(3.0 * 0.5 / (alpha / 0.5)));
  CHECK(s.omega_h_theta_K_star ==
        doctest::Approx(3.0 * (std::sqrt(2.0) / 2) / std::sqrt(alpha / 2.0)));

  // Without Robin faces the face maximum stays zero.
  Mesh md = unit_square_mesh(2, all_faces(FaceLabel::Dirichlet));
  CoefficientSet cd = coeffs;
  cd.gamma.clear();
  CHECK(mesh_scalars(md, cd).omega_h_theta_F_star == 0.0);
}

TEST_CASE("coefficient validation") {
  CoefficientSet bad;
  bad.omega = 1.0;
  bad.mu = {1.0};
  Eigen::Matrix2d A;
  A << 1.0, 2.0, 2.0, 1.0;  // indefinite
  bad.A = {A};
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad.A = {Eigen::Matrix2d::Identity()};
  bad.mu = {-1.0};
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad.mu = {1.0};
  bad.gamma = {0.0};
  CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("affine maps round trip") {
  Mesh m = l_shape_mesh(2, all_faces(FaceLabel::Dirichlet));
  for (int t = 0; t < m.n_tris(); t += 5) {
    Eigen::Vector2d xi(0.3, 0.2);
    Eigen::Vector2d x = m.to_physical(t, xi);
    CHECK((m.to_reference(t, x) - xi).norm() < 1e-13);
  }
  // Inradius of a right isosceles triangle with legs 1/2.
  Mesh u = unit_square_mesh(2, all_faces(FaceLabel::Dirichlet));
  double a = 0.5;
  double expected = (2 * a + std::sqrt(2.0) * a - std::sqrt(2.0) * a - a +
                     0.0);  // placeholder, computed below
  (void)expected;
  double area = 0.5 * a * a;
  double perim = 2 * a + std::sqrt(2.0) * a;
  CHECK(u.rho(0) == doctest::Approx(2 * area / perim));
  CHECK(u.h(0) == doctest::Approx(std::sqrt(2.0) * a));
}

TEST_CASE("mesh text io round trip") {
  Mesh m = refine(unit_square_mesh(2, left_robin_rest_neumann()), {0, 3});
  std::stringstream ss;
  write_mesh(ss, m);
  Mesh back = read_mesh(ss);
  REQUIRE(back.n_vertices() == m.n_vertices());
  REQUIRE(back.n_tris() == m.n_tris());
  REQUIRE(back.n_faces() == m.n_faces());
  for (int t = 0; t < m.n_tris(); ++t) {
    CHECK(back.tris[t] == m.tris[t]);  // refinement edges preserved
    CHECK(back.region[t] == m.region[t]);
  }
  for (int v = 0; v < m.n_vertices(); ++v) {
    CHECK((back.vertices[v] - m.vertices[v]).norm() == 0.0);
  }
  std::map<std::pair<int, int>, std::pair<FaceLabel, int>> labels;
  for (const auto& f : m.faces) {
    if (f.t_minus < 0) labels[{f.a, f.b}] = {f.label, f.patch};
  }
  for (const auto& f : back.faces) {
    if (f.t_minus < 0) {
      auto it = labels.find({f.a, f.b});
      REQUIRE(it != labels.end());
      CHECK(it->second.first == f.label);
      if (f.label == FaceLabel::Robin) CHECK(it->second.second == f.patch);
    }
  }

  std::stringstream bad("not-a-mesh\n");
  CHECK_THROWS_AS(read_mesh(bad), SpecificationError);
}
