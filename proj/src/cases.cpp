// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "helmdg/solver.hpp"

namespace helmdg {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Quintic cutoff: 1 below r0, 0 above r1, C^2 across both joints.
struct Cutoff {
  double r0 = 0.35;
  double r1 = 0.85;

  double value(double r) const {
    if (r <= r0) return 1.0;
    if (r >= r1) return 0.0;
    double t = (r - r0) / (r1 - r0);
    return 1.0 - (10.0 * t * t * t - 15.0 * t * t * t * t +
                  6.0 * t * t * t * t * t);
  }
  double deriv(double r) const {
    if (r <= r0 || r >= r1) return 0.0;
    double w = r1 - r0;
    double t = (r - r0) / w;
    return -(30.0 * t * t - 60.0 * t * t * t + 30.0 * t * t * t * t) / w;
  }
  double deriv2(double r) const {
    if (r <= r0 || r >= r1) return 0.0;
    double w = r1 - r0;
    double t = (r - r0) / w;
    return -(60.0 * t - 180.0 * t * t + 120.0 * t * t * t) / (w * w);
  }
};

// Angle around the reentrant corner, in [0, 3pi/2] over the L-shaped domain.
double corner_angle(const Eigen::Vector2d& x) {
  double th = std::atan2(x.y(), x.x());
  if (th < -kPi / 2.0 + 1e-12) th += 2.0 * kPi;
  return th;
}

ManufacturedCase plane_wave_case() {
  ManufacturedCase mc;
  mc.name = "plane_wave";
  mc.coeffs.omega = 5.0;
  mc.coeffs.mu = {1.0};
  mc.coeffs.A = {Eigen::Matrix2d::Identity()};
  mc.coeffs.gamma = {1.0};
  mc.boundary = all_faces(FaceLabel::Robin, 0);
  mc.mesh_family = [](int n) {
    return unit_square_mesh(n, all_faces(FaceLabel::Robin, 0));
  };
  double k = 5.0;  // omega sqrt(mu/alpha)
  Eigen::Vector2d d(std::cos(0.3), std::sin(0.3));
  mc.u = [k, d](const Eigen::Vector2d& x) {
    return std::exp(cplx(0.0, k * d.dot(x)));
  };
  mc.grad_u = [k, d](const Eigen::Vector2d& x) {
    cplx v = cplx(0.0, k) * std::exp(cplx(0.0, k * d.dot(x)));
    return Eigen::Vector2cd(v * d.x(), v * d.y());
  };
  mc.f = nullptr;  // -w^2 mu u - div(grad u) = (k^2 - w^2 mu) u = 0
  double omega = mc.coeffs.omega;
  ScalarFn u = mc.u;
  VectorFn gu = mc.grad_u;
  mc.g_robin = [omega, u, gu](const Eigen::Vector2d& x,
                              const Eigen::Vector2d& n) {
    Eigen::Vector2cd g = gu(x);
    return g.x() * n.x() + g.y() * n.y() - cplx(0.0, omega) * u(x);
  };
  mc.flux = mc.grad_u;
  mc.div_flux = [k, u](const Eigen::Vector2d& x) { return -k * k * u(x); };
  return mc;
}

ManufacturedCase corner_singular_case() {
  ManufacturedCase mc;
  mc.name = "corner_singular";
  mc.coeffs.omega = 2.0;
  mc.coeffs.mu = {1.0};
  mc.coeffs.A = {Eigen::Matrix2d::Identity()};
  mc.coeffs.gamma = {};
  mc.boundary = all_faces(FaceLabel::Dirichlet);
  mc.mesh_family = [](int n) {
    return l_shape_mesh(n, all_faces(FaceLabel::Dirichlet));
  };
  Cutoff chi;
  double omega = mc.coeffs.omega;
  mc.u = [chi](const Eigen::Vector2d& x) {
    double r = x.norm();
    if (r < 1e-14) return cplx(0.0);
    double th = corner_angle(x);
    double s = std::pow(r, 2.0 / 3.0) * std::sin(2.0 * th / 3.0);
    return cplx(chi.value(r) * s);
  };
  mc.grad_u = [chi](const Eigen::Vector2d& x) {
    double r = x.norm();
    if (r < 1e-14) return Eigen::Vector2cd(0.0, 0.0);
    double th = corner_angle(x);
    double sv = std::sin(2.0 * th / 3.0);
    double cv = std::cos(2.0 * th / 3.0);
    double s = std::pow(r, 2.0 / 3.0) * sv;
    double scale = (2.0 / 3.0) * std::pow(r, -1.0 / 3.0);
    Eigen::Vector2d er(std::cos(th), std::sin(th));
    Eigen::Vector2d et(-std::sin(th), std::cos(th));
    Eigen::Vector2d grad_s = scale * (sv * er + cv * et);
    Eigen::Vector2d g = chi.value(r) * grad_s + s * chi.deriv(r) * er;
    return Eigen::Vector2cd(g.x(), g.y());
  };
  mc.f = [chi, omega](const Eigen::Vector2d& x) {
    double r = x.norm();
    if (r < 1e-14) return cplx(0.0);
    double th = corner_angle(x);
    double sv = std::sin(2.0 * th / 3.0);
    double s = std::pow(r, 2.0 / 3.0) * sv;
    double ds = (2.0 / 3.0) * std::pow(r, -1.0 / 3.0) * sv;
    double c = chi.value(r);
    double c1 = chi.deriv(r);
    double c2 = chi.deriv2(r);
    // Laplacian of chi*s: s is harmonic, so only cutoff terms survive.
    double lap = 2.0 * c1 * ds + s * (c2 + c1 / r);
    return cplx(-omega * omega * c * s - lap);
  };
  ScalarFn u = mc.u;
  ScalarFn f = mc.f;
  mc.flux = mc.grad_u;
  mc.div_flux = [u, f, omega](const Eigen::Vector2d& x) {
    return -f(x) - omega * omega * u(x);
  };
  mc.smooth = false;
  mc.corner = Eigen::Vector2d::Zero();
  return mc;
}

ManufacturedCase constant_case() {
  ManufacturedCase mc;
  mc.name = "constant";
  mc.coeffs.omega = 2.5;
  mc.coeffs.mu = {1.0};
  mc.coeffs.A = {Eigen::Matrix2d::Identity()};
  mc.coeffs.gamma = {};
  mc.boundary = all_faces(FaceLabel::Neumann);
  mc.mesh_family = [](int n) {
    return unit_square_mesh(n, all_faces(FaceLabel::Neumann));
  };
  cplx c(1.5, -0.5);
  double omega = mc.coeffs.omega;
  mc.u = [c](const Eigen::Vector2d&) { return c; };
  mc.grad_u = [](const Eigen::Vector2d&) {
    return Eigen::Vector2cd(0.0, 0.0);
  };
  mc.f = [c, omega](const Eigen::Vector2d&) { return -omega * omega * c; };
  mc.flux = [](const Eigen::Vector2d&) { return Eigen::Vector2cd(0.0, 0.0); };
  mc.div_flux = [](const Eigen::Vector2d&) { return cplx(0.0); };
  return mc;
}

}  // namespace

ManufacturedCase manufactured(const std::string& name) {
  if (name == "plane_wave") return plane_wave_case();
  if (name == "corner_singular") return corner_singular_case();
  if (name == "constant") return constant_case();
  throw InputError("unknown manufactured case: " + name);
}

}  // namespace helmdg
