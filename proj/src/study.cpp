// SPDX-License-Identifier: Apache-2.0

#include "helmdg/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace helmdg {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void csv_cell(std::ostream& out, double v) {
  if (std::isnan(v)) return;  // empty cell
  out << format_g(v);
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

FaceLabel parse_label(const std::string& name) {
  if (name == "dirichlet") return FaceLabel::Dirichlet;
  if (name == "neumann") return FaceLabel::Neumann;
  if (name == "robin") return FaceLabel::Robin;
  throw SpecificationError("problem.boundary must be dirichlet, neumann, or robin (got '" + name + "')");
}

bool preset_domain(const std::string& domain) {
  return domain == "square" || domain == "lshape";
}

void check_mesh_list(const std::vector<int>& meshes, int floor,
                     const std::string& key) {
  if (meshes.empty()) throw SpecificationError(key + " must not be empty");
  int prev = floor - 1;
  for (int n : meshes) {
    if (n < floor)
      throw SpecificationError(key + " entries must be >= " + std::to_string(floor));
    if (n <= prev)
      throw SpecificationError(key + " entries must be strictly increasing");
    prev = n;
  }
}

std::vector<double> linspace(double a, double b, int count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = a;
    return out;
  }
  for (int i = 0; i < count; ++i)
    out[i] = a + (b - a) * double(i) / double(count - 1);
  return out;
}

void add_summary(ConvergenceRecord& rec, const std::string& key, double v) {
  if (std::isnan(v)) return;
  rec.summary.emplace_back(key, format_g(v));
}

// One mesh of a study: solve, measure, estimate. Error columns stay NaN when
// the problem carries no analytic truth. Filled in place and pinned: the
// context and field members point back into the mesh member.
struct MeshResult {
  Mesh mesh;
  DgContext ctx;
  NormContext norms;
  BrokenField u_h;
  EstimatorReport rep;
  SolveInfo info;
  double h = 0.0;
  double dofs = 0.0;
  double err_energy = kNaN, err_mu = kNaN, err_robin = kNaN;
  double eff = kNaN;

  MeshResult() = default;
  MeshResult(const MeshResult&) = delete;
  MeshResult& operator=(const MeshResult&) = delete;
};

void solve_and_measure(MeshResult& r, Mesh mesh, const ManufacturedCase& mc,
                       const StudyConfig& cfg) {
  r.mesh = std::move(mesh);
  DgOptions opt;
  opt.beta0 = cfg.beta0;
  r.ctx = make_context(r.mesh, mc.coeffs, cfg.degree, opt);
  Eigen::VectorXcd rhs = manufactured_rhs(r.ctx, mc);
  r.u_h = solve_ipdg(r.ctx, rhs, &r.info);
  r.norms = make_norms(r.ctx);
  r.h = r.ctx.scalars.h;
  r.dofs = double(r.ctx.scalar.dim());
  r.rep = compute_eta(r.norms, r.u_h, mc.f, mc.g_dirichlet, mc.g_neumann,
                      mc.g_robin);
  attach_oscillation(r.rep, r.norms, mc.f);
  if (mc.u) {
    r.err_energy = energy_error(r.norms, r.u_h, mc.u, mc.grad_u);
    r.err_mu = mu_l2_error(r.norms, r.u_h, mc.u);
    r.err_robin = robin_trace_error(r.norms, r.u_h, mc.u);
    r.eff = effectivity(r.rep, r.err_energy);
  }
}

}  // namespace

StudyConfig load_study_config(const ConfigMap& cfg,
                              const std::string& forced_kind) {
  StudyConfig sc;
  sc.kind = forced_kind.empty() ? cfg.require_string("study.kind")
                                : cfg.get_string("study.kind", forced_kind);
  if (!forced_kind.empty()) sc.kind = forced_kind;
  const bool known_kind =
      sc.kind == "uniform_convergence" || sc.kind == "adaptive" ||
      sc.kind == "gamma_ba_scaling" || sc.kind == "stability_sweep" ||
      sc.kind == "solve";
  if (!known_kind)
    throw SpecificationError(
        cfg.origin() +
        ": study.kind must be one of uniform_convergence, adaptive, "
        "gamma_ba_scaling, stability_sweep, solve (got '" +
        sc.kind + "')");

  sc.case_name = cfg.get_string("problem.case", "");
  sc.domain = cfg.get_string("problem.domain", "");
  if (!sc.case_name.empty() && !sc.domain.empty())
    throw SpecificationError(cfg.origin() +
                             ": problem.case and problem.domain are mutually "
                             "exclusive; pick one");
  if (sc.case_name.empty() && sc.domain.empty()) sc.case_name = "plane_wave";

  const bool custom = !sc.domain.empty();
  const bool file_domain = custom && !preset_domain(sc.domain);
  if (!custom) {
    // Manufactured cases carry their own data; reject keys they would
    // silently ignore.
    static const char* kCustomOnly[] = {
        "problem.boundary",   "problem.omega",      "coefficients.mu",
        "coefficients.a11",   "coefficients.a12",   "coefficients.a22",
        "coefficients.gamma", "data.f_re",          "data.f_im"};
    for (const char* key : kCustomOnly)
      if (cfg.has(key))
        throw SpecificationError(cfg.origin() + ": " + key +
                                 " applies only to custom domains; problem.case fixes data and coefficients");
    try {
      manufactured(sc.case_name);
    } catch (const InputError& e) {
      throw SpecificationError(cfg.origin() + ": " + e.what());
    }
  } else {
    if (file_domain && cfg.has("problem.boundary"))
      throw SpecificationError(cfg.origin() +
                               ": problem.boundary does not apply to mesh-file "
                               "domains; the file carries its own labels");
    if (!file_domain) {
      sc.boundary = cfg.get_string("problem.boundary", "robin");
      parse_label(sc.boundary);
    }
    sc.omega = cfg.get_double("problem.omega", 1.0);
    if (!(sc.omega > 0.0))
      throw SpecificationError(cfg.origin() + ": problem.omega must be > 0");
    sc.mu = cfg.get_double("coefficients.mu", 1.0);
    if (!(sc.mu > 0.0))
      throw SpecificationError(cfg.origin() + ": coefficients.mu must be > 0");
    const double a11 = cfg.get_double("coefficients.a11", 1.0);
    const double a12 = cfg.get_double("coefficients.a12", 0.0);
    const double a22 = cfg.get_double("coefficients.a22", 1.0);
    sc.A << a11, a12, a12, a22;
    if (!(a11 > 0.0 && a11 * a22 - a12 * a12 > 0.0))
      throw SpecificationError(cfg.origin() +
                               ": coefficients.a must be symmetric positive definite");
    sc.gamma = cfg.get_double("coefficients.gamma", 1.0);
    if (!(sc.gamma > 0.0))
      throw SpecificationError(cfg.origin() + ": coefficients.gamma must be > 0");
    sc.source = cplx(cfg.get_double("data.f_re", 1.0), cfg.get_double("data.f_im", 0.0));
  }

  sc.degree = cfg.get_int("problem.degree", 1);
  if (sc.degree < 1 || sc.degree > 8)
    throw SpecificationError(cfg.origin() + ": problem.degree must be in [1, 8]");
  sc.beta0 = cfg.get_double("problem.beta0", 10.0);
  if (!(sc.beta0 > 0.0))
    throw SpecificationError(cfg.origin() + ": problem.beta0 must be > 0");

  const int floor = file_domain ? 0 : 1;
  sc.meshes = cfg.get_int_list("study.meshes", {2, 4, 8, 16});
  check_mesh_list(sc.meshes, floor, cfg.origin() + ": study.meshes");
  sc.with_gamma = cfg.get_bool("study.gamma", false);
  sc.with_fields = cfg.get_bool("study.fields", false);

  sc.initial_n = cfg.get_int("adaptive.initial_n", 1);
  if (sc.initial_n < floor)
    throw SpecificationError(cfg.origin() + ": adaptive.initial_n must be >= " +
                             std::to_string(floor));
  sc.max_dofs = cfg.get_int("adaptive.max_dofs", 20000);
  if (sc.max_dofs < 1)
    throw SpecificationError(cfg.origin() + ": adaptive.max_dofs must be >= 1");
  sc.max_iterations = cfg.get_int("adaptive.max_iterations", 30);
  if (sc.max_iterations < 1)
    throw SpecificationError(cfg.origin() + ": adaptive.max_iterations must be >= 1");
  sc.theta_mark = cfg.get_double("adaptive.theta_mark", 0.5);
  if (!(sc.theta_mark > 0.0 && sc.theta_mark < 1.0))
    throw SpecificationError(cfg.origin() +
                             ": adaptive.theta_mark must lie strictly between 0 and 1");

  sc.sweep_min = cfg.get_double("sweep.omega_min", 4.2);
  sc.sweep_max = cfg.get_double("sweep.omega_max", 4.7);
  sc.sweep_samples = cfg.get_int("sweep.samples", 21);
  if (!(sc.sweep_min > 0.0))
    throw SpecificationError(cfg.origin() + ": sweep.omega_min must be > 0");
  if (sc.sweep_samples < 1)
    throw SpecificationError(cfg.origin() + ": sweep.samples must be >= 1");
  if (sc.sweep_samples > 1 && !(sc.sweep_max > sc.sweep_min))
    throw SpecificationError(cfg.origin() +
                             ": sweep.omega_max must exceed sweep.omega_min");

  sc.output_dir = cfg.get_string("output.directory", "out");
  cfg.finish();
  return sc;
}

ManufacturedCase resolve_problem(const StudyConfig& cfg) {
  if (!cfg.case_name.empty()) return manufactured(cfg.case_name);

  ManufacturedCase mc;
  mc.name = "custom:" + cfg.domain;
  mc.coeffs.omega = cfg.omega;
  mc.coeffs.mu = {cfg.mu};
  mc.coeffs.A = {cfg.A};
  mc.coeffs.gamma = {cfg.gamma};
  const cplx source = cfg.source;
  mc.f = [source](const Eigen::Vector2d&) { return source; };
  mc.smooth = true;

  if (preset_domain(cfg.domain)) {
    const FaceLabel label = parse_label(cfg.boundary);
    mc.boundary = all_faces(label, label == FaceLabel::Robin ? 0 : -1);
    const BoundaryRule rule = mc.boundary;
    if (cfg.domain == "square") {
      mc.mesh_family = [rule](int n) { return unit_square_mesh(n, rule); };
    } else {
      mc.mesh_family = [rule](int n) { return l_shape_mesh(n, rule); };
      mc.corner = Eigen::Vector2d::Zero();
    }
    return mc;
  }

  // Mesh-file domain: labels come from the file and the parameter counts
  // uniform refinement levels. Replicate the single coefficient set across
  // the file's regions.
  const std::string path = cfg.domain;
  Mesh probe = read_mesh_file(path);
  int n_regions = 1;
  for (int r : probe.region) n_regions = std::max(n_regions, r + 1);
  mc.coeffs.mu.assign(n_regions, cfg.mu);
  mc.coeffs.A.assign(n_regions, cfg.A);
  mc.mesh_family = [path](int levels) {
    Mesh m = read_mesh_file(path);
    for (int i = 0; i < levels; ++i) m = refine_uniform(m);
    return m;
  };
  return mc;
}

void write_study_csv(const ConvergenceRecord& rec, std::ostream& out) {
  out << "# helmdg-study v1\n";
  out << "# kind=" << rec.kind << "\n";
  if (!rec.label.empty()) out << "# label=" << rec.label << "\n";
  out << "# columns: ";
  for (std::size_t i = 0; i < rec.columns.size(); ++i) {
    if (i) out << ",";
    out << rec.columns[i];
  }
  out << "\n";
  for (const auto& row : rec.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      csv_cell(out, row[i]);
    }
    out << "\n";
  }
  for (const auto& kv : rec.summary)
    out << "# " << kv.first << "=" << kv.second << "\n";
}

void write_timing_csv(const ConvergenceRecord& rec, std::ostream& out) {
  out << "# helmdg-timing v1\n";
  if (!rec.label.empty()) out << "# label=" << rec.label << "\n";
  out << "# columns: row,seconds\n";
  for (std::size_t i = 0; i < rec.seconds.size(); ++i)
    out << i << "," << format_g(rec.seconds[i]) << "\n";
}

std::vector<int> dorfler_mark(const std::vector<double>& eta_K_sq,
                              double theta) {
  if (!(theta > 0.0 && theta < 1.0))
    throw SpecificationError("dorfler_mark: theta must lie strictly between 0 and 1");
  double total = 0.0;
  for (double v : eta_K_sq) {
    if (v < 0.0 || std::isnan(v))
      throw InputError("dorfler_mark: indicators must be nonnegative");
    total += v;
  }
  if (total == 0.0) return {};
  std::vector<int> order(eta_K_sq.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return eta_K_sq[a] > eta_K_sq[b]; });
  const double target = theta * theta * total;
  std::vector<int> marked;
  double acc = 0.0;
  for (int id : order) {
    marked.push_back(id);
    acc += eta_K_sq[id];
    if (acc >= target) break;
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

double fit_loglog_slope(const std::vector<double>& x,
                        const std::vector<double>& y) {
  if (x.size() != y.size()) return kNaN;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) ||
        !std::isfinite(y[i]))
      continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++count;
  }
  if (count < 2) return kNaN;
  const double denom = count * sxx - sx * sx;
  if (denom == 0.0) return kNaN;
  return (count * sxy - sx * sy) / denom;
}

ConvergenceRecord run_uniform_study(const StudyConfig& cfg) {
  const ManufacturedCase mc = resolve_problem(cfg);
  ConvergenceRecord rec;
  rec.kind = "uniform_convergence";
  rec.label = mc.name + " p=" + std::to_string(cfg.degree);
  rec.columns = {"n",          "h",        "dofs",        "err_energy",
                 "err_mu",     "err_robin", "best_energy", "qo_ratio",
                 "eta",        "rc_surrogate", "effectivity", "osc_total",
                 "check_g",    "check_d",  "tilde_g",     "tilde_d",
                 "gba"};
  std::vector<double> hs, errs, etas;
  for (int n : cfg.meshes) {
    const double t0 = now_seconds();
    MeshResult r;
    solve_and_measure(r, mc.mesh_family(n), mc, cfg);
    double best = kNaN, qo = kNaN;
    if (mc.u) {
      ConformingSpace conf = make_conforming_space(r.mesh, cfg.degree);
      best = best_conforming_energy_error(r.norms, conf, mc.u, mc.grad_u);
      qo = best > 0.0 ? r.err_energy / best : kNaN;
    }
    double check_g = kNaN, check_d = kNaN, tilde_g = kNaN, tilde_d = kNaN,
           gba = kNaN;
    if (cfg.with_gamma) {
      ApproximationFactors af = sample_gamma_ba(r.mesh, mc.coeffs, cfg.degree);
      check_g = af.check_g;
      check_d = af.check_d;
      tilde_g = af.tilde_g;
      tilde_d = af.tilde_d;
      gba = af.gba();
    }
    if (cfg.with_fields)
      emit_fields(r.mesh, r.u_h, &r.rep,
                  cfg.output_dir + "/uniform_n" + std::to_string(n));
    rec.rows.push_back({double(n), r.h, r.dofs, r.err_energy, r.err_mu,
                        r.err_robin, best, qo, r.rep.eta, r.rep.rc_surrogate,
                        r.eff, r.rep.osc_total, check_g, check_d, tilde_g,
                        tilde_d, gba});
    rec.seconds.push_back(now_seconds() - t0);
    hs.push_back(r.h);
    errs.push_back(r.err_energy);
    etas.push_back(r.rep.eta);
  }
  rec.summary.emplace_back("case", mc.name);
  rec.summary.emplace_back("degree", std::to_string(cfg.degree));
  add_summary(rec, "energy_slope", fit_loglog_slope(hs, errs));
  add_summary(rec, "eta_slope", fit_loglog_slope(hs, etas));
  return rec;
}

ConvergenceRecord run_adaptive(const StudyConfig& cfg) {
  const ManufacturedCase mc = resolve_problem(cfg);
  ConvergenceRecord rec;
  rec.kind = "adaptive";
  rec.label = mc.name + " p=" + std::to_string(cfg.degree) +
              " theta=" + format_g(cfg.theta_mark);
  rec.columns = {"iter",        "h",   "dofs",        "err_energy",
                 "err_mu",      "err_robin", "eta",   "rc_surrogate",
                 "effectivity", "osc_total", "marked", "marked_near_corner"};
  Mesh mesh = mc.mesh_family(cfg.initial_n);
  std::vector<double> dofs_list, errs, etas;
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    const double t0 = now_seconds();
    MeshResult r;
    solve_and_measure(r, std::move(mesh), mc, cfg);
    std::vector<double> indicators(r.rep.eta_K.size());
    for (std::size_t t = 0; t < indicators.size(); ++t)
      indicators[t] = r.rep.eta_K[t] * r.rep.eta_K[t];
    std::vector<int> marked = dorfler_mark(indicators, cfg.theta_mark);
    double near_corner = kNaN;
    if (!mc.smooth) {
      int close = 0;
      for (int t : marked) {
        const auto& tri = r.mesh.tris[t];
        const Eigen::Vector2d centroid = (r.mesh.vertices[tri[0]] +
                                          r.mesh.vertices[tri[1]] +
                                          r.mesh.vertices[tri[2]]) /
                                         3.0;
        if ((centroid - mc.corner).norm() <= 10.0 * r.ctx.scalars.h_K[t])
          ++close;
      }
      near_corner = double(close);
    }
    if (cfg.with_fields)
      emit_fields(r.mesh, r.u_h, &r.rep,
                  cfg.output_dir + "/adaptive_iter" + std::to_string(iter));
    rec.rows.push_back({double(iter), r.h, r.dofs, r.err_energy, r.err_mu,
                        r.err_robin, r.rep.eta, r.rep.rc_surrogate, r.eff,
                        r.rep.osc_total, double(marked.size()), near_corner});
    rec.seconds.push_back(now_seconds() - t0);
    dofs_list.push_back(r.dofs);
    errs.push_back(r.err_energy);
    etas.push_back(r.rep.eta);
    if (marked.empty() || long(r.dofs) >= cfg.max_dofs) break;
    mesh = refine(r.mesh, marked);
  }
  rec.summary.emplace_back("case", mc.name);
  rec.summary.emplace_back("degree", std::to_string(cfg.degree));
  add_summary(rec, "energy_dofs_rate", -fit_loglog_slope(dofs_list, errs));
  add_summary(rec, "eta_dofs_rate", -fit_loglog_slope(dofs_list, etas));
  return rec;
}

ConvergenceRecord run_gamma_study(const StudyConfig& cfg) {
  const ManufacturedCase mc = resolve_problem(cfg);
  {
    Mesh probe = mc.mesh_family(cfg.meshes.front());
    for (const Face& face : probe.faces)
      if (face.label == FaceLabel::Robin)
        throw SpecificationError(
            "gamma_ba_scaling requires a problem without Robin boundary");
  }
  ConvergenceRecord rec;
  rec.kind = "gamma_ba_scaling";
  rec.label = mc.name + " p=" + std::to_string(cfg.degree);
  rec.columns = {"n",       "h",   "dofs",      "check_g",   "check_d",
                 "gba_check", "gba", "probe",   "iterations", "converged"};
  std::vector<double> hs, cgs, cds;
  for (int n : cfg.meshes) {
    const double t0 = now_seconds();
    Mesh mesh = mc.mesh_family(n);
    const MeshScalars scalars = mesh_scalars(mesh, mc.coeffs);
    const double dofs = double(make_broken_space(mesh, cfg.degree).dim());
    ApproximationFactors af = sample_gamma_ba(mesh, mc.coeffs, cfg.degree);
    double probe = kNaN;
    try {
      ConformingSpace conf = make_conforming_space(mesh, cfg.degree);
      ConformingSystem sys = assemble_conforming(conf, mc.coeffs);
      probe = stability_probe(sys);
    } catch (const NumericalError&) {
    }
    rec.rows.push_back({double(n), scalars.h, dofs, af.check_g, af.check_d,
                        af.gba_check(), af.gba(), probe, double(af.iterations),
                        af.converged ? 1.0 : 0.0});
    rec.seconds.push_back(now_seconds() - t0);
    hs.push_back(scalars.h);
    cgs.push_back(af.check_g);
    cds.push_back(af.check_d);
  }
  rec.summary.emplace_back("case", mc.name);
  rec.summary.emplace_back("degree", std::to_string(cfg.degree));
  add_summary(rec, "check_g_slope", fit_loglog_slope(hs, cgs));
  add_summary(rec, "check_d_slope", fit_loglog_slope(hs, cds));
  return rec;
}

ConvergenceRecord run_stability_sweep(const StudyConfig& cfg) {
  const ManufacturedCase mc = resolve_problem(cfg);
  ConvergenceRecord rec;
  rec.kind = "stability_sweep";
  rec.label = mc.name + " p=" + std::to_string(cfg.degree) +
              " n=" + std::to_string(cfg.initial_n);
  rec.columns = {"omega",   "probe", "check_g", "check_d",
                 "gba_check", "status", "cond"};
  const Mesh mesh = mc.mesh_family(cfg.initial_n);
  const ConformingSpace conf = make_conforming_space(mesh, cfg.degree);
  DgOptions opt;
  opt.beta0 = cfg.beta0;
  double min_probe = std::numeric_limits<double>::infinity();
  double max_probe = 0.0;
  double min_probe_omega = kNaN;
  int failures = 0;
  for (double w : linspace(cfg.sweep_min, cfg.sweep_max, cfg.sweep_samples)) {
    const double t0 = now_seconds();
    CoefficientSet coeffs = mc.coeffs;
    coeffs.omega = w;
    double probe = kNaN;
    try {
      ConformingSystem sys = assemble_conforming(conf, coeffs);
      probe = stability_probe(sys);
    } catch (const NumericalError&) {
    }
    double check_g = kNaN, check_d = kNaN, gba_check = kNaN;
    if (cfg.with_gamma) {
      ApproximationFactors af = sample_gamma_ba(mesh, coeffs, cfg.degree);
      check_g = af.check_g;
      check_d = af.check_d;
      gba_check = af.gba_check();
    }
    double status = 0.0, cond = kNaN;
    try {
      DgContext ctx = make_context(mesh, coeffs, cfg.degree, opt);
      Eigen::VectorXcd rhs =
          assemble_rhs(ctx, mc.f, mc.g_neumann, mc.g_robin, mc.g_dirichlet);
      SolveInfo info;
      solve_ipdg(ctx, rhs, &info);
      cond = info.condition_estimate;
    } catch (const NumericalError& e) {
      status = 3.0;
      cond = e.condition_estimate > 0.0 ? e.condition_estimate : kNaN;
      ++failures;
    }
    rec.rows.push_back({w, probe, check_g, check_d, gba_check, status, cond});
    rec.seconds.push_back(now_seconds() - t0);
    if (std::isfinite(probe)) {
      max_probe = std::max(max_probe, probe);
      if (probe < min_probe) {
        min_probe = probe;
        min_probe_omega = w;
      }
    }
  }
  rec.summary.emplace_back("case", mc.name);
  add_summary(rec, "min_probe_omega", min_probe_omega);
  if (std::isfinite(min_probe) && min_probe > 0.0)
    add_summary(rec, "probe_dip", max_probe / min_probe);
  rec.summary.emplace_back("failures", std::to_string(failures));
  return rec;
}

void emit_fields(const Mesh& mesh, const BrokenField& u,
                 const EstimatorReport* rep, const std::string& base) {
  write_mesh_file(base + ".mesh", mesh);
  write_field_file(base + ".field", "broken", u.space->degree, u.coef);
  std::ofstream out(base + "_samples.csv");
  if (!out) throw InputError("emit_fields: cannot write " + base + "_samples.csv");
  out << "# helmdg-samples v1\n";
  out << "# columns: element,sample,x,y,re,im,eta_K\n";
  static const Eigen::Vector2d kSamples[6] = {
      {0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0},
      {0.5, 0.0}, {0.5, 0.5}, {0.0, 0.5}};
  for (int t = 0; t < mesh.n_tris(); ++t) {
    for (int s = 0; s < 6; ++s) {
      const Eigen::Vector2d x = mesh.to_physical(t, kSamples[s]);
      const cplx v = u.eval(t, kSamples[s]);
      out << t << "," << s << "," << format_g(x.x()) << "," << format_g(x.y())
          << "," << format_g(v.real()) << "," << format_g(v.imag()) << ",";
      csv_cell(out, rep ? rep->eta_K[t] : kNaN);
      out << "\n";
    }
  }
}

void run_solve(const StudyConfig& cfg, std::ostream& log) {
  const ManufacturedCase mc = resolve_problem(cfg);
  MeshResult r;
  solve_and_measure(r, mc.mesh_family(cfg.initial_n), mc, cfg);
  std::filesystem::create_directories(cfg.output_dir);
  emit_fields(r.mesh, r.u_h, &r.rep, cfg.output_dir + "/solution");
  std::ofstream est(cfg.output_dir + "/estimator.csv");
  write_estimator_csv(r.rep, r.mesh, est);
  log << "solve " << mc.name << ": dofs=" << long(r.dofs)
      << " eta=" << format_g(r.rep.eta)
      << " residual_rel=" << format_g(r.info.residual_rel);
  if (mc.u) log << " err_energy=" << format_g(r.err_energy);
  log << " -> " << cfg.output_dir << "/solution*\n";
}

void run_study_command(const StudyConfig& cfg, std::ostream& log) {
  std::filesystem::create_directories(cfg.output_dir);
  if (cfg.kind == "solve") {
    run_solve(cfg, log);
    return;
  }
  ConvergenceRecord rec;
  if (cfg.kind == "uniform_convergence")
    rec = run_uniform_study(cfg);
  else if (cfg.kind == "adaptive")
    rec = run_adaptive(cfg);
  else if (cfg.kind == "gamma_ba_scaling")
    rec = run_gamma_study(cfg);
  else if (cfg.kind == "stability_sweep")
    rec = run_stability_sweep(cfg);
  else
    throw SpecificationError("unknown study kind '" + cfg.kind + "'");

  const std::string main_path = cfg.output_dir + "/" + cfg.kind + ".csv";
  {
    std::ofstream out(main_path);
    if (!out) throw InputError("cannot write " + main_path);
    write_study_csv(rec, out);
  }
  {
    std::ofstream out(cfg.output_dir + "/" + cfg.kind + "_timing.csv");
    write_timing_csv(rec, out);
  }
  log << cfg.kind << " [" << rec.label << "]: " << rec.rows.size()
      << " rows -> " << main_path << "\n";
  for (const auto& kv : rec.summary)
    log << "  " << kv.first << "=" << kv.second << "\n";
}

}  // namespace helmdg
