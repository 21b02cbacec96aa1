// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "helmdg/config.hpp"
#include "helmdg/spaces.hpp"
#include "helmdg/study.hpp"

using namespace helmdg;

namespace {

StudyConfig config_from(const std::string& text,
                        const std::string& forced = "") {
  return load_study_config(parse_config_text(text, "<test>"), forced);
}

std::filesystem::path scratch_dir() {
  auto p = std::filesystem::temp_directory_path() / "helmdg_test_cli";
  std::filesystem::create_directories(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config text parses sections, comments, and whitespace") {
  ConfigMap cfg = parse_config_text(
      "# leading comment\n"
      "[study]\n"
      "kind = uniform_convergence   \n"
      "\n"
      "[problem]\n"
      "degree = 3\n"
      "beta0 = 12.5\n"
      "[study]\n"
      "meshes = 2, 4,8\n",
      "<inline>");
  CHECK(cfg.require_string("study.kind") == "uniform_convergence");
  CHECK(cfg.get_int("problem.degree", 1) == 3);
  CHECK(cfg.get_double("problem.beta0", 0.0) == doctest::Approx(12.5));
  std::vector<int> m = cfg.get_int_list("study.meshes", {});
  REQUIRE(m.size() == 3);
  CHECK(m[0] == 2);
  CHECK(m[2] == 8);
  CHECK_NOTHROW(cfg.finish());
}

TEST_CASE("config text rejects malformed input") {
  CHECK_THROWS_AS(parse_config_text("[study\nkind = x\n", "<t>"),
                  SpecificationError);
  CHECK_THROWS_AS(parse_config_text("kind value\n", "<t>"),
                  SpecificationError);
  CHECK_THROWS_AS(parse_config_text("[study]\nkind = a\nkind = b\n", "<t>"),
                  SpecificationError);
  CHECK_THROWS_AS(parse_config_text("[bad name]\nk = v\n", "<t>"),
                  SpecificationError);
}

TEST_CASE("typed getters validate values") {
  ConfigMap cfg = parse_config_text(
      "[a]\nn = seven\nx = 1.5.2\nb = maybe\nlist = 1,two\nempty =\n", "<t>");
  CHECK_THROWS_AS(cfg.get_int("a.n", 0), SpecificationError);
  CHECK_THROWS_AS(cfg.get_double("a.x", 0.0), SpecificationError);
  CHECK_THROWS_AS(cfg.get_bool("a.b", false), SpecificationError);
  CHECK_THROWS_AS(cfg.get_int_list("a.list", {}), SpecificationError);
  CHECK_THROWS_AS(cfg.require_string("a.missing"), SpecificationError);
  CHECK(cfg.require_string("a.empty").empty());
  CHECK(cfg.get_int("a.absent", 9) == 9);
}

TEST_CASE("finish rejects keys nothing consumed") {
  ConfigMap cfg = parse_config_text("[study]\nkind = solve\ntypo = 1\n", "<t>");
  cfg.require_string("study.kind");
  CHECK_THROWS_WITH_AS(cfg.finish(),
                       doctest::Contains("study.typo"), SpecificationError);
}

TEST_CASE("study config defaults and forced kinds") {
  StudyConfig cfg = config_from("[study]\nkind = uniform_convergence\n");
  CHECK(cfg.kind == "uniform_convergence");
  CHECK(cfg.case_name == "plane_wave");
  CHECK(cfg.domain.empty());
  CHECK(cfg.degree == 1);
  CHECK(cfg.beta0 == doctest::Approx(10.0));
  REQUIRE(cfg.meshes.size() == 4);
  CHECK(cfg.meshes.back() == 16);
  CHECK(cfg.output_dir == "out");

  StudyConfig forced = config_from("", "solve");
  CHECK(forced.kind == "solve");
  StudyConfig overridden =
      config_from("[study]\nkind = uniform_convergence\n", "gamma_ba_scaling");
  CHECK(overridden.kind == "gamma_ba_scaling");
}

TEST_CASE("study config validation failures") {
  CHECK_THROWS_AS(config_from("[study]\nkind = mystery\n"), SpecificationError);
  CHECK_THROWS_AS(config_from(""), SpecificationError);  // kind required
  // A manufactured case and a custom domain are mutually exclusive.
  CHECK_THROWS_AS(config_from("[study]\nkind = solve\n"
                              "[problem]\ncase = plane_wave\ndomain = square\n"),
                  SpecificationError);
  CHECK_THROWS_AS(config_from("[study]\nkind = solve\n"
                              "[problem]\ncase = unknown_case\n"),
                  SpecificationError);
  // Custom-only keys are rejected when a case fixes the data.
  CHECK_THROWS_AS(config_from("[study]\nkind = solve\n"
                              "[problem]\ncase = plane_wave\nomega = 3\n"),
                  SpecificationError);
  CHECK_THROWS_AS(config_from("[study]\nkind = solve\n"
                              "[problem]\ncase = constant\n"
                              "[coefficients]\nmu = 2\n"),
                  SpecificationError);
  // Custom-domain coefficient validation.
  CHECK_THROWS_AS(config_from("[study]\nkind = solve\n"
                              "[problem]\ndomain = square\nomega = -1\n"),
                  SpecificationError);
  CHECK_THROWS_AS(config_from("[study]\nkind = solve\n"
                              "[problem]\ndomain = square\n"
                              "[coefficients]\na11 = 1\na22 = 1\na12 = 2\n"),
                  SpecificationError);
  CHECK_THROWS_AS(config_from("[study]\nkind = solve\n"
                              "[problem]\ndomain = square\nboundary = open\n"),
                  SpecificationError);
  CHECK_THROWS_AS(config_from("[study]\nkind = solve\n"
                              "[problem]\ndegree = 9\n"),
                  SpecificationError);
  CHECK_THROWS_AS(config_from("[study]\nkind = solve\n"
                              "[problem]\nbeta0 = 0\n"),
                  SpecificationError);
  CHECK_THROWS_AS(config_from("[study]\nkind = uniform_convergence\n"
                              "meshes = 4,4,8\n"),
                  SpecificationError);
  CHECK_THROWS_AS(config_from("[study]\nkind = uniform_convergence\n"
                              "meshes = 8,4\n"),
                  SpecificationError);
  CHECK_THROWS_AS(config_from("[study]\nkind = adaptive\n"
                              "[adaptive]\ntheta_mark = 1\n"),
                  SpecificationError);
  CHECK_THROWS_AS(config_from("[study]\nkind = adaptive\n"
                              "[adaptive]\nmax_iterations = 0\n"),
                  SpecificationError);
  CHECK_THROWS_AS(config_from("[study]\nkind = stability_sweep\n"
                              "[sweep]\nomega_min = 2\nomega_max = 1\n"
                              "samples = 3\n"),
                  SpecificationError);
}

TEST_CASE("resolve_problem builds custom domains") {
  StudyConfig cfg = config_from(
      "[study]\nkind = solve\n"
      "[problem]\ndomain = square\nboundary = neumann\nomega = 2.5\n"
      "[coefficients]\nmu = 1.5\na11 = 2\na22 = 1\na12 = 0.25\ngamma = 0.5\n"
      "[data]\nf_re = 1\nf_im = -1\n");
  ManufacturedCase mc = resolve_problem(cfg);
  CHECK(mc.u == nullptr);
  CHECK(mc.coeffs.omega == doctest::Approx(2.5));
  CHECK(mc.coeffs.mu[0] == doctest::Approx(1.5));
  CHECK(mc.coeffs.A[0](0, 1) == doctest::Approx(0.25));
  Mesh mesh = mc.mesh_family(2);
  for (const Face& f : mesh.faces) {
    if (f.t_minus >= 0) continue;
    CHECK(f.label == FaceLabel::Neumann);
  }
  REQUIRE(mc.f != nullptr);
  cplx fv = mc.f(Eigen::Vector2d(0.3, 0.4));
  CHECK(fv.real() == doctest::Approx(1.0));
  CHECK(fv.imag() == doctest::Approx(-1.0));

  StudyConfig lcfg = config_from(
      "[study]\nkind = solve\n[problem]\ndomain = lshape\n");
  ManufacturedCase lmc = resolve_problem(lcfg);
  Mesh lmesh = lmc.mesh_family(1);
  CHECK(lmesh.n_tris() == 6);
  CHECK(lmc.corner.norm() == doctest::Approx(0.0));
}

TEST_CASE("dorfler marking selects a minimal dominating prefix") {
  std::vector<double> ind = {0.1, 4.0, 0.2, 2.0, 0.4, 1.0, 0.3};
  double total = 0.0;
  for (double v : ind) total += v;
  double theta = 0.5;
  std::vector<int> marked = dorfler_mark(ind, theta);
  REQUIRE(!marked.empty());
  CHECK(std::is_sorted(marked.begin(), marked.end()));
  double acc = 0.0;
  for (int t : marked) acc += ind[t];
  CHECK(acc >= theta * theta * total);
  // Greedy by descending value: removing the smallest marked value must drop
  // the accumulated share below the threshold, so the set is minimal.
  double smallest = ind[marked[0]];
  for (int t : marked) smallest = std::min(smallest, ind[t]);
  CHECK(acc - smallest < theta * theta * total);

  SUBCASE("ties break toward lower element ids") {
    std::vector<double> tie = {1.0, 1.0, 1.0, 1.0};
    std::vector<int> m = dorfler_mark(tie, 0.5);
    REQUIRE(m.size() == 1);
    CHECK(m[0] == 0);
  }
  SUBCASE("theta one marks everything with nonzero share") {
    CHECK_THROWS_AS(dorfler_mark(ind, 1.0), SpecificationError);
    CHECK_THROWS_AS(dorfler_mark(ind, 0.0), SpecificationError);
  }
  SUBCASE("invalid indicators are rejected") {
    CHECK_THROWS_AS(dorfler_mark({1.0, -0.5}, 0.5), InputError);
    CHECK_THROWS_AS(dorfler_mark({1.0, std::nan("")}, 0.5), InputError);
  }
  SUBCASE("all-zero indicators mark nothing") {
    CHECK(dorfler_mark({0.0, 0.0}, 0.5).empty());
  }
}

TEST_CASE("log-log slope fit recovers power laws") {
  std::vector<double> x = {1.0, 0.5, 0.25, 0.125};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * v * v);
  CHECK(fit_loglog_slope(x, y) == doctest::Approx(2.0).epsilon(1e-12));
  // Nonpositive and nonfinite pairs are dropped before fitting.
  std::vector<double> x2 = {1.0, 0.5, 0.25, 0.125};
  std::vector<double> y2 = {2.0, 1.0, 0.0, std::nan("")};
  CHECK(std::isfinite(fit_loglog_slope(x2, y2)));
  CHECK(fit_loglog_slope(x2, y2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::isnan(fit_loglog_slope({1.0}, {2.0})));
  CHECK(std::isnan(fit_loglog_slope({1.0, 0.5}, {0.0, 0.0})));
}

TEST_CASE("study csv serialization is deterministic with empty NaN cells") {
  ConvergenceRecord rec;
  rec.kind = "uniform_convergence";
  rec.label = "demo";
  rec.columns = {"n", "value", "maybe"};
  rec.rows = {{2.0, 0.125, std::nan("")}, {4.0, 0.0625, 1.0 / 3.0}};
  rec.summary = {{"slope", "1"}};
  rec.seconds = {0.25, 0.5};
  std::stringstream a, b;
  write_study_csv(rec, a);
  write_study_csv(rec, b);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("# helmdg-study v1") == 0);
  CHECK(a.str().find("2,0.125,\n") != std::string::npos);
  CHECK(a.str().find("0.33333333333333331") != std::string::npos);
  CHECK(a.str().find("# slope=1") != std::string::npos);
  // Timings go to the sidecar, never the main table.
  CHECK(a.str().find("0.25") == std::string::npos);
  std::stringstream t;
  write_timing_csv(rec, t);
  CHECK(t.str().find("# helmdg-timing v1") == 0);
  CHECK(t.str().find("0,0.25") != std::string::npos);
  CHECK(t.str().find("1,0.5") != std::string::npos);
}

TEST_CASE("uniform study produces finite deterministic tables") {
  StudyConfig cfg = config_from(
      "[study]\nkind = uniform_convergence\nmeshes = 1,2\n"
      "[problem]\ncase = plane_wave\n");
  ConvergenceRecord rec = run_uniform_study(cfg);
  REQUIRE(rec.rows.size() == 2);
  REQUIRE(rec.columns.size() == rec.rows[0].size());
  auto col = [&](const std::string& name) {
    for (std::size_t j = 0; j < rec.columns.size(); ++j)
      if (rec.columns[j] == name) return j;
    REQUIRE(false);
    return std::size_t(0);
  };
  CHECK(rec.rows[0][col("n")] == doctest::Approx(1.0));
  CHECK(rec.rows[1][col("dofs")] == doctest::Approx(24.0));
  for (const char* name : {"err_energy", "eta", "effectivity", "qo_ratio"}) {
    CHECK(std::isfinite(rec.rows[1][col(name)]));
    CHECK(rec.rows[1][col(name)] > 0.0);
  }
  CHECK(rec.rows[1][col("err_energy")] < rec.rows[0][col("err_energy")]);
  ConvergenceRecord again = run_uniform_study(cfg);
  std::stringstream csv_a, csv_b;
  write_study_csv(rec, csv_a);
  write_study_csv(again, csv_b);
  CHECK(csv_a.str() == csv_b.str());
  bool has_slope = false;
  for (const auto& kv : rec.summary) has_slope |= kv.first == "energy_slope";
  CHECK(has_slope);
}

TEST_CASE("adaptive study refines under a dof budget") {
  StudyConfig cfg = config_from(
      "[study]\nkind = adaptive\n"
      "[problem]\ncase = corner_singular\n"
      "[adaptive]\ninitial_n = 1\nmax_iterations = 3\nmax_dofs = 5000\n");
  ConvergenceRecord rec = run_adaptive(cfg);
  REQUIRE(rec.rows.size() >= 2);
  REQUIRE(rec.rows.size() <= 3);
  auto col = [&](const std::string& name) {
    for (std::size_t j = 0; j < rec.columns.size(); ++j)
      if (rec.columns[j] == name) return j;
    REQUIRE(false);
    return std::size_t(0);
  };
  for (std::size_t i = 1; i < rec.rows.size(); ++i) {
    CHECK(rec.rows[i][col("dofs")] > rec.rows[i - 1][col("dofs")]);
    CHECK(rec.rows[i - 1][col("marked")] > 0.0);
  }
  std::size_t jm = col("marked_near_corner");
  CHECK(rec.rows[0][jm] >= 0.0);
  CHECK(rec.rows[0][jm] <= rec.rows[0][col("marked")]);
}

TEST_CASE("gamma study requires a Robin-free problem") {
  StudyConfig robin_cfg = config_from(
      "[study]\nkind = gamma_ba_scaling\nmeshes = 1,2\n"
      "[problem]\ndomain = square\nboundary = robin\n");
  CHECK_THROWS_WITH_AS(run_gamma_study(robin_cfg), doctest::Contains("Robin"),
                       SpecificationError);
  StudyConfig cfg = config_from(
      "[study]\nkind = gamma_ba_scaling\nmeshes = 2,4\n"
      "[problem]\ncase = constant\n");
  ConvergenceRecord rec = run_gamma_study(cfg);
  REQUIRE(rec.rows.size() == 2);
  auto col = [&](const std::string& name) {
    for (std::size_t j = 0; j < rec.columns.size(); ++j)
      if (rec.columns[j] == name) return j;
    REQUIRE(false);
    return std::size_t(0);
  };
  for (const auto& row : rec.rows) {
    CHECK(row[col("check_g")] > 0.0);
    CHECK(row[col("check_d")] > 0.0);
    CHECK(row[col("converged")] == doctest::Approx(1.0));
  }
  CHECK(rec.rows[1][col("check_g")] < rec.rows[0][col("check_g")]);
}

TEST_CASE("stability sweep records probe values per omega") {
  StudyConfig cfg = config_from(
      "[study]\nkind = stability_sweep\n"
      "[problem]\ndomain = square\nboundary = dirichlet\n"
      "[adaptive]\ninitial_n = 2\n"
      "[sweep]\nomega_min = 4.2\nomega_max = 4.7\nsamples = 3\n");
  ConvergenceRecord rec = run_stability_sweep(cfg);
  REQUIRE(rec.rows.size() == 3);
  auto col = [&](const std::string& name) {
    for (std::size_t j = 0; j < rec.columns.size(); ++j)
      if (rec.columns[j] == name) return j;
    REQUIRE(false);
    return std::size_t(0);
  };
  CHECK(rec.rows[0][col("omega")] == doctest::Approx(4.2));
  CHECK(rec.rows[2][col("omega")] == doctest::Approx(4.7));
  for (const auto& row : rec.rows) {
    CHECK(row[col("probe")] > 0.0);
    CHECK(row[col("status")] == doctest::Approx(0.0));
  }
}

TEST_CASE("field emission and solve artifacts round-trip") {
  auto dir = scratch_dir();
  StudyConfig cfg = config_from(
      "[study]\nkind = solve\n"
      "[problem]\ndomain = square\nboundary = dirichlet\n"
      "[adaptive]\ninitial_n = 2\n"
      "[output]\ndirectory = " + (dir / "solve_out").string() + "\n");
  std::stringstream log;
  run_solve(cfg, log);
  CHECK(log.str().find("solve") != std::string::npos);
  auto base = dir / "solve_out" / "solution";
  REQUIRE(std::filesystem::exists(base.string() + ".mesh"));
  REQUIRE(std::filesystem::exists(base.string() + ".field"));
  REQUIRE(std::filesystem::exists(base.string() + "_samples.csv"));
  REQUIRE(std::filesystem::exists(dir / "solve_out" / "estimator.csv"));

  Mesh mesh = read_mesh_file(base.string() + ".mesh");
  CHECK(mesh.n_tris() == 8);
  FieldData field = read_field_file(base.string() + ".field");
  CHECK(field.kind == "broken");
  CHECK(field.degree == 1);
  CHECK(field.coef.size() == 24);

  std::string samples = slurp(base.string() + "_samples.csv");
  int data_lines = 0;
  std::stringstream ss(samples);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty() && line[0] != '#') ++data_lines;
  CHECK(data_lines == 6 * mesh.n_tris());
  // eta_K column is populated for the solve artifact.
  CHECK(samples.find("eta_K") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("run_study_command writes table and timing sidecar") {
  auto dir = scratch_dir();
  StudyConfig cfg = config_from(
      "[study]\nkind = uniform_convergence\nmeshes = 1,2\n"
      "[problem]\ncase = constant\n"
      "[output]\ndirectory = " + (dir / "cmd_out").string() + "\n");
  std::stringstream log;
  run_study_command(cfg, log);
  auto main_csv = dir / "cmd_out" / "uniform_convergence.csv";
  auto timing_csv = dir / "cmd_out" / "uniform_convergence_timing.csv";
  REQUIRE(std::filesystem::exists(main_csv));
  REQUIRE(std::filesystem::exists(timing_csv));
  std::string text = slurp(main_csv);
  CHECK(text.find("# helmdg-study v1") == 0);
  CHECK(text.find("# kind=uniform_convergence") != std::string::npos);
  CHECK(log.str().find("uniform_convergence") != std::string::npos);
  CHECK(log.str().find("2 rows") != std::string::npos);
  // A second run overwrites with byte-identical table content.
  std::stringstream log2;
  run_study_command(cfg, log2);
  CHECK(slurp(main_csv) == text);
  std::filesystem::remove_all(dir);
}
