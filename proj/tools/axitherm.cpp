// Command-line driver: solve, verify, fit-materials, isoline, mesh.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "axitherm/error.hpp"
#include "axitherm/io.hpp"
#include "axitherm/verification.hpp"

namespace {

using namespace axitherm;

struct SolveOptions {
  std::string config;
  std::string scenario;
  std::string mesh_file;
  std::optional<double> h;
  std::string out;
  std::optional<double> newton_tol;
  std::optional<std::size_t> newton_max_iter;
  std::string solver;
  std::string robin_quadrature;
  std::vector<double> isolines;
};

RunConfig resolve(const SolveOptions& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (!o.scenario.empty()) c.scenario = o.scenario;
  if (!o.mesh_file.empty()) c.mesh_file = o.mesh_file;
  if (o.h) c.target_h = *o.h;
  if (!o.out.empty()) c.output_dir = o.out;
  if (o.newton_tol) c.newton.abs_tol = *o.newton_tol;
  if (o.newton_max_iter) c.newton.max_iter = *o.newton_max_iter;
  if (!o.solver.empty()) c.newton.solver = o.solver == "cg" ? LinearSolver::CG : LinearSolver::LU;
  if (!o.robin_quadrature.empty()) c.thermal_bc.robin_quadrature = parse_robin_quadrature(o.robin_quadrature);
  if (!o.isolines.empty()) c.isolines = o.isolines;
  return c;
}

int cmd_solve(const SolveOptions& o) {
  RunConfig c;
  try {
    c = resolve(o);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  const int status = run_scenario(c, std::cerr);
  if (status == 0) std::cout << "wrote " << c.output_dir << '\n';
  return status;
}

int cmd_verify(const std::string& suite, const std::string& out) {
  const auto results = run_verification_suite(suite);
  bool ok = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    ok = ok && r.pass;
    if (!out.empty() && r.record) {
      std::filesystem::create_directories(out);
      std::ostringstream ss;
      write_convergence_csv(ss, *r.record);
      write_file_atomic(std::filesystem::path(out) / (r.name + ".csv"), ss.str());
    }
  }
  return ok ? 0 : 1;
}

int cmd_fit() {
  const CoefficientReport report = reproduce_published_coefficients();
  write_coefficient_report(std::cout, report);
  return report.pass() ? 0 : 1;
}

int cmd_isoline(const std::string& run, const std::vector<double>& levels) {
  const std::filesystem::path dir = run;
  std::ifstream mesh_in(dir / "mesh.txt");
  std::ifstream csv_in(dir / "fields.csv");
  if (!mesh_in || !csv_in) throw InputError("run directory " + run + " lacks mesh.txt or fields.csv");
  const Mesh mesh = read_mesh(mesh_in);
  const NodalField T = read_temperature_csv(csv_in);
  std::vector<IsoLine> lines;
  for (double level : levels) {
    if (!std::isfinite(level)) throw InputError("isoline levels must be finite");
    lines.push_back(extract_isoline(mesh, T, level));
    std::size_t vertices = 0;
    for (const auto& p : lines.back().polylines) vertices += p.size();
    std::cout << "level " << level << ": " << lines.back().polylines.size() << " polylines, " << vertices
              << " vertices\n";
  }
  write_file_atomic(dir / "isolines.json", to_json(lines));
  return 0;
}

int cmd_mesh(const SolveOptions& o) {
  RunConfig c = resolve(o);
  if (!(c.target_h > 0.0)) throw InputError("target_h must be positive");
  const Mesh mesh = build_mesh(c);
  std::cout << "nodes " << mesh.nodes.size() << ", triangles " << mesh.triangles.size() << ", boundary edges "
            << mesh.boundary_edges.size() << ", h " << mesh.h << '\n';
  if (!o.out.empty()) {
    std::ostringstream ss;
    write_mesh(ss, mesh);
    write_file_atomic(o.out, ss.str());
  }
  return 0;
}

void add_run_flags(CLI::App* cmd, SolveOptions& o) {
  cmd->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--case", o.scenario, "built-in scenario (hearth)");
  cmd->add_option("--mesh-file", o.mesh_file, "mesh in axitherm-mesh v1 format");
  cmd->add_option("--h", o.h, "target element size [m]");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Axisymmetric thermomechanical solver for blast furnace hearths"};
  app.set_help_flag("--help", "print this help message and exit");
  app.require_subcommand(1);

  SolveOptions solve_opts;
  auto* solve = app.add_subcommand("solve", "run the thermal and mechanical solves and export results");
  add_run_flags(solve, solve_opts);
  solve->add_option("--out", solve_opts.out, "output directory");
  solve->add_option("--newton-tol", solve_opts.newton_tol, "absolute residual tolerance");
  solve->add_option("--newton-max-iter", solve_opts.newton_max_iter, "maximum Newton iterations");
  solve->add_option("--solver", solve_opts.solver, "linear solver")->check(CLI::IsMember({"lu", "cg"}));
  solve->add_option("--robin-quadrature", solve_opts.robin_quadrature, "convection boundary quadrature")
      ->check(CLI::IsMember({"gauss2", "lumped"}));
  solve->add_option("--isoline", solve_opts.isolines, "isotherm level in kelvin (repeatable)");

  std::string suite = "all", verify_out;
  auto* verify = app.add_subcommand("verify", "run verification oracles");
  verify->add_option("--suite", suite, "coefficients, annulus, mms, jacobian, free-expansion or all")
      ->check(CLI::IsMember({"all", "coefficients", "annulus", "mms", "jacobian", "free-expansion"}));
  verify->add_option("--out", verify_out, "directory for convergence CSV tables");

  app.add_subcommand("fit-materials", "refit the tabulated material samples and compare coefficients");

  std::string run_dir;
  std::vector<double> levels;
  auto* iso = app.add_subcommand("isoline", "extract isotherms from an existing run");
  iso->add_option("--run", run_dir, "run output directory")->required();
  iso->add_option("--isoline", levels, "isotherm level in kelvin (repeatable)")->required();

  SolveOptions mesh_opts;
  auto* mesh = app.add_subcommand("mesh", "generate the mesh only");
  add_run_flags(mesh, mesh_opts);
  mesh->add_option("--out", mesh_opts.out, "mesh output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_opts);
    if (verify->parsed()) return cmd_verify(suite, verify_out);
    if (iso->parsed()) return cmd_isoline(run_dir, levels);
    if (mesh->parsed()) return cmd_mesh(mesh_opts);
    return cmd_fit();
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
