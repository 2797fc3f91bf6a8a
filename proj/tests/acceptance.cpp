// Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero when any
// binding criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "axitherm/io.hpp"
#include "axitherm/verification.hpp"

using namespace axitherm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

bool all_pass(const std::vector<OracleResult>& results, std::string& detail) {
  bool ok = !results.empty();
  std::ostringstream d;
  for (const auto& r : results) {
    ok = ok && r.pass;
    d << (d.tellp() > 0 ? "; " : "") << r.name << (r.pass ? " ok" : " FAILED") << " (" << r.detail << ")";
  }
  detail = d.str();
  return ok;
}

Outcome suite(const std::string& name) {
  Outcome o;
  o.pass = all_pass(run_verification_suite(name), o.detail);
  return o;
}

bool dense_spd(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j][j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j][k] * a[j][k];
    if (!(d > 0.0)) return false;
    a[j][j] = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i][k] * a[j][k];
      a[i][j] = s / a[j][j];
    }
  }
  return true;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The hearth run at the production mesh size is shared by several criteria.
struct HearthRun {
  Mesh mesh;
  ThermalSolution thermal;
  double seconds = 0.0;
  std::string error;
};

HearthRun run_hearth(RobinQuadrature quadrature) {
  HearthRun run;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    run.mesh = generate_mesh(build_hearth_geometry(), 0.1);
    ThermalBC bc = hearth_thermal_bc();
    bc.robin_quadrature = quadrature;
    run.thermal = newton_solve(run.mesh, build_hearth_materials(), bc, NewtonConfig{});
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

Outcome invariants() {
  std::vector<std::string> failures;
  auto require = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };

  const Mesh mesh = generate_mesh(build_hearth_geometry(), 0.1);
  require(check_mesh(mesh).empty(), "mesh checks");

  const MaterialSet mats = build_hearth_materials();
  const NodalField T = interpolate(mesh, [](double r, double y) { return 400.0 + 120.0 * r + 90.0 * y; });
  const auto a = assemble_mechanical_system(mesh, mats, hearth_mechanical_bc(), T);
  const auto b = assemble_mechanical_system(mesh, mats, hearth_mechanical_bc(), T);
  require(a.stiffness.max_asymmetry() == 0.0 && a.constrained.matrix.max_asymmetry() == 0.0, "K symmetry");
  require(a.stiffness == b.stiffness && a.load == b.load, "deterministic assembly");

  // Rigid axial translation is in the kernel of the unconstrained stiffness.
  std::vector<double> rigid(2 * mesh.nodes.size(), 0.0);
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) rigid[2 * i + 1] = 1e-3;
  require(norm_max(a.stiffness.multiply(rigid)) <= 1e-9 * a.stiffness.max_abs() * 1e-3, "rigid mode");

  // Positive definiteness on a coarse mesh small enough for a dense factorization.
  const Mesh coarse = generate_mesh(build_hearth_geometry(), 0.6);
  const auto cs = assemble_mechanical_system(coarse, mats, hearth_mechanical_bc(),
                                             NodalField::constant(coarse.nodes.size(), 700.0));
  require(cs.constrained.matrix.size() <= 2000 && dense_spd(cs.constrained.matrix.to_dense()), "constrained K SPD");

  // Contact constraints are exact zeros.
  const auto sol = solve_mechanical(mesh, mats, hearth_mechanical_bc(), T);
  bool zeros = true;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag != BoundaryTag::Bottom && e.tag != BoundaryTag::Top && e.tag != BoundaryTag::Axis) continue;
    const auto n = outward_normal(mesh, e);
    const std::size_t comp = std::abs(n[0]) == 1.0 ? 0 : 1;
    for (std::size_t node : e.nodes) zeros = zeros && sol.displacement(node, comp) == 0.0;
  }
  require(zeros, "contact zeros");
  const auto sol2 = solve_mechanical(mesh, mats, hearth_mechanical_bc(), T);
  require(sol.displacement == sol2.displacement, "deterministic solve");

  // VTK golden file.
  Mesh tri;
  tri.nodes = {{0.25, 0.0}, {1.0, 0.0}, {0.25, 1.5}};
  tri.triangles = {{{0, 1, 2}, 1}};
  const NodalField Tt{1, {1.0, 2.0, 3.0}};
  std::ostringstream vtk;
  export_vtk(vtk, tri, {&Tt, nullptr, nullptr});
  require(vtk.str() == slurp(std::filesystem::path(AXITHERM_TEST_DATA) / "one_triangle.vtk"), "VTK golden");

  Outcome o;
  o.pass = failures.empty();
  std::ostringstream d;
  if (o.pass) d << "mesh, K symmetry, SPD, rigid mode, contact zeros, determinism, VTK golden";
  for (const auto& f : failures) d << (d.tellp() > 0 ? ", " : "") << f << " FAILED";
  o.detail = d.str();
  return o;
}

}  // namespace

int main() {
  int binding_failures = 0;
  auto report = [&](int id, const std::string& name, bool binding, const std::function<Outcome()>& check) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (binding && !o.pass) ++binding_failures;
    std::ostringstream time;
    time.precision(3);
    time << std::fixed << s;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << (binding ? "" : " (non-binding)") << " ("
              << time.str() << " s): " << o.detail << std::endl;
  };

  report(1, "material fits reproduce the printed coefficients", true, [] {
    const auto t0 = std::chrono::steady_clock::now();
    const CoefficientReport rep = reproduce_published_coefficients();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream d;
    d << rep.failures() << " of " << rep.entries.size() << " coefficients outside tolerance";
    for (const auto& e : rep.entries)
      if (!e.pass) d << "; omega" << e.subdomain << ' ' << e.property << ' ' << e.coefficient;
    return Outcome{rep.pass() && s < 1.0, d.str()};
  });

  const HearthRun hearth = run_hearth(RobinQuadrature::Gauss2);

  report(2, "hearth Newton solve converges", true, [&] {
    if (!hearth.error.empty()) return Outcome{false, hearth.error};
    const SolveReport& r = hearth.thermal.report;
    std::ostringstream d;
    d << r.iterations << " iterations, residual " << r.residual_history.back() << ", " << hearth.seconds << " s";
    return Outcome{r.converged && r.residual_history.back() <= 1e-4 && r.iterations <= 25 && hearth.seconds < 60.0,
                   d.str()};
  });

  report(3, "hearth temperature within [300, 1773] K", true, [&] {
    if (!hearth.error.empty()) return Outcome{false, hearth.error};
    const auto& v = hearth.thermal.temperature.values;
    const double lo = *std::min_element(v.begin(), v.end()), hi = *std::max_element(v.begin(), v.end());
    std::ostringstream d;
    d.precision(10);
    d << "T in [" << lo << ", " << hi << "] K";
    const HearthRun lumped = run_hearth(RobinQuadrature::Lumped);
    if (lumped.error.empty()) {
      const auto& lv = lumped.thermal.temperature.values;
      d << "; with lumped Robin quadrature T in [" << *std::min_element(lv.begin(), lv.end()) << ", "
        << *std::max_element(lv.begin(), lv.end()) << "] K";
    }
    return Outcome{lo >= 300.0 - 1e-6 && hi <= 1773.0 + 1e-6, d.str()};
  });

  report(4, "radial conduction matches the analytic solution", true, [] { return suite("annulus"); });
  report(5, "manufactured solutions converge at second order", true, [] { return suite("mms"); });
  report(6, "thermal Jacobian matches finite differences", true, [] { return suite("jacobian"); });
  report(7, "free thermal expansion is stress free", true, [] { return suite("free-expansion"); });
  report(8, "structural invariants", true, invariants);

  report(9, "degree-of-freedom count against the published 4428", false, [&] {
    const std::size_t dofs = hearth.mesh.nodes.size();
    const double ratio = static_cast<double>(dofs) / 4428.0;
    std::ostringstream d;
    d.precision(3);
    d << dofs << " temperature dofs, ratio " << ratio << " (within a factor of 2: " << (ratio <= 2.0 && ratio >= 0.5 ? "yes" : "no") << ")";
    return Outcome{ratio <= 2.0 && ratio >= 0.5, d.str()};
  });

  std::cout << (binding_failures == 0 ? "ALL BINDING CRITERIA PASS" : std::to_string(binding_failures) + " binding criteria FAIL")
            << std::endl;
  return binding_failures == 0 ? 0 : 1;
}
