#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "axitherm/error.hpp"
#include "axitherm/fem.hpp"
#include "axitherm/materials.hpp"
#include "axitherm/thermal.hpp"
#include "axitherm/verification.hpp"

using namespace axitherm;

namespace {

Mesh reference_triangle() {
  std::istringstream in(
      "axitherm-mesh v1\nnodes 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 2 1\n"
      "boundary_edges 3\n0 1 Bottom\n1 2 Outer\n2 0 Axis\n");
  return read_mesh(in);
}

MaterialRecord constant_record(double k) {
  return {PiecewiseQuadratic::constant(k, 293, 673, 1800), PiecewiseQuadratic::constant(1e9, 293, 823, 1800), 0.3,
          1e-5};
}

MaterialSet uniform_set(const MaterialRecord& rec, std::initializer_list<int> ids = {1}) {
  MaterialSet set;
  for (int id : ids) set.records[id] = rec;
  return set;
}

ThermalBC all_conditions(ThermalCondition c) {
  ThermalBC bc;
  for (auto tag : kExteriorTags) bc.conditions[tag] = c;
  return bc;
}

SubdomainPolygon rect(int id, double r0, double y0, double r1, double y1) {
  return {id, {{r0, y0}, {r1, y0}, {r1, y1}, {r0, y1}}};
}

// max |J v - central difference| / |J v| over random directions.
double fd_error(const Mesh& mesh, const MaterialSet& mats, const ThermalBC& bc, const NodalField& T, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> dirs(10, std::vector<double>(T.values.size()));
  for (auto& d : dirs)
    for (auto& x : d) x = u(rng);
  return jacobian_fd_error(mesh, mats, bc, T, dirs, 1e-6 * norm2(T.values));
}

NodalField hearth_like_field(const Mesh& mesh) {
  return interpolate(mesh, [](double r, double y) {
    return 350.0 + 1300.0 * (0.5 * r / kHearthRMax + 0.5 * y / kHearthYMax);
  });
}

}  // namespace

TEST_CASE("residual vanishes at the common ambient temperature") {
  const Mesh mesh = generate_mesh(build_hearth_geometry(), 0.4);
  ThermalBC bc = hearth_thermal_bc();
  for (auto& [tag, c] : bc.conditions)
    if (auto* r = std::get_if<Robin>(&c)) r->ambient = 500.0;
  const auto R = assemble_thermal_residual(mesh, build_hearth_materials(), bc, NodalField::constant(mesh.nodes.size(), 500.0));
  for (double v : R) CHECK(v == 0.0);
}

TEST_CASE("single-triangle residual against symbolic integration") {
  const Mesh mesh = reference_triangle();
  const MaterialSet mats = uniform_set(constant_record(2.0));

  // grad phi = (-1,-1), (1,0), (0,1); int r over the triangle = 1/6.
  const NodalField T{1, {0.0, 1.0, 0.0}};
  const auto R = assemble_thermal_residual(mesh, mats, all_conditions(Adiabatic{}), T);
  CHECK(R[0] == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  CHECK(R[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(std::abs(R[2]) <= 1e-15);

  // Convection on the hypotenuse p(s) = (1-s, s), ds = sqrt(2) dt; the
  // oracle integrates the cubic edge integrand with 3-point Gauss-Legendre.
  ThermalBC bc = all_conditions(Adiabatic{});
  bc.conditions[BoundaryTag::Outer] = Robin{7.0, 400.0};
  const NodalField T2{1, {350.0, 420.0, 390.0}};
  const auto R2 = assemble_thermal_residual(mesh, mats, bc, T2);
  const auto Rk = assemble_thermal_residual(mesh, mats, all_conditions(Adiabatic{}), T2);
  const double gx[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
  const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  double b1 = 0.0, b2 = 0.0;
  for (int q = 0; q < 3; ++q) {
    const double s = gx[q], r = 1.0 - s;
    const double t = 420.0 * (1.0 - s) + 390.0 * s;
    const double f = gw[q] * std::sqrt(2.0) * 7.0 * (t - 400.0) * r;
    b1 += f * (1.0 - s);
    b2 += f * s;
  }
  CHECK(R2[0] - Rk[0] == doctest::Approx(0.0));
  CHECK(R2[1] - Rk[1] == doctest::Approx(b1).epsilon(1e-12));
  CHECK(R2[2] - Rk[2] == doctest::Approx(b2).epsilon(1e-12));
}

TEST_CASE("residual at the analytic annulus solution decays at second order") {
  const double r1 = 1.0, r2 = 2.0, k = 10.0;
  const AnnulusSolution exact = annulus_analytic(r1, r2, k, 100.0, 1000.0, 50.0, 300.0);
  ThermalBC bc = all_conditions(Adiabatic{});
  bc.conditions[BoundaryTag::Inner] = Robin{100.0, 1000.0};
  bc.conditions[BoundaryTag::Outer] = Robin{50.0, 300.0};
  const MaterialSet mats = uniform_set(constant_record(k));

  std::vector<double> hs, norms;
  for (double h : {0.1 / 4, 0.1 / 8, 0.1 / 16, 0.1 / 32}) {
    const Mesh mesh = generate_mesh({rect(1, r1, 0.0, r2, 0.1)}, h * std::sqrt(2.0));
    const NodalField T = interpolate(mesh, [&](double r, double) { return exact(r); });
    const auto R = assemble_thermal_residual(mesh, mats, bc, T);
    hs.push_back(h);
    norms.push_back(norm_max(R));
  }
  const double order = fit_order(hs, norms);
  MESSAGE("annulus residual order " << order);
  CHECK(order >= 1.9);
}

TEST_CASE("constant conductivity gives a symmetric, affine system") {
  const Mesh mesh = generate_mesh(build_hearth_geometry(), 0.4);
  MaterialSet mats;
  for (int id = 1; id <= 6; ++id) mats.records[id] = constant_record(1.0 + id);
  const ThermalBC bc = hearth_thermal_bc();
  const auto J = assemble_thermal_jacobian(mesh, mats, bc, NodalField::constant(mesh.nodes.size(), 300.0));
  CHECK(J.max_asymmetry() == 0.0);

  // R(T) = J T + R(0): linear problem identity.
  const auto R0 = assemble_thermal_residual(mesh, mats, bc, NodalField::constant(mesh.nodes.size(), 0.0));
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(300.0, 1700.0);
  NodalField T{1, std::vector<double>(mesh.nodes.size())};
  for (auto& t : T.values) t = u(rng);
  const auto R = assemble_thermal_residual(mesh, mats, bc, T);
  const auto JT = J.multiply(T.values);
  const double scale = norm_max(JT);
  for (std::size_t i = 0; i < R.size(); ++i) CHECK(std::abs(R[i] - (JT[i] + R0[i])) <= 1e-12 * scale);

  // Jacobian does not depend on T.
  CHECK(assemble_thermal_jacobian(mesh, mats, bc, T) == J);
}

TEST_CASE("Jacobian matches central differences") {
  const Mesh mesh = generate_mesh(build_hearth_geometry(), 0.5);
  const NodalField T = hearth_like_field(mesh);
  const MaterialSet hearth = build_hearth_materials();
  const ThermalBC bc = hearth_thermal_bc();
  CHECK(fd_error(mesh, hearth, bc, T, 20240607) <= 1e-5);

  SUBCASE("lumped convection quadrature") {
    ThermalBC lumped = bc;
    lumped.robin_quadrature = RobinQuadrature::Lumped;
    CHECK(fd_error(mesh, hearth, lumped, T, 1) <= 1e-5);
  }
  SUBCASE("each subdomain's nonlinearity on its own") {
    for (int on = 1; on <= 6; ++on) {
      MaterialSet mats = hearth;
      for (auto& [id, rec] : mats.records)
        if (id != on) rec.k = PiecewiseQuadratic::constant(eval_property(rec.k, 800.0), 293, 673, 1800);
      CAPTURE(on);
      CHECK(fd_error(mesh, mats, bc, T, 100 + on) <= 1e-5);
    }
  }
}

TEST_CASE("interior rows carry no boundary mass") {
  const Mesh mesh = generate_mesh({rect(1, 0.0, 0.0, 1.0, 1.0)}, 0.25);
  const MaterialSet mats = uniform_set(constant_record(3.0));
  const NodalField T = NodalField::constant(mesh.nodes.size(), 300.0);
  ThermalBC robin = all_conditions(Robin{50.0, 300.0});
  robin.conditions[BoundaryTag::Axis] = Adiabatic{};
  const auto Jr = assemble_thermal_jacobian(mesh, mats, robin, T);
  const auto Ja = assemble_thermal_jacobian(mesh, mats, all_conditions(Adiabatic{}), T);
  const auto dr = Jr.to_dense(), da = Ja.to_dense();
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    const Point2 p = mesh.nodes[i];
    const bool on_robin = p.r == 1.0 || p.y == 0.0 || p.y == 1.0;
    if (on_robin) {
      CHECK(dr[i][i] > da[i][i]);
    } else {
      for (std::size_t j = 0; j < mesh.nodes.size(); ++j) CHECK(dr[i][j] == da[i][j]);
    }
  }
}

TEST_CASE("Newton on an affine residual converges in one step") {
  const Mesh mesh = generate_mesh(build_hearth_geometry(), 0.3);
  MaterialSet mats;
  for (int id = 1; id <= 6; ++id) mats.records[id] = constant_record(2.0 * id);
  for (double guess : {0.0, 300.0, 1500.0}) {
    NewtonConfig cfg;
    cfg.initial_guess = guess;
    const auto sol = newton_solve(mesh, mats, hearth_thermal_bc(), cfg);
    CHECK(sol.report.converged);
    CHECK(sol.report.iterations == 1);
    CHECK(sol.report.linear_solves == 1);
  }
  NewtonConfig cg;
  cg.solver = LinearSolver::CG;
  const auto a = newton_solve(mesh, mats, hearth_thermal_bc(), cg);
  const auto b = newton_solve(mesh, mats, hearth_thermal_bc(), NewtonConfig{});
  for (std::size_t i = 0; i < a.temperature.values.size(); ++i)
    CHECK(a.temperature.values[i] == doctest::Approx(b.temperature.values[i]).epsilon(1e-9));
}

TEST_CASE("hearth Newton solve") {
  const Mesh mesh = generate_mesh(build_hearth_geometry(), 0.1);
  const MaterialSet mats = build_hearth_materials();
  const ThermalBC bc = hearth_thermal_bc();
  const NewtonConfig cfg;
  const auto sol = newton_solve(mesh, mats, bc, cfg);
  const auto& rep = sol.report;
  CHECK(rep.converged);
  CHECK(rep.iterations <= 25);
  CHECK(rep.residual_history.size() == rep.iterations + 1);
  CHECK(rep.residual_history.back() <= 1e-4);
  CHECK(rep.final_residual_max <= 1e-4);

  // Every component of the recomputed residual is below the tolerance too.
  const auto R = assemble_thermal_residual(mesh, mats, bc, sol.temperature);
  CHECK(norm2(R) <= 1e-4);
  CHECK(norm_max(R) <= 1e-4);
  CHECK(norm_max(R) == doctest::Approx(rep.final_residual_max).epsilon(1e-6));
}

TEST_CASE("Newton failures carry their report") {
  const Mesh mesh = generate_mesh(build_hearth_geometry(), 0.3);
  NewtonConfig cfg;
  cfg.max_iter = 1;
  try {
    newton_solve(mesh, build_hearth_materials(), hearth_thermal_bc(), cfg);
    FAIL("expected NewtonError");
  } catch (const NewtonError& e) {
    CHECK_FALSE(e.report().converged);
    CHECK(e.report().iterations == 1);
    CHECK(e.report().residual_history.size() == 2);
  }

  ThermalBC missing = hearth_thermal_bc();
  missing.conditions.erase(BoundaryTag::Inner);
  CHECK_THROWS_AS(assemble_thermal_residual(mesh, build_hearth_materials(), missing,
                                            NodalField::constant(mesh.nodes.size(), 300.0)),
                  InputError);

  cfg.max_iter = 0;
  CHECK_THROWS_AS(newton_solve(mesh, build_hearth_materials(), hearth_thermal_bc(), cfg), InputError);
  cfg = NewtonConfig{};
  cfg.abs_tol = 0.0;
  CHECK_THROWS_AS(newton_solve(mesh, build_hearth_materials(), hearth_thermal_bc(), cfg), InputError);
}

TEST_CASE("discrete maximum principle on a coarse convection-only problem") {
  const Mesh mesh = generate_mesh({rect(1, 0.0, 0.0, 2.0, 1.0), rect(2, 0.0, 1.0, 2.0, 2.0)}, 0.25);
  MaterialSet mats = uniform_set(constant_record(5.0), {1, 2});
  mats.records[2].k = PiecewiseQuadratic{293, 673, 1800, {0.0, 5e-3, 2.0}, {0.0, 5e-3, 2.0}};
  ThermalBC bc = all_conditions(Adiabatic{});
  bc.conditions[BoundaryTag::Bottom] = Robin{20.0, 300.0};
  bc.conditions[BoundaryTag::Top] = Robin{10.0, 1000.0};
  bc.conditions[BoundaryTag::Outer] = Robin{5.0, 650.0};
  for (auto quad : {RobinQuadrature::Gauss2, RobinQuadrature::Lumped}) {
    bc.robin_quadrature = quad;
    const auto sol = newton_solve(mesh, mats, bc, NewtonConfig{});
    for (double t : sol.temperature.values) {
      CHECK(t >= 300.0 - 1e-9);
      CHECK(t <= 1000.0 + 1e-9);
    }
  }
}

TEST_CASE("lumped convection keeps the hearth field within its ambient temperatures") {
  const Mesh mesh = generate_mesh(build_hearth_geometry(), 0.1);
  ThermalBC bc = hearth_thermal_bc();
  bc.robin_quadrature = RobinQuadrature::Lumped;
  const auto sol = newton_solve(mesh, build_hearth_materials(), bc, NewtonConfig{});
  CHECK(sol.report.converged);
  for (double t : sol.temperature.values) {
    CHECK(t >= 300.0 - 1e-6);
    CHECK(t <= 1773.0 + 1e-6);
  }
}

TEST_CASE("one-sided interface fluxes balance") {
  // Two layers stacked in y with convection below and above: T depends on y
  // only and is piecewise linear, which P1 reproduces exactly.
  const double k1 = 2.0, k2 = 20.0, hb = 100.0, ht = 50.0, Tb = 300.0, Tt = 1000.0;
  const std::vector<SubdomainPolygon> polys{rect(1, 0.0, 0.0, 1.0, 1.0), rect(2, 0.0, 1.0, 1.0, 2.0)};
  MaterialSet mats;
  mats.records[1] = constant_record(k1);
  mats.records[2] = constant_record(k2);
  ThermalBC bc = all_conditions(Adiabatic{});
  bc.conditions[BoundaryTag::Bottom] = Robin{hb, Tb};
  bc.conditions[BoundaryTag::Top] = Robin{ht, Tt};
  const double q = (Tt - Tb) / (1.0 / hb + 1.0 / k1 + 1.0 / k2 + 1.0 / ht);  // downward heat flux

  std::vector<double> one_sided;
  for (double h : {0.25, 0.125}) {
    const Mesh mesh = generate_mesh(polys, h);
    const auto sol = newton_solve(mesh, mats, bc, NewtonConfig{});
    double err = 0.0;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
      const double y = mesh.nodes[i].y;
      const double exact = y <= 1.0 ? Tb + q / hb + q / k1 * y : Tb + q / hb + q / k1 + q / k2 * (y - 1.0);
      err = std::max(err, std::abs(sol.temperature(i) - exact));
    }
    CHECK(err <= 1e-9 * Tt);

    double side[2] = {0.0, 0.0};
    for (int s = 0; s < 2; ++s) {
      Mesh part = mesh;
      part.triangles.clear();
      for (const auto& t : mesh.triangles)
        if (t.subdomain == s + 1) part.triangles.push_back(t);
      part.boundary_edges.clear();
      for (const auto& e : mesh.boundary_edges) {
        const double ym = 0.5 * (mesh.nodes[e.nodes[0]].y + mesh.nodes[e.nodes[1]].y);
        if (e.tag != BoundaryTag::Interface && (ym < 1.0) == (s == 0)) part.boundary_edges.push_back(e);
      }
      const auto R = assemble_thermal_residual(part, mats, bc, sol.temperature);
      for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        if (mesh.nodes[i].y == 1.0) side[s] += R[i];
    }
    // Weak flux through y = 1 carries the measure int_0^1 r dr = 1/2.
    CHECK(side[0] == doctest::Approx(0.5 * q).epsilon(1e-9));
    CHECK(side[1] == doctest::Approx(-0.5 * q).epsilon(1e-9));
    one_sided.push_back(std::abs(side[0] + side[1]));
  }
  for (double s : one_sided) CHECK(s <= 1e-9 * q);
}
