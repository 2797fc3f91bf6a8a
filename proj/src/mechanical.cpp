#include "axitherm/mechanical.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <string>

#include "axitherm/error.hpp"
#include "axitherm/format.hpp"

namespace axitherm {

namespace {

using Mat6 = std::array<std::array<double, 6>, 6>;
using Vec6 = std::array<double, 6>;

struct LocalMechanical {
  Mat6 stiffness{};
  Vec6 load{};
};

// Strain-displacement matrix at a point: column 2i is u_r of node i, 2i+1 is u_y.
std::array<Vec6, 4> strain_matrix(const TriangleGeometry& geo, const std::array<double, 3>& N, double r) {
  std::array<Vec6, 4> B{};
  for (int i = 0; i < 3; ++i) {
    const auto& g = geo.gradients[i];
    B[0][2 * i] = g[0];
    B[1][2 * i + 1] = g[1];
    B[2][2 * i] = N[i] / r;
    B[3][2 * i] = g[1];
    B[3][2 * i + 1] = g[0];
  }
  return B;
}

LocalMechanical element_terms(const Mesh& mesh, const MaterialSet& materials, const NodalField& T, std::size_t e,
                              const MechanicalForcing& forcing) {
  const Triangle& tri = mesh.triangles[e];
  const MaterialRecord& mat = materials.at(tri.subdomain);
  const TriangleGeometry geo(mesh.vertices(tri));
  LocalMechanical local;
  const auto& rule = triangle_rule_degree3();
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const auto& lam = rule.points[q];
    const Point2 p = geo.map(lam);
    const double w = rule.weights[q] * 2.0 * geo.area * p.r;
    const double Tq = lam[0] * T(tri.nodes[0]) + lam[1] * T(tri.nodes[1]) + lam[2] * T(tri.nodes[2]);
    const Mat4 C = elasticity_matrix(eval_property(mat.E, Tq), mat.nu);
    const auto B = strain_matrix(geo, lam, p.r);

    // C B and the thermal stress C {a dT, a dT, a dT, 0}.
    std::array<Vec6, 4> CB{};
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 6; ++c) {
        double s = 0.0;
        for (int b = 0; b < 4; ++b) s += C[a][b] * B[b][c];
        CB[a][c] = s;
      }
    const double eth = mat.alpha * (Tq - materials.T0);
    Vec4 thermal{};
    for (int a = 0; a < 4; ++a) thermal[a] = (C[a][0] + C[a][1] + C[a][2]) * eth;

    const Vec2 body = forcing.body_force ? forcing.body_force(p.r, p.y) : Vec2{0.0, 0.0};
    for (int i = 0; i < 6; ++i) {
      for (int j = i; j < 6; ++j) {
        double s = 0.0;
        for (int a = 0; a < 4; ++a) s += B[a][i] * CB[a][j];
        local.stiffness[i][j] += w * s;
      }
      double f = 0.0;
      for (int a = 0; a < 4; ++a) f += B[a][i] * thermal[a];
      f += lam[i / 2] * body[i % 2];
      local.load[i] += w * f;
    }
  }
  // Mirror so the element matrix is symmetric bit for bit.
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < i; ++j) local.stiffness[i][j] = local.stiffness[j][i];
  return local;
}

}  // namespace

double hydrostatic_traction(double y, double y_max) {
  if (y > y_max) throw InputError("hydrostatic load requested above the free surface");
  return kHydrostaticGradient * (y_max - y);
}

MechanicalBC hearth_mechanical_bc(double y_max) {
  MechanicalBC bc;
  bc.conditions[BoundaryTag::Bottom] = FrictionlessContact{};
  bc.conditions[BoundaryTag::Top] = FrictionlessContact{};
  bc.conditions[BoundaryTag::Axis] = FrictionlessContact{};
  bc.conditions[BoundaryTag::Outer] = TractionFree{};
  bc.conditions[BoundaryTag::Inner] = Traction{[y_max](const Point2& p, const Vec2& n) {
    const double magnitude = hydrostatic_traction(p.y, y_max);
    return Vec2{-magnitude * n[0], -magnitude * n[1]};
  }};
  return bc;
}

Vec4 element_strain(const std::array<Point2, 3>& triangle, const std::array<Vec2, 3>& u, const Point2& p) {
  if (!(p.r > 0.0)) throw Error("strain evaluation point must have r > 0");
  const TriangleGeometry geo(triangle);
  // Barycentric coordinates of p.
  std::array<double, 3> lam{};
  for (int i = 0; i < 3; ++i) {
    const Point2& a = triangle[(i + 1) % 3];
    const Point2& b = triangle[(i + 2) % 3];
    lam[i] = signed_area(p, a, b) / geo.area;
  }
  Vec4 eps{};
  double ur = 0.0;
  for (int i = 0; i < 3; ++i) {
    const auto& g = geo.gradients[i];
    eps[0] += g[0] * u[i][0];
    eps[1] += g[1] * u[i][1];
    eps[3] += g[1] * u[i][0] + g[0] * u[i][1];
    ur += lam[i] * u[i][0];
  }
  eps[2] = ur / p.r;
  return eps;
}

Vec4 element_strain(const Mesh& mesh, std::size_t triangle, const NodalField& u, const Point2& p) {
  const auto& t = mesh.triangles[triangle];
  std::array<Vec2, 3> nodal{};
  for (int i = 0; i < 3; ++i) nodal[i] = {u(t.nodes[i], 0), u(t.nodes[i], 1)};
  return element_strain(mesh.vertices(t), nodal, p);
}

MechanicalSystem assemble_mechanical_system(const Mesh& mesh, const MaterialSet& materials, const MechanicalBC& bc,
                                            const NodalField& T, const MechanicalForcing& forcing) {
  if (T.components != 1 || T.nodes() != mesh.nodes.size()) throw Error("temperature field does not match the mesh");
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag == BoundaryTag::Interface || e.tag == BoundaryTag::Axis) continue;
    if (!bc.conditions.count(e.tag))
      throw InputError("no mechanical boundary condition for tag " + std::string(to_string(e.tag)));
  }
  if (auto it = bc.conditions.find(BoundaryTag::Axis);
      it != bc.conditions.end() && !std::holds_alternative<FrictionlessContact>(it->second))
    throw InputError("the Axis boundary is a symmetry line and only accepts the contact (u_r = 0) condition");

  std::vector<LocalMechanical> locals(mesh.triangles.size());
  for_each_element(mesh.triangles.size(),
                   [&](std::size_t e) { locals[e] = element_terms(mesh, materials, T, e, forcing); });

  MechanicalSystem sys{make_pattern(mesh, 2), std::vector<double>(2 * mesh.nodes.size(), 0.0),
                       DofMap(mesh.nodes.size(), 2), {}};
  for (std::size_t e = 0; e < locals.size(); ++e) {
    const auto& nodes = mesh.triangles[e].nodes;
    for (int i = 0; i < 6; ++i) {
      const std::size_t gi = sys.dofs.index(nodes[i / 2], i % 2);
      sys.load[gi] += locals[e].load[i];
      for (int j = 0; j < 6; ++j) sys.stiffness.add(gi, sys.dofs.index(nodes[j / 2], j % 2), locals[e].stiffness[i][j]);
    }
  }

  const auto& line = line_rule_gauss2();
  for (const auto& edge : mesh.boundary_edges) {
    if (edge.tag == BoundaryTag::Interface) continue;
    const auto n = outward_normal(mesh, edge);
    const MechanicalCondition condition =
        edge.tag == BoundaryTag::Axis ? MechanicalCondition{FrictionlessContact{}} : bc.conditions.at(edge.tag);
    if (const auto* traction = std::get_if<Traction>(&condition)) {
      const Point2& a = mesh.nodes[edge.nodes[0]];
      const Point2& b = mesh.nodes[edge.nodes[1]];
      const double len = edge_length(mesh, edge);
      for (std::size_t q = 0; q < line.points.size(); ++q) {
        const double s = line.points[q];
        const Point2 p{a.r + s * (b.r - a.r), a.y + s * (b.y - a.y)};
        const double w = line.weights[q] * len * p.r;
        const Vec2 g = traction->load(p, n);
        const std::array<double, 2> phi{1.0 - s, s};
        for (int k = 0; k < 2; ++k)
          for (int c = 0; c < 2; ++c) sys.load[sys.dofs.index(edge.nodes[k], c)] += w * phi[k] * g[c];
      }
    } else if (std::holds_alternative<FrictionlessContact>(condition)) {
      std::size_t component;
      if (std::abs(std::abs(n[0]) - 1.0) < 1e-12)
        component = 0;
      else if (std::abs(std::abs(n[1]) - 1.0) < 1e-12)
        component = 1;
      else
        throw InputError("frictionless contact needs an axis-aligned boundary (tag " + std::string(to_string(edge.tag)) + ")");
      for (std::size_t node : edge.nodes) sys.dofs.constrain(sys.dofs.index(node, component), 0.0);
    } else if (const auto* prescribed = std::get_if<PrescribedDisplacement>(&condition)) {
      for (std::size_t node : edge.nodes) {
        const Vec2 v = prescribed->value(mesh.nodes[node]);
        sys.dofs.constrain(sys.dofs.index(node, 0), v[0]);
        sys.dofs.constrain(sys.dofs.index(node, 1), v[1]);
      }
    }
  }
  // Contact constraints take precedence over prescribed values at shared nodes.
  for (const auto& edge : mesh.boundary_edges) {
    if (edge.tag == BoundaryTag::Interface) continue;
    const MechanicalCondition& condition =
        edge.tag == BoundaryTag::Axis ? MechanicalCondition{FrictionlessContact{}} : bc.conditions.at(edge.tag);
    if (!std::holds_alternative<FrictionlessContact>(condition)) continue;
    const auto n = outward_normal(mesh, edge);
    const std::size_t component = std::abs(std::abs(n[0]) - 1.0) < 1e-12 ? 0 : 1;
    for (std::size_t node : edge.nodes) sys.dofs.constrain(sys.dofs.index(node, component), 0.0);
  }
  sys.constrained = apply_constraints(sys.stiffness, sys.load, sys.dofs);
  return sys;
}

MechanicalSolution solve_mechanical(const Mesh& mesh, const MaterialSet& materials, const MechanicalBC& bc,
                                    const NodalField& T, LinearSolver solver, const MechanicalForcing& forcing) {
  const auto start = std::chrono::steady_clock::now();
  const MechanicalSystem sys = assemble_mechanical_system(mesh, materials, bc, T, forcing);

  bool axial_fixed = false;
  for (const auto& [dof, value] : sys.dofs.constrained())
    if (dof % 2 == 1) axial_fixed = true;
  if (!axial_fixed)
    throw Error("singular mechanical system: the axial rigid translation (u_y = const) is not constrained");

  MechanicalSolution sol;
  sol.displacement.components = 2;
  try {
    sol.displacement.values = solve_linear(sys.constrained.matrix, sys.constrained.rhs, solver);
  } catch (const Error& err) {
    throw Error(std::string("mechanical solve failed: ") + err.what());
  }
  const auto Ax = sys.constrained.matrix.multiply(sol.displacement.values);
  std::vector<double> r(Ax.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = sys.constrained.rhs[i] - Ax[i];
  const double bnorm = norm2(sys.constrained.rhs);
  sol.report.iterations = 1;
  sol.report.linear_solves = 1;
  sol.report.residual_history = {bnorm, bnorm == 0.0 ? 0.0 : norm2(r) / bnorm};
  sol.report.final_residual_max = norm_max(r);
  sol.report.converged = true;
  sol.report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

StressField recover_stress(const Mesh& mesh, const MaterialSet& materials, const NodalField& T, const NodalField& u) {
  StressField out;
  const std::size_t n = mesh.triangles.size();
  out.stress.resize(n);
  out.strain.resize(n);
  out.mean_temperature.resize(n);
  const auto& rule = triangle_rule_degree3();
  for (std::size_t e = 0; e < n; ++e) {
    const Triangle& tri = mesh.triangles[e];
    const MaterialRecord& mat = materials.at(tri.subdomain);
    const TriangleGeometry geo(mesh.vertices(tri));
    double Tbar = 0.0, wsum = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& lam = rule.points[q];
      Tbar += rule.weights[q] * (lam[0] * T(tri.nodes[0]) + lam[1] * T(tri.nodes[1]) + lam[2] * T(tri.nodes[2]));
      wsum += rule.weights[q];
    }
    Tbar /= wsum;
    const Point2 centroid = geo.map({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    const Vec4 eps = element_strain(mesh, e, u, centroid);
    const double E = eval_property(mat.E, Tbar);
    const Mat4 C = elasticity_matrix(E, mat.nu);
    const double th = thermal_stress_term(E, mat.nu, mat.alpha, Tbar, materials.T0);
    Vec4 sigma{};
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) sigma[a] += C[a][b] * eps[b];
      if (a < 3) sigma[a] -= th;
    }
    out.stress[e] = sigma;
    out.strain[e] = eps;
    out.mean_temperature[e] = Tbar;
  }
  return out;
}

std::vector<std::size_t> boundary_edge_owners(const Mesh& mesh) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> owner;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
    for (int k = 0; k < 3; ++k) owner.emplace(std::pair{mesh.triangles[t].nodes[k], mesh.triangles[t].nodes[(k + 1) % 3]}, t);
  std::vector<std::size_t> out;
  out.reserve(mesh.boundary_edges.size());
  for (const auto& e : mesh.boundary_edges) {
    auto it = owner.find({e.nodes[0], e.nodes[1]});
    if (it == owner.end()) it = owner.find({e.nodes[1], e.nodes[0]});
    if (it == owner.end()) throw Error("boundary edge without an owning triangle");
    out.push_back(it->second);
  }
  return out;
}

BoundaryStress boundary_stress(const Mesh& mesh, const StressField& stress, std::size_t edge_index, std::size_t owner) {
  const auto n = outward_normal(mesh, mesh.boundary_edges[edge_index]);
  const Vec4& s = stress.stress[owner];
  BoundaryStress out;
  out.traction = {s[0] * n[0] + s[3] * n[1], s[3] * n[0] + s[1] * n[1]};
  out.normal = out.traction[0] * n[0] + out.traction[1] * n[1];
  out.tangential = {out.traction[0] - out.normal * n[0], out.traction[1] - out.normal * n[1]};
  return out;
}

double tangential_traction_integral(const Mesh& mesh, const StressField& stress, BoundaryTag tag) {
  const auto owners = boundary_edge_owners(mesh);
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
    const auto& edge = mesh.boundary_edges[i];
    if (edge.tag != tag) continue;
    const auto bs = boundary_stress(mesh, stress, i, owners[i]);
    const double rmid = 0.5 * (mesh.nodes[edge.nodes[0]].r + mesh.nodes[edge.nodes[1]].r);
    total += std::hypot(bs.tangential[0], bs.tangential[1]) * rmid * edge_length(mesh, edge);
  }
  return total;
}

}  // namespace axitherm
