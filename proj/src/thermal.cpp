#include "axitherm/thermal.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "axitherm/format.hpp"

namespace axitherm {

namespace {

struct LocalThermal {
  std::array<double, 3> residual{};
  std::array<std::array<double, 3>, 3> jacobian{};  // [test][trial]
};

void check_bc(const Mesh& mesh, const ThermalBC& bc) {
  for (const auto& e : mesh.boundary_edges)
    if (e.tag != BoundaryTag::Interface && !bc.conditions.count(e.tag))
      throw InputError("no thermal boundary condition for tag " + std::string(to_string(e.tag)));
}

LocalThermal element_terms(const Mesh& mesh, const MaterialSet& materials, const NodalField& T, std::size_t e,
                           const ThermalForcing& forcing, bool with_jacobian) {
  const Triangle& tri = mesh.triangles[e];
  const MaterialRecord& mat = materials.at(tri.subdomain);
  const TriangleGeometry geo(mesh.vertices(tri));
  const std::array<double, 3> Te{T(tri.nodes[0]), T(tri.nodes[1]), T(tri.nodes[2])};
  std::array<double, 2> grad{0.0, 0.0};
  for (int i = 0; i < 3; ++i) {
    grad[0] += Te[i] * geo.gradients[i][0];
    grad[1] += Te[i] * geo.gradients[i][1];
  }

  LocalThermal local;
  const auto& rule = triangle_rule_degree3();
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const auto& lam = rule.points[q];
    const Point2 p = geo.map(lam);
    const double w = rule.weights[q] * 2.0 * geo.area * p.r;
    const double Tq = lam[0] * Te[0] + lam[1] * Te[1] + lam[2] * Te[2];
    const double k = eval_property(mat.k, Tq);
    const double f = forcing.source ? forcing.source(p.r, p.y) : 0.0;
    for (int j = 0; j < 3; ++j) {
      const double grad_dot = grad[0] * geo.gradients[j][0] + grad[1] * geo.gradients[j][1];
      local.residual[j] += w * (k * grad_dot - f * lam[j]);
      if (!with_jacobian) continue;
      const double dk = eval_property_derivative(mat.k, Tq);
      for (int i = 0; i < 3; ++i) {
        const double gij = geo.gradients[i][0] * geo.gradients[j][0] + geo.gradients[i][1] * geo.gradients[j][1];
        local.jacobian[j][i] += w * (k * gij + dk * lam[i] * grad_dot);
      }
    }
  }
  return local;
}

template <typename EdgeBody>
void for_each_exterior_edge(const Mesh& mesh, EdgeBody&& body) {
  const auto& rule = line_rule_gauss2();
  for (const auto& edge : mesh.boundary_edges) {
    if (edge.tag == BoundaryTag::Interface) continue;
    const Point2& a = mesh.nodes[edge.nodes[0]];
    const Point2& b = mesh.nodes[edge.nodes[1]];
    const double len = edge_length(mesh, edge);
    const auto n = outward_normal(mesh, edge);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double s = rule.points[q];
      const Point2 p{a.r + s * (b.r - a.r), a.y + s * (b.y - a.y)};
      body(edge, p, n, std::array<double, 2>{1.0 - s, s}, rule.weights[q] * len * p.r);
    }
  }
}

// Trapezoid rule on each convection edge: half the r-weighted length goes to each end node.
template <typename NodeBody>
void for_each_lumped_robin(const Mesh& mesh, const ThermalBC& bc, NodeBody&& body) {
  for (const auto& edge : mesh.boundary_edges) {
    if (edge.tag == BoundaryTag::Interface) continue;
    const auto* robin = std::get_if<Robin>(&bc.conditions.at(edge.tag));
    if (robin == nullptr) continue;
    const double len = edge_length(mesh, edge);
    for (std::size_t node : edge.nodes) body(node, *robin, 0.5 * len * mesh.nodes[node].r);
  }
}

}  // namespace

ThermalBC hearth_thermal_bc() {
  return {{{BoundaryTag::Bottom, Robin{200.0, 300.0}},
           {BoundaryTag::Outer, Robin{200.0, 300.0}},
           {BoundaryTag::Top, Adiabatic{}},
           {BoundaryTag::Inner, Robin{2000.0, 1773.0}},
           {BoundaryTag::Axis, Adiabatic{}}}};
}

std::vector<double> assemble_thermal_residual(const Mesh& mesh, const MaterialSet& materials, const ThermalBC& bc,
                                              const NodalField& T, const ThermalForcing& forcing) {
  check_bc(mesh, bc);
  if (T.components != 1 || T.nodes() != mesh.nodes.size()) throw Error("temperature field does not match the mesh");
  std::vector<LocalThermal> locals(mesh.triangles.size());
  for_each_element(mesh.triangles.size(),
                   [&](std::size_t e) { locals[e] = element_terms(mesh, materials, T, e, forcing, false); });

  std::vector<double> R(mesh.nodes.size(), 0.0);
  for (std::size_t e = 0; e < locals.size(); ++e)
    for (int j = 0; j < 3; ++j) R[mesh.triangles[e].nodes[j]] += locals[e].residual[j];

  const bool lumped = bc.robin_quadrature == RobinQuadrature::Lumped;
  for_each_exterior_edge(mesh, [&](const BoundaryEdge& edge, const Point2& p, const std::array<double, 2>& n,
                                   const std::array<double, 2>& phi, double w) {
    double flux = 0.0;  // outward heat flux density at p
    if (const auto* robin = std::get_if<Robin>(&bc.conditions.at(edge.tag)); robin && !lumped) {
      const double Tp = phi[0] * T(edge.nodes[0]) + phi[1] * T(edge.nodes[1]);
      flux += robin->h * (Tp - robin->ambient);
    }
    if (forcing.boundary_flux) flux -= forcing.boundary_flux(p, n, edge.tag);
    R[edge.nodes[0]] += w * flux * phi[0];
    R[edge.nodes[1]] += w * flux * phi[1];
  });
  if (lumped)
    for_each_lumped_robin(mesh, bc, [&](std::size_t node, const Robin& robin, double w) {
      R[node] += w * robin.h * (T(node) - robin.ambient);
    });
  return R;
}

SparseMatrix assemble_thermal_jacobian(const Mesh& mesh, const MaterialSet& materials, const ThermalBC& bc,
                                       const NodalField& T) {
  check_bc(mesh, bc);
  if (T.components != 1 || T.nodes() != mesh.nodes.size()) throw Error("temperature field does not match the mesh");
  std::vector<LocalThermal> locals(mesh.triangles.size());
  for_each_element(mesh.triangles.size(),
                   [&](std::size_t e) { locals[e] = element_terms(mesh, materials, T, e, {}, true); });

  SparseMatrix J = make_pattern(mesh, 1);
  for (std::size_t e = 0; e < locals.size(); ++e) {
    const auto& nodes = mesh.triangles[e].nodes;
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) J.add(nodes[j], nodes[i], locals[e].jacobian[j][i]);
  }
  if (bc.robin_quadrature == RobinQuadrature::Lumped) {
    for_each_lumped_robin(mesh, bc, [&](std::size_t node, const Robin& robin, double w) { J.add(node, node, w * robin.h); });
    return J;
  }
  for_each_exterior_edge(mesh, [&](const BoundaryEdge& edge, const Point2&, const std::array<double, 2>&,
                                   const std::array<double, 2>& phi, double w) {
    const auto* robin = std::get_if<Robin>(&bc.conditions.at(edge.tag));
    if (robin == nullptr) return;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) J.add(edge.nodes[a], edge.nodes[b], w * robin->h * (phi[a] * phi[b]));
  });
  return J;
}

ThermalSolution newton_solve(const Mesh& mesh, const MaterialSet& materials, const ThermalBC& bc,
                             const NewtonConfig& config, const ThermalForcing& forcing,
                             std::optional<NodalField> initial) {
  if (!(config.abs_tol > 0.0)) throw InputError("Newton tolerance must be positive");
  if (config.max_iter < 1) throw InputError("Newton max_iter must be at least 1");
  const auto start = std::chrono::steady_clock::now();

  ThermalSolution sol{initial ? std::move(*initial) : NodalField::constant(mesh.nodes.size(), config.initial_guess), {}};
  SolveReport& report = sol.report;
  auto finish = [&] {
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  std::vector<double> R = assemble_thermal_residual(mesh, materials, bc, sol.temperature, forcing);
  double norm = norm2(R);
  report.residual_history.push_back(norm);
  const double target = config.relative ? config.rel_tol * norm : config.abs_tol;

  while (true) {
    if (!std::isfinite(norm)) {
      finish();
      throw NewtonError("Newton iteration produced a non-finite residual", report);
    }
    if (norm <= target) {
      report.converged = true;
      report.final_residual_max = norm_max(R);
      finish();
      return sol;
    }
    if (report.iterations >= config.max_iter) {
      report.final_residual_max = norm_max(R);
      finish();
      throw NewtonError("Newton did not converge in " + std::to_string(config.max_iter) + " iterations (residual " +
                            format_double(norm) + ")" +
                            (config.backtracking ? "" : "; consider enabling backtracking"),
                        report);
    }

    const SparseMatrix J = assemble_thermal_jacobian(mesh, materials, bc, sol.temperature);
    std::vector<double> delta;
    try {
      const bool symmetric = J.max_asymmetry() == 0.0;
      delta = solve_linear(J, R, symmetric ? config.solver : LinearSolver::LU);
    } catch (const Error& err) {
      finish();
      throw NewtonError(std::string("singular Jacobian: ") + err.what(), report);
    }
    ++report.linear_solves;

    double step = 1.0;
    NodalField trial = sol.temperature;
    for (int halvings = 0;; ++halvings) {
      for (std::size_t i = 0; i < delta.size(); ++i) trial.values[i] = sol.temperature.values[i] - step * delta[i];
      R = assemble_thermal_residual(mesh, materials, bc, trial, forcing);
      const double trial_norm = norm2(R);
      if (!config.backtracking || trial_norm < norm || halvings == 8) {
        norm = trial_norm;
        break;
      }
      step *= 0.5;
    }
    sol.temperature = std::move(trial);
    ++report.iterations;
    report.residual_history.push_back(norm);
  }
}

}  // namespace axitherm
