#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "axitherm/error.hpp"
#include "axitherm/fem.hpp"
#include "axitherm/materials.hpp"
#include "axitherm/mesh.hpp"

namespace axitherm {

struct Adiabatic {
  friend bool operator==(const Adiabatic&, const Adiabatic&) = default;
};

/// Convection: -k grad T . n = h (T - ambient).
struct Robin {
  double h = 0.0;        ///< [W/(m^2 K)]
  double ambient = 0.0;  ///< [K]
  friend bool operator==(const Robin&, const Robin&) = default;
};

using ThermalCondition = std::variant<Adiabatic, Robin>;

/// Quadrature for the convection boundary terms. Gauss2 gives the
/// consistent boundary mass; Lumped integrates at the edge end points,
/// which keeps the system an M-matrix at large h L / k.
enum class RobinQuadrature { Gauss2, Lumped };

struct ThermalBC {
  std::map<BoundaryTag, ThermalCondition> conditions;
  RobinQuadrature robin_quadrature = RobinQuadrature::Gauss2;
  friend bool operator==(const ThermalBC&, const ThermalBC&) = default;
};

/// Adiabatic top and axis; convection at the bottom, outer shell and cavity wall.
ThermalBC hearth_thermal_bc();

/// Source terms used only by manufactured-solution studies. Production runs
/// leave both empty.
struct ThermalForcing {
  /// Volumetric heat source [W/m^3].
  std::function<double(double r, double y)> source;
  /// Extra heat flux entering through exterior edges [W/m^2].
  std::function<double(const Point2& p, const std::array<double, 2>& normal, BoundaryTag tag)> boundary_flux;
};

struct NewtonConfig {
  double abs_tol = 1e-4;
  std::size_t max_iter = 25;
  double initial_guess = 300.0;
  /// Use ||R|| <= rel_tol ||R_0|| instead of the absolute test.
  bool relative = false;
  double rel_tol = 1e-10;
  /// Step halving (at most 8 halvings) when a full step does not reduce ||R||.
  bool backtracking = false;
  LinearSolver solver = LinearSolver::LU;

  friend bool operator==(const NewtonConfig&, const NewtonConfig&) = default;
};

struct SolveReport {
  std::size_t iterations = 0;
  std::vector<double> residual_history;  ///< 2-norm before each update and after the last
  double final_residual_max = 0.0;
  bool converged = false;
  std::size_t linear_solves = 0;
  double wall_time_s = 0.0;
};

class NewtonError : public Error {
 public:
  NewtonError(const std::string& what, SolveReport report) : Error(what), report_(std::move(report)) {}
  [[nodiscard]] const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

std::vector<double> assemble_thermal_residual(const Mesh& mesh, const MaterialSet& materials, const ThermalBC& bc,
                                              const NodalField& T, const ThermalForcing& forcing = {});

SparseMatrix assemble_thermal_jacobian(const Mesh& mesh, const MaterialSet& materials, const ThermalBC& bc,
                                       const NodalField& T);

struct ThermalSolution {
  NodalField temperature;
  SolveReport report;
};

/// Full-step Newton iteration T <- T - J^{-1} R from a uniform initial
/// guess (or the supplied field).
ThermalSolution newton_solve(const Mesh& mesh, const MaterialSet& materials, const ThermalBC& bc,
                             const NewtonConfig& config, const ThermalForcing& forcing = {},
                             std::optional<NodalField> initial = std::nullopt);

}  // namespace axitherm
