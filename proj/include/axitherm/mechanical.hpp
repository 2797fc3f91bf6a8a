#pragma once

#include <array>
#include <functional>
#include <map>
#include <variant>
#include <vector>

#include "axitherm/fem.hpp"
#include "axitherm/materials.hpp"
#include "axitherm/mesh.hpp"
#include "axitherm/thermal.hpp"

namespace axitherm {

using Vec2 = std::array<double, 2>;

struct TractionFree {};

/// u . n = 0 with zero tangential traction; the boundary must be axis-aligned.
struct FrictionlessContact {};

/// Applied surface force g(p, n) [N/m^2], n the outward unit normal.
struct Traction {
  std::function<Vec2(const Point2& p, const Vec2& normal)> load;
};

/// Both displacement components fixed to value(p). Used by manufactured
/// solution studies.
struct PrescribedDisplacement {
  std::function<Vec2(const Point2& p)> value;
};

using MechanicalCondition = std::variant<TractionFree, FrictionlessContact, Traction, PrescribedDisplacement>;

/// The Axis tag always gets u_r = 0 whether or not it is listed.
struct MechanicalBC {
  std::map<BoundaryTag, MechanicalCondition> conditions;
};

inline constexpr double kHydrostaticGradient = 77106.0;  // [N/m^3]

/// Magnitude of the hydrostatic pressure of the molten metal at height y,
/// acting along -n: 77106 (y_max - y).
double hydrostatic_traction(double y, double y_max);

/// Contact on top and bottom, hydrostatic pressure on the cavity wall, free outer shell.
MechanicalBC hearth_mechanical_bc(double y_max = kHearthYMax);

struct MechanicalForcing {
  /// Body force [N/m^3].
  std::function<Vec2(double r, double y)> body_force;
};

/// (e_rr, e_yy, e_tt, g_ry) of the P1 interpolant at p; p must have r > 0.
Vec4 element_strain(const std::array<Point2, 3>& triangle, const std::array<Vec2, 3>& nodal_u, const Point2& p);
Vec4 element_strain(const Mesh& mesh, std::size_t triangle, const NodalField& u, const Point2& p);

struct MechanicalSystem {
  SparseMatrix stiffness;   ///< before constraints
  std::vector<double> load; ///< before constraints
  DofMap dofs;
  LinearSystem constrained;
};

MechanicalSystem assemble_mechanical_system(const Mesh& mesh, const MaterialSet& materials, const MechanicalBC& bc,
                                            const NodalField& T, const MechanicalForcing& forcing = {});

struct MechanicalSolution {
  NodalField displacement;
  SolveReport report;
};

MechanicalSolution solve_mechanical(const Mesh& mesh, const MaterialSet& materials, const MechanicalBC& bc,
                                    const NodalField& T, LinearSolver solver = LinearSolver::LU,
                                    const MechanicalForcing& forcing = {});

/// Piecewise-constant stress and strain per triangle, evaluated at the
/// centroid with the element-averaged temperature.
struct StressField {
  std::vector<Vec4> stress;  ///< (s_rr, s_yy, s_tt, s_ry) [Pa]
  std::vector<Vec4> strain;  ///< (e_rr, e_yy, e_tt, g_ry)
  std::vector<double> mean_temperature;
};

StressField recover_stress(const Mesh& mesh, const MaterialSet& materials, const NodalField& T, const NodalField& u);

struct BoundaryStress {
  Vec2 traction{};    ///< sigma n
  double normal = 0;  ///< (sigma n) . n
  Vec2 tangential{};  ///< sigma n - normal n
};

/// Index of the triangle owning each entry of mesh.boundary_edges (first owner for Interface edges).
std::vector<std::size_t> boundary_edge_owners(const Mesh& mesh);

BoundaryStress boundary_stress(const Mesh& mesh, const StressField& stress, std::size_t edge_index,
                               std::size_t owner);

/// Integral of |sigma_t| r ds over all exterior edges carrying tag.
double tangential_traction_integral(const Mesh& mesh, const StressField& stress, BoundaryTag tag);

}  // namespace axitherm
