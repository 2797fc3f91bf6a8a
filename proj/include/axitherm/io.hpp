#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "axitherm/materials.hpp"
#include "axitherm/mechanical.hpp"
#include "axitherm/mesh.hpp"
#include "axitherm/thermal.hpp"

namespace axitherm {

// ---------------------------------------------------------------------------
// Run configuration

/// One temperature-dependent property: either four (T, value) samples fitted
/// at the knots, or the six coefficients given directly.
struct PropertySpec {
  std::optional<std::array<Sample, 4>> samples;
  std::optional<std::array<double, 6>> coefficients;  ///< a0 b0 c0 a1 b1 c1
  std::array<double, 3> knots{};                      ///< Ta Tb Tc

  friend bool operator==(const PropertySpec&, const PropertySpec&) = default;
};

struct MaterialBlock {
  PropertySpec k;
  PropertySpec E;  ///< [Pa]
  double nu = 0.0;
  double alpha = 0.0;

  friend bool operator==(const MaterialBlock&, const MaterialBlock&) = default;
};

/// Serializable mechanical boundary condition.
struct MechanicalSpec {
  enum class Kind { TractionFree, Contact, Hydrostatic, Traction };
  Kind kind = Kind::TractionFree;
  double gradient = kHydrostaticGradient;  ///< Hydrostatic only [N/m^3]
  double y_max = kHearthYMax;              ///< Hydrostatic only
  Vec2 value{};                            ///< Traction only, constant [N/m^2]

  friend bool operator==(const MechanicalSpec&, const MechanicalSpec&) = default;
};

struct RunConfig {
  std::string scenario = "hearth";
  std::string mesh_file;  ///< empty: built-in hearth geometry
  double target_h = 0.1;
  std::map<int, MaterialBlock> materials;  ///< empty: built-in hearth materials
  double T0 = 300.0;
  ThermalBC thermal_bc = hearth_thermal_bc();
  std::map<BoundaryTag, MechanicalSpec> mechanical_bc = hearth_mechanical_spec();
  NewtonConfig newton;  ///< newton.solver is used for the mechanical solve too
  std::string output_dir = "out";
  std::vector<double> isolines{1423.15};

  static std::map<BoundaryTag, MechanicalSpec> hearth_mechanical_spec();
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// "gauss2" or "lumped".
RobinQuadrature parse_robin_quadrature(const std::string& name);

/// JSON text; missing keys keep their defaults, unknown keys are rejected.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string to_json(const RunConfig& config);

/// Throws InputError on the first violated invariant.
void validate(const RunConfig& config);

Mesh build_mesh(const RunConfig& config);
MaterialSet build_materials(const RunConfig& config);
MechanicalBC build_mechanical_bc(const RunConfig& config);

std::string to_json(const SolveReport& report);

// ---------------------------------------------------------------------------
// Field export

/// Optional fields for export; null pointers are skipped.
struct ExportFields {
  const NodalField* temperature = nullptr;
  const NodalField* displacement = nullptr;
  const StressField* stress = nullptr;

  [[nodiscard]] bool empty() const { return !temperature && !displacement && !stress; }
};

/// Legacy ASCII VTK unstructured grid; points are (r, y, 0). With no fields
/// only the header and geometry are written.
void export_vtk(std::ostream& out, const Mesh& mesh, const ExportFields& fields);
void export_vtk(const std::filesystem::path& path, const Mesh& mesh, const ExportFields& fields);

/// `node_id,r,y,T,u_r,u_y`.
void export_csv(std::ostream& out, const Mesh& mesh, const NodalField& T, const NodalField& u);

/// `element,subdomain,T_mean,s_rr,s_yy,s_tt,s_ry`.
void export_stress_csv(std::ostream& out, const Mesh& mesh, const StressField& stress);

/// Reads the T column back from export_csv output.
NodalField read_temperature_csv(std::istream& in);

/// Writes text to path through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

// ---------------------------------------------------------------------------
// Isotherms

struct IsoLine {
  double level = 0.0;
  std::vector<std::vector<Point2>> polylines;  ///< closed loops repeat their first point
};

/// Marching triangles on the P1 interpolant; segments chained by shared endpoints.
IsoLine extract_isoline(const Mesh& mesh, const NodalField& T, double level);

std::string to_json(const std::vector<IsoLine>& lines);

// ---------------------------------------------------------------------------
// Scenario

struct ScenarioResult {
  Mesh mesh;
  MaterialSet materials;
  ThermalSolution thermal;
  MechanicalSolution mechanical;
  StressField stress;
  std::vector<IsoLine> isolines;
};

/// Mesh, thermal Newton solve, mechanical solve, stress recovery, isotherms.
ScenarioResult solve_scenario(const RunConfig& config);

/// Writes config.json, mesh.txt, fields.vtk, fields.csv, stress.csv,
/// thermal_report.json, mechanical_report.json, isolines.json, summary.json.
void write_artifacts(const RunConfig& config, const ScenarioResult& result);

/// Runs everything and returns the process exit status: 0 success, 2 invalid
/// input, 1 any other failure. Diagnostics go to err; on failure a
/// status.json marks the output directory as incomplete.
int run_scenario(const RunConfig& config, std::ostream& err);

}  // namespace axitherm
