#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "axitherm/materials.hpp"
#include "axitherm/mechanical.hpp"
#include "axitherm/mesh.hpp"
#include "axitherm/thermal.hpp"

namespace axitherm {

/// Value, gradient and Hessian of a scalar function of (r, y), propagated
/// exactly through +, - and *. Enough to build polynomial exact solutions
/// and differentiate them twice without symbolic algebra.
struct Jet2 {
  double v = 0.0;
  std::array<double, 2> d{};
  std::array<std::array<double, 2>, 2> dd{};

  static Jet2 constant(double c) { return {c, {}, {}}; }
  static Jet2 r(double r) { return {r, {1.0, 0.0}, {}}; }
  static Jet2 y(double y) { return {y, {0.0, 1.0}, {}}; }
};

Jet2 operator+(const Jet2& a, const Jet2& b);
Jet2 operator-(const Jet2& a, const Jet2& b);
Jet2 operator*(const Jet2& a, const Jet2& b);
Jet2 operator*(double s, const Jet2& a);
Jet2 operator+(double s, const Jet2& a);

using ScalarExact = std::function<Jet2(double r, double y)>;

// ---------------------------------------------------------------------------
// Error norms and convergence records

struct ErrorNorms {
  double l2 = 0.0;  ///< sqrt(int |e|^2 r)
  double h1 = 0.0;  ///< sqrt(int |grad e|^2 r)
};

/// Errors of a nodal field against exact component functions (one per
/// field component), integrated with the degree-5 rule.
ErrorNorms error_norms(const Mesh& mesh, const NodalField& field, const std::vector<ScalarExact>& exact);

/// sqrt(int |f|^2 r) of the exact components.
double exact_l2_norm(const Mesh& mesh, const std::vector<ScalarExact>& exact);

struct ConvergenceLevel {
  double h = 0.0;
  double l2 = 0.0;
  double h1 = 0.0;
};

struct ConvergenceRecord {
  std::vector<ConvergenceLevel> levels;
  double order = 0.0;     ///< least-squares slope of log L2 against log h (NaN if an error is zero)
  double h1_order = 0.0;
};

/// Least-squares slope of log(e) against log(h).
double fit_order(const std::vector<double>& h, const std::vector<double>& e);

/// Validates h strictly decreasing and fills in the fitted orders.
ConvergenceRecord make_record(std::vector<ConvergenceLevel> levels);

/// `h,L2,order` rows; order is the pairwise rate against the previous row.
void write_convergence_csv(std::ostream& out, const ConvergenceRecord& record);

// ---------------------------------------------------------------------------
// Radial conduction through a hollow cylinder

struct AnnulusSolution {
  double A = 0.0;
  double B = 0.0;
  [[nodiscard]] double operator()(double r) const;
};

/// T = A ln r + B with convection h1 to T_R1 at r1 and h2 to T_R2 at r2.
AnnulusSolution annulus_analytic(double r1, double r2, double k, double h1, double T_R1, double h2, double T_R2);

struct AnnulusProblem {
  double r1 = 1.0, r2 = 2.0, k = 10.0, h1 = 100.0, T_R1 = 1000.0, h2 = 50.0, T_R2 = 300.0;
  double height = 0.1;
};

/// Solves the strip r in [r1, r2], y in [0, height] with adiabatic top and
/// bottom at each target h. The record stores relative L2 errors and the
/// nominal target h (the radial spacing is target_h / sqrt(2)).
ConvergenceRecord annulus_study(const AnnulusProblem& problem, const std::vector<double>& h_levels);

// ---------------------------------------------------------------------------
// Manufactured solutions on the unit square [0,1]^2

struct ThermalManufacturedCase {
  std::string name;
  ScalarExact temperature;
  PiecewiseQuadratic k;
  double h = 10.0;        ///< convection on Bottom, Top and Outer
  double ambient = 300.0;
};

/// -div(k grad T*) in axisymmetric form.
double thermal_source(const ThermalManufacturedCase& mc, double r, double y);

ConvergenceRecord mms_thermal_study(const ThermalManufacturedCase& mc, const std::vector<double>& h_levels);

struct MechanicalManufacturedCase {
  std::string name;
  std::function<std::array<Jet2, 2>(double r, double y)> displacement;
  ScalarExact temperature;
  double E = 2.0e11;
  double nu = 0.3;
  double alpha = 1.2e-5;
  double T0 = 300.0;
};

/// (s_rr, s_yy, s_tt, s_ry) of the exact displacement; needs r > 0.
Vec4 manufactured_stress(const MechanicalManufacturedCase& mc, double r, double y);

/// Body force b with div(sigma) + b = 0.
Vec2 mechanical_body_force(const MechanicalManufacturedCase& mc, double r, double y);

/// Displacement prescribed on Bottom, exact traction on Top and Outer, u_r = 0 on the axis.
ConvergenceRecord mms_mechanical_study(const MechanicalManufacturedCase& mc, const std::vector<double>& h_levels);

ThermalManufacturedCase mms_thermal_constant_case();
ThermalManufacturedCase mms_thermal_quadratic_case(bool nonlinear_k);
MechanicalManufacturedCase mms_mechanical_linear_case();
MechanicalManufacturedCase mms_mechanical_quadratic_case(bool thermal_load);

// ---------------------------------------------------------------------------
// Spline fit reproduction

struct CoefficientEntry {
  int subdomain = 0;
  std::string property;     ///< "k" or "E"
  std::string coefficient;  ///< a0 b0 c0 a1 b1 c1
  std::string printed;      ///< as printed, "/" for a dropped zero
  double fitted = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct CoefficientReport {
  std::vector<CoefficientEntry> entries;  ///< 6 subdomains x 12 coefficients
  [[nodiscard]] std::size_t failures() const;
  [[nodiscard]] bool pass() const { return failures() == 0; }
};

/// Refits the hearth samples and compares against the published
/// coefficients: |fitted - printed| <= 0.05 * 10^(printed exponent); "/"
/// entries must be exactly zero.
CoefficientReport reproduce_published_coefficients();

void write_coefficient_report(std::ostream& out, const CoefficientReport& report);

// ---------------------------------------------------------------------------
// Other oracles

/// max over directions of |J v - (R(T + eps v) - R(T - eps v)) / (2 eps)| / |J v|.
double jacobian_fd_error(const Mesh& mesh, const MaterialSet& materials, const ThermalBC& bc, const NodalField& T,
                         const std::vector<std::vector<double>>& directions, double eps);

/// Uniform heating of a single-material solid cylinder [0,1]x[0,2].
/// Returns max elementwise ||sigma|| / (E alpha dT).
double free_expansion_stress_ratio(double delta_T, double target_h);

struct OracleResult {
  std::string name;
  bool pass = false;
  std::string detail;
  std::optional<ConvergenceRecord> record;
};

/// Suites: coefficients, annulus, mms, jacobian, free-expansion, all.
std::vector<OracleResult> run_verification_suite(const std::string& suite);

}  // namespace axitherm
