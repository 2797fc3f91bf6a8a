#pragma once

#include <array>
#include <map>
#include <utility>

namespace axitherm {

using Vec4 = std::array<double, 4>;
using Mat4 = std::array<Vec4, 4>;

/// Two quadratic pieces joined with C1 continuity at Tb:
///   T in [Ta, Tb]: lower[0] T^2 + lower[1] T + lower[2]
///   T in (Tb, Tc]: upper[0] T^2 + upper[1] T + upper[2]
/// Outside [Ta, Tc] the model is held at its end values.
struct PiecewiseQuadratic {
  double Ta = 0.0;
  double Tb = 0.0;
  double Tc = 0.0;
  std::array<double, 3> lower{};
  std::array<double, 3> upper{};

  static PiecewiseQuadratic constant(double value, double Ta, double Tb, double Tc) {
    return {Ta, Tb, Tc, {0.0, 0.0, value}, {0.0, 0.0, value}};
  }

  friend bool operator==(const PiecewiseQuadratic&, const PiecewiseQuadratic&) = default;
};

struct Knots {
  double Ta, Tb, Tc;
};

using Sample = std::pair<double, double>;  // (temperature [K], property value)

/// C1 two-piece quadratic through four samples: the two lowest samples on
/// the lower piece, the two highest on the upper piece.
PiecewiseQuadratic fit_piecewise_quadratic(const std::array<Sample, 4>& samples, Knots knots);

double eval_property(const PiecewiseQuadratic& model, double T);
double eval_property_derivative(const PiecewiseQuadratic& model, double T);

/// Smallest value of the model on [Ta, Tc] (piece endpoints and vertices).
double min_on_range(const PiecewiseQuadratic& model);

struct MaterialRecord {
  PiecewiseQuadratic k;  ///< thermal conductivity [W/(m K)]
  PiecewiseQuadratic E;  ///< Young's modulus [Pa]
  double nu = 0.0;
  double alpha = 0.0;  ///< [1/K]
};

struct MaterialSet {
  std::map<int, MaterialRecord> records;
  double T0 = 300.0;

  /// Throws if id has no record.
  [[nodiscard]] const MaterialRecord& at(int id) const;
};

/// Axisymmetric constitutive matrix acting on (e_rr, e_yy, e_tt, g_ry).
Mat4 elasticity_matrix(double E, double nu);

/// E alpha (T - T0) / (1 - 2 nu): the thermal term subtracted from the
/// three normal stresses.
double thermal_stress_term(double E, double nu, double alpha, double T, double T0);

/// Raw tabulated conductivity and modulus samples of the hearth materials.
struct HearthSamples {
  static constexpr std::array<double, 4> k_temperatures{293.0, 473.0, 673.0, 1273.0};
  static constexpr std::array<double, 4> E_temperatures{293.0, 573.0, 1073.0, 1273.0};
  static constexpr Knots k_knots{293.0, 673.0, 1800.0};
  static constexpr Knots E_knots{293.0, 823.0, 1800.0};
  /// [subdomain-1][sample], W/(m K)
  static constexpr std::array<std::array<double, 4>, 6> k{{{16.07, 15.53, 15.97, 17.23},
                                                           {49.35, 24.75, 27.06, 38.24},
                                                           {5.3, 5.3, 5.3, 5.3},
                                                           {4.75, 4.75, 4.75, 4.75},
                                                           {23.34, 20.81, 20.99, 21.62},
                                                           {45.6, 45.6, 45.6, 45.6}}};
  /// [subdomain-1][sample], GPa
  static constexpr std::array<std::array<double, 4>, 6> E_gpa{{{10.5, 10.3, 10.4, 10.3},
                                                               {15.4, 14.7, 13.8, 14.4},
                                                               {58.2, 67.3, 52.9, 51.6},
                                                               {1.85, 1.92, 1.83, 1.85},
                                                               {14.5, 15.0, 15.3, 13.3},
                                                               {190.0, 190.0, 190.0, 190.0}}};
  static constexpr std::array<double, 6> nu{0.3, 0.2, 0.1, 0.1, 0.2, 0.3};
  static constexpr std::array<double, 6> alpha{2.3e-6, 4.6e-6, 4.7e-6, 4.6e-6, 6e-6, 1.2e-5};
  static constexpr double T0 = 300.0;
};

MaterialSet build_hearth_materials();

/// Throws if nu is outside [0, 0.5), alpha <= 0 or the record is otherwise unusable.
void validate(const MaterialRecord& record);

}  // namespace axitherm
