#include "axitherm/materials.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "axitherm/error.hpp"
#include "axitherm/format.hpp"

namespace axitherm {

namespace {

double quadratic(const std::array<double, 3>& c, double T) { return (c[0] * T + c[1]) * T + c[2]; }

// Dense solve with partial pivoting; throws on a (numerically) zero pivot.
template <std::size_t N>
std::array<double, N> solve_small(std::array<std::array<double, N>, N> a, std::array<double, N> b) {
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < N; ++row)
      if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
    if (std::abs(a[pivot][col]) < 1e-12) throw Error("singular spline fit system (repeated sample temperatures?)");
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t row = col + 1; row < N; ++row) {
      const double f = a[row][col] / a[col][col];
      for (std::size_t k = col; k < N; ++k) a[row][k] -= f * a[col][k];
      b[row] -= f * b[col];
    }
  }
  std::array<double, N> x{};
  for (std::size_t i = N; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < N; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

}  // namespace

PiecewiseQuadratic fit_piecewise_quadratic(const std::array<Sample, 4>& samples, Knots knots) {
  if (!(knots.Ta < knots.Tb && knots.Tb < knots.Tc)) throw InputError("spline knots must satisfy Ta < Tb < Tc");
  auto sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [T, v] : sorted)
    if (T < knots.Ta || T > knots.Tc)
      throw InputError("sample temperature " + format_double(T) + " K lies outside [" + format_double(knots.Ta) + ", " +
                       format_double(knots.Tc) + "]");
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
    if (sorted[i].first == sorted[i + 1].first)
      throw Error("singular spline fit system: repeated sample temperature " + format_double(sorted[i].first) + " K");
  if (sorted[1].first > knots.Tb || sorted[2].first < knots.Tb)
    throw InputError("spline fit needs two samples in [Ta, Tb] and two in [Tb, Tc]");

  if (std::all_of(sorted.begin(), sorted.end(), [&](const Sample& s) { return s.second == sorted[0].second; }))
    return PiecewiseQuadratic::constant(sorted[0].second, knots.Ta, knots.Tb, knots.Tc);

  // Value and slope continuity at Tb are built in by writing both pieces as
  //   p(T) = v + d s + g_piece s^2,  s = (T - Tb) / L,
  // which leaves the four interpolation conditions for (v, d, g_lower, g_upper).
  const double L = knots.Tc - knots.Ta;
  std::array<std::array<double, 4>, 4> a{};
  std::array<double, 4> rhs{};
  for (std::size_t i = 0; i < 4; ++i) {
    const double s = (sorted[i].first - knots.Tb) / L;
    a[i] = {1.0, s, i < 2 ? s * s : 0.0, i < 2 ? 0.0 : s * s};
    rhs[i] = sorted[i].second;
  }
  const auto x = solve_small(a, rhs);

  auto to_monomial = [&](double g) {
    const double ga = g / (L * L);
    const double db = x[1] / L;
    return std::array<double, 3>{ga, db - 2.0 * ga * knots.Tb, x[0] - db * knots.Tb + ga * knots.Tb * knots.Tb};
  };
  return {knots.Ta, knots.Tb, knots.Tc, to_monomial(x[2]), to_monomial(x[3])};
}

double eval_property(const PiecewiseQuadratic& model, double T) {
  const double t = std::clamp(T, model.Ta, model.Tc);
  return t <= model.Tb ? quadratic(model.lower, t) : quadratic(model.upper, t);
}

double eval_property_derivative(const PiecewiseQuadratic& model, double T) {
  if (T < model.Ta || T > model.Tc) return 0.0;
  const auto& c = T <= model.Tb ? model.lower : model.upper;
  return 2.0 * c[0] * T + c[1];
}

double min_on_range(const PiecewiseQuadratic& model) {
  double m = std::min({eval_property(model, model.Ta), eval_property(model, model.Tb), eval_property(model, model.Tc)});
  auto vertex = [&](const std::array<double, 3>& c, double lo, double hi) {
    if (c[0] == 0.0) return;
    const double t = -c[1] / (2.0 * c[0]);
    if (t > lo && t < hi) m = std::min(m, quadratic(c, t));
  };
  vertex(model.lower, model.Ta, model.Tb);
  vertex(model.upper, model.Tb, model.Tc);
  return m;
}

const MaterialRecord& MaterialSet::at(int id) const {
  auto it = records.find(id);
  if (it == records.end()) throw InputError("no material record for subdomain " + std::to_string(id));
  return it->second;
}

Mat4 elasticity_matrix(double E, double nu) {
  if (!(nu >= 0.0 && nu < 0.5)) throw InputError("Poisson ratio must lie in [0, 0.5), got " + format_double(nu));
  const double f = E / ((1.0 - 2.0 * nu) * (1.0 + nu));
  const double d = f * (1.0 - nu);
  const double o = f * nu;
  return {{{d, o, o, 0.0}, {o, d, o, 0.0}, {o, o, d, 0.0}, {0.0, 0.0, 0.0, f * (1.0 - 2.0 * nu) / 2.0}}};
}

double thermal_stress_term(double E, double nu, double alpha, double T, double T0) {
  return E * alpha * (T - T0) / (1.0 - 2.0 * nu);
}

void validate(const MaterialRecord& record) {
  if (!(record.nu >= 0.0 && record.nu < 0.5)) throw InputError("Poisson ratio must lie in [0, 0.5)");
  if (!(record.alpha > 0.0)) throw InputError("thermal expansion coefficient must be positive");
  for (const auto* m : {&record.k, &record.E})
    if (!(m->Ta < m->Tb && m->Tb < m->Tc)) throw InputError("property knots must satisfy Ta < Tb < Tc");
}

MaterialSet build_hearth_materials() {
  using S = HearthSamples;
  MaterialSet set;
  set.T0 = S::T0;
  for (std::size_t i = 0; i < 6; ++i) {
    std::array<Sample, 4> k{};
    std::array<Sample, 4> E{};
    for (std::size_t j = 0; j < 4; ++j) {
      k[j] = {S::k_temperatures[j], S::k[i][j]};
      E[j] = {S::E_temperatures[j], S::E_gpa[i][j] * 1e9};
    }
    MaterialRecord rec{fit_piecewise_quadratic(k, S::k_knots), fit_piecewise_quadratic(E, S::E_knots), S::nu[i],
                       S::alpha[i]};
    validate(rec);
    set.records.emplace(static_cast<int>(i + 1), rec);
  }
  return set;
}

}  // namespace axitherm
