#include "axitherm/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "axitherm/error.hpp"
#include "axitherm/format.hpp"

namespace axitherm {

using nlohmann::json;

namespace {

const char* solver_name(LinearSolver s) { return s == LinearSolver::CG ? "cg" : "lu"; }

LinearSolver parse_solver(const std::string& s) {
  if (s == "lu") return LinearSolver::LU;
  if (s == "cg") return LinearSolver::CG;
  throw InputError("unknown solver '" + s + "' (expected lu or cg)");
}

BoundaryTag tag_from(const std::string& name) {
  const auto tag = parse_boundary_tag(name);
  if (!tag || *tag == BoundaryTag::Interface) throw InputError("unknown boundary tag '" + name + "'");
  return *tag;
}

}  // namespace

RobinQuadrature parse_robin_quadrature(const std::string& s) {
  if (s == "gauss2") return RobinQuadrature::Gauss2;
  if (s == "lumped") return RobinQuadrature::Lumped;
  throw InputError("unknown Robin quadrature '" + s + "' (expected gauss2 or lumped)");
}

namespace {

const char* kind_name(MechanicalSpec::Kind k) {
  switch (k) {
    case MechanicalSpec::Kind::TractionFree: return "free";
    case MechanicalSpec::Kind::Contact: return "contact";
    case MechanicalSpec::Kind::Hydrostatic: return "hydrostatic";
    case MechanicalSpec::Kind::Traction: return "traction";
  }
  return "free";
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw InputError(where + " must be an object");
  for (const auto& [key, value] : obj.items())
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end())
      throw InputError("unknown key '" + key + "' in " + where);
}

json property_to_json(const PropertySpec& p) {
  json j;
  if (p.samples) {
    json s = json::array();
    for (const auto& [T, v] : *p.samples) s.push_back({T, v});
    j["samples"] = s;
  }
  if (p.coefficients) j["coefficients"] = *p.coefficients;
  j["knots"] = p.knots;
  return j;
}

PropertySpec property_from_json(const json& j, const std::string& where) {
  reject_unknown(j, {"samples", "coefficients", "knots"}, where);
  PropertySpec p;
  if (!j.contains("knots")) throw InputError(where + " needs knots");
  p.knots = j.at("knots").get<std::array<double, 3>>();
  if (j.contains("samples")) {
    std::array<Sample, 4> s{};
    const auto& arr = j.at("samples");
    if (!arr.is_array() || arr.size() != 4) throw InputError(where + ".samples needs exactly 4 [T, value] pairs");
    for (std::size_t i = 0; i < 4; ++i) s[i] = {arr[i].at(0).get<double>(), arr[i].at(1).get<double>()};
    p.samples = s;
  }
  if (j.contains("coefficients")) p.coefficients = j.at("coefficients").get<std::array<double, 6>>();
  if (p.samples.has_value() == p.coefficients.has_value())
    throw InputError(where + " needs exactly one of samples or coefficients");
  return p;
}

PiecewiseQuadratic build_property(const PropertySpec& p) {
  const Knots knots{p.knots[0], p.knots[1], p.knots[2]};
  if (p.samples) return fit_piecewise_quadratic(*p.samples, knots);
  const auto& c = *p.coefficients;
  return {knots.Ta, knots.Tb, knots.Tc, {c[0], c[1], c[2]}, {c[3], c[4], c[5]}};
}

}  // namespace

std::map<BoundaryTag, MechanicalSpec> RunConfig::hearth_mechanical_spec() {
  using K = MechanicalSpec::Kind;
  return {{BoundaryTag::Bottom, {K::Contact}},
          {BoundaryTag::Top, {K::Contact}},
          {BoundaryTag::Axis, {K::Contact}},
          {BoundaryTag::Outer, {K::TractionFree}},
          {BoundaryTag::Inner, {K::Hydrostatic, kHydrostaticGradient, kHearthYMax}}};
}

std::string to_json(const RunConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  j["mesh"] = {{"file", c.mesh_file}, {"target_h", c.target_h}};
  json mats = json::object();
  for (const auto& [id, m] : c.materials)
    mats[std::to_string(id)] = {{"k", property_to_json(m.k)}, {"E", property_to_json(m.E)}, {"nu", m.nu}, {"alpha", m.alpha}};
  j["materials"] = {{"T0", c.T0}, {"subdomains", mats}};
  json th = json::object();
  for (const auto& [tag, cond] : c.thermal_bc.conditions) {
    if (const auto* r = std::get_if<Robin>(&cond))
      th[std::string(to_string(tag))] = {{"type", "robin"}, {"h", r->h}, {"ambient", r->ambient}};
    else
      th[std::string(to_string(tag))] = {{"type", "adiabatic"}};
  }
  j["thermal_bc"] = th;
  j["robin_quadrature"] = c.thermal_bc.robin_quadrature == RobinQuadrature::Lumped ? "lumped" : "gauss2";
  json me = json::object();
  for (const auto& [tag, spec] : c.mechanical_bc) {
    json e = {{"type", kind_name(spec.kind)}};
    if (spec.kind == MechanicalSpec::Kind::Hydrostatic) {
      e["gradient"] = spec.gradient;
      e["y_max"] = spec.y_max;
    } else if (spec.kind == MechanicalSpec::Kind::Traction) {
      e["value"] = spec.value;
    }
    me[std::string(to_string(tag))] = e;
  }
  j["mechanical_bc"] = me;
  const auto& n = c.newton;
  j["newton"] = {{"abs_tol", n.abs_tol},         {"max_iter", n.max_iter}, {"initial_guess", n.initial_guess},
                 {"relative", n.relative},       {"rel_tol", n.rel_tol},   {"backtracking", n.backtracking}};
  j["solver"] = solver_name(n.solver);
  j["output_dir"] = c.output_dir;
  j["isolines"] = c.isolines;
  return j.dump(2) + "\n";
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& err) {
    throw InputError(std::string("config is not valid JSON: ") + err.what());
  }
  RunConfig c;
  try {
    reject_unknown(j, {"scenario", "mesh", "materials", "thermal_bc", "mechanical_bc", "newton", "solver", "output_dir",
                       "isolines", "robin_quadrature"},
                   "config");
    if (j.contains("scenario")) c.scenario = j["scenario"].get<std::string>();
    if (j.contains("mesh")) {
      const auto& m = j["mesh"];
      reject_unknown(m, {"file", "target_h"}, "mesh");
      if (m.contains("file")) c.mesh_file = m["file"].get<std::string>();
      if (m.contains("target_h")) c.target_h = m["target_h"].get<double>();
    }
    if (j.contains("materials")) {
      const auto& m = j["materials"];
      reject_unknown(m, {"T0", "subdomains"}, "materials");
      if (m.contains("T0")) c.T0 = m["T0"].get<double>();
      if (m.contains("subdomains")) {
        for (const auto& [key, block] : m["subdomains"].items()) {
          const std::string where = "materials.subdomains." + key;
          reject_unknown(block, {"k", "E", "nu", "alpha"}, where);
          int id = 0;
          try {
            id = std::stoi(key);
          } catch (const std::exception&) {
            throw InputError(where + ": subdomain keys must be integers");
          }
          MaterialBlock mb;
          mb.k = property_from_json(block.at("k"), where + ".k");
          mb.E = property_from_json(block.at("E"), where + ".E");
          mb.nu = block.at("nu").get<double>();
          mb.alpha = block.at("alpha").get<double>();
          c.materials[id] = mb;
        }
      }
    }
    if (j.contains("thermal_bc")) {
      c.thermal_bc.conditions.clear();
      for (const auto& [key, e] : j["thermal_bc"].items()) {
        const BoundaryTag tag = tag_from(key);
        const std::string type = e.at("type").get<std::string>();
        if (type == "adiabatic") {
          reject_unknown(e, {"type"}, "thermal_bc." + key);
          c.thermal_bc.conditions[tag] = Adiabatic{};
        } else if (type == "robin") {
          reject_unknown(e, {"type", "h", "ambient"}, "thermal_bc." + key);
          c.thermal_bc.conditions[tag] = Robin{e.at("h").get<double>(), e.at("ambient").get<double>()};
        } else {
          throw InputError("thermal_bc." + key + ": unknown type '" + type + "'");
        }
      }
    }
    if (j.contains("mechanical_bc")) {
      c.mechanical_bc.clear();
      for (const auto& [key, e] : j["mechanical_bc"].items()) {
        const BoundaryTag tag = tag_from(key);
        const std::string type = e.at("type").get<std::string>();
        MechanicalSpec spec;
        if (type == "free") {
          reject_unknown(e, {"type"}, "mechanical_bc." + key);
          spec.kind = MechanicalSpec::Kind::TractionFree;
        } else if (type == "contact") {
          reject_unknown(e, {"type"}, "mechanical_bc." + key);
          spec.kind = MechanicalSpec::Kind::Contact;
        } else if (type == "hydrostatic") {
          reject_unknown(e, {"type", "gradient", "y_max"}, "mechanical_bc." + key);
          spec.kind = MechanicalSpec::Kind::Hydrostatic;
          if (e.contains("gradient")) spec.gradient = e["gradient"].get<double>();
          if (e.contains("y_max")) spec.y_max = e["y_max"].get<double>();
        } else if (type == "traction") {
          reject_unknown(e, {"type", "value"}, "mechanical_bc." + key);
          spec.kind = MechanicalSpec::Kind::Traction;
          spec.value = e.at("value").get<Vec2>();
        } else {
          throw InputError("mechanical_bc." + key + ": unknown type '" + type + "'");
        }
        c.mechanical_bc[tag] = spec;
      }
    }
    if (j.contains("newton")) {
      const auto& n = j["newton"];
      reject_unknown(n, {"abs_tol", "max_iter", "initial_guess", "relative", "rel_tol", "backtracking"}, "newton");
      if (n.contains("abs_tol")) c.newton.abs_tol = n["abs_tol"].get<double>();
      if (n.contains("max_iter")) c.newton.max_iter = n["max_iter"].get<std::size_t>();
      if (n.contains("initial_guess")) c.newton.initial_guess = n["initial_guess"].get<double>();
      if (n.contains("relative")) c.newton.relative = n["relative"].get<bool>();
      if (n.contains("rel_tol")) c.newton.rel_tol = n["rel_tol"].get<double>();
      if (n.contains("backtracking")) c.newton.backtracking = n["backtracking"].get<bool>();
    }
    if (j.contains("robin_quadrature")) c.thermal_bc.robin_quadrature = parse_robin_quadrature(j["robin_quadrature"].get<std::string>());
    if (j.contains("solver")) c.newton.solver = parse_solver(j["solver"].get<std::string>());
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("isolines")) c.isolines = j["isolines"].get<std::vector<double>>();
  } catch (const json::exception& err) {
    throw InputError(std::string("invalid config: ") + err.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const RunConfig& c) {
  if (c.scenario != "hearth") throw InputError("unknown case '" + c.scenario + "' (only hearth is built in)");
  if (!(c.target_h > 0.0) || !std::isfinite(c.target_h)) throw InputError("target_h must be positive");
  if (!c.mesh_file.empty() && !std::filesystem::exists(c.mesh_file))
    throw InputError("mesh file " + c.mesh_file + " does not exist");
  if (!(c.newton.abs_tol > 0.0)) throw InputError("Newton tolerance must be positive");
  if (c.newton.max_iter < 1) throw InputError("Newton max_iter must be at least 1");
  for (double level : c.isolines)
    if (!std::isfinite(level)) throw InputError("isoline levels must be finite");
  if (c.output_dir.empty()) throw InputError("output directory must not be empty");
  for (const auto& [tag, spec] : c.mechanical_bc)
    if (tag == BoundaryTag::Axis && spec.kind != MechanicalSpec::Kind::Contact)
      throw InputError("the Axis boundary only accepts the contact condition");
}

Mesh build_mesh(const RunConfig& c) {
  Mesh mesh;
  if (c.mesh_file.empty()) {
    mesh = generate_mesh(build_hearth_geometry(), c.target_h);
  } else {
    std::ifstream in(c.mesh_file);
    if (!in) throw InputError("cannot read mesh file " + c.mesh_file);
    mesh = read_mesh(in);
  }
  const auto issues = check_mesh(mesh);
  if (!issues.empty()) throw InputError("mesh check failed: " + issues.front());
  return mesh;
}

MaterialSet build_materials(const RunConfig& c) {
  if (c.materials.empty()) {
    MaterialSet set = build_hearth_materials();
    set.T0 = c.T0;
    return set;
  }
  MaterialSet set;
  set.T0 = c.T0;
  for (const auto& [id, block] : c.materials) {
    MaterialRecord rec{build_property(block.k), build_property(block.E), block.nu, block.alpha};
    validate(rec);
    set.records[id] = rec;
  }
  return set;
}

MechanicalBC build_mechanical_bc(const RunConfig& c) {
  MechanicalBC bc;
  for (const auto& [tag, spec] : c.mechanical_bc) {
    switch (spec.kind) {
      case MechanicalSpec::Kind::TractionFree: bc.conditions[tag] = TractionFree{}; break;
      case MechanicalSpec::Kind::Contact: bc.conditions[tag] = FrictionlessContact{}; break;
      case MechanicalSpec::Kind::Traction: {
        const Vec2 v = spec.value;
        bc.conditions[tag] = Traction{[v](const Point2&, const Vec2&) { return v; }};
        break;
      }
      case MechanicalSpec::Kind::Hydrostatic: {
        const double gradient = spec.gradient, y_max = spec.y_max;
        bc.conditions[tag] = Traction{[gradient, y_max](const Point2& p, const Vec2& n) {
          const double magnitude = hydrostatic_traction(p.y, y_max) * gradient / kHydrostaticGradient;
          return Vec2{-magnitude * n[0], -magnitude * n[1]};
        }};
        break;
      }
    }
  }
  return bc;
}

std::string to_json(const SolveReport& r) {
  json j = {{"iterations", r.iterations},
            {"residual_history", r.residual_history},
            {"final_residual_max", r.final_residual_max},
            {"converged", r.converged},
            {"linear_solves", r.linear_solves},
            {"wall_time_s", r.wall_time_s}};
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

void export_vtk(std::ostream& out, const Mesh& mesh, const ExportFields& f) {
  const std::size_t n = mesh.nodes.size(), m = mesh.triangles.size();
  out << "# vtk DataFile Version 3.0\naxitherm\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << n << " double\n";
  for (const auto& p : mesh.nodes) out << format_double(p.r) << ' ' << format_double(p.y) << " 0\n";
  out << "CELLS " << m << ' ' << 4 * m << '\n';
  for (const auto& t : mesh.triangles) out << "3 " << t.nodes[0] << ' ' << t.nodes[1] << ' ' << t.nodes[2] << '\n';
  out << "CELL_TYPES " << m << '\n';
  for (std::size_t i = 0; i < m; ++i) out << "5\n";
  if (f.empty()) return;

  if (f.temperature || f.displacement) out << "POINT_DATA " << n << '\n';
  if (f.temperature) {
    if (f.temperature->nodes() != n) throw Error("temperature field does not match the mesh");
    out << "SCALARS temperature double 1\nLOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < n; ++i) out << format_double((*f.temperature)(i)) << '\n';
  }
  if (f.displacement) {
    if (f.displacement->components != 2 || f.displacement->nodes() != n)
      throw Error("displacement field does not match the mesh");
    out << "VECTORS displacement double\n";
    for (std::size_t i = 0; i < n; ++i)
      out << format_double((*f.displacement)(i, 0)) << ' ' << format_double((*f.displacement)(i, 1)) << " 0\n";
  }
  out << "CELL_DATA " << m << '\n';
  out << "SCALARS subdomain int 1\nLOOKUP_TABLE default\n";
  for (const auto& t : mesh.triangles) out << t.subdomain << '\n';
  if (f.stress) {
    if (f.stress->stress.size() != m) throw Error("stress field does not match the mesh");
    const char* names[4] = {"stress_rr", "stress_yy", "stress_tt", "stress_ry"};
    for (int c = 0; c < 4; ++c) {
      out << "SCALARS " << names[c] << " double 1\nLOOKUP_TABLE default\n";
      for (const auto& s : f.stress->stress) out << format_double(s[c]) << '\n';
    }
  }
}

void export_vtk(const std::filesystem::path& path, const Mesh& mesh, const ExportFields& fields) {
  std::ostringstream ss;
  export_vtk(ss, mesh, fields);
  write_file_atomic(path, ss.str());
}

void export_csv(std::ostream& out, const Mesh& mesh, const NodalField& T, const NodalField& u) {
  if (T.nodes() != mesh.nodes.size() || u.nodes() != mesh.nodes.size() || u.components != 2)
    throw Error("fields do not match the mesh");
  out << "node_id,r,y,T,u_r,u_y\n";
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    out << i << ',' << format_double(mesh.nodes[i].r) << ',' << format_double(mesh.nodes[i].y) << ','
        << format_double(T(i)) << ',' << format_double(u(i, 0)) << ',' << format_double(u(i, 1)) << '\n';
}

void export_stress_csv(std::ostream& out, const Mesh& mesh, const StressField& s) {
  out << "element,subdomain,T_mean,s_rr,s_yy,s_tt,s_ry\n";
  for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
    out << e << ',' << mesh.triangles[e].subdomain << ',' << format_double(s.mean_temperature[e]);
    for (double v : s.stress[e]) out << ',' << format_double(v);
    out << '\n';
  }
}

NodalField read_temperature_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("node_id,r,y,T", 0) != 0) throw InputError("not a field CSV file");
  NodalField T;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 4) throw InputError("short row in field CSV: " + line);
    if (std::stoul(cells[0]) != expected++) throw InputError("field CSV rows must be in node order");
    T.values.push_back(std::stod(cells[3]));
  }
  return T;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    out.close();
    if (!out) throw Error("cannot write " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot write " + path.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------

namespace {

class PointIndex {
 public:
  explicit PointIndex(double tol) : tol_(tol), cell_(std::max(tol * 1e3, 1e-9)) {}

  std::size_t insert(const Point2& p) {
    const long long cr = static_cast<long long>(std::floor(p.r / cell_));
    const long long cy = static_cast<long long>(std::floor(p.y / cell_));
    for (long long dr = -1; dr <= 1; ++dr)
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = buckets_.find(key(cr + dr, cy + dy));
        if (it == buckets_.end()) continue;
        for (std::size_t id : it->second)
          if (std::hypot(points_[id].r - p.r, points_[id].y - p.y) <= tol_) return id;
      }
    points_.push_back(p);
    buckets_[key(cr, cy)].push_back(points_.size() - 1);
    return points_.size() - 1;
  }
  [[nodiscard]] const Point2& operator[](std::size_t i) const { return points_[i]; }
  [[nodiscard]] std::size_t size() const { return points_.size(); }

 private:
  static std::pair<long long, long long> key(long long a, long long b) { return {a, b}; }
  double tol_, cell_;
  std::vector<Point2> points_;
  std::map<std::pair<long long, long long>, std::vector<std::size_t>> buckets_;
};

}  // namespace

IsoLine extract_isoline(const Mesh& mesh, const NodalField& T, double level) {
  IsoLine out;
  out.level = level;
  if (T.nodes() != mesh.nodes.size()) throw Error("temperature field does not match the mesh");
  PointIndex points(1e-12);
  std::vector<std::pair<std::size_t, std::size_t>> segments;
  std::map<std::pair<std::size_t, std::size_t>, bool> seen;

  for (const auto& tri : mesh.triangles) {
    const auto& v = tri.nodes;
    const double t0 = T(v[0]), t1 = T(v[1]), t2 = T(v[2]);
    if (level < std::min({t0, t1, t2}) || level > std::max({t0, t1, t2})) continue;
    std::vector<std::size_t> hits;
    auto add = [&](std::size_t id) {
      if (std::find(hits.begin(), hits.end(), id) == hits.end()) hits.push_back(id);
    };
    for (int k = 0; k < 3; ++k) {
      // Canonical edge direction so both neighbours compute identical points.
      std::size_t a = v[k], b = v[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      const double ta = T(a), tb = T(b);
      if (ta == level) add(points.insert(mesh.nodes[a]));
      if (tb == level) add(points.insert(mesh.nodes[b]));
      if ((ta - level) * (tb - level) < 0.0) {
        const double s = (level - ta) / (tb - ta);
        const Point2& pa = mesh.nodes[a];
        const Point2& pb = mesh.nodes[b];
        add(points.insert({pa.r + s * (pb.r - pa.r), pa.y + s * (pb.y - pa.y)}));
      }
    }
    // Three hits only occur on a triangle lying flat at the level; one hit is a touch point.
    if (hits.size() != 2) continue;
    auto key = std::minmax(hits[0], hits[1]);
    if (seen.emplace(std::pair{key.first, key.second}, true).second) segments.emplace_back(hits[0], hits[1]);
  }

  std::vector<std::vector<std::size_t>> adjacency(points.size());
  for (std::size_t s = 0; s < segments.size(); ++s) {
    adjacency[segments[s].first].push_back(s);
    adjacency[segments[s].second].push_back(s);
  }
  std::vector<bool> used(segments.size(), false);
  auto walk = [&](std::size_t start) {
    std::vector<Point2> line{points[start]};
    std::size_t at = start;
    while (true) {
      std::size_t next_seg = segments.size();
      for (std::size_t s : adjacency[at])
        if (!used[s]) {
          next_seg = s;
          break;
        }
      if (next_seg == segments.size()) break;
      used[next_seg] = true;
      at = segments[next_seg].first == at ? segments[next_seg].second : segments[next_seg].first;
      line.push_back(points[at]);
    }
    return line;
  };
  // Open chains start at points of odd degree, then whatever remains forms loops.
  for (std::size_t p = 0; p < points.size(); ++p)
    if (adjacency[p].size() % 2 == 1) {
      bool free = false;
      for (std::size_t s : adjacency[p]) free = free || !used[s];
      if (free) out.polylines.push_back(walk(p));
    }
  for (std::size_t s = 0; s < segments.size(); ++s)
    if (!used[s]) out.polylines.push_back(walk(segments[s].first));
  return out;
}

std::string to_json(const std::vector<IsoLine>& lines) {
  json arr = json::array();
  for (const auto& line : lines) {
    json polys = json::array();
    for (const auto& poly : line.polylines) {
      json pts = json::array();
      for (const auto& p : poly) pts.push_back({p.r, p.y});
      polys.push_back(pts);
    }
    arr.push_back({{"level", line.level}, {"polylines", polys}});
  }
  return arr.dump(1) + "\n";
}

// ---------------------------------------------------------------------------

ScenarioResult solve_scenario(const RunConfig& config) {
  validate(config);
  ScenarioResult res;
  res.mesh = build_mesh(config);
  res.materials = build_materials(config);
  res.thermal = newton_solve(res.mesh, res.materials, config.thermal_bc, config.newton);
  const NodalField T_before = res.thermal.temperature;
  res.mechanical = solve_mechanical(res.mesh, res.materials, build_mechanical_bc(config), res.thermal.temperature,
                                    config.newton.solver);
  if (!(res.thermal.temperature == T_before)) throw Error("mechanical solve modified the temperature field");
  res.stress = recover_stress(res.mesh, res.materials, res.thermal.temperature, res.mechanical.displacement);
  for (double level : config.isolines) res.isolines.push_back(extract_isoline(res.mesh, res.thermal.temperature, level));
  return res;
}

void write_artifacts(const RunConfig& config, const ScenarioResult& res) {
  const std::filesystem::path dir = config.output_dir;
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "config.json", to_json(config));
  {
    std::ostringstream ss;
    write_mesh(ss, res.mesh);
    write_file_atomic(dir / "mesh.txt", ss.str());
  }
  export_vtk(dir / "fields.vtk", res.mesh,
             {&res.thermal.temperature, &res.mechanical.displacement, &res.stress});
  {
    std::ostringstream ss;
    export_csv(ss, res.mesh, res.thermal.temperature, res.mechanical.displacement);
    write_file_atomic(dir / "fields.csv", ss.str());
  }
  {
    std::ostringstream ss;
    export_stress_csv(ss, res.mesh, res.stress);
    write_file_atomic(dir / "stress.csv", ss.str());
  }
  write_file_atomic(dir / "thermal_report.json", to_json(res.thermal.report));
  write_file_atomic(dir / "mechanical_report.json", to_json(res.mechanical.report));
  write_file_atomic(dir / "isolines.json", to_json(res.isolines));

  const auto& T = res.thermal.temperature.values;
  double umax = 0.0;
  for (std::size_t i = 0; i < res.mesh.nodes.size(); ++i)
    umax = std::max(umax, std::hypot(res.mechanical.displacement(i, 0), res.mechanical.displacement(i, 1)));
  json summary = {{"temperature_dofs", res.mesh.nodes.size()},
                  {"displacement_dofs", 2 * res.mesh.nodes.size()},
                  {"triangles", res.mesh.triangles.size()},
                  {"mesh_h", res.mesh.h},
                  {"temperature_min", *std::min_element(T.begin(), T.end())},
                  {"temperature_max", *std::max_element(T.begin(), T.end())},
                  {"max_displacement", umax},
                  {"newton_iterations", res.thermal.report.iterations},
                  {"newton_residual", res.thermal.report.residual_history.back()}};
  write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");
}

int run_scenario(const RunConfig& config, std::ostream& err) {
  std::string stage = "validation";
  try {
    validate(config);
    stage = "solve";
    const ScenarioResult res = solve_scenario(config);
    stage = "export";
    write_artifacts(config, res);
    write_file_atomic(std::filesystem::path(config.output_dir) / "status.json",
                      json({{"status", "ok"}}).dump(2) + "\n");
    return 0;
  } catch (const std::exception& e) {
    err << "error (" << stage << "): " << e.what() << '\n';
    if (stage != "validation") {
      try {
        std::filesystem::create_directories(config.output_dir);
        write_file_atomic(std::filesystem::path(config.output_dir) / "status.json",
                          json({{"status", "failed"}, {"stage", stage}, {"message", e.what()}}).dump(2) + "\n");
      } catch (const std::exception&) {
      }
    }
    return dynamic_cast<const InputError*>(&e) ? 2 : 1;
  }
}

}  // namespace axitherm
