#include "axitherm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "axitherm/error.hpp"
#include "axitherm/format.hpp"

namespace axitherm {

namespace {

using EdgeKey = std::pair<std::size_t, std::size_t>;

EdgeKey make_key(std::size_t a, std::size_t b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

std::string describe(const Point2& a, const Point2& b) {
  std::ostringstream os;
  os << "((" << format_double(a.r) << "," << format_double(a.y) << "),(" << format_double(b.r) << ","
     << format_double(b.y) << "))";
  return os.str();
}

struct Bounds {
  double r_min = std::numeric_limits<double>::infinity();
  double r_max = -std::numeric_limits<double>::infinity();
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -std::numeric_limits<double>::infinity();

  void include(const Point2& p) {
    r_min = std::min(r_min, p.r);
    r_max = std::max(r_max, p.r);
    y_min = std::min(y_min, p.y);
    y_max = std::max(y_max, p.y);
  }
  [[nodiscard]] double scale() const { return std::max({1.0, r_max - r_min, y_max - y_min}); }
};

Bounds bounds_of(const std::vector<SubdomainPolygon>& polygons) {
  Bounds b;
  for (const auto& poly : polygons)
    for (const auto& p : poly.vertices) b.include(p);
  return b;
}

// Sorted distinct values, merging values closer than tol.
std::vector<double> distinct(std::vector<double> values, double tol) {
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  for (double v : values)
    if (out.empty() || v - out.back() > tol) out.push_back(v);
  return out;
}

// Index of the interval [grid[i], grid[i+1]] containing x, or npos.
std::size_t locate(const std::vector<double>& grid, double x) {
  if (grid.size() < 2 || x < grid.front() || x > grid.back()) return std::string::npos;
  auto it = std::upper_bound(grid.begin(), grid.end(), x);
  std::size_t i = static_cast<std::size_t>(it - grid.begin());
  if (i == 0) return std::string::npos;
  return std::min(i - 1, grid.size() - 2);
}

bool segments_cross(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  // Closed axis-aligned segments: intersect iff bounding boxes overlap.
  const double tol = 1e-12;
  return std::max(std::min(a.r, b.r), std::min(c.r, d.r)) <= std::min(std::max(a.r, b.r), std::max(c.r, d.r)) + tol &&
         std::max(std::min(a.y, b.y), std::min(c.y, d.y)) <= std::min(std::max(a.y, b.y), std::max(c.y, d.y)) + tol;
}

void validate_polygon(const SubdomainPolygon& poly) {
  const auto& v = poly.vertices;
  const std::string name = "polygon " + std::to_string(poly.id);
  if (poly.id < 1) throw InputError(name + ": subdomain ids start at 1");
  if (v.size() < 4) throw InputError(name + " needs at least 4 vertices");
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2& a = v[i];
    const Point2& b = v[(i + 1) % v.size()];
    if (a.r < 0.0) throw InputError(name + " has a vertex with r < 0");
    if (a.r != b.r && a.y != b.y)
      throw InputError(name + " is not rectilinear: edge " + describe(a, b) + " is neither horizontal nor vertical");
    if (a == b) throw InputError(name + " has a repeated vertex");
  }
  if (polygon_area(poly) <= 0.0) throw InputError(name + " must be counterclockwise with positive area");
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]))
        throw InputError(name + " is not simple: edges " + describe(v[i], v[(i + 1) % n]) + " and " +
                         describe(v[j], v[(j + 1) % n]) + " intersect");
    }
  }
}

// Coarse raster of the polygon layout: cells between consecutive polygon
// coordinates (plus r = 0) are either inside exactly one polygon or void.
class VoidMap {
 public:
  explicit VoidMap(const std::vector<SubdomainPolygon>& polygons) {
    const Bounds b = bounds_of(polygons);
    const double tol = 1e-12 * b.scale();
    std::vector<double> rs{0.0};
    std::vector<double> ys;
    for (const auto& poly : polygons)
      for (const auto& p : poly.vertices) {
        rs.push_back(p.r);
        ys.push_back(p.y);
      }
    r_ = distinct(rs, tol);
    y_ = distinct(ys, tol);
    const std::size_t nr = r_.size() - 1;
    const std::size_t ny = y_.size() - 1;
    component_.assign(nr * ny, -1);
    std::vector<char> is_void(nr * ny, 0);
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nr; ++i) {
        const Point2 c{0.5 * (r_[i] + r_[i + 1]), 0.5 * (y_[j] + y_[j + 1])};
        is_void[j * nr + i] = std::none_of(polygons.begin(), polygons.end(),
                                           [&](const SubdomainPolygon& p) { return contains(p, c); });
      }
    // Flood fill void components.
    for (std::size_t start = 0; start < nr * ny; ++start) {
      if (!is_void[start] || component_[start] >= 0) continue;
      const int id = static_cast<int>(touches_axis_.size());
      touches_axis_.push_back(false);
      touches_top_.push_back(false);
      std::vector<std::size_t> stack{start};
      component_[start] = id;
      while (!stack.empty()) {
        const std::size_t cell = stack.back();
        stack.pop_back();
        const std::size_t i = cell % nr;
        const std::size_t j = cell / nr;
        if (i == 0) touches_axis_[id] = true;
        if (j == ny - 1) touches_top_[id] = true;
        auto visit = [&](std::size_t n) {
          if (is_void[n] && component_[n] < 0) {
            component_[n] = id;
            stack.push_back(n);
          }
        };
        if (i > 0) visit(cell - 1);
        if (i + 1 < nr) visit(cell + 1);
        if (j > 0) visit(cell - nr);
        if (j + 1 < ny) visit(cell + nr);
      }
    }
    min_spacing_ = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < r_.size(); ++i) min_spacing_ = std::min(min_spacing_, r_[i + 1] - r_[i]);
    for (std::size_t j = 0; j + 1 < y_.size(); ++j) min_spacing_ = std::min(min_spacing_, y_[j + 1] - y_[j]);
  }

  [[nodiscard]] double probe_offset() const { return 0.25 * min_spacing_; }

  enum class Side { Cavity, OpenTop, Unknown };

  [[nodiscard]] Side classify(const Point2& p) const {
    const std::size_t i = locate(r_, p.r);
    const std::size_t j = locate(y_, p.y);
    if (i == std::string::npos || j == std::string::npos) return Side::Unknown;
    const int c = component_[j * (r_.size() - 1) + i];
    if (c < 0) return Side::Unknown;
    if (touches_axis_[c]) return Side::Cavity;
    if (touches_top_[c]) return Side::OpenTop;
    return Side::Unknown;
  }

 private:
  std::vector<double> r_, y_;
  std::vector<int> component_;
  std::vector<bool> touches_axis_, touches_top_;
  double min_spacing_ = 0.0;
};

double max_edge_length(const Mesh& mesh) {
  double h = 0.0;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      const Point2& a = mesh.nodes[t.nodes[k]];
      const Point2& b = mesh.nodes[t.nodes[(k + 1) % 3]];
      h = std::max(h, std::hypot(b.r - a.r, b.y - a.y));
    }
  return h;
}

}  // namespace

std::string_view to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Bottom: return "Bottom";
    case BoundaryTag::Outer: return "Outer";
    case BoundaryTag::Top: return "Top";
    case BoundaryTag::Inner: return "Inner";
    case BoundaryTag::Axis: return "Axis";
    case BoundaryTag::Interface: return "Interface";
  }
  return "?";
}

std::optional<BoundaryTag> parse_boundary_tag(std::string_view name) {
  for (auto tag : {BoundaryTag::Bottom, BoundaryTag::Outer, BoundaryTag::Top, BoundaryTag::Inner, BoundaryTag::Axis,
                   BoundaryTag::Interface})
    if (to_string(tag) == name) return tag;
  return std::nullopt;
}

double signed_area(const Point2& a, const Point2& b, const Point2& c) {
  return 0.5 * ((b.r - a.r) * (c.y - a.y) - (c.r - a.r) * (b.y - a.y));
}

double polygon_area(const SubdomainPolygon& polygon) {
  const auto& v = polygon.vertices;
  double twice = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2& a = v[i];
    const Point2& b = v[(i + 1) % v.size()];
    twice += a.r * b.y - b.r * a.y;
  }
  return 0.5 * twice;
}

bool contains(const SubdomainPolygon& polygon, const Point2& p) {
  bool inside = false;
  const auto& v = polygon.vertices;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      const double r_cross = v[j].r + (p.y - v[j].y) * (v[i].r - v[j].r) / (v[i].y - v[j].y);
      if (p.r < r_cross) inside = !inside;
    }
  }
  return inside;
}

std::array<double, 2> outward_normal(const Mesh& mesh, const BoundaryEdge& edge) {
  const Point2& a = mesh.nodes[edge.nodes[0]];
  const Point2& b = mesh.nodes[edge.nodes[1]];
  const double len = std::hypot(b.r - a.r, b.y - a.y);
  return {(b.y - a.y) / len, -(b.r - a.r) / len};
}

double edge_length(const Mesh& mesh, const BoundaryEdge& edge) {
  const Point2& a = mesh.nodes[edge.nodes[0]];
  const Point2& b = mesh.nodes[edge.nodes[1]];
  return std::hypot(b.r - a.r, b.y - a.y);
}

std::vector<SubdomainPolygon> build_hearth_geometry() {
  // Subdomain 2 is split into its two disjoint pieces, clipped so that it
  // does not overlap subdomains 3 and 4 (see README, "Hearth geometry").
  return {
      {1, {{0, 0}, {5.9501, 0}, {5.9501, 1}, {2.1, 1}, {0, 1}}},
      {2, {{0.39, 1}, {2.1, 1}, {2.1, 1.6}, {0.39, 1.6}}},
      {2, {{4.875, 5.2}, {5.9501, 5.2}, {5.9501, 7.35}, {5.5188, 7.35}, {5.5188, 6.4}, {4.875, 6.4}}},
      {3, {{0, 1}, {0.39, 1}, {0.39, 1.6}, {0, 1.6}}},
      {4,
       {{0.39, 1.6},
        {2.1, 1.6},
        {4.875, 1.6},
        {4.875, 5.2},
        {4.875, 6.4},
        {5.5188, 6.4},
        {5.5188, 7.35},
        {5.5188, 7.4},
        {4.875, 7.4},
        {4.875, 7},
        {4.475, 7},
        {4.475, 2.1},
        {0.39, 2.1}}},
      {5, {{2.1, 1}, {5.9501, 1}, {5.9501, 5.2}, {4.875, 5.2}, {4.875, 1.6}, {2.1, 1.6}}},
      {6, {{5.9501, 0}, {6.0201, 0}, {6.0201, 7.4}, {5.9501, 7.4}, {5.9501, 7.35}, {5.9501, 5.2}, {5.9501, 1}}},
  };
}

Mesh generate_mesh(const std::vector<SubdomainPolygon>& polygons, double target_h) {
  if (!(target_h > 0.0) || !std::isfinite(target_h)) throw InputError("target_h must be positive");
  if (polygons.empty()) throw InputError("no polygons to mesh");
  for (const auto& poly : polygons) validate_polygon(poly);

  // Smallest feature: the larger bounding-box extent of the smallest polygon.
  for (const auto& poly : polygons) {
    Bounds b;
    for (const auto& p : poly.vertices) b.include(p);
    const double feature = std::max(b.r_max - b.r_min, b.y_max - b.y_min);
    if (target_h > feature)
      throw InputError("target_h = " + format_double(target_h) + " exceeds the extent " + format_double(feature) +
                       " of polygon " + std::to_string(poly.id));
  }

  const Bounds bounds = bounds_of(polygons);
  const double tol = 1e-12 * bounds.scale();
  std::vector<double> rs, ys;
  for (const auto& poly : polygons)
    for (const auto& p : poly.vertices) {
      rs.push_back(p.r);
      ys.push_back(p.y);
    }
  const double spacing = target_h / std::sqrt(2.0);
  auto refine = [&](const std::vector<double>& coarse) {
    std::vector<double> fine{coarse.front()};
    for (std::size_t i = 0; i + 1 < coarse.size(); ++i) {
      const double a = coarse[i];
      const double b = coarse[i + 1];
      const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / spacing - 1e-9)));
      for (std::size_t k = 1; k < n; ++k) fine.push_back(a + (b - a) * static_cast<double>(k) / static_cast<double>(n));
      fine.push_back(b);
    }
    return fine;
  };
  const std::vector<double> gr = refine(distinct(rs, tol));
  const std::vector<double> gy = refine(distinct(ys, tol));
  const std::size_t nr = gr.size() - 1;
  const std::size_t ny = gy.size() - 1;

  // Cell ownership by centroid point-in-polygon.
  std::vector<int> owner(nr * ny, 0);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nr; ++i) {
      const Point2 c{0.5 * (gr[i] + gr[i + 1]), 0.5 * (gy[j] + gy[j + 1])};
      int found = 0;
      for (const auto& poly : polygons) {
        if (!contains(poly, c)) continue;
        if (found != 0)
          throw InputError("polygons " + std::to_string(found) + " and " + std::to_string(poly.id) + " overlap");
        found = poly.id;
      }
      owner[j * nr + i] = found;
    }

  Mesh mesh;
  const std::size_t unset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> node_id((nr + 1) * (ny + 1), unset);
  auto used = [&](std::size_t i, std::size_t j) {
    for (std::size_t dj = 0; dj < 2; ++dj)
      for (std::size_t di = 0; di < 2; ++di) {
        if (i < di || j < dj) continue;
        const std::size_t ci = i - di;
        const std::size_t cj = j - dj;
        if (ci < nr && cj < ny && owner[cj * nr + ci] != 0) return true;
      }
    return false;
  };
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i <= nr; ++i)
      if (used(i, j)) {
        node_id[j * (nr + 1) + i] = mesh.nodes.size();
        mesh.nodes.push_back({gr[i], gy[j]});
      }
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nr; ++i) {
      const int id = owner[j * nr + i];
      if (id == 0) continue;
      const std::size_t a = node_id[j * (nr + 1) + i];
      const std::size_t b = node_id[j * (nr + 1) + i + 1];
      const std::size_t c = node_id[(j + 1) * (nr + 1) + i + 1];
      const std::size_t d = node_id[(j + 1) * (nr + 1) + i];
      mesh.triangles.push_back({{a, b, c}, id});
      mesh.triangles.push_back({{a, c, d}, id});
    }
  mesh.h = max_edge_length(mesh);
  return tag_boundaries(std::move(mesh), polygons);
}

Mesh tag_boundaries(Mesh mesh, const std::vector<SubdomainPolygon>& polygons) {
  struct EdgeUse {
    std::size_t from, to;
    std::size_t triangle;
  };
  std::map<EdgeKey, std::vector<EdgeUse>> uses;
  std::vector<EdgeKey> order;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const std::size_t a = tri.nodes[k];
      const std::size_t b = tri.nodes[(k + 1) % 3];
      auto& list = uses[make_key(a, b)];
      if (list.empty()) order.push_back(make_key(a, b));
      list.push_back({a, b, t});
    }
  }

  const Bounds b = bounds_of(polygons);
  const double tol = 1e-12 * b.scale();
  const VoidMap voids(polygons);
  auto near = [tol](double x, double target) { return std::abs(x - target) <= tol; };

  mesh.boundary_edges.clear();
  for (const auto& key : order) {
    const auto& list = uses[key];
    if (list.size() > 2) throw Error("non-conforming mesh: edge shared by more than two triangles");
    const Point2& p = mesh.nodes[list[0].from];
    const Point2& q = mesh.nodes[list[0].to];
    if (list.size() == 2) {
      if (mesh.triangles[list[0].triangle].subdomain != mesh.triangles[list[1].triangle].subdomain)
        mesh.boundary_edges.push_back({{list[0].from, list[0].to}, BoundaryTag::Interface});
      continue;
    }
    BoundaryEdge edge{{list[0].from, list[0].to}, BoundaryTag::Interface};
    if (near(p.r, 0.0) && near(q.r, 0.0)) {
      edge.tag = BoundaryTag::Axis;
    } else if (near(p.y, b.y_min) && near(q.y, b.y_min)) {
      edge.tag = BoundaryTag::Bottom;
    } else if (near(p.y, b.y_max) && near(q.y, b.y_max)) {
      edge.tag = BoundaryTag::Top;
    } else if (near(p.r, b.r_max) && near(q.r, b.r_max)) {
      edge.tag = BoundaryTag::Outer;
    } else {
      const auto n = outward_normal(mesh, edge);
      const double d = voids.probe_offset();
      const Point2 probe{0.5 * (p.r + q.r) + d * n[0], 0.5 * (p.y + q.y) + d * n[1]};
      switch (voids.classify(probe)) {
        case VoidMap::Side::Cavity: edge.tag = BoundaryTag::Inner; break;
        case VoidMap::Side::OpenTop: edge.tag = BoundaryTag::Top; break;
        case VoidMap::Side::Unknown:
          throw Error("exterior edge " + describe(p, q) + " matches no boundary rule");
      }
    }
    mesh.boundary_edges.push_back(edge);
  }
  return mesh;
}

std::vector<std::string> check_mesh(const Mesh& mesh) {
  std::vector<std::string> issues;
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    if (mesh.nodes[i].r < 0.0) issues.push_back("node " + std::to_string(i) + " has r < 0");

  std::map<EdgeKey, std::vector<std::pair<std::size_t, std::size_t>>> uses;  // key -> (from, triangle)
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const auto v = mesh.vertices(tri);
    if (!(signed_area(v[0], v[1], v[2]) > 0.0)) issues.push_back("triangle " + std::to_string(t) + " not positively oriented");
    for (int k = 0; k < 3; ++k) uses[make_key(tri.nodes[k], tri.nodes[(k + 1) % 3])].push_back({tri.nodes[k], t});
  }

  std::map<EdgeKey, std::vector<BoundaryTag>> tagged;
  for (const auto& e : mesh.boundary_edges) tagged[make_key(e.nodes[0], e.nodes[1])].push_back(e.tag);

  for (const auto& [key, list] : uses) {
    const std::string name = "edge (" + std::to_string(key.first) + "," + std::to_string(key.second) + ")";
    auto tags_it = tagged.find(key);
    const std::size_t n_tags = tags_it == tagged.end() ? 0 : tags_it->second.size();
    if (list.size() > 2) {
      issues.push_back(name + " shared by more than two triangles");
    } else if (list.size() == 2) {
      if (list[0].first == list[1].first) issues.push_back(name + " has inconsistent orientation in its two triangles");
      const bool different = mesh.triangles[list[0].second].subdomain != mesh.triangles[list[1].second].subdomain;
      if (different && (n_tags != 1 || tags_it->second[0] != BoundaryTag::Interface))
        issues.push_back(name + " between subdomains is not tagged Interface exactly once");
      if (!different && n_tags != 0) issues.push_back(name + " is interior to one subdomain but tagged");
    } else {
      if (n_tags != 1 || tags_it->second[0] == BoundaryTag::Interface)
        issues.push_back(name + " is exterior but does not carry exactly one exterior tag");
    }
  }
  for (const auto& [key, tags] : tagged)
    if (!uses.count(key)) issues.push_back("tagged edge (" + std::to_string(key.first) + "," + std::to_string(key.second) + ") is not a triangle edge");

  // Hanging nodes: no node may lie strictly inside an edge. Bucket nodes on a grid.
  if (!mesh.nodes.empty() && mesh.h > 0.0) {
    Bounds b;
    for (const auto& p : mesh.nodes) b.include(p);
    const double cell = mesh.h;
    const auto nbr = static_cast<std::size_t>((b.r_max - b.r_min) / cell) + 1;
    const auto nby = static_cast<std::size_t>((b.y_max - b.y_min) / cell) + 1;
    std::vector<std::vector<std::size_t>> buckets(nbr * nby);
    auto bucket_of = [&](const Point2& p) {
      const auto i = std::min(nbr - 1, static_cast<std::size_t>((p.r - b.r_min) / cell));
      const auto j = std::min(nby - 1, static_cast<std::size_t>((p.y - b.y_min) / cell));
      return std::pair{i, j};
    };
    for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
      auto [i, j] = bucket_of(mesh.nodes[n]);
      buckets[j * nbr + i].push_back(n);
    }
    const double tol = 1e-12 * b.scale();
    for (const auto& [key, list] : uses) {
      const Point2& p = mesh.nodes[key.first];
      const Point2& q = mesh.nodes[key.second];
      auto [i0, j0] = bucket_of({std::min(p.r, q.r), std::min(p.y, q.y)});
      auto [i1, j1] = bucket_of({std::max(p.r, q.r), std::max(p.y, q.y)});
      const double len = std::hypot(q.r - p.r, q.y - p.y);
      for (std::size_t j = j0; j <= j1; ++j)
        for (std::size_t i = i0; i <= i1; ++i)
          for (std::size_t n : buckets[j * nbr + i]) {
            if (n == key.first || n == key.second) continue;
            const Point2& x = mesh.nodes[n];
            const double cross = (q.r - p.r) * (x.y - p.y) - (q.y - p.y) * (x.r - p.r);
            if (std::abs(cross) > tol * len) continue;
            const double s = ((x.r - p.r) * (q.r - p.r) + (x.y - p.y) * (q.y - p.y)) / (len * len);
            if (s > 0.0 && s < 1.0) issues.push_back("hanging node " + std::to_string(n));
          }
    }
  }
  return issues;
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "axitherm-mesh v1\n";
  out << "nodes " << mesh.nodes.size() << '\n';
  for (const auto& p : mesh.nodes) out << format_double(p.r) << ' ' << format_double(p.y) << '\n';
  out << "triangles " << mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles)
    out << t.nodes[0] << ' ' << t.nodes[1] << ' ' << t.nodes[2] << ' ' << t.subdomain << '\n';
  out << "boundary_edges " << mesh.boundary_edges.size() << '\n';
  for (const auto& e : mesh.boundary_edges) out << e.nodes[0] << ' ' << e.nodes[1] << ' ' << to_string(e.tag) << '\n';
}

Mesh read_mesh(std::istream& in) {
  // Tokenize, dropping '#' comments.
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  std::size_t pos = 0;
  auto next = [&](const char* what) -> const std::string& {
    if (pos >= tokens.size()) throw InputError(std::string("mesh file truncated: expected ") + what);
    return tokens[pos++];
  };
  auto expect = [&](const char* word) {
    if (next(word) != word) throw InputError(std::string("mesh file: expected '") + word + "'");
  };
  auto number = [&](const char* what) {
    const std::string& t = next(what);
    try {
      std::size_t used = 0;
      double v = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw InputError("mesh file: invalid number '" + t + "' for " + what);
    }
  };
  auto index = [&](const char* what, std::size_t limit) {
    const double v = number(what);
    if (v < 0 || v != std::floor(v) || v >= static_cast<double>(limit))
      throw InputError(std::string("mesh file: index out of range for ") + what);
    return static_cast<std::size_t>(v);
  };
  const auto max = std::numeric_limits<std::size_t>::max();

  expect("axitherm-mesh");
  expect("v1");
  Mesh mesh;
  expect("nodes");
  const std::size_t n_nodes = index("node count", max);
  mesh.nodes.resize(n_nodes);
  for (auto& p : mesh.nodes) {
    p.r = number("r");
    p.y = number("y");
  }
  expect("triangles");
  const std::size_t n_tri = index("triangle count", max);
  mesh.triangles.resize(n_tri);
  for (auto& t : mesh.triangles) {
    for (auto& n : t.nodes) n = index("triangle node", n_nodes);
    t.subdomain = static_cast<int>(number("subdomain id"));
  }
  expect("boundary_edges");
  const std::size_t n_edges = index("edge count", max);
  mesh.boundary_edges.resize(n_edges);
  for (auto& e : mesh.boundary_edges) {
    for (auto& n : e.nodes) n = index("edge node", n_nodes);
    const std::string& name = next("tag");
    auto tag = parse_boundary_tag(name);
    if (!tag) throw InputError("mesh file: unknown boundary tag '" + name + "'");
    e.tag = *tag;
  }
  if (pos != tokens.size()) throw InputError("mesh file: trailing content");

  // Orient exterior edges like their owning triangle.
  std::map<EdgeKey, std::pair<std::size_t, std::size_t>> directed;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) directed[make_key(t.nodes[k], t.nodes[(k + 1) % 3])] = {t.nodes[k], t.nodes[(k + 1) % 3]};
  for (auto& e : mesh.boundary_edges) {
    auto it = directed.find(make_key(e.nodes[0], e.nodes[1]));
    if (it == directed.end()) throw InputError("mesh file: boundary edge is not a triangle edge");
    if (e.tag != BoundaryTag::Interface) e.nodes = {it->second.first, it->second.second};
  }
  mesh.h = max_edge_length(mesh);
  return mesh;
}

}  // namespace axitherm
