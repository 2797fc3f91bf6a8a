#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "axitherm/error.hpp"
#include "axitherm/mesh.hpp"

using namespace axitherm;

namespace {

SubdomainPolygon rect(int id, double r0, double y0, double r1, double y1) {
  return {id, {{r0, y0}, {r1, y0}, {r1, y1}, {r0, y1}}};
}

double shoelace(const std::vector<Point2>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2& a = v[i];
    const Point2& b = v[(i + 1) % v.size()];
    s += a.r * b.y - b.r * a.y;
  }
  return 0.5 * s;
}

const SubdomainPolygon& polygon_with_id(const std::vector<SubdomainPolygon>& polys, int id) {
  auto it = std::find_if(polys.begin(), polys.end(), [id](const auto& p) { return p.id == id; });
  REQUIRE(it != polys.end());
  return *it;
}

// Tag of the exterior edge containing both points (edges may be finer than the query segment).
std::optional<BoundaryTag> tag_on_segment(const Mesh& mesh, Point2 a, Point2 b) {
  const Point2 mid{0.5 * (a.r + b.r), 0.5 * (a.y + b.y)};
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag == BoundaryTag::Interface) continue;
    const Point2 p = mesh.nodes[e.nodes[0]], q = mesh.nodes[e.nodes[1]];
    const double cross = (q.r - p.r) * (mid.y - p.y) - (q.y - p.y) * (mid.r - p.r);
    const double t = ((mid.r - p.r) * (q.r - p.r) + (mid.y - p.y) * (q.y - p.y)) /
                     ((q.r - p.r) * (q.r - p.r) + (q.y - p.y) * (q.y - p.y));
    if (std::abs(cross) < 1e-12 && t >= 0.0 && t <= 1.0) return e.tag;
  }
  return std::nullopt;
}

double total_area(const Mesh& mesh) {
  double a = 0.0;
  for (const auto& t : mesh.triangles) {
    const auto v = mesh.vertices(t);
    a += signed_area(v[0], v[1], v[2]);
  }
  return a;
}

}  // namespace

TEST_CASE("hearth geometry vertices") {
  const auto polys = build_hearth_geometry();
  const auto& w1 = polygon_with_id(polys, 1);
  CHECK(w1.vertices == std::vector<Point2>{{0, 0}, {5.9501, 0}, {5.9501, 1}, {2.1, 1}, {0, 1}});
  const auto& w3 = polygon_with_id(polys, 3);
  CHECK(w3.vertices == std::vector<Point2>{{0, 1}, {0.39, 1}, {0.39, 1.6}, {0, 1.6}});

  double rmax = 0.0, ymax = 0.0;
  std::set<int> ids;
  for (const auto& p : polys) {
    ids.insert(p.id);
    CHECK(polygon_area(p) > 0.0);
    for (const auto& v : p.vertices) {
      rmax = std::max(rmax, v.r);
      ymax = std::max(ymax, v.y);
    }
  }
  CHECK(ids == std::set<int>{1, 2, 3, 4, 5, 6});
  CHECK(rmax == kHearthRMax);
  CHECK(ymax == kHearthYMax);
}

TEST_CASE("polygon area matches an independent shoelace sum") {
  const auto polys = build_hearth_geometry();
  double lib = 0.0, oracle = 0.0;
  for (const auto& p : polys) {
    lib += polygon_area(p);
    oracle += shoelace(p.vertices);
  }
  CHECK(lib == doctest::Approx(oracle).epsilon(1e-14));

  const Mesh mesh = generate_mesh(polys, 0.25);
  CHECK(total_area(mesh) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("unit square at h = 1") {
  const Mesh mesh = generate_mesh({rect(1, 0, 0, 1, 1)}, 1.0);
  CHECK(mesh.nodes.size() >= 4);
  CHECK(mesh.triangles.size() >= 2);
  CHECK(total_area(mesh) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(check_mesh(mesh).empty());
  for (const Point2 c : {Point2{0, 0}, Point2{1, 0}, Point2{1, 1}, Point2{0, 1}})
    CHECK(std::find(mesh.nodes.begin(), mesh.nodes.end(), c) != mesh.nodes.end());
}

TEST_CASE("stacked squares share a conforming interface") {
  const Mesh mesh = generate_mesh({rect(1, 0, 0, 1, 1), rect(2, 0, 1, 1, 2)}, 0.5);
  REQUIRE(check_mesh(mesh).empty());

  // Map every undirected edge to the triangles using it.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> owners;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
    for (int k = 0; k < 3; ++k) {
      auto a = mesh.triangles[t].nodes[k], b = mesh.triangles[t].nodes[(k + 1) % 3];
      owners[{std::min(a, b), std::max(a, b)}].push_back(t);
    }

  std::size_t interface_edges = 0;
  for (const auto& e : mesh.boundary_edges) {
    const bool on_line = mesh.nodes[e.nodes[0]].y == 1.0 && mesh.nodes[e.nodes[1]].y == 1.0;
    CHECK(on_line == (e.tag == BoundaryTag::Interface));
    if (!on_line) continue;
    ++interface_edges;
    const auto& o = owners.at({std::min(e.nodes[0], e.nodes[1]), std::max(e.nodes[0], e.nodes[1])});
    REQUIRE(o.size() == 2);
    CHECK(mesh.triangles[o[0]].subdomain != mesh.triangles[o[1]].subdomain);
  }
  CHECK(interface_edges >= 2);
}

TEST_CASE("hearth mesh at h = 0.1") {
  const Mesh mesh = generate_mesh(build_hearth_geometry(), 0.1);
  MESSAGE("nodes " << mesh.nodes.size() << ", triangles " << mesh.triangles.size());
  CHECK(mesh.nodes.size() >= 3500);
  CHECK(mesh.nodes.size() <= 6500);
  CHECK(mesh.h <= 0.1 + 1e-12);
  CHECK(check_mesh(mesh).empty());

  // Every polygon vertex is a mesh node.
  for (const auto& p : build_hearth_geometry())
    for (const auto& v : p.vertices) CHECK(std::find(mesh.nodes.begin(), mesh.nodes.end(), v) != mesh.nodes.end());
}

TEST_CASE("boundary tagging on the hearth") {
  const Mesh mesh = generate_mesh(build_hearth_geometry(), 0.1);
  CHECK(tag_on_segment(mesh, {0, 0.5}, {0, 0.7}) == BoundaryTag::Axis);
  CHECK(tag_on_segment(mesh, {kHearthRMax, 2.0}, {kHearthRMax, 2.1}) == BoundaryTag::Outer);
  CHECK(tag_on_segment(mesh, {0.39, 1.8}, {0.39, 1.9}) == BoundaryTag::Inner);
  CHECK(tag_on_segment(mesh, {1.0, 0.0}, {1.05, 0.0}) == BoundaryTag::Bottom);

  std::set<BoundaryTag> tags;
  for (const auto& e : mesh.boundary_edges) tags.insert(e.tag);
  CHECK(tags == std::set<BoundaryTag>{BoundaryTag::Bottom, BoundaryTag::Outer, BoundaryTag::Top, BoundaryTag::Inner,
                                      BoundaryTag::Axis, BoundaryTag::Interface});
}

TEST_CASE("tag set is stable under refinement") {
  auto tag_set = [](double h) {
    std::map<BoundaryTag, double> length;
    const Mesh m = generate_mesh(build_hearth_geometry(), h);
    for (const auto& e : m.boundary_edges) length[e.tag] += edge_length(m, e);
    return length;
  };
  const auto coarse = tag_set(0.4), fine = tag_set(0.1);
  REQUIRE(coarse.size() == fine.size());
  for (const auto& [tag, len] : coarse) {
    REQUIRE(fine.count(tag) == 1);
    CHECK(fine.at(tag) == doctest::Approx(len).epsilon(1e-12));
  }
}

TEST_CASE("interior edges see opposite orientations") {
  const Mesh mesh = generate_mesh(build_hearth_geometry(), 0.3);
  std::map<std::pair<std::size_t, std::size_t>, int> directed;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) ++directed[{t.nodes[k], t.nodes[(k + 1) % 3]}];
  for (const auto& [edge, count] : directed) {
    CHECK(count == 1);
    // An edge used in both directions is interior; an edge used once is on the boundary.
    const bool reverse = directed.count({edge.second, edge.first}) != 0;
    if (!reverse) {
      const auto a = edge.first, b = edge.second;
      const bool listed = std::any_of(mesh.boundary_edges.begin(), mesh.boundary_edges.end(), [&](const auto& e) {
        return e.nodes[0] == a && e.nodes[1] == b && e.tag != BoundaryTag::Interface;
      });
      CHECK(listed);
    }
  }
}

TEST_CASE("triangles are positive and lie inside their subdomain") {
  const auto polys = build_hearth_geometry();
  const Mesh mesh = generate_mesh(polys, 0.2);
  std::map<int, double> area_by_id, polygon_by_id;
  for (const auto& p : polys) polygon_by_id[p.id] += shoelace(p.vertices);
  for (const auto& t : mesh.triangles) {
    const auto v = mesh.vertices(t);
    const double a = signed_area(v[0], v[1], v[2]);
    CHECK(a > 0.0);
    area_by_id[t.subdomain] += a;
    const Point2 c{(v[0].r + v[1].r + v[2].r) / 3.0, (v[0].y + v[1].y + v[2].y) / 3.0};
    const bool inside = std::any_of(polys.begin(), polys.end(),
                                    [&](const auto& p) { return p.id == t.subdomain && contains(p, c); });
    CHECK(inside);
  }
  for (const auto& [id, a] : polygon_by_id) CHECK(area_by_id[id] == doctest::Approx(a).epsilon(1e-12));
  for (const auto& n : mesh.nodes) CHECK(n.r >= 0.0);
}

TEST_CASE("nodes on the axis belong to Axis edges or axis-touching polygons") {
  const Mesh mesh = generate_mesh(build_hearth_geometry(), 0.2);
  std::set<std::size_t> axis_nodes;
  for (const auto& e : mesh.boundary_edges)
    if (e.tag == BoundaryTag::Axis) axis_nodes.insert({e.nodes[0], e.nodes[1]});
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    if (mesh.nodes[i].r != 0.0) continue;
    const double y = mesh.nodes[i].y;
    // Axis edges cover the axis except where the cavity opens onto it (y in [1.6, 7.4]).
    if (y <= 1.6) CHECK(axis_nodes.count(i) == 1);
  }
}

TEST_CASE("mesher rejects bad input") {
  SubdomainPolygon slanted{1, {{0, 0}, {1, 0}, {1, 1}, {0.5, 1.5}, {0, 1}}};
  CHECK_THROWS_WITH_AS(generate_mesh({slanted}, 0.1), doctest::Contains("not rectilinear"), InputError);

  try {
    generate_mesh(build_hearth_geometry(), 10.0);
    FAIL("expected rejection of a too-large target_h");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("exceeds") != std::string::npos);
  }
  CHECK_THROWS_WITH_AS(generate_mesh({rect(1, 0, 0, 1, 1)}, 0.0), "target_h must be positive", InputError);
  CHECK_THROWS_WITH_AS(generate_mesh({rect(1, 0, 0, 1, 1)}, -1.0), "target_h must be positive", InputError);
  CHECK_THROWS_AS(generate_mesh({rect(1, 0, 0, 1, 1), rect(2, 0.5, 0.5, 1.5, 1.5)}, 0.25), InputError);

  SubdomainPolygon clockwise{1, {{0, 0}, {0, 1}, {1, 1}, {1, 0}}};
  CHECK_THROWS_AS(generate_mesh({clockwise}, 0.5), InputError);
}

TEST_CASE("mesh file round trip") {
  const Mesh mesh = generate_mesh(build_hearth_geometry(), 0.4);
  std::stringstream ss;
  write_mesh(ss, mesh);
  const Mesh back = read_mesh(ss);
  CHECK(back.nodes == mesh.nodes);
  REQUIRE(back.triangles.size() == mesh.triangles.size());
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    CHECK(back.triangles[i].nodes == mesh.triangles[i].nodes);
    CHECK(back.triangles[i].subdomain == mesh.triangles[i].subdomain);
  }
  REQUIRE(back.boundary_edges.size() == mesh.boundary_edges.size());
  for (std::size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
    CHECK(back.boundary_edges[i].nodes == mesh.boundary_edges[i].nodes);
    CHECK(back.boundary_edges[i].tag == mesh.boundary_edges[i].tag);
  }
  CHECK(back.h == doctest::Approx(mesh.h));
  CHECK(check_mesh(back).empty());
}

TEST_CASE("mesh reader accepts comments and rejects malformed files") {
  std::istringstream good(
      "axitherm-mesh v1\n# one triangle\nnodes 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 2 1\n"
      "boundary_edges 3\n0 1 Bottom\n1 2 Outer\n2 0 Axis\n");
  const Mesh m = read_mesh(good);
  CHECK(m.nodes.size() == 3);
  CHECK(m.triangles.size() == 1);
  CHECK(check_mesh(m).empty());

  std::istringstream bad_tag("axitherm-mesh v1\nnodes 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 2 1\nboundary_edges 1\n0 1 Side\n");
  CHECK_THROWS_AS(read_mesh(bad_tag), InputError);
  std::istringstream truncated("axitherm-mesh v1\nnodes 3\n0 0\n1 0\n");
  CHECK_THROWS_AS(read_mesh(truncated), InputError);
  std::istringstream bad_index("axitherm-mesh v1\nnodes 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 7 1\nboundary_edges 0\n");
  CHECK_THROWS_AS(read_mesh(bad_index), InputError);
}

TEST_CASE("boundary tag names round trip") {
  for (BoundaryTag t : kExteriorTags) CHECK(parse_boundary_tag(to_string(t)) == t);
  CHECK(parse_boundary_tag(to_string(BoundaryTag::Interface)) == BoundaryTag::Interface);
  CHECK_FALSE(parse_boundary_tag("Side").has_value());
}

TEST_CASE("outward normals point away from the material") {
  const Mesh mesh = generate_mesh({rect(1, 0, 0, 1, 1)}, 0.5);
  for (const auto& e : mesh.boundary_edges) {
    const auto n = outward_normal(mesh, e);
    const Point2 a = mesh.nodes[e.nodes[0]], b = mesh.nodes[e.nodes[1]];
    const Point2 mid{0.5 * (a.r + b.r), 0.5 * (a.y + b.y)};
    // Stepping outward leaves the unit square.
    const Point2 out{mid.r + 1e-3 * n[0], mid.y + 1e-3 * n[1]};
    CHECK_FALSE((out.r > 0 && out.r < 1 && out.y > 0 && out.y < 1));
    CHECK(std::hypot(n[0], n[1]) == doctest::Approx(1.0));
  }
}
