#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace axitherm {

/// Point in the meridian half-plane: r is the radial, y the axial coordinate [m].
struct Point2 {
  double r = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Closed rectilinear polygon (counterclockwise, last vertex not repeated).
/// Several polygons may carry the same id when a material region is not
/// connected.
struct SubdomainPolygon {
  int id = 0;
  std::vector<Point2> vertices;
};

enum class BoundaryTag { Bottom, Outer, Top, Inner, Axis, Interface };

inline constexpr std::array<BoundaryTag, 5> kExteriorTags = {
    BoundaryTag::Bottom, BoundaryTag::Outer, BoundaryTag::Top,
    BoundaryTag::Inner, BoundaryTag::Axis};

std::string_view to_string(BoundaryTag tag);
std::optional<BoundaryTag> parse_boundary_tag(std::string_view name);

struct Triangle {
  std::array<std::size_t, 3> nodes{};
  int subdomain = 0;
};

/// Exterior edges are stored with the owning triangle's counterclockwise
/// orientation, so the material lies to the left of nodes[0] -> nodes[1].
struct BoundaryEdge {
  std::array<std::size_t, 2> nodes{};
  BoundaryTag tag = BoundaryTag::Interface;
};

struct Mesh {
  std::vector<Point2> nodes;
  std::vector<Triangle> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  /// Largest triangle edge length [m].
  double h = 0.0;

  [[nodiscard]] std::array<Point2, 3> vertices(const Triangle& t) const {
    return {nodes[t.nodes[0]], nodes[t.nodes[1]], nodes[t.nodes[2]]};
  }
};

double signed_area(const Point2& a, const Point2& b, const Point2& c);
double polygon_area(const SubdomainPolygon& polygon);
bool contains(const SubdomainPolygon& polygon, const Point2& p);

/// Unit outward normal of an exterior edge (material on the left).
std::array<double, 2> outward_normal(const Mesh& mesh, const BoundaryEdge& edge);
double edge_length(const Mesh& mesh, const BoundaryEdge& edge);

/// The six hearth subdomains with vertex coordinates in metres.
std::vector<SubdomainPolygon> build_hearth_geometry();

inline constexpr double kHearthYMax = 7.4;
inline constexpr double kHearthRMax = 6.0201;

/// Structured overlay mesher for rectilinear polygons. Grid lines pass
/// through every polygon coordinate and each cell is split along its
/// lower-left to upper-right diagonal, so the longest triangle edge is at
/// most target_h.
Mesh generate_mesh(const std::vector<SubdomainPolygon>& polygons, double target_h);

/// Rebuilds mesh.boundary_edges from the triangles: exterior edges get a
/// physical tag, edges between two subdomains get Interface.
Mesh tag_boundaries(Mesh mesh, const std::vector<SubdomainPolygon>& polygons);

/// Returns a description of every violated mesh invariant (empty if valid).
std::vector<std::string> check_mesh(const Mesh& mesh);

/// Plain-text "axitherm-mesh v1" format.
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

}  // namespace axitherm
