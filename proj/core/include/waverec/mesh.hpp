#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "waverec/geometry.hpp"

namespace waverec::mesh {

enum class EdgeMarker : std::uint8_t { OuterOmega, Circle };

/// Per-node flags; a node can carry several.
enum NodeFlag : std::uint8_t {
  kInCircle = 1u << 0,      // node of a triangle inside the reconstruction circle (closed)
  kOnCircle = 1u << 1,      // node on the polygonal boundary of the circle region
  kOnOuterOmega = 1u << 2,  // node on the outer boundary of the FEM subdomain
};

using Triangle = std::array<int, 3>;

/// Boundary edge oriented counter-clockwise with respect to `triangle`, so the
/// outward normal is the right-hand normal of nodes[0] -> nodes[1].
struct BoundaryEdge {
  std::array<int, 2> nodes{};
  EdgeMarker marker = EdgeMarker::OuterOmega;
  int triangle = -1;
};

/// Conforming P1 triangulation. Immutable after construction.
class TriMesh {
 public:
  TriMesh() = default;
  TriMesh(std::vector<Point2> nodes, std::vector<Triangle> triangles,
          std::vector<BoundaryEdge> boundary_edges, std::vector<std::uint8_t> node_flags,
          std::vector<std::uint8_t> triangle_in_circle);

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }

  const std::vector<Point2>& nodes() const { return nodes_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
  const std::vector<std::uint8_t>& node_flags() const { return node_flags_; }

  Point2 node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  const Triangle& triangle(int t) const { return triangles_[static_cast<std::size_t>(t)]; }
  bool has_flag(int node, NodeFlag flag) const {
    return (node_flags_[static_cast<std::size_t>(node)] & flag) != 0;
  }
  bool triangle_in_circle(int t) const { return triangle_in_circle_[static_cast<std::size_t>(t)] != 0; }

  double signed_area(int t) const;
  double total_area() const;
  /// Longest edge of triangle t.
  double diameter(int t) const;

  /// Node-to-node adjacency (sorted, without the node itself).
  const std::vector<std::vector<int>>& node_neighbors() const { return neighbors_; }

 private:
  std::vector<Point2> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<std::uint8_t> node_flags_;
  std::vector<std::uint8_t> triangle_in_circle_;
  std::vector<std::vector<int>> neighbors_;
};

/// A mesh extracted from a parent mesh, with the node correspondence.
struct SubMesh {
  TriMesh mesh;
  std::vector<int> to_parent;  // local node -> parent node
};

/// Triangles inside the reconstruction circle as a standalone mesh whose boundary
/// edges are the circle edges.
SubMesh circle_submesh(const TriMesh& parent);

/// Uniform node lattice. Node (i, j) sits at origin + (i, j) * spacing.
struct StructuredGrid {
  Point2 origin;
  double spacing = 0.0;
  int nx = 0;  // nodes along x
  int ny = 0;  // nodes along y

  int index(int i, int j) const { return j * nx + i; }
  Point2 node(int i, int j) const { return {origin.x + i * spacing, origin.y + j * spacing}; }
  std::size_t num_nodes() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  Rect extent() const {
    return {origin.x, origin.x + (nx - 1) * spacing, origin.y, origin.y + (ny - 1) * spacing};
  }
};

enum class GridRole : std::uint8_t {
  Fdm,            // outside the FEM subdomain, updated by the 5-point stencil
  OmegaBoundary,  // on the FEM outer boundary: updated by FDM, copied into FEM
  Band,           // one cell inside the FEM subdomain: receives FEM values
  Inactive,       // deeper inside the FEM subdomain: unused
};

/// Outer boundary of the rectangle G: top, bottom and the union of left and right.
enum class OuterSide : std::uint8_t { Top, Bottom, Sides };

struct OuterEdge {
  std::array<int, 2> grid_nodes{};
  OuterSide side = OuterSide::Top;
};

struct OverlapPair {
  int grid_node = -1;
  int fem_node = -1;
};

struct HybridDomain {
  Rect g_bounds;
  Rect omega_bounds;
  std::optional<Circle> circle;
  double spacing = 0.0;

  StructuredGrid grid;
  TriMesh fem;

  std::vector<GridRole> grid_role;
  /// Grid nodes on the FEM outer boundary paired with their FEM node.
  std::vector<OverlapPair> boundary_overlap;
  /// Grid nodes one cell inside the FEM subdomain paired with their FEM node.
  std::vector<OverlapPair> band_overlap;
  /// Edges of the grid lying on the outer boundary of G.
  std::vector<OuterEdge> outer_edges;
};

/// Structured right-triangle mesh of `omega`, optionally with nodes snapped onto
/// `circle` so that the circle region is resolved by a polygonal boundary.
/// Throws InvalidGeometry / MeshTooCoarse.
TriMesh build_rect_mesh(const Rect& omega, double spacing, const std::optional<Circle>& circle);

/// Hybrid FDM/FEM discretization of G with FEM subdomain Omega.
HybridDomain build_hybrid(const Rect& g_bounds, const Rect& omega_bounds,
                          const std::optional<Circle>& circle, double spacing);

struct Location {
  int triangle = -1;
  std::array<double, 3> barycentric{};
};

/// Bucketed point location over a mesh. Holds a reference to the mesh.
class PointLocator {
 public:
  explicit PointLocator(const TriMesh& mesh);

  /// Throws PointOutsideMesh if no triangle contains x.
  Location locate(Point2 x) const;
  std::optional<Location> try_locate(Point2 x) const;

 private:
  const TriMesh* mesh_;
  Point2 origin_;
  double cell_ = 0.0;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<std::vector<int>> buckets_;
};

Location locate_point(const TriMesh& mesh, Point2 x);

/// Barycentric coordinates of x with respect to triangle t (not clipped).
std::array<double, 3> barycentric(const TriMesh& mesh, int t, Point2 x);

}  // namespace waverec::mesh
