#include "waverec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "waverec/error.hpp"

namespace waverec::mesh {

namespace {

double tri_signed_area(Point2 a, Point2 b, Point2 c) { return 0.5 * cross(b - a, c - a); }

double min_angle(Point2 a, Point2 b, Point2 c) {
  auto angle = [](Point2 p, Point2 q, Point2 r) {
    const Point2 u = q - p;
    const Point2 v = r - p;
    return std::atan2(std::abs(cross(u, v)), dot(u, v));
  };
  return std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
}

int checked_cell_count(double length, double spacing, const char* what) {
  const double cells = length / spacing;
  const double rounded = std::round(cells);
  if (rounded < 1.0 || std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells)) {
    std::ostringstream os;
    os << what << " extent " << length << " is not a positive multiple of spacing " << spacing;
    throw Error(ErrorCode::InvalidGeometry, os.str());
  }
  return static_cast<int>(rounded);
}

/// Right-triangle split of a (ncx x ncy)-cell lattice with node coordinates from
/// `coord`. With a circle, nodes near it are projected onto it and each cell picks
/// the diagonal that avoids straddling the circle and maximizes the minimum angle.
TriMesh build_structured(int ncx, int ncy, const std::function<Point2(int, int)>& coord,
                         const std::optional<Circle>& circle, double spacing) {
  const int nnx = ncx + 1;
  const int nny = ncy + 1;
  auto id = [nnx](int i, int j) { return j * nnx + i; };

  std::vector<Point2> pos(static_cast<std::size_t>(nnx) * static_cast<std::size_t>(nny));
  for (int j = 0; j < nny; ++j)
    for (int i = 0; i < nnx; ++i) pos[static_cast<std::size_t>(id(i, j))] = coord(i, j);
  const std::vector<Point2> original = pos;

  const double tol = 1e-9 * spacing;
  std::vector<double> dist(pos.size(), std::numeric_limits<double>::infinity());
  auto snap = [&](int k) {
    const auto uk = static_cast<std::size_t>(k);
    const Point2 rel = pos[uk] - circle->center;
    const double len = norm(rel);
    pos[uk] = circle->center + (circle->radius / len) * rel;
    dist[uk] = 0.0;
  };
  auto strictly_opposite = [&](int a, int b) {
    const double da = dist[static_cast<std::size_t>(a)];
    const double db = dist[static_cast<std::size_t>(b)];
    return (da < -tol && db > tol) || (da > tol && db < -tol);
  };
  auto snap_nearer = [&](int a, int b) {
    const double da = std::abs(dist[static_cast<std::size_t>(a)]);
    const double db = std::abs(dist[static_cast<std::size_t>(b)]);
    snap(db < da ? b : a);
  };

  if (circle) {
    for (std::size_t k = 0; k < pos.size(); ++k) dist[k] = circle->signed_distance(pos[k]);
    for (std::size_t k = 0; k < pos.size(); ++k)
      if (std::abs(dist[k]) <= 0.3 * spacing) snap(static_cast<int>(k));
    for (int j = 0; j < nny; ++j) {
      for (int i = 0; i < nnx; ++i) {
        if (i + 1 < nnx && strictly_opposite(id(i, j), id(i + 1, j))) snap_nearer(id(i, j), id(i + 1, j));
        if (j + 1 < nny && strictly_opposite(id(i, j), id(i, j + 1))) snap_nearer(id(i, j), id(i, j + 1));
      }
    }
  }

  auto moved = [&](int k) { return !(pos[static_cast<std::size_t>(k)] == original[static_cast<std::size_t>(k)]); };
  auto on_circle = [&](int k) { return circle && std::abs(dist[static_cast<std::size_t>(k)]) <= tol; };

  std::vector<Triangle> tris;
  for (int pass = 0;; ++pass) {
    tris.clear();
    tris.reserve(static_cast<std::size_t>(2 * ncx * ncy));
    for (int j = 0; j < ncy; ++j) {
      for (int i = 0; i < ncx; ++i) {
        const int p00 = id(i, j), p10 = id(i + 1, j), p11 = id(i + 1, j + 1), p01 = id(i, j + 1);
        const std::array<Triangle, 2> opt_a{Triangle{p00, p10, p11}, Triangle{p00, p11, p01}};
        const std::array<Triangle, 2> opt_b{Triangle{p00, p10, p01}, Triangle{p10, p11, p01}};
        bool use_a = true;
        if (circle && (moved(p00) || moved(p10) || moved(p11) || moved(p01))) {
          // Lexicographic score: no straddling, no all-on-circle sliver, then angle.
          auto score = [&](const std::array<Triangle, 2>& opt, bool straddles) {
            double worst = std::numeric_limits<double>::infinity();
            bool sliver = false;
            for (const auto& t : opt) {
              const Point2 a = pos[static_cast<std::size_t>(t[0])];
              const Point2 b = pos[static_cast<std::size_t>(t[1])];
              const Point2 c = pos[static_cast<std::size_t>(t[2])];
              if (tri_signed_area(a, b, c) <= 0.0) return -1e9;
              worst = std::min(worst, min_angle(a, b, c));
              sliver = sliver || (on_circle(t[0]) && on_circle(t[1]) && on_circle(t[2]));
            }
            return worst - (straddles ? 100.0 : 0.0) - (sliver ? 10.0 : 0.0);
          };
          const double sa = score(opt_a, strictly_opposite(p00, p11));
          const double sb = score(opt_b, strictly_opposite(p10, p01));
          use_a = sa >= sb;
        }
        const auto& opt = use_a ? opt_a : opt_b;
        tris.push_back(opt[0]);
        tris.push_back(opt[1]);
      }
    }
    if (!circle) break;

    bool snapped_any = false;
    for (const auto& t : tris) {
      if (strictly_opposite(t[0], t[1]) || strictly_opposite(t[1], t[2]) || strictly_opposite(t[0], t[2])) {
        int best = -1;
        for (int k : t) {
          if (std::abs(dist[static_cast<std::size_t>(k)]) <= tol) continue;
          if (best < 0 || std::abs(dist[static_cast<std::size_t>(k)]) < std::abs(dist[static_cast<std::size_t>(best)]))
            best = k;
        }
        snap(best);
        snapped_any = true;
      }
    }
    if (!snapped_any) break;
    if (pass > 16) throw Error(ErrorCode::MeshTooCoarse, "circle snapping did not settle");
  }

  for (const auto& t : tris) {
    const double area = tri_signed_area(pos[static_cast<std::size_t>(t[0])], pos[static_cast<std::size_t>(t[1])],
                                        pos[static_cast<std::size_t>(t[2])]);
    if (area <= 1e-4 * spacing * spacing)
      throw Error(ErrorCode::MeshTooCoarse, "degenerate triangle after circle snapping; refine the mesh");
  }

  std::vector<std::uint8_t> tri_in(tris.size(), 0);
  if (circle) {
    for (std::size_t t = 0; t < tris.size(); ++t) {
      bool inside = true;
      for (int k : tris[t]) inside = inside && dist[static_cast<std::size_t>(k)] <= tol;
      tri_in[t] = inside ? 1 : 0;
    }
  }

  // Edge -> incident (triangle, local edge) in deterministic key order.
  struct Incidence {
    int tri;
    std::array<int, 2> oriented;
  };
  std::map<std::pair<int, int>, std::vector<Incidence>> edges;
  for (std::size_t t = 0; t < tris.size(); ++t) {
    for (int e = 0; e < 3; ++e) {
      const int a = tris[t][static_cast<std::size_t>(e)];
      const int b = tris[t][static_cast<std::size_t>((e + 1) % 3)];
      edges[{std::min(a, b), std::max(a, b)}].push_back({static_cast<int>(t), {a, b}});
    }
  }

  std::vector<BoundaryEdge> bedges;
  std::vector<std::uint8_t> flags(pos.size(), 0);
  for (const auto& [key, inc] : edges) {
    if (inc.size() == 1) {
      bedges.push_back({inc[0].oriented, EdgeMarker::OuterOmega, inc[0].tri});
      flags[static_cast<std::size_t>(key.first)] |= kOnOuterOmega;
      flags[static_cast<std::size_t>(key.second)] |= kOnOuterOmega;
    } else if (inc.size() == 2) {
      const bool in0 = tri_in[static_cast<std::size_t>(inc[0].tri)] != 0;
      const bool in1 = tri_in[static_cast<std::size_t>(inc[1].tri)] != 0;
      if (in0 != in1) {
        const Incidence& side = in0 ? inc[0] : inc[1];
        bedges.push_back({side.oriented, EdgeMarker::Circle, side.tri});
        flags[static_cast<std::size_t>(key.first)] |= kOnCircle;
        flags[static_cast<std::size_t>(key.second)] |= kOnCircle;
      }
    } else {
      throw Error(ErrorCode::InvalidGeometry, "non-manifold edge in triangulation");
    }
  }
  for (std::size_t t = 0; t < tris.size(); ++t)
    if (tri_in[t])
      for (int k : tris[t]) flags[static_cast<std::size_t>(k)] |= kInCircle;

  return TriMesh(std::move(pos), std::move(tris), std::move(bedges), std::move(flags), std::move(tri_in));
}

}  // namespace

TriMesh::TriMesh(std::vector<Point2> nodes, std::vector<Triangle> triangles,
                 std::vector<BoundaryEdge> boundary_edges, std::vector<std::uint8_t> node_flags,
                 std::vector<std::uint8_t> triangle_in_circle)
    : nodes_(std::move(nodes)),
      triangles_(std::move(triangles)),
      boundary_edges_(std::move(boundary_edges)),
      node_flags_(std::move(node_flags)),
      triangle_in_circle_(std::move(triangle_in_circle)) {
  if (node_flags_.size() != nodes_.size())
    throw Error(ErrorCode::InvalidGeometry, "node flag count does not match node count");
  if (triangle_in_circle_.empty()) triangle_in_circle_.assign(triangles_.size(), 0);
  neighbors_.assign(nodes_.size(), {});
  for (const auto& t : triangles_) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        if (a == b) continue;
        neighbors_[static_cast<std::size_t>(t[static_cast<std::size_t>(a)])].push_back(t[static_cast<std::size_t>(b)]);
      }
    }
  }
  for (auto& nb : neighbors_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
}

double TriMesh::signed_area(int t) const {
  const auto& tri = triangle(t);
  return tri_signed_area(node(tri[0]), node(tri[1]), node(tri[2]));
}

double TriMesh::total_area() const {
  double sum = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) sum += signed_area(static_cast<int>(t));
  return sum;
}

double TriMesh::diameter(int t) const {
  const auto& tri = triangle(t);
  const Point2 a = node(tri[0]), b = node(tri[1]), c = node(tri[2]);
  return std::max({norm(b - a), norm(c - b), norm(a - c)});
}

SubMesh circle_submesh(const TriMesh& parent) {
  std::vector<int> local(parent.num_nodes(), -1);
  std::vector<int> tri_local(parent.num_triangles(), -1);
  SubMesh sub;
  std::vector<Triangle> tris;
  for (std::size_t t = 0; t < parent.num_triangles(); ++t) {
    if (!parent.triangle_in_circle(static_cast<int>(t))) continue;
    Triangle lt{};
    for (int a = 0; a < 3; ++a) {
      const int p = parent.triangle(static_cast<int>(t))[static_cast<std::size_t>(a)];
      if (local[static_cast<std::size_t>(p)] < 0) {
        local[static_cast<std::size_t>(p)] = static_cast<int>(sub.to_parent.size());
        sub.to_parent.push_back(p);
      }
      lt[static_cast<std::size_t>(a)] = local[static_cast<std::size_t>(p)];
    }
    tri_local[t] = static_cast<int>(tris.size());
    tris.push_back(lt);
  }
  if (tris.empty()) throw Error(ErrorCode::InvalidGeometry, "mesh has no circle region");

  std::vector<Point2> nodes;
  std::vector<std::uint8_t> flags;
  nodes.reserve(sub.to_parent.size());
  for (int p : sub.to_parent) {
    nodes.push_back(parent.node(p));
    flags.push_back(parent.node_flags()[static_cast<std::size_t>(p)] & (kInCircle | kOnCircle));
  }
  std::vector<BoundaryEdge> bedges;
  for (const auto& e : parent.boundary_edges()) {
    if (e.marker != EdgeMarker::Circle) continue;
    bedges.push_back({{local[static_cast<std::size_t>(e.nodes[0])], local[static_cast<std::size_t>(e.nodes[1])]},
                      EdgeMarker::Circle,
                      tri_local[static_cast<std::size_t>(e.triangle)]});
  }
  std::vector<std::uint8_t> tri_in(tris.size(), 1);
  sub.mesh = TriMesh(std::move(nodes), std::move(tris), std::move(bedges), std::move(flags), std::move(tri_in));
  return sub;
}

TriMesh build_rect_mesh(const Rect& omega, double spacing, const std::optional<Circle>& circle) {
  if (!(spacing > 0.0)) throw Error(ErrorCode::InvalidGeometry, "spacing must be positive");
  if (!omega.valid()) throw Error(ErrorCode::InvalidGeometry, "empty rectangle");
  const int ncx = checked_cell_count(omega.width(), spacing, "rectangle");
  const int ncy = checked_cell_count(omega.height(), spacing, "rectangle");
  if (circle) {
    const Rect box{circle->center.x - circle->radius, circle->center.x + circle->radius,
                   circle->center.y - circle->radius, circle->center.y + circle->radius};
    if (!(circle->radius > 0.0) || !omega.strictly_contains(box))
      throw Error(ErrorCode::InvalidGeometry, "circle must lie strictly inside the rectangle");
  }
  auto coord = [&](int i, int j) -> Point2 { return {omega.xmin + i * spacing, omega.ymin + j * spacing}; };
  return build_structured(ncx, ncy, coord, circle, spacing);
}

HybridDomain build_hybrid(const Rect& g_bounds, const Rect& omega_bounds, const std::optional<Circle>& circle,
                          double spacing) {
  if (!(spacing > 0.0)) throw Error(ErrorCode::InvalidGeometry, "spacing must be positive");
  if (!g_bounds.valid() || !omega_bounds.valid())
    throw Error(ErrorCode::InvalidGeometry, "empty rectangle");
  if (!g_bounds.strictly_contains(omega_bounds))
    throw Error(ErrorCode::InvalidGeometry, "Omega must lie strictly inside G");
  if (circle) {
    const Rect box{circle->center.x - circle->radius, circle->center.x + circle->radius,
                   circle->center.y - circle->radius, circle->center.y + circle->radius};
    if (!(circle->radius > 0.0) || !omega_bounds.strictly_contains(box))
      throw Error(ErrorCode::InvalidGeometry, "circle must lie strictly inside Omega");
  }

  const double collar = std::min({omega_bounds.xmin - g_bounds.xmin, g_bounds.xmax - omega_bounds.xmax,
                                  omega_bounds.ymin - g_bounds.ymin, g_bounds.ymax - omega_bounds.ymax});
  if (collar < spacing * (1.0 - 1e-9))
    throw Error(ErrorCode::MeshTooCoarse, "spacing exceeds the gap between G and Omega");
  if (circle) {
    const Circle& c = *circle;
    const double gap = std::min({c.center.x - c.radius - omega_bounds.xmin, omega_bounds.xmax - c.center.x - c.radius,
                                 c.center.y - c.radius - omega_bounds.ymin, omega_bounds.ymax - c.center.y - c.radius});
    if (gap < 2.0 * spacing * (1.0 - 1e-9))
      throw Error(ErrorCode::MeshTooCoarse, "spacing too large for the gap between the circle and Omega");
  }

  HybridDomain dom;
  dom.g_bounds = g_bounds;
  dom.omega_bounds = omega_bounds;
  dom.circle = circle;
  dom.spacing = spacing;

  const int gcx = checked_cell_count(g_bounds.width(), spacing, "G");
  const int gcy = checked_cell_count(g_bounds.height(), spacing, "G");
  const int ioff = checked_cell_count(omega_bounds.xmin - g_bounds.xmin, spacing, "collar");
  const int joff = checked_cell_count(omega_bounds.ymin - g_bounds.ymin, spacing, "collar");
  const int ncx = checked_cell_count(omega_bounds.width(), spacing, "Omega");
  const int ncy = checked_cell_count(omega_bounds.height(), spacing, "Omega");
  if (ncx < 2 || ncy < 2) throw Error(ErrorCode::MeshTooCoarse, "Omega needs at least two cells per axis");
  if (ioff + ncx > gcx || joff + ncy > gcy) throw Error(ErrorCode::InvalidGeometry, "Omega not aligned inside G");

  dom.grid = StructuredGrid{{g_bounds.xmin, g_bounds.ymin}, spacing, gcx + 1, gcy + 1};
  const StructuredGrid& grid = dom.grid;
  auto coord = [&](int i, int j) { return grid.node(ioff + i, joff + j); };
  dom.fem = build_structured(ncx, ncy, coord, circle, spacing);

  dom.grid_role.assign(grid.num_nodes(), GridRole::Fdm);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const int li = i - ioff;
      const int lj = j - joff;
      if (li < 0 || li > ncx || lj < 0 || lj > ncy) continue;
      const int fem_node = lj * (ncx + 1) + li;
      const int g = grid.index(i, j);
      if (li == 0 || li == ncx || lj == 0 || lj == ncy) {
        dom.grid_role[static_cast<std::size_t>(g)] = GridRole::OmegaBoundary;
        dom.boundary_overlap.push_back({g, fem_node});
      } else if (li == 1 || li == ncx - 1 || lj == 1 || lj == ncy - 1) {
        dom.grid_role[static_cast<std::size_t>(g)] = GridRole::Band;
        dom.band_overlap.push_back({g, fem_node});
      } else {
        dom.grid_role[static_cast<std::size_t>(g)] = GridRole::Inactive;
      }
    }
  }

  for (int i = 0; i + 1 < grid.nx; ++i) {
    dom.outer_edges.push_back({{grid.index(i, 0), grid.index(i + 1, 0)}, OuterSide::Bottom});
    dom.outer_edges.push_back({{grid.index(i, grid.ny - 1), grid.index(i + 1, grid.ny - 1)}, OuterSide::Top});
  }
  for (int j = 0; j + 1 < grid.ny; ++j) {
    dom.outer_edges.push_back({{grid.index(0, j), grid.index(0, j + 1)}, OuterSide::Sides});
    dom.outer_edges.push_back({{grid.index(grid.nx - 1, j), grid.index(grid.nx - 1, j + 1)}, OuterSide::Sides});
  }
  return dom;
}

std::array<double, 3> barycentric(const TriMesh& mesh, int t, Point2 x) {
  const auto& tri = mesh.triangle(t);
  const Point2 a = mesh.node(tri[0]), b = mesh.node(tri[1]), c = mesh.node(tri[2]);
  const double det = cross(b - a, c - a);
  const double l1 = cross(x - a, c - a) / det;
  const double l2 = cross(b - a, x - a) / det;
  return {1.0 - l1 - l2, l1, l2};
}

PointLocator::PointLocator(const TriMesh& mesh) : mesh_(&mesh) {
  double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
  double xmax = -xmin, ymax = -xmin;
  double diam = 0.0;
  for (const Point2& p : mesh.nodes()) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) diam += mesh.diameter(static_cast<int>(t));
  if (mesh.num_triangles() == 0) throw Error(ErrorCode::InvalidGeometry, "empty mesh");
  diam /= static_cast<double>(mesh.num_triangles());
  origin_ = {xmin, ymin};
  cell_ = std::max(diam, 1e-12);
  nx_ = std::max(1, static_cast<int>(std::ceil((xmax - xmin) / cell_)) + 1);
  ny_ = std::max(1, static_cast<int>(std::ceil((ymax - ymin) / cell_)) + 1);
  buckets_.assign(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_), {});
  auto clampi = [](int v, int hi) { return std::clamp(v, 0, hi - 1); };
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(static_cast<int>(t));
    double bx0 = xmax, bx1 = xmin, by0 = ymax, by1 = ymin;
    for (int k : tri) {
      bx0 = std::min(bx0, mesh.node(k).x);
      bx1 = std::max(bx1, mesh.node(k).x);
      by0 = std::min(by0, mesh.node(k).y);
      by1 = std::max(by1, mesh.node(k).y);
    }
    const int i0 = clampi(static_cast<int>(std::floor((bx0 - xmin) / cell_)), nx_);
    const int i1 = clampi(static_cast<int>(std::floor((bx1 - xmin) / cell_)), nx_);
    const int j0 = clampi(static_cast<int>(std::floor((by0 - ymin) / cell_)), ny_);
    const int j1 = clampi(static_cast<int>(std::floor((by1 - ymin) / cell_)), ny_);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
        buckets_[static_cast<std::size_t>(j * nx_ + i)].push_back(static_cast<int>(t));
  }
}

std::optional<Location> PointLocator::try_locate(Point2 x) const {
  const double fi = std::floor((x.x - origin_.x) / cell_);
  const double fj = std::floor((x.y - origin_.y) / cell_);
  if (!(fi >= -1.0 && fj >= -1.0 && fi <= nx_ && fj <= ny_)) return std::nullopt;
  const int bi = std::clamp(static_cast<int>(fi), 0, nx_ - 1);
  const int bj = std::clamp(static_cast<int>(fj), 0, ny_ - 1);
  constexpr double kTol = 1e-12;
  for (int t : buckets_[static_cast<std::size_t>(bj * nx_ + bi)]) {
    const auto bc = barycentric(*mesh_, t, x);
    if (bc[0] >= -kTol && bc[1] >= -kTol && bc[2] >= -kTol) return Location{t, bc};
  }
  return std::nullopt;
}

Location PointLocator::locate(Point2 x) const {
  if (auto loc = try_locate(x)) return *loc;
  std::ostringstream os;
  os << "point (" << x.x << ", " << x.y << ") is outside the mesh";
  throw Error(ErrorCode::PointOutsideMesh, os.str());
}

Location locate_point(const TriMesh& mesh, Point2 x) { return PointLocator(mesh).locate(x); }

}  // namespace waverec::mesh
