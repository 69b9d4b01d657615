#include "waverec/recovery.hpp"

#include <cmath>
#include <sstream>

#include "waverec/error.hpp"
#include "waverec/field.hpp"
#include "waverec/p1.hpp"

namespace waverec::recovery {

namespace {

void check_size(const mesh::TriMesh& mesh, std::span<const double> v) {
  if (v.size() != mesh.num_nodes()) throw Error(ErrorCode::DimMismatch, "field size does not match mesh");
}

}  // namespace

std::vector<double> w_from_v(std::span<const double> v, double s) {
  const double s2 = s * s;
  std::vector<double> w(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double e = s2 * v[k];
    if (!std::isfinite(e) || e > kMaxExponent) {
      std::ostringstream os;
      os << "exponent s^2 v = " << e << " at node " << k << " exceeds " << kMaxExponent;
      throw Error(ErrorCode::TransformOverflow, os.str());
    }
    w[k] = std::exp(e);
  }
  return w;
}

std::vector<double> neumann_data(const mesh::TriMesh& mesh, std::span<const double> v, double s) {
  check_size(mesh, v);
  const double s2 = s * s;
  std::vector<double> f;
  f.reserve(mesh.boundary_edges().size());
  for (const auto& e : mesh.boundary_edges()) {
    const Point2 grad = p1::element_gradient(mesh, e.triangle, v);
    const Point2 a = mesh.node(e.nodes[0]);
    const Point2 b = mesh.node(e.nodes[1]);
    const Point2 t = b - a;
    const double len = norm(t);
    const Point2 n{t.y / len, -t.x / len};
    const double v_mid = 0.5 * (v[static_cast<std::size_t>(e.nodes[0])] + v[static_cast<std::size_t>(e.nodes[1])]);
    const double expo = s2 * v_mid;
    if (!std::isfinite(expo) || expo > kMaxExponent)
      throw Error(ErrorCode::TransformOverflow, "boundary exponent s^2 v exceeds the overflow guard");
    f.push_back(s2 * dot(grad, n) * std::exp(expo));
  }
  return f;
}

RecoveryOperators assemble_recovery(const mesh::TriMesh& mesh, std::span<const double> w,
                                    std::span<const double> f) {
  check_size(mesh, w);
  if (f.size() != mesh.boundary_edges().size())
    throw Error(ErrorCode::DimMismatch, "one Neumann value per boundary edge is required");
  const int n = static_cast<int>(mesh.num_nodes());
  sparse::TripletBuilder mb(n);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(static_cast<int>(t));
    const double area = mesh.signed_area(static_cast<int>(t));
    for (int a = 0; a < 3; ++a) {
      const int k = tri[static_cast<std::size_t>(a)];
      for (int b = 0; b < 3; ++b)
        mb.add(k, tri[static_cast<std::size_t>(b)], w[static_cast<std::size_t>(k)] * p1::mass_entry(area, a, b));
    }
  }
  RecoveryOperators ops;
  ops.M = mb.build();
  ops.G = p1::stiffness(mesh);
  ops.ML.assign(static_cast<std::size_t>(n), 0.0);
  const auto rp = ops.M.row_ptr();
  const auto vals = ops.M.values();
  for (int r = 0; r < n; ++r) {
    double sum = 0.0;
    for (int p = rp[static_cast<std::size_t>(r)]; p < rp[static_cast<std::size_t>(r) + 1]; ++p)
      sum += vals[static_cast<std::size_t>(p)];
    if (!(sum > 0.0)) {
      std::ostringstream os;
      os << "lumped mass entry " << sum << " at node " << r << " is not positive";
      throw Error(ErrorCode::SingularLumping, os.str());
    }
    ops.ML[static_cast<std::size_t>(r)] = sum;
  }
  ops.F.assign(static_cast<std::size_t>(n), 0.0);
  const auto& edges = mesh.boundary_edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double len = norm(mesh.node(edges[e].nodes[1]) - mesh.node(edges[e].nodes[0]));
    for (int k : edges[e].nodes) ops.F[static_cast<std::size_t>(k)] += 0.5 * len * f[e];
  }
  return ops;
}

std::vector<bool> boundary_nodes(const mesh::TriMesh& mesh) {
  std::vector<bool> out(mesh.num_nodes(), false);
  for (const auto& e : mesh.boundary_edges())
    for (int k : e.nodes) out[static_cast<std::size_t>(k)] = true;
  return out;
}

std::vector<double> recover_a_unclamped(const mesh::TriMesh& mesh, std::span<const double> v, double s) {
  check_size(mesh, v);
  const std::vector<double> w = w_from_v(v, s);
  const std::vector<double> f = neumann_data(mesh, v, s);
  const RecoveryOperators ops = assemble_recovery(mesh, w, f);
  const std::vector<double> gw = sparse::spmv(ops.G, w);
  const double inv_s2 = 1.0 / (s * s);
  std::vector<double> a(v.size());
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = inv_s2 * (-gw[k] + ops.F[k]) / ops.ML[k];
  return a;
}

std::vector<double> recover_a(const mesh::TriMesh& mesh, std::span<const double> v, double s, double d) {
  std::vector<double> a = recover_a_unclamped(mesh, v, s);
  const auto boundary = boundary_nodes(mesh);
  for (std::size_t k = 0; k < a.size(); ++k)
    if (boundary[k]) a[k] = 1.0;
  clamp_values(a, 1.0, d);
  return a;
}

std::vector<double> recover_a_direct_unclamped(const mesh::TriMesh& mesh, std::span<const double> v, double s) {
  check_size(mesh, v);
  const std::vector<double> kv = sparse::spmv(p1::stiffness(mesh), v);
  const std::vector<double> m = p1::lumped_mass(mesh);
  const std::vector<Point2> grad = p1::nodal_gradients(mesh, v);
  std::vector<double> a(v.size());
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = -kv[k] / m[k] + s * s * dot(grad[k], grad[k]);
  return a;
}

std::vector<double> recover_a_direct(const mesh::TriMesh& mesh, std::span<const double> v, double s, double d) {
  std::vector<double> a = recover_a_direct_unclamped(mesh, v, s);
  const auto boundary = boundary_nodes(mesh);
  for (std::size_t k = 0; k < a.size(); ++k)
    if (boundary[k]) a[k] = 1.0;
  clamp_values(a, 1.0, d);
  return a;
}

std::vector<double> smooth_once(const mesh::TriMesh& mesh, std::span<const double> values) {
  check_size(mesh, values);
  const auto boundary = boundary_nodes(mesh);
  std::vector<double> out(values.begin(), values.end());
  const auto& nb = mesh.node_neighbors();
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (boundary[k]) continue;
    double sum = values[k];
    for (int j : nb[k]) sum += values[static_cast<std::size_t>(j)];
    out[k] = sum / static_cast<double>(nb[k].size() + 1);
  }
  return out;
}

}  // namespace waverec::recovery
