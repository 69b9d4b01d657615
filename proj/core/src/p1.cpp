#include "waverec/p1.hpp"

#include "waverec/error.hpp"

namespace waverec::p1 {

ElementGeometry element_geometry(const mesh::TriMesh& mesh, int t) {
  const auto& tri = mesh.triangle(t);
  const Point2 a = mesh.node(tri[0]), b = mesh.node(tri[1]), c = mesh.node(tri[2]);
  const double det = cross(b - a, c - a);
  if (!(det > 0.0)) throw Error(ErrorCode::InvalidGeometry, "degenerate or inverted triangle");
  ElementGeometry g;
  g.area = 0.5 * det;
  // grad(lambda_i) = rot90(opposite edge) / det
  g.grad[0] = {(b.y - c.y) / det, (c.x - b.x) / det};
  g.grad[1] = {(c.y - a.y) / det, (a.x - c.x) / det};
  g.grad[2] = {(a.y - b.y) / det, (b.x - a.x) / det};
  return g;
}

Point2 element_gradient(const mesh::TriMesh& mesh, int t, std::span<const double> values) {
  const auto g = element_geometry(mesh, t);
  const auto& tri = mesh.triangle(t);
  Point2 out{};
  for (int a = 0; a < 3; ++a) {
    const double v = values[static_cast<std::size_t>(tri[static_cast<std::size_t>(a)])];
    out = out + v * g.grad[static_cast<std::size_t>(a)];
  }
  return out;
}

std::vector<Point2> element_gradients(const mesh::TriMesh& mesh, std::span<const double> values) {
  if (values.size() != mesh.num_nodes()) throw Error(ErrorCode::DimMismatch, "field size does not match mesh");
  std::vector<Point2> out(mesh.num_triangles());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = element_gradient(mesh, static_cast<int>(t), values);
  return out;
}

std::vector<Point2> nodal_gradients(const mesh::TriMesh& mesh, std::span<const double> values) {
  const auto eg = element_gradients(mesh, values);
  std::vector<Point2> sum(mesh.num_nodes());
  std::vector<double> weight(mesh.num_nodes(), 0.0);
  for (std::size_t t = 0; t < eg.size(); ++t) {
    const double area = mesh.signed_area(static_cast<int>(t));
    for (int k : mesh.triangle(static_cast<int>(t))) {
      sum[static_cast<std::size_t>(k)] = sum[static_cast<std::size_t>(k)] + area * eg[t];
      weight[static_cast<std::size_t>(k)] += area;
    }
  }
  for (std::size_t k = 0; k < sum.size(); ++k)
    if (weight[k] > 0.0) sum[k] = (1.0 / weight[k]) * sum[k];
  return sum;
}

sparse::CsrMatrix stiffness(const mesh::TriMesh& mesh) {
  sparse::TripletBuilder tb(static_cast<int>(mesh.num_nodes()));
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = element_geometry(mesh, static_cast<int>(t));
    const auto& tri = mesh.triangle(static_cast<int>(t));
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        tb.add(tri[static_cast<std::size_t>(a)], tri[static_cast<std::size_t>(b)],
               g.area * dot(g.grad[static_cast<std::size_t>(a)], g.grad[static_cast<std::size_t>(b)]));
  }
  return tb.build();
}

std::vector<double> lumped_mass(const mesh::TriMesh& mesh) {
  std::vector<double> m(mesh.num_nodes(), 0.0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double third = mesh.signed_area(static_cast<int>(t)) / 3.0;
    for (int k : mesh.triangle(static_cast<int>(t))) m[static_cast<std::size_t>(k)] += third;
  }
  return m;
}

}  // namespace waverec::p1
