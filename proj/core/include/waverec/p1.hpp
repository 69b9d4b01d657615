#pragma once

#include <array>
#include <span>
#include <vector>

#include "waverec/mesh.hpp"
#include "waverec/sparse.hpp"

// Shared continuous piecewise-linear element kernels.
namespace waverec::p1 {

struct ElementGeometry {
  double area = 0.0;
  std::array<Point2, 3> grad;  // gradients of the three barycentric basis functions
};

ElementGeometry element_geometry(const mesh::TriMesh& mesh, int t);

/// Gradient of the P1 interpolant of `values` on triangle t.
Point2 element_gradient(const mesh::TriMesh& mesh, int t, std::span<const double> values);
std::vector<Point2> element_gradients(const mesh::TriMesh& mesh, std::span<const double> values);

/// Area-weighted average of adjacent element gradients at every node.
std::vector<Point2> nodal_gradients(const mesh::TriMesh& mesh, std::span<const double> values);

/// Global stiffness matrix (grad phi_k, grad phi_j).
sparse::CsrMatrix stiffness(const mesh::TriMesh& mesh);

/// Row sums of the consistent mass matrix: integral of phi_k.
std::vector<double> lumped_mass(const mesh::TriMesh& mesh);

/// Consistent element mass entry (phi_a, phi_b)_T.
inline double mass_entry(double area, int a, int b) { return a == b ? area / 6.0 : area / 12.0; }

}  // namespace waverec::p1
