#pragma once

#include <span>
#include <vector>

#include "waverec/mesh.hpp"
#include "waverec/sparse.hpp"

// Explicit recovery of the coefficient from v = ln(w) / s^2.
namespace waverec::recovery {

/// Largest admissible exponent s^2 v before exp overflows the working budget.
inline constexpr double kMaxExponent = 700.0;

/// w_k = exp(s^2 v_k). Throws TransformOverflow when s^2 v_k > 700.
std::vector<double> w_from_v(std::span<const double> v, double s);

/// f = s^2 (grad v . n) exp(s^2 v) per boundary edge of `mesh` (same order as
/// mesh.boundary_edges()), with the gradient of the adjacent triangle, the outward
/// unit normal, and v taken at the edge midpoint.
std::vector<double> neumann_data(const mesh::TriMesh& mesh, std::span<const double> v, double s);

struct RecoveryOperators {
  sparse::CsrMatrix M;        // M_kj = w_k (phi_k, phi_j)
  std::vector<double> ML;     // row sums of M
  sparse::CsrMatrix G;        // (grad phi_k, grad phi_j)
  std::vector<double> F;      // (f, phi_j) over the boundary
};

/// Throws SingularLumping when a lumped entry is not positive.
RecoveryOperators assemble_recovery(const mesh::TriMesh& mesh, std::span<const double> w,
                                    std::span<const double> f);

/// Nodes on any boundary edge of the mesh.
std::vector<bool> boundary_nodes(const mesh::TriMesh& mesh);

/// a = (-G w + F) / (s^2 M_L) at every node, before clamping.
std::vector<double> recover_a_unclamped(const mesh::TriMesh& mesh, std::span<const double> v, double s);
/// Unclamped formula at interior nodes, 1 on boundary nodes, clamped to [1, d].
std::vector<double> recover_a(const mesh::TriMesh& mesh, std::span<const double> v, double s, double d);

/// a = lap(v) + s^2 |grad v|^2 with lap(v) = -M_L^{-1} K v and nodal gradients
/// averaged from adjacent elements, before clamping.
std::vector<double> recover_a_direct_unclamped(const mesh::TriMesh& mesh, std::span<const double> v, double s);
std::vector<double> recover_a_direct(const mesh::TriMesh& mesh, std::span<const double> v, double s, double d);

/// One pass of neighbour averaging at interior nodes: a_k <- mean of a over the
/// node and its mesh neighbours.
std::vector<double> smooth_once(const mesh::TriMesh& mesh, std::span<const double> values);

}  // namespace waverec::recovery
