#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "waverec/mesh.hpp"

namespace waverec::io {

/// CSV `id,x,y,marker`; marker is the node flag bitmask (1 in circle, 2 on
/// circle, 4 on the outer FEM boundary).
void write_mesh_nodes_csv(const std::string& path, const mesh::TriMesh& mesh);

/// Legacy VTK ASCII unstructured grid with one point scalar.
void write_field_vtk(const std::string& path, const mesh::TriMesh& mesh, std::span<const double> values,
                     const std::string& name = "a");

/// CSV `node_id,x,y,<name>`; `node_ids` defaults to 0..n-1.
void write_field_csv(const std::string& path, const mesh::TriMesh& mesh, std::span<const double> values,
                     const std::string& name = "a", std::span<const int> node_ids = {});

/// Nodal field read back from CSV or VTK. Triangles are present only for VTK.
struct FieldFile {
  std::vector<int> node_ids;
  std::vector<Point2> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<double> values;
};

/// Dispatches on the extension (.vtk or .csv). Throws IoError.
FieldFile read_field(const std::string& path);
FieldFile read_field_csv(const std::string& path);
FieldFile read_field_vtk(const std::string& path);

struct NodeRecord {
  int id = 0;
  Point2 x;
  int marker = 0;
};
std::vector<NodeRecord> read_mesh_nodes_csv(const std::string& path);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace waverec::io
