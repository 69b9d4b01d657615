#include "waverec/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "waverec/error.hpp"

namespace waverec::io {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  os << std::setprecision(17);
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path);
  return is;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double to_double(const std::string& s, const std::string& path) {
  const std::size_t begin = s.find_first_not_of(" \t");
  const std::size_t end = s.find_last_not_of(" \r\t");
  double v = 0.0;
  if (begin != std::string::npos) {
    const char* first = s.data() + begin;
    const char* last = s.data() + end + 1;
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec == std::errc() && ptr == last) return v;
  }
  throw Error(ErrorCode::IoError, "malformed number '" + s + "' in " + path);
}

void check_size(const mesh::TriMesh& mesh, std::span<const double> values) {
  if (values.size() != mesh.num_nodes()) throw Error(ErrorCode::DimMismatch, "field size does not match mesh");
}

}  // namespace

void write_mesh_nodes_csv(const std::string& path, const mesh::TriMesh& mesh) {
  auto os = open_out(path);
  os << "id,x,y,marker\n";
  for (std::size_t k = 0; k < mesh.num_nodes(); ++k) {
    const Point2 p = mesh.node(static_cast<int>(k));
    os << k << ',' << p.x << ',' << p.y << ',' << static_cast<int>(mesh.node_flags()[k]) << '\n';
  }
  if (!os) throw Error(ErrorCode::IoError, "failed writing " + path);
}

void write_field_vtk(const std::string& path, const mesh::TriMesh& mesh, std::span<const double> values,
                     const std::string& name) {
  check_size(mesh, values);
  auto os = open_out(path);
  os << "# vtk DataFile Version 3.0\nwaverec " << name << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.num_nodes() << " double\n";
  for (const Point2& p : mesh.nodes()) os << p.x << ' ' << p.y << " 0\n";
  os << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles()) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "CELL_TYPES " << mesh.num_triangles() << '\n';
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) os << "5\n";
  os << "POINT_DATA " << mesh.num_nodes() << "\nSCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (double v : values) os << v << '\n';
  if (!os) throw Error(ErrorCode::IoError, "failed writing " + path);
}

void write_field_csv(const std::string& path, const mesh::TriMesh& mesh, std::span<const double> values,
                     const std::string& name, std::span<const int> node_ids) {
  check_size(mesh, values);
  if (!node_ids.empty() && node_ids.size() != values.size())
    throw Error(ErrorCode::DimMismatch, "node id count does not match field size");
  auto os = open_out(path);
  os << "node_id,x,y," << name << '\n';
  for (std::size_t k = 0; k < values.size(); ++k) {
    const Point2 p = mesh.node(static_cast<int>(k));
    const long id = node_ids.empty() ? static_cast<long>(k) : node_ids[k];
    os << id << ',' << p.x << ',' << p.y << ',' << values[k] << '\n';
  }
  if (!os) throw Error(ErrorCode::IoError, "failed writing " + path);
}

FieldFile read_field(const std::string& path) {
  auto ends_with = [&](const std::string& suffix) {
    return path.size() >= suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with(".vtk")) return read_field_vtk(path);
  if (ends_with(".csv")) return read_field_csv(path);
  throw Error(ErrorCode::IoError, "unknown field file type: " + path);
}

FieldFile read_field_csv(const std::string& path) {
  auto is = open_in(path);
  std::string line;
  if (!std::getline(is, line) || split_csv(line).size() != 4 || split_csv(line)[0] != "node_id")
    throw Error(ErrorCode::IoError, path + " lacks the node_id,x,y,<value> header");
  FieldFile f;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw Error(ErrorCode::IoError, "malformed row in " + path);
    f.node_ids.push_back(static_cast<int>(to_double(cells[0], path)));
    f.nodes.push_back({to_double(cells[1], path), to_double(cells[2], path)});
    f.values.push_back(to_double(cells[3], path));
  }
  return f;
}

FieldFile read_field_vtk(const std::string& path) {
  auto is = open_in(path);
  FieldFile f;
  std::string token;
  auto fail = [&](const std::string& what) { throw Error(ErrorCode::IoError, what + " in " + path); };
  bool have_values = false;
  while (is >> token) {
    if (token == "POINTS") {
      std::size_t n = 0;
      std::string type;
      if (!(is >> n >> type)) fail("malformed POINTS header");
      f.nodes.resize(n);
      for (auto& p : f.nodes) {
        double z = 0.0;
        if (!(is >> p.x >> p.y >> z)) fail("truncated POINTS block");
      }
    } else if (token == "CELLS") {
      std::size_t n = 0, total = 0;
      if (!(is >> n >> total)) fail("malformed CELLS header");
      for (std::size_t c = 0; c < n; ++c) {
        int k = 0;
        std::array<int, 3> t{};
        if (!(is >> k) || k != 3) fail("only triangle cells are supported");
        if (!(is >> t[0] >> t[1] >> t[2])) fail("truncated CELLS block");
        f.triangles.push_back(t);
      }
    } else if (token == "SCALARS") {
      std::string name, type;
      int comps = 1;
      if (!(is >> name >> type >> comps) || comps != 1) fail("malformed SCALARS header");
      std::string lt, table;
      if (!(is >> lt >> table) || lt != "LOOKUP_TABLE") fail("missing LOOKUP_TABLE");
      f.values.resize(f.nodes.size());
      for (double& v : f.values)
        if (!(is >> v)) fail("truncated SCALARS block");
      have_values = true;
      break;
    }
  }
  if (!have_values) fail("no point scalars");
  for (std::size_t k = 0; k < f.nodes.size(); ++k) f.node_ids.push_back(static_cast<int>(k));
  return f;
}

std::vector<NodeRecord> read_mesh_nodes_csv(const std::string& path) {
  auto is = open_in(path);
  std::string line;
  if (!std::getline(is, line) || line.rfind("id,x,y,marker", 0) != 0)
    throw Error(ErrorCode::IoError, path + " lacks the id,x,y,marker header");
  std::vector<NodeRecord> out;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw Error(ErrorCode::IoError, "malformed row in " + path);
    out.push_back({static_cast<int>(to_double(cells[0], path)),
                   {to_double(cells[1], path), to_double(cells[2], path)},
                   static_cast<int>(to_double(cells[3], path))});
  }
  return out;
}

std::string read_text(const std::string& path) {
  auto is = open_in(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  os << text;
  if (!os) throw Error(ErrorCode::IoError, "failed writing " + path);
}

}  // namespace waverec::io
