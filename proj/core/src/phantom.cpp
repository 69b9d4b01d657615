#include "waverec/phantom.hpp"

#include <limits>
#include <sstream>

#include "waverec/error.hpp"

namespace waverec {

NodalField build_phantom(const mesh::TriMesh& mesh, const Circle& circle, std::span<const Inclusion> inclusions) {
  NodalField a{FieldRole::Coefficient_a, std::vector<double>(mesh.num_nodes(), 1.0)};
  for (const Inclusion& inc : inclusions) {
    if (!(circle.signed_distance(inc.center) < 0.0)) {
      std::ostringstream os;
      os << "inclusion center (" << inc.center.x << ", " << inc.center.y << ") is outside the reconstruction circle";
      throw Error(ErrorCode::InvalidPhantom, os.str());
    }
    if (!std::isfinite(inc.value)) throw Error(ErrorCode::InvalidPhantom, "inclusion value is not finite");
    if (inc.shape == InclusionShape::Point) {
      int nearest = -1;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < mesh.num_nodes(); ++k) {
        const double d = norm(mesh.node(static_cast<int>(k)) - inc.center);
        if (d < best) {
          best = d;
          nearest = static_cast<int>(k);
        }
      }
      a[static_cast<std::size_t>(nearest)] = inc.value;
      for (int j : mesh.node_neighbors()[static_cast<std::size_t>(nearest)]) a[static_cast<std::size_t>(j)] = inc.value;
    } else {
      if (!(inc.radius > 0.0)) throw Error(ErrorCode::InvalidPhantom, "disc radius must be positive");
      for (std::size_t k = 0; k < mesh.num_nodes(); ++k)
        if (norm(mesh.node(static_cast<int>(k)) - inc.center) <= inc.radius + 1e-12) a[k] = inc.value;
    }
  }
  return a;
}

}  // namespace waverec
