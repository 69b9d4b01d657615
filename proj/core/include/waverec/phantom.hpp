#pragma once

#include <span>
#include <vector>

#include "waverec/field.hpp"
#include "waverec/mesh.hpp"

namespace waverec {

enum class InclusionShape { Point, Disc };

struct Inclusion {
  InclusionShape shape = InclusionShape::Point;
  Point2 center;
  double radius = 0.0;  // disc only
  double value = 1.0;
};

/// Background 1; a point inclusion sets its nearest node and that node's one-ring,
/// a disc sets every node within the radius. Throws InvalidPhantom when a center
/// lies outside the circle.
NodalField build_phantom(const mesh::TriMesh& mesh, const Circle& circle, std::span<const Inclusion> inclusions);

}  // namespace waverec
