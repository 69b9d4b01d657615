#pragma once

#include <optional>
#include <span>
#include <vector>

#include "waverec/mesh.hpp"

namespace waverec::metrics {

/// Node positions, quadrature weights and adjacency used by the metrics.
struct Support {
  std::vector<Point2> nodes;
  std::vector<double> weights;
  std::vector<std::vector<int>> neighbors;
};

/// Lumped-mass weights and mesh adjacency.
Support support_from_mesh(const mesh::TriMesh& mesh);
/// Unit weights; nodes are adjacent when closer than 1.5 times the median
/// nearest-neighbour distance.
Support support_from_points(std::vector<Point2> nodes);

struct DetectedInclusion {
  Point2 centroid;
  int nodes = 0;
  double peak = 0.0;
};

struct Metrics {
  double max_a = 0.0;
  /// Over nodes with truth value 1, or outside detected inclusions without truth.
  double background_mean = 0.0;
  double background_std = 0.0;
  /// Over truth-1 nodes farther than `far_distance` from every non-background
  /// truth node; equals background_mean without truth.
  double background_far_mean = 0.0;
  double threshold = 0.0;
  std::vector<DetectedInclusion> inclusions;
  std::optional<double> relative_l2;
};

/// Nodes at or above `threshold` grouped into mesh-connected clusters, ordered by
/// their smallest node index. Centroids are weighted by the support weights.
std::vector<DetectedInclusion> detect_inclusions(const Support& support, std::span<const double> a,
                                                 double threshold);

/// sqrt(sum m (a - t)^2 / sum m t^2) with the support weights m.
double relative_l2(const Support& support, std::span<const double> truth, std::span<const double> recon);

/// Threshold for detection is (background mean + max) / 2.
Metrics compute_metrics(const Support& support, std::span<const double> recon,
                        std::optional<std::span<const double>> truth, double far_distance);

}  // namespace waverec::metrics
