#include "waverec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "waverec/error.hpp"
#include "waverec/p1.hpp"

namespace waverec::metrics {

namespace {

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(v.size()))};
}

void check_size(const Support& support, std::span<const double> v) {
  if (v.size() != support.nodes.size()) throw Error(ErrorCode::DimMismatch, "field size does not match mesh");
}

}  // namespace

Support support_from_mesh(const mesh::TriMesh& mesh) {
  return {mesh.nodes(), p1::lumped_mass(mesh), mesh.node_neighbors()};
}

Support support_from_points(std::vector<Point2> nodes) {
  Support s;
  const std::size_t n = nodes.size();
  s.weights.assign(n, 1.0);
  s.neighbors.assign(n, {});
  if (n > 1) {
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) nearest[i] = std::min(nearest[i], norm(nodes[i] - nodes[j]));
    std::vector<double> sorted = nearest;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(n / 2), sorted.end());
    const double radius = 1.5 * sorted[n / 2];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && norm(nodes[i] - nodes[j]) < radius) s.neighbors[i].push_back(static_cast<int>(j));
  }
  s.nodes = std::move(nodes);
  return s;
}

std::vector<DetectedInclusion> detect_inclusions(const Support& support, std::span<const double> a,
                                                 double threshold) {
  check_size(support, a);
  std::vector<int> label(a.size(), -1);
  std::vector<DetectedInclusion> out;
  for (std::size_t seed = 0; seed < a.size(); ++seed) {
    if (label[seed] >= 0 || !(a[seed] >= threshold)) continue;
    const int id = static_cast<int>(out.size());
    std::vector<int> stack{static_cast<int>(seed)};
    label[seed] = id;
    double wsum = 0.0;
    Point2 acc{};
    DetectedInclusion inc;
    while (!stack.empty()) {
      const auto k = static_cast<std::size_t>(stack.back());
      stack.pop_back();
      wsum += support.weights[k];
      acc = acc + support.weights[k] * support.nodes[k];
      inc.nodes += 1;
      inc.peak = std::max(inc.peak, a[k]);
      for (int j : support.neighbors[k]) {
        const auto uj = static_cast<std::size_t>(j);
        if (label[uj] < 0 && a[uj] >= threshold) {
          label[uj] = id;
          stack.push_back(j);
        }
      }
    }
    inc.centroid = (1.0 / wsum) * acc;
    out.push_back(inc);
  }
  return out;
}

double relative_l2(const Support& support, std::span<const double> truth, std::span<const double> recon) {
  check_size(support, truth);
  check_size(support, recon);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double m = support.weights[k];
    num += m * (recon[k] - truth[k]) * (recon[k] - truth[k]);
    den += m * truth[k] * truth[k];
  }
  if (den == 0.0) throw Error(ErrorCode::DimMismatch, "truth field has zero norm");
  return std::sqrt(num / den);
}

Metrics compute_metrics(const Support& support, std::span<const double> recon,
                        std::optional<std::span<const double>> truth, double far_distance) {
  check_size(support, recon);
  if (truth && truth->size() != recon.size()) throw Error(ErrorCode::MeshMismatch, "truth and recon sizes differ");
  Metrics out;
  out.max_a = *std::max_element(recon.begin(), recon.end());
  std::vector<double> bg, far;
  if (truth) {
    std::vector<Point2> targets;
    for (std::size_t k = 0; k < recon.size(); ++k)
      if ((*truth)[k] != 1.0) targets.push_back(support.nodes[k]);
    for (std::size_t k = 0; k < recon.size(); ++k) {
      if ((*truth)[k] != 1.0) continue;
      bg.push_back(recon[k]);
      double dmin = std::numeric_limits<double>::infinity();
      for (const Point2& p : targets) dmin = std::min(dmin, norm(support.nodes[k] - p));
      if (dmin > far_distance) far.push_back(recon[k]);
    }
    std::tie(out.background_mean, out.background_std) = mean_std(bg);
    out.background_far_mean = mean_std(far).first;
    out.relative_l2 = relative_l2(support, *truth, recon);
  } else {
    // Background estimate: values below the midpoint of the median and the max.
    std::vector<double> sorted(recon.begin(), recon.end());
    std::sort(sorted.begin(), sorted.end());
    const double cut = 0.5 * (sorted[sorted.size() / 2] + out.max_a);
    for (double x : recon)
      if (x < cut) bg.push_back(x);
    std::tie(out.background_mean, out.background_std) = mean_std(bg);
    out.background_far_mean = out.background_mean;
  }
  out.threshold = 0.5 * (out.background_mean + out.max_a);
  if (out.max_a > out.background_mean) out.inclusions = detect_inclusions(support, recon, out.threshold);
  return out;
}

}  // namespace waverec::metrics
