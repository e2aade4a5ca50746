#pragma once

#include "lidarcut/geometry.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace lidarcut {

/// Sum and count of intra-instance edge weights; feeds proposal confidence.
struct InstanceCohesion {
  double weight_sum = 0.0;
  std::size_t edges = 0;

  /// Mean intra-instance edge weight; 0.5 when the instance has no internal edge.
  double score() const { return edges ? weight_sum / static_cast<double>(edges) : 0.5; }
};

/// One chunk's labeling over its raw map points.
struct ChunkInstances {
  Point3 center = Point3::Zero();
  std::vector<std::size_t> raw_indices;  // map point indices
  std::vector<std::uint32_t> labels;     // parallel, 0 = ground/unassigned, else 1..K
  std::vector<InstanceCohesion> cohesion;  // optional, indexed by id - 1
};

struct MapSegmentation {
  std::vector<std::uint32_t> labels;  // per map point, 0 = none
  std::uint32_t count = 0;
  /// For id k (index k-1): contributing (chunk position, local id) pairs.
  std::vector<std::vector<std::pair<std::size_t, std::uint32_t>>> provenance;
  std::vector<double> confidence;  // index k-1
};

Aabb instance_aabb(std::span<const Point3> points);

/// Volume IoU. Boxes with zero union volume score 1 when identical, else 0.
double box_iou(const Aabb& a, const Aabb& b);

/// Greedy fold over chunks in the given order. Each chunk instance joins the
/// existing global instance (from earlier chunks) of highest box IoU when
/// that IoU exceeds `iou_thr`, otherwise it starts a new one. A point claimed
/// by several instances keeps the claim of the chunk whose center is
/// nearest, ties to the earlier chunk. Ids are renumbered densely.
MapSegmentation merge_chunks(std::span<const Point3> map_points, std::span<const ChunkInstances> chunks,
                             double iou_thr = 0.01);

}  // namespace lidarcut
