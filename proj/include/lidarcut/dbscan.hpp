#pragma once

#include "lidarcut/geometry.hpp"
#include "lidarcut/ncut.hpp"

#include <span>

namespace lidarcut {

struct ClusterParams {
  double eps = 1.0;
  std::size_t min_pts = 5;
};

/// DBSCAN. A point is core when at least `min_pts` points (itself included)
/// lie within `eps`. Clusters are numbered by their lowest core index; a
/// border point joins the cluster of its lowest-index core neighbour; noise is 0.
InstanceLabeling euclidean_cluster(std::span<const Point3> points, const ClusterParams& params);

}  // namespace lidarcut
