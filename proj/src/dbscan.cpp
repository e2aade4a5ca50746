#include "lidarcut/dbscan.hpp"

#include "lidarcut/errors.hpp"
#include "lidarcut/spatial_index.hpp"

#include <deque>

namespace lidarcut {

InstanceLabeling euclidean_cluster(std::span<const Point3> points, const ClusterParams& params) {
  if (!(params.eps > 0.0)) throw ConfigError("dbscan: eps must be positive");
  if (params.min_pts < 1) throw ConfigError("dbscan: min_pts must be at least 1");
  const std::size_t n = points.size();
  InstanceLabeling out;
  out.labels.assign(n, 0);
  if (n == 0) return out;

  const SpatialHash index(points, params.eps);
  std::vector<std::vector<std::size_t>> nbrs(n);
  std::vector<std::uint8_t> core(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    index.radius_query(points[i], params.eps, nbrs[i]);
    core[i] = nbrs[i].size() >= params.min_pts;
  }

  std::deque<std::size_t> queue;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!core[seed] || out.labels[seed]) continue;
    const std::uint32_t id = ++out.count;
    out.labels[seed] = id;
    queue.push_back(seed);
    while (!queue.empty()) {
      const std::size_t i = queue.front();
      queue.pop_front();
      for (std::size_t j : nbrs[i])
        if (core[j] && !out.labels[j]) {
          out.labels[j] = id;
          queue.push_back(j);
        }
    }
    out.regions.push_back({static_cast<std::uint32_t>(seed), 0, 0.0, StopReason::TooSmall});
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    for (std::size_t j : nbrs[i])  // ascending
      if (core[j]) {
        out.labels[i] = out.labels[j];
        break;
      }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (out.labels[i]) ++out.regions[out.labels[i] - 1].size;
  return out;
}

}  // namespace lidarcut
