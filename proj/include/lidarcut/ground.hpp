#pragma once

#include "lidarcut/geometry.hpp"
#include "lidarcut/scene.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace lidarcut {

struct GroundParams {
  double cell = 2.0;        // horizontal grid cell edge, meters
  int ransac_iters = 100;
  double inlier_tol = 0.1;  // point-to-plane distance, meters
  double height_margin = 0.2;  // everything below mean ground + margin is ground
  std::uint64_t seed = 0;
};

struct GroundMask {
  std::vector<std::uint8_t> is_ground;  // one flag per input point
  double mean_ground_height = 0.0;
  bool fitted = false;  // false when fewer than 3 points were given

  std::size_t ground_count() const;
};

/// Per-cell RANSAC ground planes fitted to the lowest height quartile of
/// each cell, combined with a global height cut above the mean ground.
/// The grid is anchored at the minimum x/y of the input.
GroundMask estimate_ground(std::span<const Point3> points, const GroundParams& params = {});

GroundMask estimate_ground(const AggregatedMap& map, const Chunk& chunk,
                           const GroundParams& params = {});

}  // namespace lidarcut
