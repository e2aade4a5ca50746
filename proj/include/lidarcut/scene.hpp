#pragma once

#include "lidarcut/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace lidarcut {

struct PointCloud {
  Points points;
  std::vector<float> intensity;           // empty or parallel to points
  std::vector<std::int32_t> scan_index;  // empty or parallel to points

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// One (view, pixel) pair of the inverted view index.
struct ViewObservation {
  std::uint32_t view = 0;
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
};
using ViewIndex = std::vector<std::vector<ViewObservation>>;

struct AggregatedMap {
  PointCloud cloud;  // world frame, voxel-deduplicated
  std::vector<RigidPose> trajectory;
  ViewIndex view_index;  // empty, or one entry list per point
};

struct Downsampled {
  Points points;
  /// For each input index, the index of its representative in `points`.
  std::vector<std::size_t> representative_of;
};

/// Centroid voxel filter. Output cells are ordered by (ix, iy, iz); members
/// of a cell are summed in ascending input order.
Downsampled voxel_downsample(std::span<const Point3> points, double voxel);

/// Transforms every scan by its pose and voxelizes the union at `map_voxel`.
/// Intensity is averaged per cell and scan_index keeps the lowest contributing scan.
AggregatedMap aggregate(std::span<const PointCloud> scans, std::span<const RigidPose> poses,
                        double map_voxel = 0.05);

Points transform_points(std::span<const Point3> points, const RigidPose& pose);

struct Chunk {
  Point3 center = Point3::Zero();
  Point3 half_extent = Point3::Zero();
  std::vector<std::size_t> raw_indices;  // into the map cloud, ascending
  Points ds_points;
  std::vector<std::size_t> ds_to_raw;  // parallel to raw_indices

  Aabb aabb() const { return {center - half_extent, center + half_extent}; }
  bool contains(const Point3& p) const {
    return ((p - center).cwiseAbs().array() <= half_extent.array()).all();
  }
};

struct ChunkParams {
  double edge = 25.0;
  double stride = 22.0;
  double ncut_voxel = 0.35;
};

/// Chunk centers spaced `stride` apart in arc length along the trajectory,
/// starting at its first pose.
Points sample_chunk_centers(std::span<const RigidPose> trajectory, double stride);

std::vector<Chunk> extract_chunks(const AggregatedMap& map, const ChunkParams& params = {});

/// Rebuilds a chunk over a subset of its raw points (positions into
/// chunk.raw_indices), downsampled at `voxel`.
Chunk subset_chunk(const Chunk& chunk, std::span<const Point3> map_points,
                   std::span<const std::size_t> keep_positions, double voxel);

/// Nearest-neighbour label transfer, ties to the lowest source index.
std::vector<std::uint32_t> transfer_labels(std::span<const Point3> src_points,
                                           std::span<const std::uint32_t> src_labels,
                                           std::span<const Point3> dst_points);

Points gather(std::span<const Point3> points, std::span<const std::size_t> indices);

}  // namespace lidarcut
