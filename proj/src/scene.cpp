#include "lidarcut/scene.hpp"

#include "lidarcut/errors.hpp"
#include "lidarcut/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lidarcut {

bool RigidPose::is_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

Downsampled voxel_downsample(std::span<const Point3> points, double voxel) {
  if (!(voxel > 0.0)) throw std::invalid_argument("voxel size must be positive");
  const std::size_t n = points.size();
  std::vector<CellKey> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = CellKey::of(points[i], voxel);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

  Downsampled out;
  out.representative_of.resize(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    Point3 sum = Point3::Zero();
    const std::size_t rep = out.points.size();
    while (j < n && keys[order[j]] == keys[order[i]]) {
      sum += points[order[j]];
      out.representative_of[order[j]] = rep;
      ++j;
    }
    out.points.push_back(sum / static_cast<double>(j - i));
    i = j;
  }
  return out;
}

Points transform_points(std::span<const Point3> points, const RigidPose& pose) {
  Points out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(pose.apply(p));
  return out;
}

AggregatedMap aggregate(std::span<const PointCloud> scans, std::span<const RigidPose> poses,
                        double map_voxel) {
  if (scans.size() != poses.size())
    throw std::invalid_argument("aggregate: " + std::to_string(scans.size()) + " scans but " +
                                std::to_string(poses.size()) + " poses");
  if (scans.empty()) throw std::invalid_argument("aggregate: no scans");
  for (std::size_t s = 0; s < poses.size(); ++s)
    if (!poses[s].is_valid())
      throw std::invalid_argument("aggregate: pose " + std::to_string(s) + " is not a rigid transform");

  Points world;
  std::vector<float> intensity;
  std::vector<std::int32_t> scan_of;
  bool have_intensity = true;
  for (std::size_t s = 0; s < scans.size(); ++s) {
    const auto& scan = scans[s];
    have_intensity = have_intensity && scan.intensity.size() == scan.size();
    for (std::size_t i = 0; i < scan.size(); ++i) {
      world.push_back(poses[s].apply(scan.points[i]));
      intensity.push_back(i < scan.intensity.size() ? scan.intensity[i] : 0.0f);
      scan_of.push_back(static_cast<std::int32_t>(s));
    }
  }

  AggregatedMap map;
  map.trajectory.assign(poses.begin(), poses.end());
  Downsampled ds = voxel_downsample(world, map_voxel);
  const std::size_t m = ds.points.size();
  map.cloud.points = std::move(ds.points);
  map.cloud.scan_index.assign(m, std::numeric_limits<std::int32_t>::max());
  std::vector<double> isum(m, 0.0);
  std::vector<std::size_t> count(m, 0);
  for (std::size_t i = 0; i < world.size(); ++i) {
    const std::size_t r = ds.representative_of[i];
    isum[r] += intensity[i];
    ++count[r];
    map.cloud.scan_index[r] = std::min(map.cloud.scan_index[r], scan_of[i]);
  }
  if (have_intensity) {
    map.cloud.intensity.resize(m);
    for (std::size_t r = 0; r < m; ++r)
      map.cloud.intensity[r] = static_cast<float>(isum[r] / static_cast<double>(count[r]));
  }
  return map;
}

Points sample_chunk_centers(std::span<const RigidPose> trajectory, double stride) {
  if (trajectory.empty()) throw std::invalid_argument("extract_chunks: empty trajectory");
  if (!(stride > 0.0)) throw std::invalid_argument("extract_chunks: stride must be positive");
  std::vector<double> arc(trajectory.size(), 0.0);
  for (std::size_t i = 1; i < trajectory.size(); ++i)
    arc[i] = arc[i - 1] + (trajectory[i].translation - trajectory[i - 1].translation).norm();
  const double total = arc.back();

  Points centers;
  std::size_t seg = 0;
  for (std::size_t k = 0;; ++k) {
    const double s = static_cast<double>(k) * stride;
    if (s > total) break;
    while (seg + 1 < trajectory.size() && arc[seg + 1] < s) ++seg;
    if (seg + 1 >= trajectory.size()) {
      centers.push_back(trajectory.back().translation);
      continue;
    }
    const double len = arc[seg + 1] - arc[seg];
    const double t = len > 0.0 ? (s - arc[seg]) / len : 0.0;
    centers.push_back((1.0 - t) * trajectory[seg].translation + t * trajectory[seg + 1].translation);
  }
  return centers;
}

std::vector<Chunk> extract_chunks(const AggregatedMap& map, const ChunkParams& params) {
  if (!(params.stride > 0.0) || params.stride > params.edge)
    throw std::invalid_argument("extract_chunks: require 0 < stride <= edge");
  const Points centers = sample_chunk_centers(map.trajectory, params.stride);
  const auto& pts = map.cloud.points;

  std::vector<Chunk> chunks;
  chunks.reserve(centers.size());
  for (const auto& c : centers) {
    Chunk chunk;
    chunk.center = c;
    chunk.half_extent = Point3::Constant(params.edge / 2.0);
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (chunk.contains(pts[i])) chunk.raw_indices.push_back(i);
    const Points raw = gather(pts, chunk.raw_indices);
    Downsampled ds = voxel_downsample(raw, params.ncut_voxel);
    chunk.ds_points = std::move(ds.points);
    chunk.ds_to_raw = std::move(ds.representative_of);
    chunks.push_back(std::move(chunk));
  }
  return chunks;
}

Chunk subset_chunk(const Chunk& chunk, std::span<const Point3> map_points,
                   std::span<const std::size_t> keep_positions, double voxel) {
  Chunk out;
  out.center = chunk.center;
  out.half_extent = chunk.half_extent;
  out.raw_indices.reserve(keep_positions.size());
  for (std::size_t pos : keep_positions) out.raw_indices.push_back(chunk.raw_indices.at(pos));
  const Points raw = gather(map_points, out.raw_indices);
  Downsampled ds = voxel_downsample(raw, voxel);
  out.ds_points = std::move(ds.points);
  out.ds_to_raw = std::move(ds.representative_of);
  return out;
}

Points gather(std::span<const Point3> points, std::span<const std::size_t> indices) {
  Points out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(points[i]);
  return out;
}

namespace {

double nn_cell_size(std::span<const Point3> pts) {
  Aabb box{pts[0], pts[0]};
  for (const auto& p : pts) box.extend(p);
  const Point3 e = box.max - box.min;
  const double diag = e.norm();
  if (diag == 0.0) return 1.0;
  const double vol = std::max(e.x(), 1e-3 * diag) * std::max(e.y(), 1e-3 * diag) *
                     std::max(e.z(), 1e-3 * diag);
  return std::max(std::cbrt(vol / static_cast<double>(pts.size())) * 2.0, 1e-6 * diag);
}

}  // namespace

std::vector<std::uint32_t> transfer_labels(std::span<const Point3> src_points,
                                           std::span<const std::uint32_t> src_labels,
                                           std::span<const Point3> dst_points) {
  if (src_points.empty()) throw std::invalid_argument("transfer_labels: empty source");
  if (src_points.size() != src_labels.size())
    throw std::invalid_argument("transfer_labels: source points/labels length mismatch");
  const SpatialHash index(src_points, nn_cell_size(src_points));
  std::vector<std::uint32_t> out(dst_points.size());
  for (std::size_t i = 0; i < dst_points.size(); ++i)
    out[i] = src_labels[index.nearest(dst_points[i])];
  return out;
}

}  // namespace lidarcut
