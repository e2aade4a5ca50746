#pragma once

// Scene-level file formats: KITTI-style scans, pose text, instance label
// files and binary PLY export.

#include "lidarcut/geometry.hpp"
#include "lidarcut/scene.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace lidarcut {

/// N x (float32 x, y, z, intensity), little-endian. Sensor frame.
PointCloud load_scan(const std::filesystem::path& path);
void write_scan(const std::filesystem::path& path, const PointCloud& cloud);

/// One pose per line: 12 reals, row-major 3x4 [R|t].
std::vector<RigidPose> load_poses(const std::filesystem::path& path);
void write_poses(const std::filesystem::path& path, std::span<const RigidPose> poses);

/// Label word layout: lower 16 bits semantic (always 0 here), upper 16 bits instance id.
inline std::uint32_t encode_label(std::uint32_t instance) { return instance << 16; }
inline std::uint32_t decode_instance(std::uint32_t word) { return word >> 16; }

/// Reads/writes instance ids (already decoded) as little-endian u32 label words.
std::vector<std::uint32_t> load_instance_labels(const std::filesystem::path& path);
void write_instance_labels(const std::filesystem::path& path, std::span<const std::uint32_t> ids);

using Rgb = std::array<std::uint8_t, 3>;

/// Fixed id -> color hash; id 0 is gray.
Rgb instance_color(std::uint32_t id);

struct PlyVertex {
  float x = 0, y = 0, z = 0;
  Rgb color{};
  bool operator==(const PlyVertex&) const = default;
};

void write_ply(const std::filesystem::path& path, std::span<const PlyVertex> vertices);
std::vector<PlyVertex> load_ply(const std::filesystem::path& path);

/// Colors every map point by its instance id.
void export_ply(const std::filesystem::path& path, std::span<const Point3> points,
                std::span<const std::uint32_t> instance_ids);

}  // namespace lidarcut
