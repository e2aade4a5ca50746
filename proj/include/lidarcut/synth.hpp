#pragma once

#include "lidarcut/features.hpp"
#include "lidarcut/geometry.hpp"
#include "lidarcut/scene.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace lidarcut {

enum class ObjectShape : std::uint8_t { Box, Cylinder };

struct SceneSpec {
  std::uint64_t seed = 0;
  int n_objects = 10;
  double size_min = 0.8, size_max = 1.6;  // object edge / diameter / height range, meters
  double min_gap = 2.0;                   // between objects (or touching pairs), meters
  bool touching_pairs = false;            // place objects as side-by-side pairs
  double pair_gap = 0.3;
  double ground_length = 60.0, ground_width = 16.0;  // x, y extent
  double ground_x0 = -8.0;
  double ground_density = 120.0;   // points / m^2
  double object_density = 200.0;   // points / m^3
  double ground_noise = 0.02;
  double object_lift = 0.4;        // gap between ground and object bottom
  int embed_dim = 16;
  double embed_noise = 0.1;
  double embed_scale = 1.0;        // prototype norm
  double trajectory_length = 44.0;
  double pose_spacing = 2.0;
  double sensor_height = 1.7;
  double max_yaw = 0.2;            // radians, per pose
  double map_voxel = 0.05;
  bool cameras = true;
  int image_width = 320, image_height = 96;
  double focal = 160.0;
  float grid_scale = 8.0f;
  int image_embed_dim = 8;

  nlohmann::json to_json() const;
  static SceneSpec from_json(const nlohmann::json& j);
};

struct SceneObject {
  std::uint32_t id = 0;
  ObjectShape shape = ObjectShape::Box;
  Aabb box;
};

struct SyntheticScene {
  SceneSpec spec;
  std::vector<PointCloud> scans;  // sensor frame, float32-representable
  std::vector<RigidPose> poses;
  AggregatedMap map;
  std::vector<std::uint32_t> gt;   // per map point, 0 = ground
  FeatureChannel point_features;   // per scan point, scans concatenated
  std::vector<CameraModel> cameras;  // one per pose when enabled
  std::vector<FeatureMapGrid> grids; // one per view (pose-major)
  std::vector<SceneObject> objects;
};

/// Deterministic procedural scene. Throws ConfigError when objects cannot be
/// placed with the requested gaps.
SyntheticScene generate_scene(const SceneSpec& spec);

/// Euclidean distance between two boxes (0 when they intersect).
double box_gap(const Aabb& a, const Aabb& b);

/// Directory layout: scans/NNNNNN.bin, poses.txt, point_features.aifb,
/// cameras.txt, grids/NNNNNN_CC.aigr, gt.label, scene.json.
void write_scene(const SyntheticScene& scene, const std::filesystem::path& dir);

std::filesystem::path grid_path(const std::filesystem::path& grids_dir, std::size_t pose, std::size_t camera);

}  // namespace lidarcut
