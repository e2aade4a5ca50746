#pragma once

#include "lidarcut/geometry.hpp"
#include "lidarcut/scene.hpp"
#include "lidarcut/spatial_index.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lidarcut {

enum class ChannelKind : std::uint8_t { Spatial = 0, Point = 1, Image = 2 };

std::string to_string(ChannelKind kind);

/// Per-point feature vectors of one modality with its kernel weight theta.
/// Rows may be absent (never observed); absent rows hold NaN.
struct FeatureChannel {
  ChannelKind kind = ChannelKind::Spatial;
  std::size_t dim = 0;
  std::vector<double> values;         // rows * dim, row-major
  std::vector<std::uint8_t> present;  // one flag per row
  double theta = 1.0;

  FeatureChannel() = default;
  FeatureChannel(ChannelKind k, std::size_t d, std::size_t rows, double th = 1.0);

  std::size_t rows() const { return present.size(); }
  bool is_present(std::size_t i) const { return present[i] != 0; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * dim, dim}; }
  void set_absent(std::size_t i);
};

/// x^S_p = p over the chunk's downsampled points.
FeatureChannel spatial_channel(const Chunk& chunk, double theta = 1.0);

/// AIFB container: "AIFB", u32 version = 1, u8 kind (1 = P, 2 = I), u32 N,
/// u32 D, then N*D float32. A row of all NaN marks an absent entry.
/// The returned channel has theta = 1 (the file does not carry weights).
FeatureChannel load_feature_file(const std::filesystem::path& path);
void write_feature_file(const std::filesystem::path& path, const FeatureChannel& channel);

struct CameraModel {
  Eigen::Matrix<double, 3, 4> projection = Eigen::Matrix<double, 3, 4>::Zero();  // camera frame -> pixel
  int width = 0;
  int height = 0;
  RigidPose extrinsic;  // camera -> sensor
};

/// Camera intrinsics plus its world pose (camera -> world).
struct Camera {
  CameraModel model;
  RigidPose pose;
};

/// Text: per camera one line of 12 reals (row-major 3x4 projection), two
/// integers (width height) and optionally 12 reals of the camera -> sensor
/// transform (row-major [R|t], identity when omitted).
std::vector<CameraModel> load_cameras(const std::filesystem::path& path);
void write_cameras(const std::filesystem::path& path, std::span<const CameraModel> cameras);

/// Dense per-view feature map. Cell (r, c) covers pixels
/// [c*scale, (c+1)*scale) x [r*scale, (r+1)*scale).
struct FeatureMapGrid {
  std::uint32_t rows = 0, cols = 0, dim = 0;
  float scale = 1.0f;
  std::vector<float> values;  // rows * cols * dim

  std::span<const float> cell(std::uint32_t r, std::uint32_t c) const {
    return {values.data() + (static_cast<std::size_t>(r) * cols + c) * dim, dim};
  }
  bool operator==(const FeatureMapGrid&) const = default;
};

/// Grid file: "AIGR", u32 version = 1, u32 rows, u32 cols, u32 dim,
/// f32 scale, then rows*cols*dim float32.
FeatureMapGrid load_grid(const std::filesystem::path& path);
void write_grid(const std::filesystem::path& path, const FeatureMapGrid& grid);

/// Visibility by spherical flipping and convex hull. The flipping radius is
/// gamma times the largest distance from the viewpoint. Points coincident
/// with the viewpoint are reported hidden.
std::vector<std::uint8_t> hidden_point_removal(std::span<const Point3> points,
                                               const Point3& viewpoint, double gamma);

/// Projects a camera-frame point; returns false when depth <= 0.
bool project(const CameraModel& model, const Point3& camera_point, Eigen::Vector2d& pixel);

/// Inverted index point -> [(view, pixel)] over all cameras, occlusion-filtered.
ViewIndex build_view_index(const AggregatedMap& map, std::span<const Camera> cameras, double gamma);

/// Mean of grid vectors over each point's observations (duplicates count
/// twice). Points without a usable observation are absent.
FeatureChannel project_image_features(const ViewIndex& view_index,
                                      std::span<const FeatureMapGrid> grids, double theta = 0.1);

/// Carries a per-map-point channel onto the chunk's downsampled points: each
/// ds point takes the mean of the present vectors of its member raw points.
FeatureChannel downsample_channel(const Chunk& chunk, const FeatureChannel& per_map_point);

/// Spatial index over per-scan embeddings (world frame, scans concatenated).
class ScanFeatureIndex {
 public:
  ScanFeatureIndex(Points world_points, FeatureChannel vectors, double cell);
  const SpatialHash& index() const { return index_; }
  const FeatureChannel& vectors() const { return vectors_; }

 private:
  FeatureChannel vectors_;
  SpatialHash index_;
};

/// Each ds point gets the mean of scan embeddings within radius r, falling
/// back to the single nearest scan point.
FeatureChannel aggregate_point_features(const Chunk& chunk, const ScanFeatureIndex& scans,
                                        double r = 0.35, double theta = 0.5);
FeatureChannel aggregate_point_features(const Chunk& chunk, std::span<const Point3> scan_points,
                                        const FeatureChannel& scan_vectors, double r = 0.35,
                                        double theta = 0.5);

}  // namespace lidarcut
