#pragma once

#include "lidarcut/dbscan.hpp"
#include "lidarcut/eval.hpp"
#include "lidarcut/features.hpp"
#include "lidarcut/ground.hpp"
#include "lidarcut/merge.hpp"
#include "lidarcut/scene.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lidarcut {

struct SyntheticScene;

enum class Preset : std::uint8_t { S, SP, SPI };
std::string to_string(Preset p);
Preset parse_preset(const std::string& s);

struct PipelineConfig {
  struct Paths {
    std::string scans_dir, poses, point_features, cameras, grids_dir, gt, output_dir;
  } paths;
  Preset preset = Preset::S;
  std::string method = "ncut";  // ncut | dbscan
  double theta_s = 1.0, theta_p = 0.5, theta_i = 0.1;
  double radius = 1.0;
  double chunk_edge = 25.0, chunk_stride = 22.0;
  double map_voxel = 0.05, ncut_voxel = 0.35;
  std::optional<double> eig_threshold;  // unset: preset default
  double min_share = 0.01;
  std::size_t min_points = 2;
  int sweep_points = 64;
  double merge_iou = 0.01;
  double point_feature_radius = 0.35;
  double hpr_gamma = 100.0;
  double w_floor = 1e-8;
  double solver_tol = 1e-8;
  int solver_max_iter = 5000;
  GroundParams ground;
  ClusterParams dbscan{1.0, 3};
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0 = hardware concurrency

  bool uses_point_features() const { return preset != Preset::S; }
  bool uses_image_features() const { return preset == Preset::SPI; }
  double effective_eig_threshold() const;
  unsigned effective_workers() const;

  /// Throws ConfigError on any invalid field.
  void validate() const;

  nlohmann::json to_json() const;
  /// Fields missing from `j` keep their defaults; unknown keys are rejected.
  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig load(const std::filesystem::path& path);
};

/// Applies "dotted.key=value" to a config document. The value is parsed as
/// JSON when possible and taken as a string otherwise.
void apply_override(nlohmann::json& config, const std::string& assignment);

/// Default eigenvalue stop threshold of a preset.
double preset_eig_threshold(Preset p);

struct PipelineInputs {
  std::vector<PointCloud> scans;
  std::vector<RigidPose> poses;
  std::optional<FeatureChannel> point_features;  // per scan point, scans concatenated
  std::vector<CameraModel> cameras;              // rig cameras
  std::vector<FeatureMapGrid> grids;             // per view, pose-major
  std::vector<std::uint32_t> gt;                 // per map point, empty = no evaluation
};

/// Reads every input the config's preset needs; missing files raise
/// ConfigError naming the path.
PipelineInputs load_inputs(const PipelineConfig& config);
PipelineInputs inputs_from_scene(const SyntheticScene& scene);

struct ChunkSummary {
  Point3 center = Point3::Zero();
  std::size_t raw_points = 0, ground_points = 0, nodes = 0, edges = 0, instances = 0;
};

struct RunResult {
  AggregatedMap map;
  MapSegmentation segmentation;
  std::optional<EvalReport> report;
  std::vector<ChunkSummary> chunks;
  double seconds = 0.0;
};

RunResult run_pipeline(const PipelineConfig& config, const PipelineInputs& inputs);

/// Writes instances.label, map.aict, confidence.json, report.json (when
/// evaluated) and manifest.json to the output directory. Files written so far are
/// removed if any write fails.
void write_run_outputs(const PipelineConfig& config, const RunResult& result);

/// load_inputs + run_pipeline + write_run_outputs, removing partial outputs on failure.
RunResult run(const PipelineConfig& config);

/// Valid sweep parameters: theta_s, theta_p, theta_i, chunk_edge, ncut_voxel, eig_threshold, R.
const std::vector<std::string>& ablation_parameters();

struct AblationRow {
  double value = 0.0;
  EvalReport report;
  double seconds = 0.0;
};

std::vector<AblationRow> ablate(const PipelineConfig& config, const PipelineInputs& inputs,
                                const std::string& parameter, const std::vector<double>& values);
std::string ablation_table(const std::string& parameter, const std::vector<AblationRow>& rows);

/// Chunks and per-chunk proxy graphs as the pipeline builds them.
struct GraphDump {
  std::vector<Chunk> chunks;  // non-ground subsets at ncut voxel
  std::vector<ProxyGraph> graphs;
  Points map_points;
};
GraphDump build_graphs(const PipelineConfig& config, const PipelineInputs& inputs);

}  // namespace lidarcut
