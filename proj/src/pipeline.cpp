#include "lidarcut/pipeline.hpp"

#include "lidarcut/container.hpp"
#include "lidarcut/errors.hpp"
#include "lidarcut/graph.hpp"
#include "lidarcut/io.hpp"
#include "lidarcut/ncut.hpp"
#include "lidarcut/synth.hpp"
#include "lidarcut/version.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

namespace lidarcut {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Preset p) {
  switch (p) {
    case Preset::S: return "S";
    case Preset::SP: return "S+P";
    case Preset::SPI: return "S+P+I";
  }
  return "?";
}

Preset parse_preset(const std::string& s) {
  if (s == "S") return Preset::S;
  if (s == "S+P") return Preset::SP;
  if (s == "S+P+I") return Preset::SPI;
  throw ConfigError("unknown preset '" + s + "' (expected S, S+P or S+P+I)");
}

double preset_eig_threshold(Preset p) {
  switch (p) {
    case Preset::S: return 0.075;
    case Preset::SP: return 0.03;
    case Preset::SPI: return 0.005;
  }
  return 0.075;
}

double PipelineConfig::effective_eig_threshold() const {
  return eig_threshold ? *eig_threshold : preset_eig_threshold(preset);
}

unsigned PipelineConfig::effective_workers() const {
  if (workers > 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

void PipelineConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(theta_s, "thetas.s");
  positive(theta_p, "thetas.p");
  positive(theta_i, "thetas.i");
  positive(radius, "radius");
  positive(chunk_edge, "chunk.edge");
  positive(chunk_stride, "chunk.stride");
  positive(map_voxel, "map_voxel");
  positive(ncut_voxel, "ncut_voxel");
  positive(effective_eig_threshold(), "eig_threshold");
  positive(point_feature_radius, "point_feature_radius");
  positive(hpr_gamma, "hpr_gamma");
  positive(w_floor, "w_floor");
  positive(solver_tol, "solver.tol");
  positive(ground.cell, "ground.cell");
  positive(ground.inlier_tol, "ground.inlier_tol");
  positive(dbscan.eps, "dbscan.eps");
  if (ground.height_margin < 0.0) throw ConfigError("ground.height_margin must be >= 0");
  if (ground.ransac_iters < 1) throw ConfigError("ground.ransac_iters must be >= 1");
  if (!(min_share >= 0.0 && min_share < 0.5)) throw ConfigError("min_share must lie in [0, 0.5)");
  if (!(merge_iou >= 0.0 && merge_iou < 1.0)) throw ConfigError("merge_iou must lie in [0, 1)");
  if (sweep_points < 1) throw ConfigError("sweep_points must be >= 1");
  if (solver_max_iter < 1) throw ConfigError("solver.max_iter must be >= 1");
  if (dbscan.min_pts < 1) throw ConfigError("dbscan.min_pts must be >= 1");
  if (method != "ncut" && method != "dbscan") throw ConfigError("method must be 'ncut' or 'dbscan', got '" + method + "'");
}

json PipelineConfig::to_json() const {
  return {{"paths",
           {{"scans_dir", paths.scans_dir},
            {"poses", paths.poses},
            {"point_features", paths.point_features},
            {"cameras", paths.cameras},
            {"grids_dir", paths.grids_dir},
            {"gt", paths.gt},
            {"output_dir", paths.output_dir}}},
          {"preset", to_string(preset)},
          {"method", method},
          {"thetas", {{"s", theta_s}, {"p", theta_p}, {"i", theta_i}}},
          {"radius", radius},
          {"chunk", {{"edge", chunk_edge}, {"stride", chunk_stride}}},
          {"map_voxel", map_voxel},
          {"ncut_voxel", ncut_voxel},
          {"eig_threshold", eig_threshold ? json(*eig_threshold) : json(nullptr)},
          {"min_share", min_share},
          {"min_points", min_points},
          {"sweep_points", sweep_points},
          {"merge_iou", merge_iou},
          {"point_feature_radius", point_feature_radius},
          {"hpr_gamma", hpr_gamma},
          {"w_floor", w_floor},
          {"solver", {{"tol", solver_tol}, {"max_iter", solver_max_iter}}},
          {"ground",
           {{"cell", ground.cell},
            {"ransac_iters", ground.ransac_iters},
            {"inlier_tol", ground.inlier_tol},
            {"height_margin", ground.height_margin}}},
          {"dbscan", {{"eps", dbscan.eps}, {"min_pts", dbscan.min_pts}}},
          {"seed", seed},
          {"workers", workers}};
}

namespace {

void check_keys(const json& given, const json& known, const std::string& prefix) {
  if (!given.is_object()) throw ConfigError("config" + (prefix.empty() ? "" : " field '" + prefix + "'") + " must be an object");
  for (const auto& [key, value] : given.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!known.contains(key)) throw ConfigError("unknown config field '" + path + "'");
    if (known.at(key).is_object()) check_keys(value, known.at(key), path);
  }
}

template <class T>
void read(const json& j, const char* a, const char* b, T& field) {
  const json* node = &j;
  std::string path = a;
  if (!node->contains(a)) return;
  node = &node->at(a);
  if (b) {
    path += std::string(".") + b;
    if (!node->contains(b)) return;
    node = &node->at(b);
  }
  try {
    node->get_to(field);
  } catch (const json::exception& e) {
    throw ConfigError("config field '" + path + "': " + e.what());
  }
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig c;
  check_keys(j, c.to_json(), "");
  read(j, "paths", "scans_dir", c.paths.scans_dir);
  read(j, "paths", "poses", c.paths.poses);
  read(j, "paths", "point_features", c.paths.point_features);
  read(j, "paths", "cameras", c.paths.cameras);
  read(j, "paths", "grids_dir", c.paths.grids_dir);
  read(j, "paths", "gt", c.paths.gt);
  read(j, "paths", "output_dir", c.paths.output_dir);
  std::string preset = to_string(c.preset);
  read(j, "preset", nullptr, preset);
  c.preset = parse_preset(preset);
  read(j, "method", nullptr, c.method);
  read(j, "thetas", "s", c.theta_s);
  read(j, "thetas", "p", c.theta_p);
  read(j, "thetas", "i", c.theta_i);
  read(j, "radius", nullptr, c.radius);
  read(j, "chunk", "edge", c.chunk_edge);
  read(j, "chunk", "stride", c.chunk_stride);
  read(j, "map_voxel", nullptr, c.map_voxel);
  read(j, "ncut_voxel", nullptr, c.ncut_voxel);
  if (j.contains("eig_threshold") && !j.at("eig_threshold").is_null()) {
    double v = 0.0;
    read(j, "eig_threshold", nullptr, v);
    c.eig_threshold = v;
  }
  read(j, "min_share", nullptr, c.min_share);
  read(j, "min_points", nullptr, c.min_points);
  read(j, "sweep_points", nullptr, c.sweep_points);
  read(j, "merge_iou", nullptr, c.merge_iou);
  read(j, "point_feature_radius", nullptr, c.point_feature_radius);
  read(j, "hpr_gamma", nullptr, c.hpr_gamma);
  read(j, "w_floor", nullptr, c.w_floor);
  read(j, "solver", "tol", c.solver_tol);
  read(j, "solver", "max_iter", c.solver_max_iter);
  read(j, "ground", "cell", c.ground.cell);
  read(j, "ground", "ransac_iters", c.ground.ransac_iters);
  read(j, "ground", "inlier_tol", c.ground.inlier_tol);
  read(j, "ground", "height_margin", c.ground.height_margin);
  read(j, "dbscan", "eps", c.dbscan.eps);
  read(j, "dbscan", "min_pts", c.dbscan.min_pts);
  read(j, "seed", nullptr, c.seed);
  read(j, "workers", nullptr, c.workers);
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &config;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

// ---------------------------------------------------------------- inputs

namespace {

fs::path require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("config has no path for ") + what);
  if (!fs::exists(path)) throw ConfigError(std::string(what) + " not found: " + path);
  return path;
}

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(name + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(name + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(name + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(name + ": " + e.what());
  }
}

}  // namespace

PipelineInputs load_inputs(const PipelineConfig& config) {
  return stage("load", [&] {
    PipelineInputs in;
    const fs::path scans_dir = require_file(config.paths.scans_dir, "scans directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(scans_dir))
      if (e.is_regular_file() && e.path().extension() == ".bin") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no .bin scans in " + scans_dir.string());
    for (const auto& f : files) in.scans.push_back(load_scan(f));
    in.poses = load_poses(require_file(config.paths.poses, "pose file"));
    if (in.poses.size() != in.scans.size())
      throw DataError(config.paths.poses + " has " + std::to_string(in.poses.size()) + " poses for " +
                      std::to_string(in.scans.size()) + " scans");

    if (config.uses_point_features()) {
      in.point_features = load_feature_file(require_file(config.paths.point_features, "point feature file"));
      if (in.point_features->kind != ChannelKind::Point)
        throw DataError(config.paths.point_features + " does not hold point features");
    }
    if (config.uses_image_features()) {
      in.cameras = load_cameras(require_file(config.paths.cameras, "camera file"));
      const fs::path grids_dir = require_file(config.paths.grids_dir, "grid directory");
      for (std::size_t k = 0; k < in.poses.size(); ++k)
        for (std::size_t c = 0; c < in.cameras.size(); ++c) {
          const fs::path p = grid_path(grids_dir, k, c);
          in.grids.push_back(load_grid(require_file(p.string(), "grid file")));
        }
    }
    if (!config.paths.gt.empty()) in.gt = load_instance_labels(require_file(config.paths.gt, "ground-truth label file"));
    return in;
  });
}

PipelineInputs inputs_from_scene(const SyntheticScene& scene) {
  PipelineInputs in;
  in.scans = scene.scans;
  in.poses = scene.poses;
  in.point_features = scene.point_features;
  in.cameras = scene.cameras;
  in.grids = scene.grids;
  in.gt = scene.gt;
  return in;
}

// ---------------------------------------------------------------- run

namespace {

struct Context {
  const PipelineConfig& cfg;
  AggregatedMap map;
  std::optional<ScanFeatureIndex> scan_features;
  std::optional<FeatureChannel> image_channel;  // per map point
};

struct ChunkOutput {
  ChunkInstances instances;
  ChunkSummary summary;
  Chunk subset;
  ProxyGraph graph;
};

Context prepare(const PipelineConfig& cfg, const PipelineInputs& in) {
  Context ctx{cfg, {}, std::nullopt, std::nullopt};
  ctx.map = stage("aggregate", [&] { return aggregate(in.scans, in.poses, cfg.map_voxel); });
  spdlog::info("aggregated {} scans into {} map points", in.scans.size(), ctx.map.cloud.size());

  if (cfg.uses_point_features()) {
    stage("point features", [&] {
      if (!in.point_features) throw ConfigError("preset " + to_string(cfg.preset) + " needs point features");
      Points world;
      for (std::size_t s = 0; s < in.scans.size(); ++s)
        for (const auto& p : in.scans[s].points) world.push_back(in.poses[s].apply(p));
      ctx.scan_features.emplace(std::move(world), *in.point_features, cfg.point_feature_radius);
    });
  }
  if (cfg.uses_image_features()) {
    stage("image features", [&] {
      if (in.cameras.empty()) throw ConfigError("preset S+P+I needs at least one camera");
      if (in.grids.size() != in.poses.size() * in.cameras.size())
        throw DataError("expected " + std::to_string(in.poses.size() * in.cameras.size()) + " grids, got " +
                        std::to_string(in.grids.size()));
      std::vector<Camera> views;
      for (const auto& pose : in.poses)
        for (const auto& model : in.cameras) views.push_back({model, pose.compose(model.extrinsic)});
      ctx.map.view_index = build_view_index(ctx.map, views, cfg.hpr_gamma);
      ctx.image_channel = project_image_features(ctx.map.view_index, in.grids, cfg.theta_i);
    });
  }
  return ctx;
}

ChunkOutput process_chunk(const Context& ctx, const Chunk& chunk, std::size_t index) {
  const auto& cfg = ctx.cfg;
  const std::string name = "chunk " + std::to_string(index);
  ChunkOutput out;
  out.summary.center = chunk.center;
  out.summary.raw_points = chunk.raw_indices.size();
  out.instances.center = chunk.center;

  const GroundMask ground = stage(name + " ground", [&] { return estimate_ground(ctx.map, chunk, cfg.ground); });
  out.summary.ground_points = ground.ground_count();
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < chunk.raw_indices.size(); ++k)
    if (!ground.is_ground[k]) keep.push_back(k);
  if (keep.empty()) return out;

  out.subset = subset_chunk(chunk, ctx.map.cloud.points, keep, cfg.ncut_voxel);
  const Chunk& sub = out.subset;
  out.graph = stage(name + " graph", [&] {
    std::vector<FeatureChannel> channels;
    channels.push_back(spatial_channel(sub, cfg.theta_s));
    if (ctx.scan_features)
      channels.push_back(aggregate_point_features(sub, *ctx.scan_features, cfg.point_feature_radius, cfg.theta_p));
    if (ctx.image_channel) {
      FeatureChannel ch = downsample_channel(sub, *ctx.image_channel);
      ch.theta = cfg.theta_i;
      channels.push_back(std::move(ch));
    }
    return build_graph(sub, channels, {cfg.radius, cfg.w_floor});
  });
  const ProxyGraph& graph = out.graph;
  out.summary.nodes = graph.n;
  out.summary.edges = graph.edge_count();

  std::vector<std::uint32_t> node_labels;
  stage(name + " segmentation", [&] {
    if (cfg.method == "dbscan") {
      Points pts;
      for (auto p : graph.node_to_point) pts.push_back(sub.ds_points[p]);
      node_labels = euclidean_cluster(pts, cfg.dbscan).labels;
    } else {
      NcutParams np;
      np.eig_threshold = cfg.effective_eig_threshold();
      np.min_share = cfg.min_share;
      np.min_points = cfg.min_points;
      np.sweep_points = cfg.sweep_points;
      np.solver = {cfg.solver_tol, cfg.solver_max_iter, cfg.seed};
      node_labels = recursive_ncut(graph, np).labels;
    }
  });
  out.instances.cohesion = instance_cohesion(graph, node_labels);
  out.summary.instances = out.instances.cohesion.size();

  std::vector<std::uint32_t> ds_labels(sub.ds_points.size(), 0);
  for (std::size_t v = 0; v < graph.n; ++v) ds_labels[graph.node_to_point[v]] = node_labels[v];
  out.instances.raw_indices = sub.raw_indices;
  out.instances.labels.resize(sub.raw_indices.size());
  for (std::size_t k = 0; k < sub.raw_indices.size(); ++k) out.instances.labels[k] = ds_labels[sub.ds_to_raw[k]];
  return out;
}

std::vector<ChunkOutput> process_chunks(const Context& ctx, const std::vector<Chunk>& chunks) {
  const std::size_t n = chunks.size();
  std::vector<ChunkOutput> outs(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        outs[i] = process_chunk(ctx, chunks[i], i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned workers = std::min<std::size_t>(ctx.cfg.effective_workers(), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return outs;
}

std::vector<Chunk> make_chunks(const PipelineConfig& cfg, const AggregatedMap& map) {
  return stage("chunking", [&] { return extract_chunks(map, {cfg.chunk_edge, cfg.chunk_stride, cfg.ncut_voxel}); });
}

}  // namespace

RunResult run_pipeline(const PipelineConfig& config, const PipelineInputs& inputs) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Context ctx = prepare(config, inputs);
  const auto chunks = make_chunks(config, ctx.map);
  spdlog::info("{} chunks, {} workers", chunks.size(), config.effective_workers());
  auto outs = process_chunks(ctx, chunks);

  RunResult result;
  std::vector<ChunkInstances> instances;
  for (auto& o : outs) {
    result.chunks.push_back(o.summary);
    instances.push_back(std::move(o.instances));
  }
  result.segmentation =
      stage("merge", [&] { return merge_chunks(ctx.map.cloud.points, instances, config.merge_iou); });
  if (!inputs.gt.empty()) {
    result.report = stage("eval", [&] {
      if (inputs.gt.size() != ctx.map.cloud.size())
        throw DataError("ground truth has " + std::to_string(inputs.gt.size()) + " labels but the map has " +
                        std::to_string(ctx.map.cloud.size()) + " points (map_voxel must match)");
      return evaluate(result.segmentation.labels, inputs.gt, result.segmentation.confidence);
    });
  }
  result.map = std::move(ctx.map);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  spdlog::info("{} instances in {:.2f} s", result.segmentation.count, result.seconds);
  return result;
}

GraphDump build_graphs(const PipelineConfig& config, const PipelineInputs& inputs) {
  config.validate();
  Context ctx = prepare(config, inputs);
  const auto chunks = make_chunks(config, ctx.map);
  GraphDump dump;
  for (auto& o : process_chunks(ctx, chunks)) {
    dump.chunks.push_back(std::move(o.subset));
    dump.graphs.push_back(std::move(o.graph));
  }
  dump.map_points = std::move(ctx.map.cloud.points);
  return dump;
}

// ---------------------------------------------------------------- outputs

namespace {

class OutputGuard {
 public:
  explicit OutputGuard(fs::path dir) : dir_(std::move(dir)) {
    if (!fs::exists(dir_)) {
      fs::create_directories(dir_);
      created_dir_ = true;
    }
  }
  OutputGuard(const OutputGuard&) = delete;
  OutputGuard& operator=(const OutputGuard&) = delete;
  ~OutputGuard() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& f : written_) fs::remove(f, ec);
    if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
  }
  fs::path file(const std::string& name) {
    written_.push_back(dir_ / name);
    return written_.back();
  }
  void commit() { committed_ = true; }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
  bool created_dir_ = false, committed_ = false;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failure on " + path.string());
}

json file_entry(const std::string& path) {
  std::error_code ec;
  const auto size = path.empty() ? 0 : fs::file_size(path, ec);
  return {{"path", path}, {"bytes", ec ? 0 : size}};
}

void write_outputs(const PipelineConfig& config, const RunResult& result, OutputGuard& guard) {
  write_instance_labels(guard.file("instances.label"), result.segmentation.labels);
  Intermediates inter;
  inter.map_points = result.map.cloud.points;
  write_intermediates(guard.file("map.aict"), inter);
  write_json(guard.file("confidence.json"), result.segmentation.confidence);
  if (result.report) write_json(guard.file("report.json"), result.report->to_json());

  json chunks = json::array();
  for (const auto& c : result.chunks)
    chunks.push_back({{"center", {c.center.x(), c.center.y(), c.center.z()}},
                      {"raw_points", c.raw_points},
                      {"ground_points", c.ground_points},
                      {"nodes", c.nodes},
                      {"edges", c.edges},
                      {"instances", c.instances}});
  json inputs = {{"scans_dir", config.paths.scans_dir},
                 {"poses", file_entry(config.paths.poses)},
                 {"point_features", file_entry(config.paths.point_features)},
                 {"cameras", file_entry(config.paths.cameras)},
                 {"grids_dir", config.paths.grids_dir},
                 {"gt", file_entry(config.paths.gt)}};
  json outputs = json::array({"instances.label", "map.aict", "confidence.json", "manifest.json"});
  if (result.report) outputs.push_back("report.json");
  const json manifest = {{"tool", "lidarcut"},
                         {"version", kVersion},
                         {"config", config.to_json()},
                         {"effective",
                          {{"eig_threshold", config.effective_eig_threshold()},
                           {"workers", config.effective_workers()}}},
                         {"seed", config.seed},
                         {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                               std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                               std::to_string(EIGEN_MINOR_VERSION)},
                         {"inputs", inputs},
                         {"outputs", outputs},
                         {"map_points", result.map.cloud.size()},
                         {"instances", result.segmentation.count},
                         {"chunks", chunks},
                         {"seconds", result.seconds}};
  write_json(guard.file("manifest.json"), manifest);
}

}  // namespace

void write_run_outputs(const PipelineConfig& config, const RunResult& result) {
  if (config.paths.output_dir.empty()) throw ConfigError("config has no output_dir");
  OutputGuard guard(config.paths.output_dir);
  stage("write outputs", [&] { write_outputs(config, result, guard); });
  guard.commit();
}

RunResult run(const PipelineConfig& config) {
  if (config.paths.output_dir.empty()) throw ConfigError("config has no output_dir");
  OutputGuard guard(config.paths.output_dir);
  const PipelineInputs inputs = load_inputs(config);
  RunResult result = run_pipeline(config, inputs);
  stage("write outputs", [&] { write_outputs(config, result, guard); });
  guard.commit();
  return result;
}

// ---------------------------------------------------------------- ablation

const std::vector<std::string>& ablation_parameters() {
  static const std::vector<std::string> names = {"theta_s",    "theta_p",       "theta_i", "chunk_edge",
                                                 "ncut_voxel", "eig_threshold", "R"};
  return names;
}

std::vector<AblationRow> ablate(const PipelineConfig& config, const PipelineInputs& inputs,
                                const std::string& parameter, const std::vector<double>& values) {
  const auto& names = ablation_parameters();
  if (std::find(names.begin(), names.end(), parameter) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError("unknown ablation parameter '" + parameter + "' (valid: " + list + ")");
  }
  if (inputs.gt.empty()) throw ConfigError("ablation needs ground-truth labels");
  if (values.empty()) throw ConfigError("ablation needs at least one value");
  std::vector<AblationRow> rows;
  for (double v : values) {
    PipelineConfig c = config;
    if (parameter == "theta_s") c.theta_s = v;
    else if (parameter == "theta_p") c.theta_p = v;
    else if (parameter == "theta_i") c.theta_i = v;
    else if (parameter == "chunk_edge") c.chunk_edge = v;
    else if (parameter == "ncut_voxel") c.ncut_voxel = v;
    else if (parameter == "eig_threshold") c.eig_threshold = v;
    else c.radius = v;
    const RunResult r = run_pipeline(c, inputs);
    rows.push_back({v, *r.report, r.seconds});
  }
  return rows;
}

std::string ablation_table(const std::string& parameter, const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << parameter << "\tP\tR\tF1\tAP25\tAP50\tAP\tS_assoc\twall_s\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%g\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.3f\n", r.value,
                  r.report.precision, r.report.recall, r.report.f1, r.report.ap25, r.report.ap50,
                  r.report.ap_global, r.report.s_assoc, r.seconds);
    out << buf;
  }
  return out.str();
}

}  // namespace lidarcut
