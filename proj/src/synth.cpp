#include "lidarcut/synth.hpp"

#include "lidarcut/errors.hpp"
#include "lidarcut/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

namespace lidarcut {

nlohmann::json SceneSpec::to_json() const {
  return {{"seed", seed},
          {"n_objects", n_objects},
          {"size_min", size_min},
          {"size_max", size_max},
          {"min_gap", min_gap},
          {"touching_pairs", touching_pairs},
          {"pair_gap", pair_gap},
          {"ground_length", ground_length},
          {"ground_width", ground_width},
          {"ground_x0", ground_x0},
          {"ground_density", ground_density},
          {"object_density", object_density},
          {"ground_noise", ground_noise},
          {"object_lift", object_lift},
          {"embed_dim", embed_dim},
          {"embed_noise", embed_noise},
          {"embed_scale", embed_scale},
          {"trajectory_length", trajectory_length},
          {"pose_spacing", pose_spacing},
          {"sensor_height", sensor_height},
          {"max_yaw", max_yaw},
          {"map_voxel", map_voxel},
          {"cameras", cameras},
          {"image_width", image_width},
          {"image_height", image_height},
          {"focal", focal},
          {"grid_scale", grid_scale},
          {"image_embed_dim", image_embed_dim}};
}

SceneSpec SceneSpec::from_json(const nlohmann::json& j) {
  SceneSpec s;
  const nlohmann::json base = s.to_json();
  for (const auto& [key, value] : j.items())
    if (!base.contains(key)) throw ConfigError("unknown scene field '" + key + "'");
  auto get = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("scene field '") + key + "': " + e.what());
    }
  };
  get("seed", s.seed);
  get("n_objects", s.n_objects);
  get("size_min", s.size_min);
  get("size_max", s.size_max);
  get("min_gap", s.min_gap);
  get("touching_pairs", s.touching_pairs);
  get("pair_gap", s.pair_gap);
  get("ground_length", s.ground_length);
  get("ground_width", s.ground_width);
  get("ground_x0", s.ground_x0);
  get("ground_density", s.ground_density);
  get("object_density", s.object_density);
  get("ground_noise", s.ground_noise);
  get("object_lift", s.object_lift);
  get("embed_dim", s.embed_dim);
  get("embed_noise", s.embed_noise);
  get("embed_scale", s.embed_scale);
  get("trajectory_length", s.trajectory_length);
  get("pose_spacing", s.pose_spacing);
  get("sensor_height", s.sensor_height);
  get("max_yaw", s.max_yaw);
  get("map_voxel", s.map_voxel);
  get("cameras", s.cameras);
  get("image_width", s.image_width);
  get("image_height", s.image_height);
  get("focal", s.focal);
  get("grid_scale", s.grid_scale);
  get("image_embed_dim", s.image_embed_dim);
  return s;
}

double box_gap(const Aabb& a, const Aabb& b) {
  const Point3 d = (a.min - b.max).cwiseMax(b.min - a.max).cwiseMax(0.0);
  return d.norm();
}

namespace {

void validate(const SceneSpec& s) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("scene spec: ") + what);
  };
  require(s.n_objects >= 0, "n_objects must be >= 0");
  require(s.size_min > 0.0 && s.size_max >= s.size_min, "need 0 < size_min <= size_max");
  require(s.min_gap >= 0.0 && s.pair_gap >= 0.0, "gaps must be >= 0");
  require(s.ground_length > 0.0 && s.ground_width > 0.0, "ground extent must be positive");
  require(s.ground_density > 0.0 && s.object_density > 0.0, "densities must be positive");
  require(s.ground_noise >= 0.0 && s.object_lift >= 0.0, "ground_noise and object_lift must be >= 0");
  require(s.embed_dim >= 1 && s.image_embed_dim >= 1, "embedding dims must be >= 1");
  require(s.embed_noise >= 0.0 && s.embed_scale > 0.0, "embed_noise >= 0 and embed_scale > 0 required");
  require(s.trajectory_length >= 0.0 && s.pose_spacing > 0.0, "invalid trajectory");
  require(s.map_voxel > 0.0, "map_voxel must be positive");
  require(s.image_width > 0 && s.image_height > 0 && s.focal > 0.0 && s.grid_scale > 0.0f, "invalid camera");
}

Eigen::VectorXd prototype(std::mt19937_64& rng, int dim, double scale) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd v(dim);
  do {
    for (int k = 0; k < dim; ++k) v(k) = g(rng);
  } while (v.norm() < 1e-6);
  return v.normalized() * scale;
}

struct Footprint {
  ObjectShape shape;
  Point3 extent;  // x, y, height
};

Footprint random_footprint(std::mt19937_64& rng, const SceneSpec& s) {
  std::uniform_real_distribution<double> size(s.size_min, s.size_max);
  std::bernoulli_distribution cyl(0.5);
  Footprint f;
  f.shape = cyl(rng) ? ObjectShape::Cylinder : ObjectShape::Box;
  if (f.shape == ObjectShape::Cylinder) {
    const double d = size(rng);
    f.extent = {d, d, size(rng)};
  } else {
    const double sx = size(rng), sy = size(rng);
    f.extent = {sx, sy, size(rng)};
  }
  return f;
}

std::vector<SceneObject> place_objects(std::mt19937_64& rng, const SceneSpec& s,
                                       std::vector<ObjectShape>& shapes) {
  std::vector<SceneObject> placed;
  const int groups = s.touching_pairs ? (s.n_objects + 1) / 2 : s.n_objects;
  constexpr int kAttempts = 2000;
  const double margin = 1.0;
  for (int g = 0; g < groups; ++g) {
    const int members = s.touching_pairs && 2 * g + 1 < s.n_objects ? 2 : 1;
    bool ok = false;
    for (int attempt = 0; attempt < kAttempts && !ok; ++attempt) {
      Footprint f[2] = {random_footprint(rng, s), random_footprint(rng, s)};
      const bool along_x = std::bernoulli_distribution(0.5)(rng);
      Point3 offset[2] = {Point3::Zero(), Point3::Zero()};
      Point3 group_extent = f[0].extent;
      if (members == 2) {
        if (along_x) {
          offset[1].x() = f[0].extent.x() + s.pair_gap;
          group_extent.x() = offset[1].x() + f[1].extent.x();
          group_extent.y() = std::max(f[0].extent.y(), f[1].extent.y());
        } else {
          offset[1].y() = f[0].extent.y() + s.pair_gap;
          group_extent.y() = offset[1].y() + f[1].extent.y();
          group_extent.x() = std::max(f[0].extent.x(), f[1].extent.x());
        }
      }
      const double xlo = s.ground_x0 + margin, xhi = s.ground_x0 + s.ground_length - margin - group_extent.x();
      const double ylo = -s.ground_width / 2 + margin, yhi = s.ground_width / 2 - margin - group_extent.y();
      if (xhi < xlo || yhi < ylo) continue;
      const double x0 = std::uniform_real_distribution<double>(xlo, xhi)(rng);
      const double y0 = std::uniform_real_distribution<double>(ylo, yhi)(rng);
      std::vector<SceneObject> candidate;
      for (int m = 0; m < members; ++m) {
        SceneObject o;
        o.shape = f[m].shape;
        o.box.min = Point3(x0, y0, s.object_lift) + offset[m];
        o.box.max = o.box.min + f[m].extent;
        candidate.push_back(o);
      }
      ok = true;
      for (const auto& c : candidate)
        for (const auto& p : placed)
          if (box_gap(c.box, p.box) < s.min_gap) ok = false;
      if (ok)
        for (auto& c : candidate) {
          c.id = static_cast<std::uint32_t>(placed.size() + 1);
          placed.push_back(c);
          shapes.push_back(c.shape);
        }
    }
    if (!ok)
      throw ConfigError("could not place " + std::to_string(s.n_objects) + " objects with min_gap " +
                        std::to_string(s.min_gap) + " m on the ground strip; lower n_objects");
  }
  return placed;
}

Eigen::Matrix3d yaw_rotation(double yaw) {
  return Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

Point3 to_float(const Point3& p) {
  return {static_cast<double>(static_cast<float>(p.x())), static_cast<double>(static_cast<float>(p.y())),
          static_cast<double>(static_cast<float>(p.z()))};
}

}  // namespace

SyntheticScene generate_scene(const SceneSpec& spec) {
  validate(spec);
  SyntheticScene scene;
  scene.spec = spec;
  std::mt19937_64 rng(spec.seed);

  std::vector<ObjectShape> shapes;
  scene.objects = place_objects(rng, spec, shapes);

  // World points with labels.
  Points world;
  std::vector<std::uint32_t> label;
  {
    std::uniform_real_distribution<double> ux(spec.ground_x0, spec.ground_x0 + spec.ground_length);
    std::uniform_real_distribution<double> uy(-spec.ground_width / 2, spec.ground_width / 2);
    std::normal_distribution<double> nz(0.0, spec.ground_noise);
    const auto count = static_cast<std::size_t>(std::llround(spec.ground_density * spec.ground_length * spec.ground_width));
    for (std::size_t i = 0; i < count; ++i) {
      const double x = ux(rng), y = uy(rng);
      world.emplace_back(x, y, spec.ground_noise > 0.0 ? nz(rng) : 0.0);
      label.push_back(0);
    }
  }
  for (const auto& o : scene.objects) {
    const Point3 e = o.box.max - o.box.min;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double volume = o.shape == ObjectShape::Box ? e.prod() : std::numbers::pi / 4 * e.x() * e.y() * e.z();
    const auto count = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(spec.object_density * volume)));
    for (std::size_t i = 0; i < count;) {
      const Point3 t(u(rng), u(rng), u(rng));
      if (o.shape == ObjectShape::Cylinder && (t.head<2>() - Eigen::Vector2d(0.5, 0.5)).squaredNorm() > 0.25) continue;
      world.push_back(o.box.min + e.cwiseProduct(t));
      label.push_back(o.id);
      ++i;
    }
  }

  // Trajectory along +x at y = 0.
  const auto n_poses = static_cast<std::size_t>(std::floor(spec.trajectory_length / spec.pose_spacing)) + 1;
  std::uniform_real_distribution<double> yaw(-spec.max_yaw, spec.max_yaw);
  for (std::size_t k = 0; k < n_poses; ++k) {
    RigidPose p;
    p.rotation = yaw_rotation(spec.max_yaw > 0.0 ? yaw(rng) : 0.0);
    p.translation = {static_cast<double>(k) * spec.pose_spacing, 0.0, spec.sensor_height};
    scene.poses.push_back(p);
  }

  // Each point is observed by the nearest pose.
  std::vector<std::vector<std::size_t>> members(n_poses);
  for (std::size_t i = 0; i < world.size(); ++i) {
    const double k = std::round(world[i].x() / spec.pose_spacing);
    members[static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(n_poses - 1)))].push_back(i);
  }
  std::uniform_real_distribution<float> uint(0.0f, 1.0f);
  std::vector<std::uint32_t> scan_label;
  scene.scans.resize(n_poses);
  for (std::size_t k = 0; k < n_poses; ++k) {
    const RigidPose inv = scene.poses[k].inverse();
    for (auto i : members[k]) {
      scene.scans[k].points.push_back(to_float(inv.apply(world[i])));
      scene.scans[k].intensity.push_back(uint(rng));
      scan_label.push_back(label[i]);
    }
  }

  // Point embeddings: per-instance prototype plus Gaussian noise.
  std::uint32_t max_id = static_cast<std::uint32_t>(scene.objects.size());
  std::vector<Eigen::VectorXd> proto;
  for (std::uint32_t id = 0; id <= max_id; ++id) proto.push_back(prototype(rng, spec.embed_dim, spec.embed_scale));
  scene.point_features = FeatureChannel(ChannelKind::Point, static_cast<std::size_t>(spec.embed_dim), scan_label.size());
  std::normal_distribution<double> noise(0.0, spec.embed_noise);
  for (std::size_t i = 0; i < scan_label.size(); ++i) {
    auto row = scene.point_features.row(i);
    for (int d = 0; d < spec.embed_dim; ++d) {
      const double v = proto[scan_label[i]](d) + (spec.embed_noise > 0.0 ? noise(rng) : 0.0);
      row[static_cast<std::size_t>(d)] = static_cast<float>(v);
    }
  }

  // Aggregated map and per-map-point ground truth.
  scene.map = aggregate(scene.scans, scene.poses, spec.map_voxel);
  {
    Points w;
    w.reserve(scan_label.size());
    for (std::size_t k = 0; k < n_poses; ++k)
      for (const auto& p : scene.scans[k].points) w.push_back(scene.poses[k].apply(p));
    const Downsampled ds = voxel_downsample(w, spec.map_voxel);
    scene.gt.assign(ds.points.size(), std::numeric_limits<std::uint32_t>::max());
    for (std::size_t i = 0; i < w.size(); ++i) {
      auto& g = scene.gt[ds.representative_of[i]];
      if (g == std::numeric_limits<std::uint32_t>::max()) g = scan_label[i];
    }
  }

  if (spec.cameras) {
    CameraModel cam;
    cam.width = spec.image_width;
    cam.height = spec.image_height;
    cam.projection << spec.focal, 0, spec.image_width / 2.0, 0,  //
        0, spec.focal, spec.image_height / 2.0, 0,               //
        0, 0, 1, 0;
    cam.extrinsic.rotation << 0, 0, 1,  //
        -1, 0, 0,                       //
        0, -1, 0;
    scene.cameras.push_back(cam);

    std::vector<Eigen::VectorXd> image_proto;
    for (std::uint32_t id = 0; id <= max_id; ++id)
      image_proto.push_back(prototype(rng, spec.image_embed_dim, spec.embed_scale));
    const auto& pts = scene.map.cloud.points;
    for (std::size_t k = 0; k < n_poses; ++k) {
      FeatureMapGrid g;
      g.scale = spec.grid_scale;
      g.rows = static_cast<std::uint32_t>(spec.image_height / spec.grid_scale);
      g.cols = static_cast<std::uint32_t>(spec.image_width / spec.grid_scale);
      g.dim = static_cast<std::uint32_t>(spec.image_embed_dim);
      g.values.assign(static_cast<std::size_t>(g.rows) * g.cols * g.dim, 0.0f);
      std::vector<double> depth(static_cast<std::size_t>(g.rows) * g.cols, std::numeric_limits<double>::infinity());
      std::vector<std::uint32_t> owner(depth.size(), 0);
      const RigidPose cam_from_world = scene.poses[k].compose(cam.extrinsic).inverse();
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const Point3 c = cam_from_world.apply(pts[i]);
        Eigen::Vector2d uv;
        if (!project(cam, c, uv)) continue;
        const double r = std::floor(uv.y() / g.scale), col = std::floor(uv.x() / g.scale);
        if (r < 0 || col < 0 || r >= g.rows || col >= g.cols) continue;
        const auto cell = static_cast<std::size_t>(r) * g.cols + static_cast<std::size_t>(col);
        if (c.z() < depth[cell]) {
          depth[cell] = c.z();
          owner[cell] = scene.gt[i];
        }
      }
      for (std::size_t cell = 0; cell < depth.size(); ++cell) {
        if (!std::isfinite(depth[cell])) continue;
        for (std::uint32_t d = 0; d < g.dim; ++d) g.values[cell * g.dim + d] = static_cast<float>(image_proto[owner[cell]](d));
      }
      scene.grids.push_back(std::move(g));
    }
  }
  return scene;
}

std::filesystem::path grid_path(const std::filesystem::path& grids_dir, std::size_t pose, std::size_t camera) {
  char name[32];
  std::snprintf(name, sizeof name, "%06zu_%02zu.aigr", pose, camera);
  return grids_dir / name;
}

void write_scene(const SyntheticScene& scene, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "scans");
  for (std::size_t k = 0; k < scene.scans.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.bin", k);
    write_scan(dir / "scans" / name, scene.scans[k]);
  }
  write_poses(dir / "poses.txt", scene.poses);
  write_feature_file(dir / "point_features.aifb", scene.point_features);
  write_instance_labels(dir / "gt.label", scene.gt);
  if (!scene.cameras.empty()) {
    write_cameras(dir / "cameras.txt", scene.cameras);
    fs::create_directories(dir / "grids");
    const std::size_t per_pose = scene.cameras.size();
    for (std::size_t v = 0; v < scene.grids.size(); ++v)
      write_grid(grid_path(dir / "grids", v / per_pose, v % per_pose), scene.grids[v]);
  }
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : scene.objects)
    objects.push_back({{"id", o.id},
                       {"shape", o.shape == ObjectShape::Box ? "box" : "cylinder"},
                       {"min", {o.box.min.x(), o.box.min.y(), o.box.min.z()}},
                       {"max", {o.box.max.x(), o.box.max.y(), o.box.max.z()}}});
  const nlohmann::json meta = {{"spec", scene.spec.to_json()},
                               {"objects", objects},
                               {"map_points", scene.map.cloud.size()},
                               {"scans", scene.scans.size()}};
  std::ofstream out(dir / "scene.json", std::ios::trunc);
  out << meta.dump(2) << '\n';
  if (!out) throw DataError("write failure on " + (dir / "scene.json").string());
}

}  // namespace lidarcut
