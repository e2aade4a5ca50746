#include "lidarcut/features.hpp"

#include "binary_io.hpp"
#include "lidarcut/convex_hull.hpp"
#include "lidarcut/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace lidarcut {

using detail::Bytes;
using detail::put;

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint32_t kFormatVersion = 1;
}  // namespace

std::string to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::Spatial: return "S";
    case ChannelKind::Point: return "P";
    case ChannelKind::Image: return "I";
  }
  return "?";
}

FeatureChannel::FeatureChannel(ChannelKind k, std::size_t d, std::size_t rows, double th)
    : kind(k), dim(d), values(rows * d, 0.0), present(rows, 1), theta(th) {}

void FeatureChannel::set_absent(std::size_t i) {
  present[i] = 0;
  std::fill_n(values.begin() + static_cast<std::ptrdiff_t>(i * dim), dim, kNaN);
}

FeatureChannel spatial_channel(const Chunk& chunk, double theta) {
  if (chunk.ds_points.empty()) throw std::invalid_argument("spatial_channel: empty chunk");
  if (!(theta > 0.0)) throw std::invalid_argument("spatial_channel: theta must be positive");
  FeatureChannel ch(ChannelKind::Spatial, 3, chunk.ds_points.size(), theta);
  for (std::size_t i = 0; i < chunk.ds_points.size(); ++i) {
    auto r = ch.row(i);
    r[0] = chunk.ds_points[i].x();
    r[1] = chunk.ds_points[i].y();
    r[2] = chunk.ds_points[i].z();
  }
  return ch;
}

// ---------------------------------------------------------------- AIFB files

FeatureChannel load_feature_file(const std::filesystem::path& path) {
  const Bytes data = detail::read_file(path);
  detail::Reader r(data, path.string());
  r.need(4);
  if (std::memcmp(r.cursor(), "AIFB", 4) != 0) throw DataError(path.string() + ": bad magic (expected AIFB)");
  r.skip(4);
  const auto version = r.get<std::uint32_t>();
  if (version != kFormatVersion)
    throw DataError(path.string() + ": unsupported AIFB version " + std::to_string(version));
  const auto kind = r.get<std::uint8_t>();
  if (kind != 1 && kind != 2) throw DataError(path.string() + ": unknown channel kind " + std::to_string(kind));
  const auto n = r.get<std::uint32_t>();
  const auto d = r.get<std::uint32_t>();
  if (d == 0) throw DataError(path.string() + ": feature dimension is 0");
  const std::size_t payload = static_cast<std::size_t>(n) * d * sizeof(float);
  if (r.remaining() < payload)
    throw DataError(path.string() + ": truncated payload (" + std::to_string(r.remaining()) +
                    " of " + std::to_string(payload) + " bytes)");
  if (r.remaining() > payload) throw DataError(path.string() + ": trailing bytes after payload");

  FeatureChannel ch(kind == 1 ? ChannelKind::Point : ChannelKind::Image, d, n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    bool all_nan = true;
    auto row = ch.row(i);
    for (std::size_t k = 0; k < d; ++k) {
      const float v = r.get<float>();
      row[k] = v;
      all_nan = all_nan && std::isnan(v);
    }
    if (all_nan) ch.present[i] = 0;
  }
  return ch;
}

void write_feature_file(const std::filesystem::path& path, const FeatureChannel& ch) {
  if (ch.kind == ChannelKind::Spatial) throw std::invalid_argument("AIFB stores only P or I channels");
  if (ch.dim == 0) throw std::invalid_argument("AIFB: feature dimension is 0");
  Bytes out{'A', 'I', 'F', 'B'};
  put(out, kFormatVersion);
  put(out, static_cast<std::uint8_t>(ch.kind == ChannelKind::Point ? 1 : 2));
  put(out, static_cast<std::uint32_t>(ch.rows()));
  put(out, static_cast<std::uint32_t>(ch.dim));
  for (std::size_t i = 0; i < ch.rows(); ++i) {
    const auto row = ch.row(i);
    for (std::size_t k = 0; k < ch.dim; ++k)
      put(out, ch.is_present(i) ? static_cast<float>(row[k]) : std::numeric_limits<float>::quiet_NaN());
  }
  detail::write_file(path, out);
}

// ---------------------------------------------------------------- cameras

std::vector<CameraModel> load_cameras(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open camera file " + path.string());
  std::vector<CameraModel> cams;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    CameraModel cam;
    for (int k = 0; k < 12; ++k)
      if (!(ls >> cam.projection(k / 4, k % 4)))
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 12 reals");
    if (!(ls >> cam.width >> cam.height))
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected width and height");
    double ext[12];
    int got = 0;
    while (got < 12 && (ls >> ext[got])) ++got;
    if (got != 0 && got != 12)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": extrinsic needs 12 reals");
    if (got == 12) {
      for (int k = 0; k < 12; ++k) {
        if (k % 4 == 3) cam.extrinsic.translation(k / 4) = ext[k];
        else cam.extrinsic.rotation(k / 4, k % 4) = ext[k];
      }
      if (!cam.extrinsic.is_valid())
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": extrinsic is not a rigid transform");
    }
    std::string extra;
    if (ls >> extra) throw DataError(path.string() + ":" + std::to_string(lineno) + ": trailing tokens");
    if (cam.width <= 0 || cam.height <= 0 || !cam.projection.allFinite())
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": invalid camera");
    cams.push_back(cam);
  }
  return cams;
}

void write_cameras(const std::filesystem::path& path, std::span<const CameraModel> cameras) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  char buf[40];
  for (const auto& cam : cameras) {
    for (int k = 0; k < 12; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", cam.projection(k / 4, k % 4));
      out << buf << ' ';
    }
    out << cam.width << ' ' << cam.height;
    for (int k = 0; k < 12; ++k) {
      const double v = k % 4 == 3 ? cam.extrinsic.translation(k / 4) : cam.extrinsic.rotation(k / 4, k % 4);
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ' ' << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("write failure on " + path.string());
}

// ---------------------------------------------------------------- grids

FeatureMapGrid load_grid(const std::filesystem::path& path) {
  const Bytes data = detail::read_file(path);
  detail::Reader r(data, path.string());
  r.need(4);
  if (std::memcmp(r.cursor(), "AIGR", 4) != 0) throw DataError(path.string() + ": bad magic (expected AIGR)");
  r.skip(4);
  const auto version = r.get<std::uint32_t>();
  if (version != kFormatVersion)
    throw DataError(path.string() + ": unsupported grid version " + std::to_string(version));
  FeatureMapGrid g;
  g.rows = r.get<std::uint32_t>();
  g.cols = r.get<std::uint32_t>();
  g.dim = r.get<std::uint32_t>();
  g.scale = r.get<float>();
  if (g.rows == 0 || g.cols == 0 || g.dim == 0 || !(g.scale > 0.0f))
    throw DataError(path.string() + ": invalid grid header");
  const std::size_t count = static_cast<std::size_t>(g.rows) * g.cols * g.dim;
  if (r.remaining() != count * sizeof(float))
    throw DataError(path.string() + ": payload is " + std::to_string(r.remaining()) + " bytes, expected " +
                    std::to_string(count * sizeof(float)));
  g.values.resize(count);
  for (auto& v : g.values) {
    v = r.get<float>();
    if (!std::isfinite(v)) throw DataError(path.string() + ": non-finite grid value");
  }
  return g;
}

void write_grid(const std::filesystem::path& path, const FeatureMapGrid& g) {
  if (g.values.size() != static_cast<std::size_t>(g.rows) * g.cols * g.dim)
    throw std::invalid_argument("write_grid: value count does not match dimensions");
  Bytes out{'A', 'I', 'G', 'R'};
  put(out, kFormatVersion);
  put(out, g.rows);
  put(out, g.cols);
  put(out, g.dim);
  put(out, g.scale);
  for (float v : g.values) put(out, v);
  detail::write_file(path, out);
}

// ---------------------------------------------------------------- visibility

std::vector<std::uint8_t> hidden_point_removal(std::span<const Point3> points,
                                               const Point3& viewpoint, double gamma) {
  if (points.empty()) throw std::invalid_argument("hidden_point_removal: no points");
  if (!(gamma > 0.0)) throw std::invalid_argument("hidden_point_removal: gamma must be positive");
  double max_dist = 0.0;
  for (const auto& p : points) max_dist = std::max(max_dist, (p - viewpoint).norm());
  if (max_dist == 0.0)
    throw std::invalid_argument("hidden_point_removal: all points coincide with the viewpoint");
  const double radius = gamma * max_dist;

  // Flipped cloud; the viewpoint itself (origin) is appended last.
  Points flipped;
  std::vector<std::size_t> source;
  flipped.reserve(points.size() + 1);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point3 p = points[i] - viewpoint;
    const double norm = p.norm();
    if (norm == 0.0) continue;
    flipped.push_back(p + 2.0 * (radius - norm) * p / norm);
    source.push_back(i);
  }
  flipped.push_back(Point3::Zero());

  std::vector<std::uint8_t> visible(points.size(), 0);
  for (std::size_t v : convex_hull_vertices(flipped))
    if (v < source.size()) visible[source[v]] = 1;
  return visible;
}

bool project(const CameraModel& model, const Point3& camera_point, Eigen::Vector2d& pixel) {
  const Eigen::Vector3d h = model.projection * camera_point.homogeneous();
  if (!(h.z() > 0.0)) return false;
  pixel = h.head<2>() / h.z();
  return true;
}

ViewIndex build_view_index(const AggregatedMap& map, std::span<const Camera> cameras, double gamma) {
  const auto& pts = map.cloud.points;
  ViewIndex index(pts.size());
  for (std::size_t v = 0; v < cameras.size(); ++v) {
    const auto& cam = cameras[v];
    const RigidPose cam_from_world = cam.pose.inverse();
    std::vector<std::size_t> cand;
    std::vector<Eigen::Vector2d> pix;
    Points world;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      Eigen::Vector2d uv;
      if (!project(cam.model, cam_from_world.apply(pts[i]), uv)) continue;
      if (uv.x() < 0.0 || uv.y() < 0.0 || uv.x() >= cam.model.width || uv.y() >= cam.model.height) continue;
      cand.push_back(i);
      pix.push_back(uv);
      world.push_back(pts[i]);
    }
    if (cand.empty()) continue;
    const auto visible = hidden_point_removal(world, cam.pose.translation, gamma);
    for (std::size_t k = 0; k < cand.size(); ++k)
      if (visible[k]) index[cand[k]].push_back({static_cast<std::uint32_t>(v), pix[k]});
  }
  return index;
}

FeatureChannel project_image_features(const ViewIndex& view_index,
                                      std::span<const FeatureMapGrid> grids, double theta) {
  std::size_t dim = 0;
  for (const auto& obs : view_index)
    for (const auto& o : obs) {
      if (o.view >= grids.size())
        throw std::invalid_argument("project_image_features: no grid for view " + std::to_string(o.view));
      if (dim == 0) dim = grids[o.view].dim;
      if (grids[o.view].dim != dim) throw std::invalid_argument("project_image_features: grid dims differ");
    }
  if (dim == 0 && !grids.empty()) dim = grids[0].dim;
  FeatureChannel ch(ChannelKind::Image, std::max<std::size_t>(dim, 1), view_index.size(), theta);
  std::vector<double> acc(ch.dim);
  for (std::size_t i = 0; i < view_index.size(); ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    std::size_t used = 0;
    for (const auto& o : view_index[i]) {
      const auto& g = grids[o.view];
      const double r = std::floor(o.pixel.y() / g.scale), c = std::floor(o.pixel.x() / g.scale);
      if (r < 0 || c < 0 || r >= g.rows || c >= g.cols) continue;
      const auto cell = g.cell(static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c));
      for (std::size_t k = 0; k < ch.dim; ++k) acc[k] += cell[k];
      ++used;
    }
    if (used == 0) {
      ch.set_absent(i);
      continue;
    }
    auto row = ch.row(i);
    for (std::size_t k = 0; k < ch.dim; ++k) row[k] = acc[k] / static_cast<double>(used);
  }
  return ch;
}

FeatureChannel downsample_channel(const Chunk& chunk, const FeatureChannel& per_map_point) {
  FeatureChannel out(per_map_point.kind, per_map_point.dim, chunk.ds_points.size(), per_map_point.theta);
  std::vector<std::size_t> used(out.rows(), 0);
  for (std::size_t k = 0; k < chunk.raw_indices.size(); ++k) {
    const std::size_t src = chunk.raw_indices[k];
    if (src >= per_map_point.rows()) throw std::invalid_argument("downsample_channel: channel shorter than map");
    if (!per_map_point.is_present(src)) continue;
    const std::size_t dst = chunk.ds_to_raw[k];
    auto row = out.row(dst);
    const auto in = per_map_point.row(src);
    for (std::size_t d = 0; d < out.dim; ++d) row[d] += in[d];
    ++used[dst];
  }
  for (std::size_t i = 0; i < out.rows(); ++i) {
    if (used[i] == 0) {
      out.set_absent(i);
      continue;
    }
    for (double& v : out.row(i)) v /= static_cast<double>(used[i]);
  }
  return out;
}

ScanFeatureIndex::ScanFeatureIndex(Points world_points, FeatureChannel vectors, double cell)
    : vectors_(std::move(vectors)), index_(world_points, cell) {
  if (world_points.size() != vectors_.rows())
    throw std::invalid_argument("scan points and embeddings differ in length (" +
                                std::to_string(world_points.size()) + " vs " +
                                std::to_string(vectors_.rows()) + ")");
}

FeatureChannel aggregate_point_features(const Chunk& chunk, const ScanFeatureIndex& scans,
                                        double r, double theta) {
  if (!(r > 0.0)) throw std::invalid_argument("aggregate_point_features: radius must be positive");
  if (scans.index().size() == 0) throw std::invalid_argument("aggregate_point_features: no scan points");
  const auto& vec = scans.vectors();
  FeatureChannel out(ChannelKind::Point, vec.dim, chunk.ds_points.size(), theta);
  std::vector<std::size_t> nb;
  for (std::size_t i = 0; i < chunk.ds_points.size(); ++i) {
    scans.index().radius_query(chunk.ds_points[i], r, nb);
    auto row = out.row(i);
    std::size_t used = 0;
    for (auto j : nb) {
      if (!vec.is_present(j)) continue;
      const auto in = vec.row(j);
      for (std::size_t d = 0; d < vec.dim; ++d) row[d] += in[d];
      ++used;
    }
    if (used > 0) {
      for (double& v : row) v /= static_cast<double>(used);
      continue;
    }
    const std::size_t j = scans.index().nearest(chunk.ds_points[i]);
    if (!vec.is_present(j)) {
      out.set_absent(i);
      continue;
    }
    const auto in = vec.row(j);
    std::copy(in.begin(), in.end(), row.begin());
  }
  return out;
}

FeatureChannel aggregate_point_features(const Chunk& chunk, std::span<const Point3> scan_points,
                                        const FeatureChannel& scan_vectors, double r, double theta) {
  const ScanFeatureIndex idx(Points(scan_points.begin(), scan_points.end()), scan_vectors, r);
  return aggregate_point_features(chunk, idx, r, theta);
}

}  // namespace lidarcut
