#include "lidarcut/io.hpp"

#include "binary_io.hpp"
#include "lidarcut/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace lidarcut {

using detail::Bytes;
using detail::put;

PointCloud load_scan(const std::filesystem::path& path) {
  const Bytes data = detail::read_file(path);
  if (data.size() % 16 != 0)
    throw DataError(path.string() + ": scan size " + std::to_string(data.size()) +
                    " bytes is not a multiple of 16");
  const std::size_t n = data.size() / 16;
  PointCloud cloud;
  cloud.points.reserve(n);
  cloud.intensity.reserve(n);
  detail::Reader r(data, path.string());
  for (std::size_t i = 0; i < n; ++i) {
    const float x = r.get<float>(), y = r.get<float>(), z = r.get<float>(), in = r.get<float>();
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
      throw DataError(path.string() + ": point " + std::to_string(i) + " has a non-finite coordinate");
    cloud.points.emplace_back(x, y, z);
    cloud.intensity.push_back(in);
  }
  return cloud;
}

void write_scan(const std::filesystem::path& path, const PointCloud& cloud) {
  Bytes out;
  out.reserve(cloud.size() * 16);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    put(out, static_cast<float>(p.x()));
    put(out, static_cast<float>(p.y()));
    put(out, static_cast<float>(p.z()));
    put(out, i < cloud.intensity.size() ? cloud.intensity[i] : 0.0f);
  }
  detail::write_file(path, out);
}

std::vector<RigidPose> load_poses(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pose file " + path.string());
  std::vector<RigidPose> poses;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    double v[12];
    for (double& x : v)
      if (!(ls >> x))
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 12 reals");
    std::string extra;
    if (ls >> extra)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": trailing data");
    RigidPose pose;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) pose.rotation(r, c) = v[r * 4 + c];
      pose.translation(r) = v[r * 4 + 3];
    }
    if (!pose.is_valid())
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": rotation is not orthonormal");
    poses.push_back(pose);
  }
  return poses;
}

void write_poses(const std::filesystem::path& path, std::span<const RigidPose> poses) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  char buf[40];
  for (const auto& pose : poses) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) {
        const double v = c < 3 ? pose.rotation(r, c) : pose.translation(r);
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf << ((r == 2 && c == 3) ? '\n' : ' ');
      }
  }
  if (!out) throw DataError("write failure on " + path.string());
}

std::vector<std::uint32_t> load_instance_labels(const std::filesystem::path& path) {
  const Bytes data = detail::read_file(path);
  if (data.size() % 4 != 0)
    throw DataError(path.string() + ": label file size " + std::to_string(data.size()) +
                    " is not a multiple of 4");
  std::vector<std::uint32_t> ids(data.size() / 4);
  detail::Reader r(data, path.string());
  for (auto& id : ids) id = decode_instance(r.get<std::uint32_t>());
  return ids;
}

void write_instance_labels(const std::filesystem::path& path, std::span<const std::uint32_t> ids) {
  Bytes out;
  out.reserve(ids.size() * 4);
  for (std::uint32_t id : ids) {
    if (id > 0xFFFFu) throw DataError("instance id " + std::to_string(id) + " exceeds 16 bits");
    put(out, encode_label(id));
  }
  detail::write_file(path, out);
}

Rgb instance_color(std::uint32_t id) {
  if (id == 0) return {128, 128, 128};
  // splitmix64 finalizer
  std::uint64_t z = static_cast<std::uint64_t>(id) + 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  z ^= z >> 31;
  return {static_cast<std::uint8_t>(64 + (z & 0xBF)), static_cast<std::uint8_t>(64 + ((z >> 8) & 0xBF)),
          static_cast<std::uint8_t>(64 + ((z >> 16) & 0xBF))};
}

namespace {

constexpr const char* kPlyHeaderTail =
    "property float x\n"
    "property float y\n"
    "property float z\n"
    "property uchar red\n"
    "property uchar green\n"
    "property uchar blue\n"
    "end_header\n";

}  // namespace

void write_ply(const std::filesystem::path& path, std::span<const PlyVertex> vertices) {
  const std::string header = "ply\nformat binary_little_endian 1.0\nelement vertex " +
                             std::to_string(vertices.size()) + "\n" + kPlyHeaderTail;
  Bytes out(header.begin(), header.end());
  out.reserve(header.size() + vertices.size() * 15);
  for (const auto& v : vertices) {
    put(out, v.x);
    put(out, v.y);
    put(out, v.z);
    for (auto c : v.color) out.push_back(c);
  }
  detail::write_file(path, out);
}

std::vector<PlyVertex> load_ply(const std::filesystem::path& path) {
  const Bytes data = detail::read_file(path);
  const std::string text(data.begin(), data.end());
  const std::string prefix = "ply\nformat binary_little_endian 1.0\nelement vertex ";
  if (text.compare(0, prefix.size(), prefix) != 0)
    throw DataError(path.string() + ": not a binary little-endian PLY written by this tool");
  const std::size_t eol = text.find('\n', prefix.size());
  if (eol == std::string::npos) throw DataError(path.string() + ": truncated PLY header");
  std::size_t count = 0;
  try {
    count = std::stoull(text.substr(prefix.size(), eol - prefix.size()));
  } catch (const std::exception&) {
    throw DataError(path.string() + ": bad vertex count");
  }
  if (text.compare(eol + 1, std::string(kPlyHeaderTail).size(), kPlyHeaderTail) != 0)
    throw DataError(path.string() + ": unexpected PLY properties");
  detail::Reader r(data, path.string());
  r.skip(eol + 1 + std::string(kPlyHeaderTail).size());
  if (count > r.remaining() / 15) throw DataError(path.string() + ": truncated PLY payload");
  std::vector<PlyVertex> out(count);
  for (auto& v : out) {
    v.x = r.get<float>();
    v.y = r.get<float>();
    v.z = r.get<float>();
    for (auto& c : v.color) c = r.get<std::uint8_t>();
  }
  if (r.remaining() != 0) throw DataError(path.string() + ": trailing bytes after PLY payload");
  return out;
}

void export_ply(const std::filesystem::path& path, std::span<const Point3> points,
                std::span<const std::uint32_t> instance_ids) {
  if (points.size() != instance_ids.size())
    throw std::invalid_argument("export_ply: points and labels differ in length");
  std::vector<PlyVertex> verts(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    verts[i] = {static_cast<float>(points[i].x()), static_cast<float>(points[i].y()),
                static_cast<float>(points[i].z()), instance_color(instance_ids[i])};
  write_ply(path, verts);
}

}  // namespace lidarcut
