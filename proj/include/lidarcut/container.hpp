#pragma once
// Versioned binary container for pipeline intermediates ("AICT").
//
// Layout: "AICT", u32 version, u32 record count, then per record a u8 type,
// a u64 payload length and the payload. All integers little-endian, reals f64.

#include "lidarcut/geometry.hpp"
#include "lidarcut/graph.hpp"
#include "lidarcut/scene.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace lidarcut {

struct Intermediates {
  std::optional<Points> map_points;
  std::vector<Chunk> chunks;
  std::vector<ProxyGraph> graphs;
};

void write_intermediates(const std::filesystem::path& path, const Intermediates& data);
Intermediates load_intermediates(const std::filesystem::path& path);

}  // namespace lidarcut
