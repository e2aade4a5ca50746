#pragma once

#include "lidarcut/geometry.hpp"

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace lidarcut {

/// Integer voxel coordinate, cell = floor(coord / size) per axis.
struct CellKey {
  std::int64_t x = 0, y = 0, z = 0;

  bool operator==(const CellKey&) const = default;
  auto operator<=>(const CellKey&) const = default;

  static CellKey of(const Point3& p, double size);
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

/// Uniform hash grid over a fixed point set. Indices returned refer to the
/// construction order. The index keeps a copy of the coordinates.
class SpatialHash {
 public:
  SpatialHash(std::span<const Point3> points, double cell_size);

  /// All indices j with ||p_j - q|| <= radius, ascending.
  void radius_query(const Point3& q, double radius, std::vector<std::size_t>& out) const;

  /// Index of the Euclidean nearest point; ties go to the lowest index.
  /// Requires a non-empty point set.
  std::size_t nearest(const Point3& q) const;

  std::size_t size() const { return points_.size(); }
  double cell_size() const { return cell_; }
  const Point3& point(std::size_t i) const { return points_[i]; }

 private:
  struct Range {
    std::uint32_t begin = 0, end = 0;
  };
  template <class Fn>
  void for_cell(const CellKey& k, Fn&& fn) const;

  Points points_;
  double cell_;
  std::vector<std::uint32_t> order_;
  std::unordered_map<CellKey, Range, CellKeyHash> cells_;
  CellKey lo_{}, hi_{};
};

}  // namespace lidarcut
