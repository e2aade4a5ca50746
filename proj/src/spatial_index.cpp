#include "lidarcut/spatial_index.hpp"

#include "lidarcut/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lidarcut {

CellKey CellKey::of(const Point3& p, double size) {
  return {static_cast<std::int64_t>(std::floor(p.x() / size)),
          static_cast<std::int64_t>(std::floor(p.y() / size)),
          static_cast<std::int64_t>(std::floor(p.z() / size))};
}

SpatialHash::SpatialHash(std::span<const Point3> points, double cell_size)
    : points_(points.begin(), points.end()), cell_(cell_size) {
  if (!(cell_size > 0.0)) throw std::invalid_argument("SpatialHash: cell size must be positive");
  std::vector<CellKey> keys(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) keys[i] = CellKey::of(points_[i], cell_);
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return keys[a] < keys[b]; });
  cells_.reserve(points_.size());
  std::uint32_t i = 0;
  const auto n = static_cast<std::uint32_t>(order_.size());
  while (i < n) {
    std::uint32_t j = i + 1;
    while (j < n && keys[order_[j]] == keys[order_[i]]) ++j;
    cells_.emplace(keys[order_[i]], Range{i, j});
    i = j;
  }
  if (!points_.empty()) {
    lo_ = hi_ = keys[0];
    for (const auto& k : keys) {
      lo_ = {std::min(lo_.x, k.x), std::min(lo_.y, k.y), std::min(lo_.z, k.z)};
      hi_ = {std::max(hi_.x, k.x), std::max(hi_.y, k.y), std::max(hi_.z, k.z)};
    }
  }
}

template <class Fn>
void SpatialHash::for_cell(const CellKey& k, Fn&& fn) const {
  auto it = cells_.find(k);
  if (it == cells_.end()) return;
  for (std::uint32_t i = it->second.begin; i < it->second.end; ++i) fn(order_[i]);
}

void SpatialHash::radius_query(const Point3& q, double radius,
                               std::vector<std::size_t>& out) const {
  out.clear();
  const double r2 = radius * radius;
  const CellKey a = CellKey::of(q - Point3::Constant(radius), cell_);
  const CellKey b = CellKey::of(q + Point3::Constant(radius), cell_);
  for (std::int64_t x = std::max(a.x, lo_.x); x <= std::min(b.x, hi_.x); ++x)
    for (std::int64_t y = std::max(a.y, lo_.y); y <= std::min(b.y, hi_.y); ++y)
      for (std::int64_t z = std::max(a.z, lo_.z); z <= std::min(b.z, hi_.z); ++z)
        for_cell({x, y, z}, [&](std::uint32_t j) {
          if ((points_[j] - q).squaredNorm() <= r2) out.push_back(j);
        });
  std::sort(out.begin(), out.end());
}

std::size_t SpatialHash::nearest(const Point3& q) const {
  if (points_.empty()) throw std::invalid_argument("SpatialHash::nearest on empty set");
  const CellKey c = CellKey::of(q, cell_);
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_idx = 0;
  auto consider = [&](std::uint32_t j) {
    const double d = (points_[j] - q).squaredNorm();
    if (d < best || (d == best && j < best_idx)) {
      best = d;
      best_idx = j;
    }
  };
  // Rings beyond this radius hold no occupied cells.
  const std::int64_t max_ring =
      std::max({std::abs(c.x - lo_.x), std::abs(c.x - hi_.x), std::abs(c.y - lo_.y),
                std::abs(c.y - hi_.y), std::abs(c.z - lo_.z), std::abs(c.z - hi_.z)});
  for (std::int64_t k = 0; k <= max_ring; ++k) {
    const double cells_in_ring = std::pow(2.0 * k + 1.0, 3) - std::pow(2.0 * k - 1.0, 3);
    if (k > 0 && cells_in_ring > static_cast<double>(points_.size())) {
      for (std::uint32_t j = 0; j < points_.size(); ++j) consider(j);
      return best_idx;
    }
    for (std::int64_t dx = -k; dx <= k; ++dx)
      for (std::int64_t dy = -k; dy <= k; ++dy)
        for (std::int64_t dz = -k; dz <= k; ++dz) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != k) continue;
          for_cell({c.x + dx, c.y + dy, c.z + dz}, consider);
        }
    const double reach = static_cast<double>(k) * cell_;
    if (best < reach * reach) return best_idx;
  }
  return best_idx;
}

}  // namespace lidarcut
