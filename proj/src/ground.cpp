#include "lidarcut/ground.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>

namespace lidarcut {

namespace {

struct Plane {
  Point3 normal = Point3::UnitZ();
  double offset = 0.0;  // normal . p = offset
  double distance(const Point3& p) const { return std::abs(normal.dot(p) - offset); }
};

Plane least_squares_plane(const Points& pts, std::span<const std::size_t> idx) {
  Point3 c = Point3::Zero();
  for (auto i : idx) c += pts[i];
  c /= static_cast<double>(idx.size());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(idx.size()), 3);
  for (std::size_t k = 0; k < idx.size(); ++k) m.row(static_cast<Eigen::Index>(k)) = (pts[idx[k]] - c).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinV);
  Point3 n = svd.matrixV().col(2);
  if (n.z() < 0) n = -n;
  return {n, n.dot(c)};
}

std::optional<Plane> ransac_plane(const Points& pts, std::span<const std::size_t> candidates,
                                  const GroundParams& params, std::uint64_t seed) {
  if (candidates.size() < 3) return std::nullopt;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  std::optional<Plane> best;
  std::size_t best_inliers = 0;
  const int iters = std::max(params.ransac_iters, 1);
  for (int it = 0; it < iters; ++it) {
    const std::size_t a = pick(rng), b = pick(rng), c = pick(rng);
    if (a == b || b == c || a == c) continue;
    const Point3& pa = pts[candidates[a]];
    Point3 n = (pts[candidates[b]] - pa).cross(pts[candidates[c]] - pa);
    const double len = n.norm();
    if (!(len > 1e-12)) continue;
    n /= len;
    const Plane plane{n, n.dot(pa)};
    std::size_t inliers = 0;
    for (auto i : candidates) inliers += plane.distance(pts[i]) <= params.inlier_tol;
    if (inliers > best_inliers) {
      best_inliers = inliers;
      best = plane;
    }
  }
  if (!best) return std::nullopt;
  std::vector<std::size_t> in;
  for (auto i : candidates)
    if (best->distance(pts[i]) <= params.inlier_tol) in.push_back(i);
  if (in.size() >= 3) {
    const Plane refined = least_squares_plane(pts, in);
    if (refined.normal.allFinite()) return refined;
  }
  return best;
}

std::vector<std::size_t> lowest_quartile(const Points& pts, std::vector<std::size_t> idx) {
  const std::size_t keep = std::min(idx.size(), std::max<std::size_t>(3, (idx.size() + 3) / 4));
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return pts[a].z() < pts[b].z(); });
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::uint64_t mix_seed(std::uint64_t seed, std::int64_t cx, std::int64_t cy) {
  std::uint64_t h = seed ^ 0x9E3779B97F4A7C15ull;
  for (std::uint64_t v : {static_cast<std::uint64_t>(cx), static_cast<std::uint64_t>(cy)}) {
    h ^= v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    h *= 0xBF58476D1CE4E5B9ull;
  }
  return h;
}

}  // namespace

std::size_t GroundMask::ground_count() const {
  return static_cast<std::size_t>(std::count(is_ground.begin(), is_ground.end(), 1));
}

GroundMask estimate_ground(std::span<const Point3> points, const GroundParams& params) {
  GroundMask mask;
  mask.is_ground.assign(points.size(), 0);
  if (points.size() < 3) return mask;

  double ax = points[0].x(), ay = points[0].y();
  for (const auto& p : points) {
    ax = std::min(ax, p.x());
    ay = std::min(ay, p.y());
  }
  Points rel;
  rel.reserve(points.size());
  for (const auto& p : points) rel.emplace_back(p.x() - ax, p.y() - ay, p.z());

  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < rel.size(); ++i)
    cells[{static_cast<std::int64_t>(std::floor(rel[i].x() / params.cell)),
           static_cast<std::int64_t>(std::floor(rel[i].y() / params.cell))}]
        .push_back(i);

  std::vector<std::size_t> all(rel.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  auto global = ransac_plane(rel, lowest_quartile(rel, all), params, mix_seed(params.seed, -1, -1));
  if (!global) global = ransac_plane(rel, all, params, mix_seed(params.seed, -1, -1));
  if (!global) global = Plane{Point3::UnitZ(), std::min_element(rel.begin(), rel.end(), [](const Point3& a, const Point3& b) {
                                                 return a.z() < b.z();
                                               })->z()};

  std::vector<Plane> plane_of(rel.size());
  double zsum = 0.0;
  std::size_t zcount = 0;
  for (const auto& [key, members] : cells) {
    std::optional<Plane> plane;
    if (members.size() >= 3) {
      const auto seed = mix_seed(params.seed, key.first, key.second);
      plane = ransac_plane(rel, lowest_quartile(rel, members), params, seed);
      if (!plane) plane = ransac_plane(rel, members, params, seed);
    }
    if (!plane) plane = global;
    for (auto i : members) {
      plane_of[i] = *plane;
      if (plane->distance(rel[i]) <= params.inlier_tol) {
        zsum += rel[i].z();
        ++zcount;
      }
    }
  }
  mask.fitted = true;
  mask.mean_ground_height = zcount ? zsum / static_cast<double>(zcount) : 0.0;
  const double cut = mask.mean_ground_height + params.height_margin;
  for (std::size_t i = 0; i < rel.size(); ++i)
    mask.is_ground[i] = plane_of[i].distance(rel[i]) <= params.inlier_tol || rel[i].z() < cut;
  return mask;
}

GroundMask estimate_ground(const AggregatedMap& map, const Chunk& chunk,
                           const GroundParams& params) {
  const Points pts = gather(map.cloud.points, chunk.raw_indices);
  return estimate_ground(pts, params);
}

}  // namespace lidarcut
