#include "lidarcut/merge.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace lidarcut {

Aabb instance_aabb(std::span<const Point3> points) {
  if (points.empty()) throw std::invalid_argument("instance_aabb: no points");
  Aabb box{points[0], points[0]};
  for (const auto& p : points) box.extend(p);
  return box;
}

double box_iou(const Aabb& a, const Aabb& b) {
  const Point3 lo = a.min.cwiseMax(b.min);
  const Point3 hi = a.max.cwiseMin(b.max);
  const double inter = Aabb{lo, hi}.volume();
  const double uni = a.volume() + b.volume() - inter;
  if (!(uni > 0.0)) return a == b ? 1.0 : 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

MapSegmentation merge_chunks(std::span<const Point3> map_points, std::span<const ChunkInstances> chunks,
                             double iou_thr) {
  struct Global {
    Aabb box;
    std::vector<std::pair<std::size_t, std::uint32_t>> provenance;
    InstanceCohesion cohesion;
  };
  struct Claim {
    std::uint32_t global = 0;  // 1-based, 0 = unclaimed
    double dist = 0.0;
  };
  std::vector<Global> globals;
  std::vector<Claim> claims(map_points.size());

  for (std::size_t c = 0; c < chunks.size(); ++c) {
    const auto& ch = chunks[c];
    if (ch.labels.size() != ch.raw_indices.size())
      throw std::invalid_argument("merge_chunks: labels not aligned with chunk points");
    std::uint32_t k = 0;
    for (auto l : ch.labels) k = std::max(k, l);
    std::vector<Aabb> boxes(k);
    std::vector<std::uint8_t> seen(k, 0);
    for (std::size_t i = 0; i < ch.raw_indices.size(); ++i) {
      const auto l = ch.labels[i];
      if (l == 0) continue;
      const Point3& p = map_points[ch.raw_indices.at(i)];
      if (!seen[l - 1]) boxes[l - 1] = {p, p}, seen[l - 1] = 1;
      else boxes[l - 1].extend(p);
    }

    const std::size_t existing = globals.size();
    std::vector<std::uint32_t> target(k, 0);
    std::vector<Aabb> grow;
    std::vector<std::size_t> grow_id;
    for (std::uint32_t l = 0; l < k; ++l) {
      if (!seen[l]) continue;
      double best = -1.0;
      std::size_t best_g = 0;
      for (std::size_t g = 0; g < existing; ++g) {
        const double iou = box_iou(boxes[l], globals[g].box);
        if (iou > best) best = iou, best_g = g;
      }
      std::size_t g;
      if (best > iou_thr) {
        g = best_g;
        grow.push_back(boxes[l]);
        grow_id.push_back(g);
      } else {
        g = globals.size();
        globals.push_back({boxes[l], {}, {}});
      }
      globals[g].provenance.emplace_back(c, l + 1);
      if (l < ch.cohesion.size()) {
        globals[g].cohesion.weight_sum += ch.cohesion[l].weight_sum;
        globals[g].cohesion.edges += ch.cohesion[l].edges;
      }
      target[l] = static_cast<std::uint32_t>(g + 1);
    }
    for (std::size_t i = 0; i < grow.size(); ++i) {
      globals[grow_id[i]].box.extend(grow[i].min);
      globals[grow_id[i]].box.extend(grow[i].max);
    }

    for (std::size_t i = 0; i < ch.raw_indices.size(); ++i) {
      const auto l = ch.labels[i];
      if (l == 0) continue;
      const std::size_t p = ch.raw_indices[i];
      const double d = (map_points[p] - ch.center).norm();
      if (claims[p].global == 0 || d < claims[p].dist) claims[p] = {target[l - 1], d};
    }
  }

  std::vector<std::uint32_t> used(globals.size() + 1, 0);
  for (const auto& cl : claims) used[cl.global] = 1;
  MapSegmentation out;
  std::vector<std::uint32_t> dense(globals.size() + 1, 0);
  for (std::size_t g = 1; g <= globals.size(); ++g) {
    if (!used[g]) continue;
    dense[g] = ++out.count;
    out.provenance.push_back(globals[g - 1].provenance);
    out.confidence.push_back(globals[g - 1].cohesion.score());
  }
  out.labels.resize(map_points.size());
  for (std::size_t p = 0; p < claims.size(); ++p) out.labels[p] = dense[claims[p].global];
  return out;
}

}  // namespace lidarcut
