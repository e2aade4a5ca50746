#include "lidarcut/convex_hull.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace lidarcut {

namespace {

double line_distance(const Point3& p, const Point3& a, const Point3& dir) {
  return (p - a).cross(dir).norm();
}

std::vector<std::size_t> hull_1d(std::span<const Point3> pts, const Point3& a, const Point3& dir) {
  std::size_t lo = 0, hi = 0;
  double tlo = dir.dot(pts[0] - a), thi = tlo;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double t = dir.dot(pts[i] - a);
    if (t < tlo) tlo = t, lo = i;
    if (t > thi) thi = t, hi = i;
  }
  if (lo == hi) return {lo};
  return {std::min(lo, hi), std::max(lo, hi)};
}

std::vector<std::size_t> hull_2d(std::span<const Point3> pts, const Point3& origin,
                                 const Point3& u, const Point3& v, double eps) {
  struct P2 {
    double x, y;
    std::size_t i;
  };
  std::vector<P2> p(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point3 d = pts[i] - origin;
    p[i] = {u.dot(d), v.dot(d), i};
  }
  std::sort(p.begin(), p.end(), [](const P2& a, const P2& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.i < b.i;
  });
  auto cross = [](const P2& o, const P2& a, const P2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  std::vector<P2> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= eps) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], p[i]) <= eps) --k;
    h[k++] = p[i];
  }
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j + 1 < k; ++j) out.push_back(h[j].i);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct Face {
  std::array<std::uint32_t, 3> v{};
  Point3 normal;
  double offset = 0.0;
  std::vector<std::uint32_t> outside;
  bool alive = true;
  std::uint32_t seen = 0;  // iteration stamp
  bool visible = false;

  double distance(const Point3& p) const { return normal.dot(p) - offset; }
};

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

class QuickHull {
 public:
  QuickHull(std::span<const Point3> pts, double eps) : pts_(pts), eps_(eps) {}

  std::vector<std::size_t> run(std::array<std::uint32_t, 4> tet) {
    const std::array<std::array<int, 4>, 4> combos{{{0, 1, 2, 3}, {0, 1, 3, 2}, {0, 2, 3, 1}, {1, 2, 3, 0}}};
    for (const auto& c : combos) {
      std::uint32_t a = tet[c[0]], b = tet[c[1]], d = tet[c[2]];
      Face f = make(a, b, d);
      if (f.distance(pts_[tet[c[3]]]) > 0) f = make(a, d, b);
      add(std::move(f));
    }
    std::vector<std::uint8_t> in_tet(pts_.size(), 0);
    for (auto t : tet) in_tet[t] = 1;
    std::vector<std::uint32_t> all;
    for (std::uint32_t i = 0; i < pts_.size(); ++i)
      if (!in_tet[i]) all.push_back(i);
    std::vector<std::uint32_t> fresh{0, 1, 2, 3};
    assign(all, fresh);

    std::vector<std::uint32_t> work{0, 1, 2, 3};
    std::uint32_t stamp = 0;
    while (!work.empty()) {
      const std::uint32_t fi = work.back();
      work.pop_back();
      if (!faces_[fi].alive || faces_[fi].outside.empty()) continue;
      ++stamp;
      std::uint32_t eye = faces_[fi].outside[0];
      double best = faces_[fi].distance(pts_[eye]);
      for (auto p : faces_[fi].outside) {
        const double d = faces_[fi].distance(pts_[p]);
        if (d > best || (d == best && p < eye)) best = d, eye = p;
      }
      const Point3& e = pts_[eye];

      std::vector<std::uint32_t> visible{fi};
      faces_[fi].seen = stamp;
      faces_[fi].visible = true;
      std::vector<std::pair<std::uint32_t, std::uint32_t>> horizon;
      for (std::size_t k = 0; k < visible.size(); ++k) {
        const auto v = faces_[visible[k]].v;
        for (int j = 0; j < 3; ++j) {
          const std::uint32_t a = v[j], b = v[(j + 1) % 3];
          const std::uint32_t g = edges_.at(edge_key(b, a));
          Face& fg = faces_[g];
          if (fg.seen != stamp) {
            fg.seen = stamp;
            fg.visible = fg.distance(e) > eps_;
            if (fg.visible) visible.push_back(g);
          }
          if (!fg.visible) horizon.emplace_back(a, b);
        }
      }

      std::vector<std::uint32_t> orphans;
      for (auto vf : visible) {
        Face& f = faces_[vf];
        for (auto p : f.outside)
          if (p != eye) orphans.push_back(p);
        f.outside.clear();
        f.alive = false;
        for (int j = 0; j < 3; ++j) edges_.erase(edge_key(f.v[j], f.v[(j + 1) % 3]));
      }
      std::vector<std::uint32_t> created;
      for (const auto& [a, b] : horizon) created.push_back(add(make(a, b, eye)));
      assign(orphans, created);
      for (auto c : created)
        if (!faces_[c].outside.empty()) work.push_back(c);
    }

    std::vector<std::uint8_t> is_vertex(pts_.size(), 0);
    for (const auto& f : faces_)
      if (f.alive)
        for (auto v : f.v) is_vertex[v] = 1;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < is_vertex.size(); ++i)
      if (is_vertex[i]) out.push_back(i);
    return out;
  }

 private:
  Face make(std::uint32_t a, std::uint32_t b, std::uint32_t c) const {
    Face f;
    f.v = {a, b, c};
    Point3 n = (pts_[b] - pts_[a]).cross(pts_[c] - pts_[a]);
    const double len = n.norm();
    f.normal = len > 0 ? Point3(n / len) : Point3::Zero();
    f.offset = f.normal.dot(pts_[a]);
    return f;
  }

  std::uint32_t add(Face f) {
    const auto idx = static_cast<std::uint32_t>(faces_.size());
    for (int j = 0; j < 3; ++j) edges_[edge_key(f.v[j], f.v[(j + 1) % 3])] = idx;
    faces_.push_back(std::move(f));
    return idx;
  }

  void assign(const std::vector<std::uint32_t>& points, const std::vector<std::uint32_t>& candidates) {
    for (auto p : points) {
      double best = eps_;
      std::int64_t target = -1;
      for (auto c : candidates) {
        const double d = faces_[c].distance(pts_[p]);
        if (d > best) best = d, target = c;
      }
      if (target >= 0) faces_[static_cast<std::size_t>(target)].outside.push_back(p);
    }
  }

  std::span<const Point3> pts_;
  double eps_;
  std::vector<Face> faces_;
  std::unordered_map<std::uint64_t, std::uint32_t> edges_;
};

}  // namespace

std::vector<std::size_t> convex_hull_vertices(std::span<const Point3> pts) {
  if (pts.empty()) return {};
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double eps = 1e-11 * std::max(scale, 1e-300);

  std::size_t i0 = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].x() < pts[i0].x()) i0 = i;
  std::size_t i1 = i0;
  double far = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = (pts[i] - pts[i0]).norm();
    if (d > far) far = d, i1 = i;
  }
  if (far <= eps) return {i0};
  const Point3 dir = (pts[i1] - pts[i0]) / far;

  std::size_t i2 = i0;
  far = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = line_distance(pts[i], pts[i0], dir);
    if (d > far) far = d, i2 = i;
  }
  if (far <= eps) return hull_1d(pts, pts[i0], dir);

  const Point3 normal = (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]).normalized();
  std::size_t i3 = i0;
  far = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = std::abs(normal.dot(pts[i] - pts[i0]));
    if (d > far) far = d, i3 = i;
  }
  if (far <= eps) return hull_2d(pts, pts[i0], dir, normal.cross(dir), eps * scale);

  QuickHull qh(pts, eps);
  return qh.run({static_cast<std::uint32_t>(i0), static_cast<std::uint32_t>(i1),
                 static_cast<std::uint32_t>(i2), static_cast<std::uint32_t>(i3)});
}

}  // namespace lidarcut
