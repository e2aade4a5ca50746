#include "lidarcut/graph.hpp"

#include "lidarcut/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace lidarcut {

double ProxyGraph::degree(std::size_t i) const {
  double d = 0.0;
  for (double w : weights_of(i)) d += w;
  return d;
}

ProxyGraph ProxyGraph::from_edges(std::size_t n, std::span<const WeightedEdge> edges) {
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(n);
  for (const auto& e : edges) {
    if (e.a == e.b) throw std::invalid_argument("ProxyGraph: self loop");
    if (e.a >= n || e.b >= n) throw std::invalid_argument("ProxyGraph: node out of range");
    rows[e.a].emplace_back(e.b, e.w);
    rows[e.b].emplace_back(e.a, e.w);
  }
  ProxyGraph g;
  g.n = n;
  g.row_begin.assign(n + 1, 0);
  g.node_to_point.resize(n);
  std::iota(g.node_to_point.begin(), g.node_to_point.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = rows[i];
    std::stable_sort(r.begin(), r.end(), [](auto& x, auto& y) { return x.first < y.first; });
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (k > 0 && r[k].first == r[k - 1].first) {
        g.weights.back() += r[k].second;
        continue;
      }
      g.neighbors.push_back(r[k].first);
      g.weights.push_back(r[k].second);
    }
    g.row_begin[i + 1] = g.neighbors.size();
  }
  return g;
}

std::vector<WeightedEdge> ProxyGraph::edges() const {
  std::vector<WeightedEdge> out;
  out.reserve(edge_count());
  for (std::size_t i = 0; i < n; ++i) {
    const auto nb = neighbors_of(i);
    const auto w = weights_of(i);
    for (std::size_t k = 0; k < nb.size(); ++k)
      if (nb[k] > i) out.push_back({static_cast<std::uint32_t>(i), nb[k], w[k]});
  }
  return out;
}

ProxyGraph ProxyGraph::scaled(double alpha) const {
  ProxyGraph g = *this;
  for (double& w : g.weights) w *= alpha;
  return g;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> radius_neighbors(std::span<const Point3> points,
                                                                      double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("radius_neighbors: radius must be positive");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  if (points.empty()) return pairs;
  const SpatialHash index(points, radius);
  std::vector<std::size_t> nb;
  for (std::size_t i = 0; i < points.size(); ++i) {
    index.radius_query(points[i], radius, nb);
    for (auto j : nb)
      if (j > i) pairs.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
  }
  return pairs;
}

double channel_weight(std::span<const double> xp, std::span<const double> xq, double theta) {
  if (xp.size() != xq.size()) throw std::invalid_argument("channel_weight: dimension mismatch");
  if (!(theta > 0.0)) throw std::invalid_argument("channel_weight: theta must be positive");
  double d2 = 0.0;
  for (std::size_t k = 0; k < xp.size(); ++k) {
    const double d = xp[k] - xq[k];
    d2 += d * d;
  }
  return std::exp(-theta * d2);
}

double edge_weight(std::span<const FeatureChannel> channels, std::size_t p, std::size_t q) {
  double w = 1.0;
  for (auto kind : {ChannelKind::Spatial, ChannelKind::Point, ChannelKind::Image})
    for (const auto& ch : channels) {
      if (ch.kind != kind) continue;
      if (!ch.is_present(p) || !ch.is_present(q)) continue;
      w *= channel_weight(ch.row(p), ch.row(q), ch.theta);
    }
  return w;
}

ProxyGraph build_graph(const Chunk& chunk, std::span<const FeatureChannel> channels,
                       const GraphParams& params, std::span<const std::uint8_t> ds_is_ground) {
  const std::size_t m = chunk.ds_points.size();
  for (const auto& ch : channels)
    if (ch.rows() != m)
      throw std::invalid_argument("build_graph: channel " + to_string(ch.kind) + " has " +
                                  std::to_string(ch.rows()) + " rows for " + std::to_string(m) + " points");
  if (!ds_is_ground.empty() && ds_is_ground.size() != m)
    throw std::invalid_argument("build_graph: ground mask length mismatch");

  std::vector<std::size_t> node_to_point;
  Points node_pts;
  for (std::size_t i = 0; i < m; ++i)
    if (ds_is_ground.empty() || !ds_is_ground[i]) {
      node_to_point.push_back(i);
      node_pts.push_back(chunk.ds_points[i]);
    }
  if (node_to_point.empty()) throw std::invalid_argument("build_graph: no nodes");

  std::vector<WeightedEdge> edges;
  for (const auto& [a, b] : radius_neighbors(node_pts, params.radius)) {
    const double w = edge_weight(channels, node_to_point[a], node_to_point[b]);
    if (w >= params.w_floor) edges.push_back({a, b, w});
  }
  ProxyGraph g = ProxyGraph::from_edges(node_to_point.size(), edges);
  g.node_to_point = std::move(node_to_point);
  return g;
}

void write_edge_list(std::ostream& out, const ProxyGraph& graph) {
  char buf[64];
  for (const auto& e : graph.edges()) {
    std::snprintf(buf, sizeof buf, "%u %u %.17g\n", e.a, e.b, e.w);
    out << buf;
  }
}

}  // namespace lidarcut
