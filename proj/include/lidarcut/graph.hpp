#pragma once

#include "lidarcut/features.hpp"
#include "lidarcut/geometry.hpp"
#include "lidarcut/scene.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace lidarcut {

struct WeightedEdge {
  std::uint32_t a = 0, b = 0;
  double w = 0.0;
};

/// Sparse symmetric weighted graph in row-compressed form. Rows are sorted
/// by neighbour id, there are no self loops and every weight is in (0, 1]
/// when produced by build_graph.
struct ProxyGraph {
  std::size_t n = 0;
  std::vector<std::size_t> row_begin{0};  // n + 1 offsets
  std::vector<std::uint32_t> neighbors;
  std::vector<double> weights;
  std::vector<std::size_t> node_to_point;  // graph node -> ds point index

  std::span<const std::uint32_t> neighbors_of(std::size_t i) const {
    return {neighbors.data() + row_begin[i], row_begin[i + 1] - row_begin[i]};
  }
  std::span<const double> weights_of(std::size_t i) const {
    return {weights.data() + row_begin[i], row_begin[i + 1] - row_begin[i]};
  }
  double degree(std::size_t i) const;
  std::size_t edge_count() const { return neighbors.size() / 2; }

  /// Builds the symmetric graph from undirected edges (each listed once,
  /// a != b). Duplicate edges are summed.
  static ProxyGraph from_edges(std::size_t n, std::span<const WeightedEdge> edges);

  /// Undirected edges with a < b, sorted.
  std::vector<WeightedEdge> edges() const;
  ProxyGraph scaled(double alpha) const;
};

/// All unordered pairs (i < j) with ||p_i - p_j|| <= radius, sorted.
std::vector<std::pair<std::uint32_t, std::uint32_t>> radius_neighbors(std::span<const Point3> points,
                                                                      double radius = 1.0);

/// exp(-theta * ||xp - xq||^2)
double channel_weight(std::span<const double> xp, std::span<const double> xq, double theta);

/// Product of channel weights over channels present at both points.
/// Channels are multiplied in kind order (S, P, I) regardless of input order.
double edge_weight(std::span<const FeatureChannel> channels, std::size_t p, std::size_t q);

struct GraphParams {
  double radius = 1.0;
  double w_floor = 1e-8;
};

/// Nodes are the chunk's ds points not flagged in `ds_is_ground` (empty = all).
ProxyGraph build_graph(const Chunk& chunk, std::span<const FeatureChannel> channels,
                       const GraphParams& params = {}, std::span<const std::uint8_t> ds_is_ground = {});

/// Text edge list, one "p q w" line per undirected edge (p < q, sorted, w with 17 digits).
void write_edge_list(std::ostream& out, const ProxyGraph& graph);

}  // namespace lidarcut
