#include "lidarcut/container.hpp"

#include "binary_io.hpp"

#include <cstring>

namespace lidarcut {

using detail::Bytes;
using detail::put;

namespace {

constexpr std::uint32_t kVersion = 1;
enum Record : std::uint8_t { kMap = 1, kChunk = 2, kGraph = 3 };

void put_points(Bytes& out, const Points& pts) {
  put<std::uint64_t>(out, pts.size());
  for (const auto& p : pts)
    for (int k = 0; k < 3; ++k) put(out, p(k));
}

void put_indices(Bytes& out, const std::vector<std::size_t>& v) {
  put<std::uint64_t>(out, v.size());
  for (auto i : v) put<std::uint64_t>(out, i);
}

std::size_t get_count(detail::Reader& r, std::size_t item_bytes) {
  const auto n = r.get<std::uint64_t>();
  if (item_bytes && n > r.remaining() / item_bytes) throw DataError("AICT: element count exceeds record");
  return static_cast<std::size_t>(n);
}

Points get_points(detail::Reader& r) {
  Points pts(get_count(r, 24));
  for (auto& p : pts)
    for (int k = 0; k < 3; ++k) p(k) = r.get<double>();
  return pts;
}

std::vector<std::size_t> get_indices(detail::Reader& r) {
  std::vector<std::size_t> v(get_count(r, 8));
  for (auto& i : v) i = r.get<std::uint64_t>();
  return v;
}

void begin_record(Bytes& out, Record type, std::size_t& length_at) {
  put<std::uint8_t>(out, type);
  length_at = out.size();
  put<std::uint64_t>(out, 0);
}

void end_record(Bytes& out, std::size_t length_at) {
  const std::uint64_t len = out.size() - length_at - 8;
  std::memcpy(out.data() + length_at, &len, 8);
}

}  // namespace

void write_intermediates(const std::filesystem::path& path, const Intermediates& data) {
  Bytes out{'A', 'I', 'C', 'T'};
  put(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>((data.map_points ? 1 : 0) + data.chunks.size() + data.graphs.size()));
  std::size_t at = 0;
  if (data.map_points) {
    begin_record(out, kMap, at);
    put_points(out, *data.map_points);
    end_record(out, at);
  }
  for (const auto& c : data.chunks) {
    begin_record(out, kChunk, at);
    for (int k = 0; k < 3; ++k) put(out, c.center(k));
    for (int k = 0; k < 3; ++k) put(out, c.half_extent(k));
    put_indices(out, c.raw_indices);
    put_points(out, c.ds_points);
    put_indices(out, c.ds_to_raw);
    end_record(out, at);
  }
  for (const auto& g : data.graphs) {
    begin_record(out, kGraph, at);
    put<std::uint64_t>(out, g.n);
    const auto edges = g.edges();
    put<std::uint64_t>(out, edges.size());
    for (const auto& e : edges) {
      put(out, e.a);
      put(out, e.b);
      put(out, e.w);
    }
    put_indices(out, g.node_to_point);
    end_record(out, at);
  }
  detail::write_file(path, out);
}

Intermediates load_intermediates(const std::filesystem::path& path) {
  const Bytes data = detail::read_file(path);
  detail::Reader r(data, path.string());
  r.need(4);
  if (std::memcmp(r.cursor(), "AICT", 4) != 0) throw DataError(path.string() + ": bad magic (expected AICT)");
  r.skip(4);
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) throw DataError(path.string() + ": unsupported AICT version " + std::to_string(version));
  const auto count = r.get<std::uint32_t>();
  Intermediates out;
  for (std::uint32_t rec = 0; rec < count; ++rec) {
    const auto type = r.get<std::uint8_t>();
    const auto len = r.get<std::uint64_t>();
    r.need(static_cast<std::size_t>(len));
    const std::size_t end = r.pos() + static_cast<std::size_t>(len);
    switch (type) {
      case kMap:
        if (out.map_points) throw DataError(path.string() + ": duplicate map record");
        out.map_points = get_points(r);
        break;
      case kChunk: {
        Chunk c;
        for (int k = 0; k < 3; ++k) c.center(k) = r.get<double>();
        for (int k = 0; k < 3; ++k) c.half_extent(k) = r.get<double>();
        c.raw_indices = get_indices(r);
        c.ds_points = get_points(r);
        c.ds_to_raw = get_indices(r);
        if (c.ds_to_raw.size() != c.raw_indices.size()) throw DataError(path.string() + ": inconsistent chunk record");
        for (auto d : c.ds_to_raw)
          if (d >= c.ds_points.size()) throw DataError(path.string() + ": chunk ds index out of range");
        out.chunks.push_back(std::move(c));
        break;
      }
      case kGraph: {
        const auto n = static_cast<std::size_t>(r.get<std::uint64_t>());
        std::vector<WeightedEdge> edges(get_count(r, 16));
        for (auto& e : edges) {
          e.a = r.get<std::uint32_t>();
          e.b = r.get<std::uint32_t>();
          e.w = r.get<double>();
          if (e.a >= n || e.b >= n || e.a == e.b) throw DataError(path.string() + ": invalid graph edge");
        }
        ProxyGraph g = ProxyGraph::from_edges(n, edges);
        g.node_to_point = get_indices(r);
        if (g.node_to_point.size() != n) throw DataError(path.string() + ": graph node map has wrong length");
        out.graphs.push_back(std::move(g));
        break;
      }
      default:
        throw DataError(path.string() + ": unknown record type " + std::to_string(type));
    }
    if (r.pos() != end) throw DataError(path.string() + ": record length mismatch");
  }
  if (r.remaining() != 0) throw DataError(path.string() + ": trailing bytes");
  return out;
}

}  // namespace lidarcut
