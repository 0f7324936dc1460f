#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace kirchnet {

using VertexId = std::string;
using EdgeKey = std::string;

struct GraphEdge {
  EdgeKey key;
  VertexId tail;
  VertexId head;

  bool operator==(const GraphEdge&) const = default;
};

/// Raw combinatorial input: vertices, directed edges and positive lengths.
struct WeightedGraph {
  std::vector<VertexId> vertices;
  std::vector<GraphEdge> edges;
  std::map<EdgeKey, double> weights;

  bool operator==(const WeightedGraph&) const = default;
};

enum class EndSide { Tail, Head };

struct Edge {
  EdgeKey key;
  double length = 0.0;
  std::size_t tail = 0;
  std::size_t head = 0;

  bool is_loop() const noexcept { return tail == head; }
};

struct EdgeEnd {
  std::size_t edge = 0;
  EndSide side = EndSide::Tail;
};

/// In-edges have their head at the vertex, out-edges their tail. A self-loop
/// is listed in both.
struct Incidence {
  std::vector<std::size_t> in;
  std::vector<std::size_t> out;
};

struct VertexPoint {
  std::size_t vertex = 0;
  auto operator<=>(const VertexPoint&) const = default;
};

/// Strictly interior point: 0 < x < length(edge).
struct EdgePoint {
  std::size_t edge = 0;
  double x = 0.0;
  auto operator<=>(const EdgePoint&) const = default;
};

/// Canonical location on a network. Edge endpoints are always represented by
/// the glued vertex, so equality of points is plain structural equality.
using NetworkPoint = std::variant<VertexPoint, EdgePoint>;

struct PathSegment {
  std::size_t edge = 0;
  double entry = 0.0;
  double exit = 0.0;
};

struct NetworkPath {
  std::vector<PathSegment> segments;
  double length = 0.0;
};

struct RegularityReport {
  std::size_t vertex_count = 0;
  std::size_t edge_count = 0;
  std::size_t max_degree = 0;
  double min_edge_length = 0.0;
  std::size_t component_count = 0;
  bool locally_finite = true;
  bool lower_length_bound = true;
  bool connected = false;
  bool regular = false;
  std::vector<std::string> reasons;

  std::string to_text() const;
};

/// Validated metric network. Immutable once built; every query is const.
class Network {
 public:
  std::size_t vertex_count() const noexcept { return vertex_ids_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }
  const VertexId& vertex_id(std::size_t v) const { return vertex_ids_.at(v); }

  std::optional<std::size_t> find_vertex(std::string_view id) const;
  std::optional<std::size_t> find_edge(std::string_view key) const;
  /// Throws UnknownVertex / UnknownEdge.
  std::size_t vertex_index(std::string_view id) const;
  std::size_t edge_index(std::string_view key) const;

  const Incidence& incidence(std::size_t v) const { return incidence_.at(v); }
  /// All edge ends glued at `v`; a self-loop contributes two.
  std::span<const EdgeEnd> ends(std::size_t v) const { return ends_.at(v); }
  std::size_t degree(std::size_t v) const { return ends_.at(v).size(); }

  double min_edge_length() const noexcept { return min_edge_length_; }
  double total_length() const noexcept;

  /// Position of the edge key in natural key order (numeric keys compare
  /// numerically); used for deterministic tie-breaking.
  std::size_t key_rank(std::size_t e) const { return key_rank_.at(e); }

  std::size_t endpoint(std::size_t e, EndSide side) const {
    const Edge& ed = edges_.at(e);
    return side == EndSide::Tail ? ed.tail : ed.head;
  }

 private:
  friend Network build_network(const WeightedGraph& graph);

  std::vector<VertexId> vertex_ids_;
  std::unordered_map<VertexId, std::size_t> vertex_lookup_;
  std::vector<Edge> edges_;
  std::unordered_map<EdgeKey, std::size_t> edge_lookup_;
  std::vector<Incidence> incidence_;
  std::vector<std::vector<EdgeEnd>> ends_;
  std::vector<std::size_t> key_rank_;
  double min_edge_length_ = 0.0;
};

/// Natural ordering of identifiers: integers numerically, otherwise bytewise,
/// integers before non-integers.
bool natural_less(std::string_view a, std::string_view b);

Network build_network(const WeightedGraph& graph);

RegularityReport validate_regularity(const Network& net);

NetworkPoint locate(const Network& net, std::size_t edge, double x);
NetworkPoint locate(const Network& net, std::string_view edge_key, double x);

/// Path distance. Throws Error(Disconnected) if no path exists.
double distance(const Network& net, const NetworkPoint& p, const NetworkPoint& q);

/// One shortest path; among equally short paths the lexicographically smallest
/// sequence of edge keys wins.
NetworkPath shortest_path(const Network& net, const NetworkPoint& p, const NetworkPoint& q);

Incidence incidence(const Network& net, std::string_view vertex);

/// Distance from a fixed centre to every point of the network, from one
/// shortest-path sweep. Unreachable points are at infinite distance.
class DistanceField {
 public:
  DistanceField(const Network& net, const NetworkPoint& center);

  double at(std::size_t edge, double x) const { return at_with_slope(edge, x).first; }
  /// Distance and its derivative along the edge orientation: +1 or -1, and 0
  /// at the centre itself.
  std::pair<double, double> at_with_slope(std::size_t edge, double x) const;
  double at_vertex(std::size_t v) const { return vertex_distance_.at(v); }

 private:
  std::vector<double> vertex_distance_;
  std::vector<double> lengths_;
  std::vector<std::size_t> tails_;
  std::vector<std::size_t> heads_;
  NetworkPoint center_;
};

/// `v:<id>` or `e:<key>:<x>`.
NetworkPoint parse_point(const Network& net, std::string_view spec);
std::string format_point(const Network& net, const NetworkPoint& p);

/// Edge keys of the path's segments, one per segment.
std::vector<EdgeKey> path_edge_keys(const Network& net, const NetworkPath& path);

}  // namespace kirchnet
