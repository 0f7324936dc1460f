#include "kirchnet/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "kirchnet/error.hpp"
#include "text_util.hpp"

namespace kirchnet {

namespace {

std::optional<long long> as_integer(std::string_view s) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::string quoted(std::string_view s) { return "'" + std::string(s) + "'"; }

// Union-find over vertices for the connectivity verdict.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

// Undirected auxiliary graph: network vertices plus up to two temporary nodes
// that split the edges carrying the query points.
struct Arc {
  std::size_t to;
  double length;
  std::size_t edge;
  double from_x;
  double to_x;
};

struct AuxGraph {
  std::vector<std::vector<Arc>> adjacency;
  std::size_t source = 0;
  std::size_t target = 0;
};

AuxGraph make_aux_graph(const Network& net, const NetworkPoint& p, const NetworkPoint* q) {
  const std::size_t nv = net.vertex_count();
  AuxGraph aux;
  aux.adjacency.resize(nv + 2);

  struct Split {
    double x;
    std::size_t node;
  };
  std::vector<std::vector<Split>> splits(net.edge_count());

  auto attach = [&](const NetworkPoint& point, std::size_t temp_node) -> std::size_t {
    if (const auto* vp = std::get_if<VertexPoint>(&point)) return vp->vertex;
    const auto& ep = std::get<EdgePoint>(point);
    splits[ep.edge].push_back({ep.x, temp_node});
    return temp_node;
  };
  aux.source = attach(p, nv);
  aux.target = q ? attach(*q, nv + 1) : aux.source;

  auto add = [&](std::size_t a, std::size_t b, std::size_t e, double xa, double xb) {
    const double len = std::abs(xb - xa);
    aux.adjacency[a].push_back({b, len, e, xa, xb});
    aux.adjacency[b].push_back({a, len, e, xb, xa});
  };

  for (std::size_t e = 0; e < net.edge_count(); ++e) {
    const Edge& ed = net.edge(e);
    auto& pts = splits[e];
    std::sort(pts.begin(), pts.end(), [](const Split& a, const Split& b) { return a.x < b.x; });
    std::size_t prev_node = ed.tail;
    double prev_x = 0.0;
    for (const Split& s : pts) {
      add(prev_node, s.node, e, prev_x, s.x);
      prev_node = s.node;
      prev_x = s.x;
    }
    add(prev_node, ed.head, e, prev_x, ed.length);
  }
  return aux;
}

std::vector<double> dijkstra(const AuxGraph& aux, std::size_t from) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(aux.adjacency.size(), inf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[from] = 0.0;
  queue.emplace(0.0, from);
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    for (const Arc& a : aux.adjacency[u]) {
      const double nd = d + a.length;
      if (nd < dist[a.to]) {
        dist[a.to] = nd;
        queue.emplace(nd, a.to);
      }
    }
  }
  return dist;
}

void require_point(const Network& net, const NetworkPoint& p) {
  if (const auto* vp = std::get_if<VertexPoint>(&p)) {
    if (vp->vertex >= net.vertex_count())
      throw Error(ErrorKind::UnknownVertex, "vertex index " + std::to_string(vp->vertex));
    return;
  }
  const auto& ep = std::get<EdgePoint>(p);
  if (ep.edge >= net.edge_count())
    throw Error(ErrorKind::UnknownEdge, "edge index " + std::to_string(ep.edge));
  if (!(ep.x > 0.0 && ep.x < net.edge(ep.edge).length))
    throw Error(ErrorKind::CoordinateOutOfRange,
                "edge point is not canonical; use locate() for endpoints");
}

}  // namespace

bool natural_less(std::string_view a, std::string_view b) {
  const auto ia = as_integer(a);
  const auto ib = as_integer(b);
  if (ia && ib) return *ia != *ib ? *ia < *ib : a < b;
  if (ia.has_value() != ib.has_value()) return ia.has_value();
  return a < b;
}

std::optional<std::size_t> Network::find_vertex(std::string_view id) const {
  auto it = vertex_lookup_.find(std::string(id));
  if (it == vertex_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Network::find_edge(std::string_view key) const {
  auto it = edge_lookup_.find(std::string(key));
  if (it == edge_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t Network::vertex_index(std::string_view id) const {
  if (auto v = find_vertex(id)) return *v;
  throw Error(ErrorKind::UnknownVertex, quoted(id));
}

std::size_t Network::edge_index(std::string_view key) const {
  if (auto e = find_edge(key)) return *e;
  throw Error(ErrorKind::UnknownEdge, quoted(key));
}

double Network::total_length() const noexcept {
  double sum = 0.0;
  for (const Edge& e : edges_) sum += e.length;
  return sum;
}

Network build_network(const WeightedGraph& graph) {
  Network net;

  for (const GraphEdge& ge : graph.edges) {
    if (net.edge_lookup_.count(ge.key))
      throw Error(ErrorKind::DuplicateEdgeKey, quoted(ge.key));
    net.edge_lookup_.emplace(ge.key, net.edges_.size());
    auto w = graph.weights.find(ge.key);
    if (w == graph.weights.end())
      throw Error(ErrorKind::NonPositiveWeight, "edge " + quoted(ge.key) + " has no weight");
    if (!(w->second > 0.0) || !std::isfinite(w->second))
      throw Error(ErrorKind::NonPositiveWeight, "edge " + quoted(ge.key) + " has weight " +
                                                    std::to_string(w->second));
    net.edges_.push_back(Edge{ge.key, w->second, 0, 0});
  }

  for (const VertexId& id : graph.vertices) {
    if (net.vertex_lookup_.count(id)) continue;
    net.vertex_lookup_.emplace(id, net.vertex_ids_.size());
    net.vertex_ids_.push_back(id);
  }

  net.incidence_.resize(net.vertex_ids_.size());
  net.ends_.resize(net.vertex_ids_.size());
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const GraphEdge& ge = graph.edges[e];
    const std::size_t tail = net.vertex_index(ge.tail);
    const std::size_t head = net.vertex_index(ge.head);
    net.edges_[e].tail = tail;
    net.edges_[e].head = head;
    net.incidence_[tail].out.push_back(e);
    net.incidence_[head].in.push_back(e);
    net.ends_[tail].push_back({e, EndSide::Tail});
    net.ends_[head].push_back({e, EndSide::Head});
  }

  for (std::size_t v = 0; v < net.vertex_ids_.size(); ++v) {
    if (net.ends_[v].empty()) throw Error(ErrorKind::IsolatedVertex, quoted(net.vertex_ids_[v]));
  }

  std::vector<std::size_t> order(net.edges_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return natural_less(net.edges_[a].key, net.edges_[b].key);
  });
  net.key_rank_.resize(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) net.key_rank_[order[r]] = r;

  net.min_edge_length_ = std::numeric_limits<double>::infinity();
  for (const Edge& e : net.edges_) net.min_edge_length_ = std::min(net.min_edge_length_, e.length);
  if (net.edges_.empty()) net.min_edge_length_ = 0.0;
  return net;
}

RegularityReport validate_regularity(const Network& net) {
  RegularityReport report;
  report.vertex_count = net.vertex_count();
  report.edge_count = net.edge_count();
  for (std::size_t v = 0; v < net.vertex_count(); ++v)
    report.max_degree = std::max(report.max_degree, net.degree(v));
  report.min_edge_length = net.min_edge_length();

  // Finite inputs are always locally finite and bounded below by their
  // shortest edge, so only connectivity can fail here.
  report.locally_finite = true;
  report.lower_length_bound = net.edge_count() > 0 && net.min_edge_length() > 0.0;
  if (!report.lower_length_bound) report.reasons.emplace_back("no edges");

  DisjointSets sets(net.vertex_count());
  for (const Edge& e : net.edges()) sets.unite(e.tail, e.head);
  for (std::size_t v = 0; v < net.vertex_count(); ++v)
    if (sets.find(v) == v) ++report.component_count;
  report.connected = report.component_count == 1;
  if (!report.connected)
    report.reasons.push_back("not connected (" + std::to_string(report.component_count) +
                             " components)");

  report.regular = report.locally_finite && report.lower_length_bound && report.connected;
  return report;
}

std::string RegularityReport::to_text() const {
  std::ostringstream out;
  out << "vertices: " << vertex_count << "\n"
      << "edges: " << edge_count << "\n"
      << "max degree: " << max_degree << "\n"
      << "min edge length: " << min_edge_length << "\n"
      << "components: " << component_count << "\n"
      << "locally finite: " << (locally_finite ? "yes" : "no") << "\n"
      << "connected: " << (connected ? "yes" : "no") << "\n"
      << "regular: " << (regular ? "yes" : "no") << "\n";
  for (const auto& r : reasons) out << "reason: " << r << "\n";
  return out.str();
}

NetworkPoint locate(const Network& net, std::size_t edge, double x) {
  if (edge >= net.edge_count())
    throw Error(ErrorKind::UnknownEdge, "edge index " + std::to_string(edge));
  const Edge& e = net.edge(edge);
  if (!(x >= 0.0 && x <= e.length))
    throw Error(ErrorKind::CoordinateOutOfRange,
                "coordinate " + std::to_string(x) + " outside [0, " + std::to_string(e.length) +
                    "] on edge " + quoted(e.key));
  if (x == 0.0) return VertexPoint{e.tail};
  if (x == e.length) return VertexPoint{e.head};
  return EdgePoint{edge, x};
}

NetworkPoint locate(const Network& net, std::string_view edge_key, double x) {
  return locate(net, net.edge_index(edge_key), x);
}

double distance(const Network& net, const NetworkPoint& p, const NetworkPoint& q) {
  require_point(net, p);
  require_point(net, q);
  if (p == q) return 0.0;
  // Searching from the smaller point makes d(p, q) and d(q, p) bitwise equal.
  const bool flip = q < p;
  const AuxGraph aux = make_aux_graph(net, flip ? q : p, flip ? &p : &q);
  const double d = dijkstra(aux, aux.source)[aux.target];
  if (!std::isfinite(d))
    throw Error(ErrorKind::Disconnected,
                format_point(net, p) + " and " + format_point(net, q) + " are not connected");
  return d;
}

NetworkPath shortest_path(const Network& net, const NetworkPoint& p, const NetworkPoint& q) {
  require_point(net, p);
  require_point(net, q);
  NetworkPath path;
  if (p == q) return path;

  const AuxGraph aux = make_aux_graph(net, p, &q);
  const auto from_source = dijkstra(aux, aux.source);
  const double total = from_source[aux.target];
  if (!std::isfinite(total))
    throw Error(ErrorKind::Disconnected,
                format_point(net, p) + " and " + format_point(net, q) + " are not connected");
  const auto to_target = dijkstra(aux, aux.target);

  // Greedy walk: at each node take the smallest-keyed arc that stays on some
  // shortest path. Arc lengths are positive, so to_target strictly decreases.
  const double tol = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, total);
  std::size_t node = aux.source;
  while (node != aux.target) {
    const Arc* best = nullptr;
    for (const Arc& a : aux.adjacency[node]) {
      if (!(to_target[a.to] < to_target[node])) continue;
      if (std::abs(from_source[node] + a.length + to_target[a.to] - total) > tol) continue;
      if (!best || net.key_rank(a.edge) < net.key_rank(best->edge) ||
          (a.edge == best->edge && to_target[a.to] < to_target[best->to]))
        best = &a;
    }
    if (!best) throw Error(ErrorKind::Disconnected, "shortest path reconstruction failed");
    if (!path.segments.empty() && path.segments.back().edge == best->edge &&
        path.segments.back().exit == best->from_x) {
      path.segments.back().exit = best->to_x;
    } else {
      path.segments.push_back({best->edge, best->from_x, best->to_x});
    }
    node = best->to;
  }
  for (const PathSegment& s : path.segments) path.length += std::abs(s.exit - s.entry);
  return path;
}

Incidence incidence(const Network& net, std::string_view vertex) {
  return net.incidence(net.vertex_index(vertex));
}

DistanceField::DistanceField(const Network& net, const NetworkPoint& center) : center_(center) {
  require_point(net, center);
  const AuxGraph aux = make_aux_graph(net, center, nullptr);
  auto dist = dijkstra(aux, aux.source);
  vertex_distance_.assign(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(net.vertex_count()));
  for (const Edge& e : net.edges()) {
    lengths_.push_back(e.length);
    tails_.push_back(e.tail);
    heads_.push_back(e.head);
  }
}

std::pair<double, double> DistanceField::at_with_slope(std::size_t edge, double x) const {
  double best = vertex_distance_[tails_.at(edge)] + x;
  double slope = 1.0;
  const double via_head = vertex_distance_[heads_[edge]] + (lengths_[edge] - x);
  if (via_head < best) {
    best = via_head;
    slope = -1.0;
  }
  if (const auto* ep = std::get_if<EdgePoint>(&center_); ep && ep->edge == edge) {
    const double direct = std::abs(x - ep->x);
    if (direct <= best) {
      best = direct;
      slope = x > ep->x ? 1.0 : (x < ep->x ? -1.0 : 0.0);
    }
  }
  return {best, slope};
}

NetworkPoint parse_point(const Network& net, std::string_view spec) {
  auto bad = [&](const std::string& why) {
    return Error(ErrorKind::InvalidArgument, "bad point spec " + quoted(spec) + ": " + why);
  };
  if (spec.size() > 2 && spec.substr(0, 2) == "v:") {
    return VertexPoint{net.vertex_index(spec.substr(2))};
  }
  if (spec.size() > 2 && spec.substr(0, 2) == "e:") {
    const auto rest = spec.substr(2);
    const auto colon = rest.rfind(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == rest.size())
      throw bad("expected e:<key>:<x>");
    const auto key = rest.substr(0, colon);
    const auto x = detail::parse_double(rest.substr(colon + 1));
    if (!x) throw bad("coordinate is not a number");
    return locate(net, key, *x);
  }
  throw bad("expected v:<id> or e:<key>:<x>");
}

std::string format_point(const Network& net, const NetworkPoint& p) {
  if (const auto* vp = std::get_if<VertexPoint>(&p)) return "v:" + net.vertex_id(vp->vertex);
  const auto& ep = std::get<EdgePoint>(p);
  std::ostringstream out;
  out.precision(17);
  out << "e:" << net.edge(ep.edge).key << ":" << ep.x;
  return out.str();
}

std::vector<EdgeKey> path_edge_keys(const Network& net, const NetworkPath& path) {
  std::vector<EdgeKey> keys;
  keys.reserve(path.segments.size());
  for (const auto& s : path.segments) keys.push_back(net.edge(s.edge).key);
  return keys;
}

}  // namespace kirchnet
