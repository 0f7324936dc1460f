#pragma once

// Reference computations used only by the tests. They share no code with the
// library beyond its public types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "kirchnet/network.hpp"
#include "kirchnet/solver.hpp"

namespace oracle {

constexpr double kInf = std::numeric_limits<double>::infinity();

// All-pairs vertex distances.
inline std::vector<std::vector<double>> floyd_warshall(const kirchnet::Network& net) {
  const std::size_t n = net.vertex_count();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, kInf));
  for (std::size_t v = 0; v < n; ++v) d[v][v] = 0.0;
  for (const auto& e : net.edges()) {
    d[e.tail][e.head] = std::min(d[e.tail][e.head], e.length);
    d[e.head][e.tail] = std::min(d[e.head][e.tail], e.length);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

struct Anchor {
  std::size_t vertex;
  double offset;
};

// Ways to leave a point: the vertex itself, or either end of its edge.
inline std::vector<Anchor> anchors(const kirchnet::Network& net, const kirchnet::NetworkPoint& p) {
  if (const auto* v = std::get_if<kirchnet::VertexPoint>(&p)) return {{v->vertex, 0.0}};
  const auto& ep = std::get<kirchnet::EdgePoint>(p);
  const auto& e = net.edge(ep.edge);
  return {{e.tail, ep.x}, {e.head, e.length - ep.x}};
}

inline double point_distance(const kirchnet::Network& net,
                             const std::vector<std::vector<double>>& fw,
                             const kirchnet::NetworkPoint& p, const kirchnet::NetworkPoint& q) {
  double best = kInf;
  const auto* ep = std::get_if<kirchnet::EdgePoint>(&p);
  const auto* eq = std::get_if<kirchnet::EdgePoint>(&q);
  if (ep && eq && ep->edge == eq->edge) best = std::abs(ep->x - eq->x);
  for (const auto& a : anchors(net, p))
    for (const auto& b : anchors(net, q))
      best = std::min(best, a.offset + fw[a.vertex][b.vertex] + b.offset);
  return best;
}

// Flux at x = 0 of the exact Riemann solution for a concave LWR law.
inline double riemann_flux(const kirchnet::LwrFlux& law, double left, double right) {
  if (left == right) return law.flux(left);
  if (left < right) {
    const double shock = (law.flux(right) - law.flux(left)) / (right - left);
    return shock >= 0.0 ? law.flux(left) : law.flux(right);
  }
  // Rarefaction: characteristic speeds increase from left to right.
  if (law.derivative(left) >= 0.0) return law.flux(left);
  if (law.derivative(right) <= 0.0) return law.flux(right);
  return law.flux(0.5 * law.rho_max);
}

// Connected graph: random spanning tree plus extra edges, which may be
// parallel edges or self-loops. Keys are 1..m, vertices v0..v(n-1).
inline kirchnet::WeightedGraph random_connected_graph(std::mt19937_64& rng, std::size_t max_edges,
                                                      double w_lo, double w_hi) {
  std::uniform_int_distribution<std::size_t> edge_count(3, max_edges);
  const std::size_t m = edge_count(rng);
  std::uniform_int_distribution<std::size_t> vertex_count(2, std::max<std::size_t>(2, m * 2 / 3));
  const std::size_t n = std::min(vertex_count(rng), m + 1);
  std::uniform_real_distribution<double> weight(w_lo, w_hi);

  kirchnet::WeightedGraph g;
  for (std::size_t v = 0; v < n; ++v) g.vertices.push_back("v" + std::to_string(v));
  auto add = [&](std::size_t a, std::size_t b) {
    const std::string key = std::to_string(g.edges.size() + 1);
    if (rng() % 2) std::swap(a, b);
    g.edges.push_back({key, g.vertices[a], g.vertices[b]});
    g.weights[key] = weight(rng);
  };
  for (std::size_t v = 1; v < n; ++v) add(v, rng() % v);
  while (g.edges.size() < m) add(rng() % n, rng() % n);
  return g;
}

inline kirchnet::NetworkPoint random_point(const kirchnet::Network& net, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < 0.2) return kirchnet::VertexPoint{rng() % net.vertex_count()};
  const std::size_t e = rng() % net.edge_count();
  // Occasionally land exactly on an end to exercise canonicalization.
  const double r = unit(rng);
  const double x = r < 0.05 ? 0.0 : r > 0.95 ? net.edge(e).length : unit(rng) * net.edge(e).length;
  return kirchnet::locate(net, e, x);
}

inline kirchnet::WeightedGraph wheatstone() {
  kirchnet::WeightedGraph g;
  g.vertices = {"1", "2", "3", "4", "5", "6"};
  const char* ends[7][2] = {{"1", "2"}, {"2", "3"}, {"2", "4"}, {"3", "4"},
                            {"3", "5"}, {"4", "5"}, {"5", "6"}};
  for (int k = 0; k < 7; ++k) {
    const std::string key = std::to_string(k + 1);
    g.edges.push_back({key, ends[k][0], ends[k][1]});
    g.weights[key] = 1.0;
  }
  return g;
}

}  // namespace oracle
