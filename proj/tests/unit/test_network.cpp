#include <doctest.h>

#include <random>
#include <variant>

#include "kirchnet/error.hpp"
#include "kirchnet/network.hpp"
#include "oracles.hpp"

using namespace kirchnet;

namespace {

Network wheatstone() { return build_network(oracle::wheatstone()); }

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Parse;
}

WeightedGraph graph_of(std::vector<GraphEdge> edges, std::vector<double> w) {
  WeightedGraph g;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    for (const auto& v : {edges[i].tail, edges[i].head})
      if (std::find(g.vertices.begin(), g.vertices.end(), v) == g.vertices.end())
        g.vertices.push_back(v);
    g.weights[edges[i].key] = w[i];
  }
  g.edges = std::move(edges);
  return g;
}

}  // namespace

TEST_CASE("build_network on the Wheatstone graph") {
  const Network net = wheatstone();
  CHECK(net.vertex_count() == 6);
  CHECK(net.edge_count() == 7);
  CHECK(net.min_edge_length() == 1.0);
  CHECK(net.total_length() == 7.0);
}

TEST_CASE("single edge and self-loop") {
  const Network edge = build_network(graph_of({{"1", "a", "b"}}, {2.5}));
  CHECK(edge.vertex_count() == 2);
  CHECK(edge.min_edge_length() == 2.5);

  const Network loop = build_network(graph_of({{"1", "a", "a"}}, {2.0}));
  CHECK(loop.vertex_count() == 1);
  CHECK(loop.degree(0) == 2);
  CHECK(loop.edge(0).is_loop());
  CHECK(loop.incidence(0).in == std::vector<std::size_t>{0});
  CHECK(loop.incidence(0).out == std::vector<std::size_t>{0});
}

TEST_CASE("build_network rejects malformed graphs") {
  CHECK(kind_of([] { build_network(graph_of({{"1", "a", "b"}}, {0.0})); }) ==
        ErrorKind::NonPositiveWeight);
  CHECK(kind_of([] { build_network(graph_of({{"1", "a", "b"}}, {-1.0})); }) ==
        ErrorKind::NonPositiveWeight);
  CHECK(kind_of([] {
          build_network(graph_of({{"1", "a", "b"}}, {std::numeric_limits<double>::infinity()}));
        }) == ErrorKind::NonPositiveWeight);
  CHECK(kind_of([] { build_network(graph_of({{"1", "a", "b"}, {"1", "b", "c"}}, {1.0, 1.0})); }) ==
        ErrorKind::DuplicateEdgeKey);

  WeightedGraph isolated = graph_of({{"1", "a", "b"}}, {1.0});
  isolated.vertices.push_back("lonely");
  CHECK(kind_of([&] { build_network(isolated); }) == ErrorKind::IsolatedVertex);

  WeightedGraph undeclared = graph_of({{"1", "a", "b"}}, {1.0});
  undeclared.vertices = {"a"};
  CHECK(kind_of([&] { build_network(undeclared); }) == ErrorKind::UnknownVertex);

  WeightedGraph missing = graph_of({{"1", "a", "b"}}, {1.0});
  missing.weights.clear();
  CHECK(kind_of([&] { build_network(missing); }) == ErrorKind::NonPositiveWeight);
}

TEST_CASE("validate_regularity") {
  const auto report = validate_regularity(wheatstone());
  CHECK(report.regular);
  CHECK(report.connected);
  CHECK(report.max_degree == 3);
  CHECK(report.min_edge_length == 1.0);

  const auto split = validate_regularity(build_network(graph_of({{"1", "a", "b"}, {"2", "c", "d"}}, {1.0, 1.0})));
  CHECK_FALSE(split.regular);
  CHECK(split.component_count == 2);
  CHECK_FALSE(split.reasons.empty());
}

TEST_CASE("locate canonicalizes edge ends") {
  const Network net = wheatstone();
  CHECK(locate(net, "1", 0.0) == NetworkPoint{VertexPoint{net.vertex_index("1")}});
  CHECK(locate(net, "1", 1.0) == NetworkPoint{VertexPoint{net.vertex_index("2")}});
  // Edge 2 starts where edge 1 ends.
  CHECK(locate(net, "1", 1.0) == locate(net, "2", 0.0));
  CHECK(locate(net, "3", 0.25) == NetworkPoint{EdgePoint{net.edge_index("3"), 0.25}});
  CHECK(kind_of([&] { locate(net, "1", 1.5); }) == ErrorKind::CoordinateOutOfRange);
  CHECK(kind_of([&] { locate(net, "1", -0.1); }) == ErrorKind::CoordinateOutOfRange);
  CHECK(kind_of([&] { locate(net, "99", 0.5); }) == ErrorKind::UnknownEdge);
}

TEST_CASE("distance examples") {
  const Network net = wheatstone();
  const auto v = [&](const char* id) { return NetworkPoint{VertexPoint{net.vertex_index(id)}}; };
  CHECK(distance(net, v("1"), v("6")) == 4.0);
  CHECK(distance(net, v("1"), v("1")) == 0.0);
  CHECK(distance(net, locate(net, "1", 0.5), v("1")) == 0.5);
  CHECK(distance(net, locate(net, "4", 0.5), locate(net, "1", 0.5)) == doctest::Approx(2.0));

  const Network split = build_network(graph_of({{"1", "a", "b"}, {"2", "c", "d"}}, {1.0, 1.0}));
  CHECK(kind_of([&] {
          distance(split, VertexPoint{split.vertex_index("a")}, VertexPoint{split.vertex_index("c")});
        }) == ErrorKind::Disconnected);
}

TEST_CASE("distance on a self-loop goes the short way round") {
  const Network loop = build_network(graph_of({{"1", "a", "a"}}, {2.0}));
  CHECK(distance(loop, locate(loop, "1", 0.2), locate(loop, "1", 1.9)) == doctest::Approx(0.3));
  CHECK(distance(loop, locate(loop, "1", 0.5), locate(loop, "1", 1.2)) == doctest::Approx(0.7));
  CHECK(distance(loop, locate(loop, "1", 1.0), VertexPoint{0}) == 1.0);
}

TEST_CASE("parallel edges are glued only at their ends") {
  const Network net = build_network(graph_of({{"1", "a", "b"}, {"2", "a", "b"}}, {1.0, 3.0}));
  // Midpoint of the long edge reaches the short one through either end.
  CHECK(distance(net, locate(net, "2", 1.5), locate(net, "1", 0.5)) == doctest::Approx(2.0));
  CHECK(distance(net, locate(net, "2", 0.5), locate(net, "1", 0.5)) == doctest::Approx(1.0));
}

TEST_CASE("shortest_path tie-breaking on the Wheatstone network") {
  const Network net = wheatstone();
  const auto path = shortest_path(net, VertexPoint{net.vertex_index("1")}, VertexPoint{net.vertex_index("6")});
  CHECK(path.length == doctest::Approx(4.0));
  CHECK(path_edge_keys(net, path) == std::vector<EdgeKey>{"1", "2", "5", "7"});

  // Reversed direction still prefers the smaller key at each branching.
  const auto back = shortest_path(net, VertexPoint{net.vertex_index("6")}, VertexPoint{net.vertex_index("1")});
  CHECK(path_edge_keys(net, back) == std::vector<EdgeKey>{"7", "5", "2", "1"});

  const auto partial = shortest_path(net, locate(net, "1", 0.5), VertexPoint{net.vertex_index("1")});
  CHECK(partial.length == 0.5);
  REQUIRE(partial.segments.size() == 1);
  CHECK(partial.segments[0].entry == 0.5);
  CHECK(partial.segments[0].exit == 0.0);
}

TEST_CASE("natural key order compares numbers numerically") {
  CHECK(natural_less("2", "10"));
  CHECK_FALSE(natural_less("10", "2"));
  CHECK(natural_less("9", "a"));
  CHECK(natural_less("a", "b"));
  CHECK_FALSE(natural_less("a", "a"));

  // Keys 2 and 10 form equally long routes; 2 must win over 10.
  const Network net = build_network(graph_of({{"10", "a", "b"}, {"2", "a", "b"}}, {1.0, 1.0}));
  const auto path = shortest_path(net, VertexPoint{0}, VertexPoint{1});
  CHECK(path_edge_keys(net, path) == std::vector<EdgeKey>{"2"});
}

TEST_CASE("incidence examples") {
  const Network net = wheatstone();
  const auto inc5 = incidence(net, "5");
  CHECK(inc5.in == std::vector<std::size_t>{net.edge_index("5"), net.edge_index("6")});
  CHECK(inc5.out == std::vector<std::size_t>{net.edge_index("7")});
  const auto inc1 = incidence(net, "1");
  CHECK(inc1.in.empty());
  CHECK(inc1.out == std::vector<std::size_t>{net.edge_index("1")});
  CHECK(kind_of([&] { incidence(net, "nope"); }) == ErrorKind::UnknownVertex);
}

TEST_CASE("parse_point and format_point") {
  const Network net = wheatstone();
  CHECK(parse_point(net, "v:3") == NetworkPoint{VertexPoint{net.vertex_index("3")}});
  CHECK(parse_point(net, "e:2:0.25") == NetworkPoint{EdgePoint{net.edge_index("2"), 0.25}});
  CHECK(parse_point(net, "e:2:0") == NetworkPoint{VertexPoint{net.vertex_index("2")}});
  CHECK(format_point(net, parse_point(net, "e:2:0.25")) == "e:2:0.25");
  CHECK(kind_of([&] { parse_point(net, "x:1"); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { parse_point(net, "e:2:abc"); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { parse_point(net, "v:9"); }) == ErrorKind::UnknownVertex);
}

TEST_CASE("DistanceField agrees with pointwise distance") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Network net = build_network(oracle::random_connected_graph(rng, 12, 0.5, 3.0));
    const NetworkPoint c = oracle::random_point(net, rng);
    const DistanceField field(net, c);
    for (int k = 0; k < 30; ++k) {
      const std::size_t e = rng() % net.edge_count();
      const double x = std::uniform_real_distribution<double>(0.0, net.edge(e).length)(rng);
      CHECK(field.at(e, x) == doctest::Approx(distance(net, c, locate(net, e, x))).epsilon(1e-12));
    }
  }
}

TEST_CASE("property: distance matches the Floyd-Warshall oracle and the metric axioms") {
  std::mt19937_64 rng(2024);
  for (int g = 0; g < 8; ++g) {
    const Network net = build_network(oracle::random_connected_graph(rng, 20, 0.5, 3.0));
    const auto fw = oracle::floyd_warshall(net);
    for (int k = 0; k < 60; ++k) {
      const auto p = oracle::random_point(net, rng);
      const auto q = oracle::random_point(net, rng);
      const auto r = oracle::random_point(net, rng);
      const double dpq = distance(net, p, q);
      CHECK(dpq == distance(net, q, p));
      CHECK(distance(net, p, p) == 0.0);
      CHECK(std::abs(dpq - oracle::point_distance(net, fw, p, q)) <= 1e-12);
      CHECK(dpq <= distance(net, p, r) + distance(net, r, q) + 1e-12);
      if (!(p == q)) CHECK(dpq > 0.0);
      CHECK(std::abs(shortest_path(net, p, q).length - dpq) <= 1e-12);
    }
  }
}
