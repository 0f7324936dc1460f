#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "kirchnet/calculus.hpp"
#include "kirchnet/error.hpp"
#include "kirchnet/solver.hpp"
#include "kirchnet/verification.hpp"
#include "oracles.hpp"

using namespace kirchnet;

namespace {

std::shared_ptr<const Network> shared(const WeightedGraph& g) {
  return std::make_shared<const Network>(build_network(g));
}

std::shared_ptr<const Network> wheatstone() { return shared(oracle::wheatstone()); }
std::shared_ptr<const Network> single_edge(double len) {
  return shared({{"a", "b"}, {{"1", "a", "b"}}, {{"1", len}}});
}
std::shared_ptr<const Network> ring(double len) { return shared({{"a"}, {{"1", "a", "a"}}, {{"1", len}}}); }
// Edges 1 and 2 merge into 3 at vertex m.
std::shared_ptr<const Network> merge() {
  return shared({{"a", "b", "m", "c"},
                 {{"1", "a", "m"}, {"2", "b", "m"}, {"3", "m", "c"}},
                 {{"1", 1.0}, {"2", 1.0}, {"3", 1.0}}});
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Parse;
}

EndState linear_end(double rho, double speed) { return {rho, speed, std::nullopt}; }
EndState lwr_end(double rho, LwrFlux f = {}) { return {rho, 0.0, f}; }

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("numerical flux examples") {
  CHECK(numerical_flux(0.3, 0.7, 1.0) == doctest::Approx(0.3));
  CHECK(numerical_flux(0.3, 0.7, -1.0) == doctest::Approx(-0.7));
  CHECK(numerical_flux(0.8, 0.2, LwrFlux{1.0, 1.0}) == 0.25);
}

TEST_CASE("LWR demand and supply") {
  const LwrFlux f{2.0, 4.0};
  CHECK(f.critical_density() == 2.0);
  CHECK(f.capacity() == 2.0);
  CHECK(f.demand(1.0) == f.flux(1.0));
  CHECK(f.demand(3.0) == f.capacity());
  CHECK(f.supply(1.0) == f.capacity());
  CHECK(f.supply(3.0) == f.flux(3.0));
}

TEST_CASE("property: Godunov flux equals the exact Riemann flux") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const LwrFlux law{0.5 + 2.0 * u(rng), 0.5 + 2.0 * u(rng)};
    const double l = law.rho_max * u(rng), r = law.rho_max * u(rng);
    CHECK(godunov_flux(law, l, r) == doctest::Approx(oracle::riemann_flux(law, l, r)).epsilon(1e-14));
  }
}

TEST_CASE("junction examples") {
  const std::vector<EndState> one_in{linear_end(0.4, 1.0)};
  const std::vector<EndState> one_out{linear_end(0.0, 1.0)};
  auto pt = junction_fluxes(one_in, one_out, JunctionRule::pass_through());
  CHECK(pt.out[0] == doctest::Approx(0.4));

  const std::vector<EndState> two_in{linear_end(0.2, 1.0), linear_end(0.3, 1.0)};
  auto merged = junction_fluxes(two_in, one_out, JunctionRule{JunctionMode::Distribute, {{1.0, 1.0}}});
  CHECK(merged.out[0] == doctest::Approx(0.5));
  CHECK(sum(merged.in) == sum(merged.out));

  auto dead = junction_fluxes(one_in, {}, JunctionRule::equal_split(JunctionMode::Distribute, 0, 1));
  CHECK(dead.in[0] == 0.0);
  auto dead_lwr = junction_fluxes(std::vector<EndState>{lwr_end(0.7)}, {},
                                  JunctionRule::equal_split(JunctionMode::SupplyDemand, 0, 1));
  CHECK(dead_lwr.in[0] == 0.0);
}

TEST_CASE("linear junction: matrix split and walls") {
  const std::vector<EndState> in{linear_end(0.6, 1.0)};
  const std::vector<EndState> out{linear_end(0.0, 1.0), linear_end(0.0, 1.0)};
  auto f = junction_fluxes(in, out, JunctionRule{JunctionMode::Distribute, {{0.25}, {0.75}}});
  CHECK(f.out[0] == doctest::Approx(0.15));
  CHECK(f.out[1] == doctest::Approx(0.45));

  // Both out-edges run backwards into the vertex: no receiver, so walls.
  const std::vector<EndState> reversed{linear_end(0.5, -1.0), linear_end(0.5, -1.0)};
  auto closed = junction_fluxes(in, reversed, JunctionRule{JunctionMode::Distribute, {{0.5}, {0.5}}});
  CHECK(closed.in[0] == 0.0);
  CHECK(closed.out[0] == 0.0);
  CHECK(closed.out[1] == 0.0);
}

TEST_CASE("supply-demand junction limits by downstream supply") {
  const LwrFlux law{};
  // Two critical in-edges each demand 0.25, the out-edge can take f(0.9) = 0.09.
  const std::vector<EndState> in{lwr_end(0.5), lwr_end(0.6)};
  const std::vector<EndState> out{lwr_end(0.9)};
  auto f = junction_fluxes(in, out, JunctionRule{JunctionMode::SupplyDemand, {{1.0, 1.0}}});
  CHECK(f.out[0] == doctest::Approx(law.flux(0.9)));
  CHECK(f.in[0] == doctest::Approx(0.045));
  CHECK(f.in[1] == doctest::Approx(0.045));

  // Free flow downstream: demands pass unchanged.
  const std::vector<EndState> free_out{lwr_end(0.1)};
  const std::vector<EndState> light{lwr_end(0.1), lwr_end(0.2)};
  auto g = junction_fluxes(light, free_out, JunctionRule{JunctionMode::SupplyDemand, {{1.0, 1.0}}});
  CHECK(g.in[0] == doctest::Approx(law.flux(0.1)));
  CHECK(g.in[1] == doctest::Approx(law.flux(0.2)));
  CHECK(g.out[0] == doctest::Approx(law.flux(0.1) + law.flux(0.2)));
}

TEST_CASE("rule validation") {
  const auto net = merge();
  const auto linear = uniform_velocity(*net, 1.0);
  const auto lwr = lwr_velocity(*net, {});
  const std::size_t m = net->vertex_index("m");
  auto rules = JunctionRules::defaults(*net, linear);
  CHECK(rules.at(m).mode == JunctionMode::Distribute);
  CHECK(JunctionRules::defaults(*net, lwr).at(m).mode == JunctionMode::SupplyDemand);

  CHECK(kind_of([&] { rules.set(*net, linear, m, JunctionRule::pass_through()); }) == ErrorKind::RuleShapeMismatch);
  CHECK(kind_of([&] { rules.set(*net, lwr, m, JunctionRule{JunctionMode::Distribute, {{1.0, 1.0}}}); }) ==
        ErrorKind::RuleShapeMismatch);
  CHECK(kind_of([&] { rules.set(*net, linear, m, JunctionRule{JunctionMode::SupplyDemand, {{1.0, 1.0}}}); }) ==
        ErrorKind::RuleShapeMismatch);
  CHECK(kind_of([&] { rules.set(*net, linear, m, JunctionRule{JunctionMode::Distribute, {{1.0}}}); }) ==
        ErrorKind::RuleShapeMismatch);
  CHECK(kind_of([&] { rules.set(*net, linear, m, JunctionRule{JunctionMode::Distribute, {{0.5, 1.0}}}); }) ==
        ErrorKind::RuleShapeMismatch);
  CHECK(kind_of([&] { rules.set(*net, linear, m, JunctionRule{JunctionMode::Distribute, {{-1.0, 1.0}}}); }) ==
        ErrorKind::RuleShapeMismatch);
  CHECK(kind_of([&] { rules.set(*net, linear, 99, JunctionRule::pass_through()); }) == ErrorKind::UnknownVertex);
  CHECK_NOTHROW(rules.set(*net, linear, m, JunctionRule{JunctionMode::Distribute, {{1.0, 1.0}}}));
}

TEST_CASE("JunctionRules::set leaves exactly stochastic columns") {
  const auto net = shared({{"a", "m", "x", "y", "z"},
                           {{"1", "a", "m"}, {"2", "m", "x"}, {"3", "m", "y"}, {"4", "m", "z"}},
                           {{"1", 1.0}, {"2", 1.0}, {"3", 1.0}, {"4", 1.0}}});
  const auto model = uniform_velocity(*net, 1.0);
  auto rules = JunctionRules::defaults(*net, model);
  const std::size_t m = net->vertex_index("m");
  rules.set(*net, model, m, JunctionRule{JunctionMode::Distribute, {{0.1}, {0.2}, {0.7}}});
  double s = 0.0;
  for (const auto& row : rules.at(m).matrix) s += row[0];
  CHECK(std::abs(s - 1.0) <= 1e-15);
}

TEST_CASE("property: junction fluxes balance for random rules and states") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const std::size_t n_in = 1 + rng() % 4, n_out = 1 + rng() % 4;
    const bool lwr = k % 2 == 1;
    JunctionRule rule{lwr ? JunctionMode::SupplyDemand : JunctionMode::Distribute,
                      std::vector<std::vector<double>>(n_out, std::vector<double>(n_in))};
    for (std::size_t c = 0; c < n_in; ++c) {
      double s = 0.0;
      for (auto& row : rule.matrix) s += row[c] = u(rng);
      for (auto& row : rule.matrix) row[c] /= s;
    }
    std::vector<EndState> in(n_in), out(n_out);
    for (auto& e : in) e = lwr ? lwr_end(u(rng)) : linear_end(u(rng), 2.0 * u(rng) - 1.0);
    for (auto& e : out) e = lwr ? lwr_end(u(rng)) : linear_end(u(rng), 2.0 * u(rng) - 1.0);
    const auto f = junction_fluxes(in, out, rule);
    CHECK(std::abs(sum(f.in) - sum(f.out)) <= 1e-15);
    if (lwr) {
      for (std::size_t i = 0; i < n_in; ++i) CHECK(f.in[i] <= in[i].lwr->demand(in[i].rho) + 1e-15);
      for (std::size_t j = 0; j < n_out; ++j) CHECK(f.out[j] <= out[j].lwr->supply(out[j].rho) + 1e-15);
    }
  }
}

TEST_CASE("init_state examples and errors") {
  const auto net = wheatstone();
  CHECK(total_mass(init_state(net, EdgeSampler([](std::size_t, double) { return 0.0; }),
                              uniform_velocity(*net, 1.0), 0.1)) == 0.0);
  CHECK(total_mass(init_state(net, EdgeSampler([](std::size_t, double) { return 1.0; }),
                              uniform_velocity(*net, 1.0), 0.13)) == doctest::Approx(7.0).epsilon(1e-15));

  // Midpoint cell averages of a Gaussian against the trapezoid integral.
  auto gauss = [](std::size_t e, double x) { return std::exp(-20.0 * (x - 0.5) * (x - 0.5)) * (1.0 + e); };
  auto mass_error = [&](double h) {
    const auto s = init_state(net, EdgeSampler(gauss), uniform_velocity(*net, 1.0), h);
    const auto fine = GridFunction::sample(Mesh::uniform(*net, 1e-3), Layout::Nodes, gauss);
    return std::abs(total_mass(s) - integrate(*net, fine));
  };
  CHECK(mass_error(0.05) < 1e-2);
  CHECK(observed_order(mass_error(0.1), mass_error(0.05)) > 1.8);

  CHECK(kind_of([&] {
          init_state(net, EdgeSampler([](std::size_t, double) { return 0.0; }), uniform_velocity(*net, 1.0), 1.5);
        }) == ErrorKind::MeshTooCoarse);
  CHECK(kind_of([&] {
          init_state(net, EdgeSampler([](std::size_t, double) { return -0.1; }), uniform_velocity(*net, 1.0), 0.1);
        }) == ErrorKind::DensityOutOfRange);
  CHECK(kind_of([&] {
          init_state(net, EdgeSampler([](std::size_t, double) { return 1.5; }), lwr_velocity(*net, {}), 0.1);
        }) == ErrorKind::DensityOutOfRange);
}

TEST_CASE("init_state accepts nodal and cell grid functions") {
  const auto net = single_edge(1.0);
  const Mesh mesh = Mesh::uniform(*net, 0.25);
  const auto nodes = GridFunction::sample(mesh, Layout::Nodes, [](std::size_t, double x) { return x; });
  const auto s = init_state(net, nodes, uniform_velocity(*net, 1.0), 0.25);
  CHECK(s.cells(0)[0] == 0.125);
  CHECK(s.cells(0)[3] == 0.875);
  const auto cells = GridFunction(mesh, Layout::Cells, {{1, 2, 3, 4}});
  CHECK(init_state(net, cells, uniform_velocity(*net, 1.0), 0.25).cells(0)[2] == 3.0);
  CHECK(kind_of([&] { init_state(net, cells, uniform_velocity(*net, 1.0), 0.5); }) == ErrorKind::MeshMismatch);
}

TEST_CASE("cfl_dt examples") {
  const auto net = wheatstone();
  auto zero = EdgeSampler([](std::size_t, double) { return 0.0; });
  CHECK(cfl_dt(init_state(net, zero, uniform_velocity(*net, 2.0), 0.1), 0.9, 10.0) == doctest::Approx(0.045));
  CHECK(cfl_dt(init_state(net, zero, uniform_velocity(*net, -2.0), 0.1), 0.9, 10.0) == doctest::Approx(0.045));
  CHECK(cfl_dt(init_state(net, zero, uniform_velocity(*net, 0.0), 0.1), 0.9, 3.0) == 3.0);
  CHECK(cfl_dt(init_state(net, zero, uniform_velocity(*net, 2.0), 0.1), 0.9, 0.01) == doctest::Approx(0.01));
  const auto mixed = EdgeSampler([](std::size_t, double x) { return x; });
  CHECK(cfl_dt(init_state(net, mixed, lwr_velocity(*net, {}), 0.1), 0.9, 10.0) == doctest::Approx(0.09));
  // A uniform state still uses the full admissible range.
  const auto uniform = EdgeSampler([](std::size_t, double) { return 0.4; });
  CHECK(cfl_dt(init_state(net, uniform, lwr_velocity(*net, {}), 0.1), 0.9, 10.0) == doctest::Approx(0.09));
  CHECK(kind_of([&] { cfl_dt(init_state(net, zero, uniform_velocity(*net, 1.0), 0.1), 1.5, 1.0); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("step: constant state on a ring is steady") {
  const auto net = ring(2.0);
  auto s = init_state(net, EdgeSampler([](std::size_t, double) { return 0.7; }), uniform_velocity(*net, 1.3), 0.1);
  const auto rules = JunctionRules::defaults(*net, s.velocity());
  for (int k = 0; k < 50; ++k) s = step(std::move(s), cfl_dt(s, 0.9, 100.0), rules);
  for (double v : s.cells(0)) CHECK(v == doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("step: unit CFL upwind shifts by one cell") {
  for (double speed : {1.0, -1.0}) {
    const auto net = single_edge(1.0);
    auto s = init_state(net, EdgeSampler([](std::size_t, double x) { return std::sin(7.0 * x) + 1.5; }),
                        uniform_velocity(*net, speed), 0.05);
    const std::vector<double> before(s.cells(0).begin(), s.cells(0).end());
    const auto rules = JunctionRules::defaults(*net, s.velocity());
    const double dt = cfl_dt(s, 1.0, 10.0);
    CHECK(dt == doctest::Approx(0.05).epsilon(1e-15));
    s = step(std::move(s), dt, rules);
    const auto after = s.cells(0);
    const std::size_t n = before.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double expected = speed > 0 ? before[i - 1] : before[i + 1];
      CHECK(std::abs(after[i] - expected) <= 1e-14);
    }
  }
}

TEST_CASE("step: square pulse through a merge conserves mass") {
  const auto net = merge();
  auto s = init_state(net, EdgeSampler([](std::size_t e, double x) {
                        return e < 2 && x > 0.2 && x < 0.6 ? 1.0 : 0.0;
                      }),
                      uniform_velocity(*net, 1.0), 0.02);
  const double m0 = total_mass(s);
  const auto rules = JunctionRules::defaults(*net, s.velocity());
  for (int k = 0; k < 100; ++k) s = step(std::move(s), 0.9 * 0.02, rules);
  CHECK(std::abs(total_mass(s) - m0) <= 1e-12);
  for (std::size_t v = 0; v < net->vertex_count(); ++v) CHECK(kirchhoff_residual(s, v) <= 1e-12);
  // Dead ends carry nothing.
  CHECK(kirchhoff_residual(s, net->vertex_index("a")) == 0.0);
  for (const auto& rec : s.ledger()) CHECK(rec.vertices[net->vertex_index("c")].in == std::vector<double>{0.0});
}

TEST_CASE("kirchhoff_residual detects corrupted records") {
  const auto net = merge();
  auto s = init_state(net, EdgeSampler([](std::size_t, double) { return 0.5; }), uniform_velocity(*net, 1.0), 0.1);
  const std::size_t m = net->vertex_index("m");
  CHECK(kind_of([&] { kirchhoff_residual(s, m); }) == ErrorKind::EmptyLedger);
  s = step(std::move(s), 0.05, JunctionRules::defaults(*net, s.velocity()));
  CHECK(kirchhoff_residual(s, m) <= 1e-12);
  s.mutable_ledger().back().vertices[m].in[0] += 0.1;
  CHECK(kirchhoff_residual(s, m) >= 0.1 - 1e-12);
  CHECK(kind_of([&] { kirchhoff_residual(s, 42); }) == ErrorKind::UnknownVertex);
}

TEST_CASE("negative speeds transport from head to tail") {
  const auto net = merge();
  // Everything flows backwards: edge 3 feeds edges 1 and 2 equally.
  auto s = init_state(net, EdgeSampler([](std::size_t e, double x) { return e == 2 && x < 0.5 ? 1.0 : 0.0; }),
                      uniform_velocity(*net, -1.0), 0.05);
  const double m0 = total_mass(s);
  SimulationOptions opt;
  opt.t_end = 1.0;
  const auto result = simulate(s, JunctionRules::defaults(*net, s.velocity()), opt);
  const auto& fin = result.final_state;
  CHECK(std::abs(total_mass(fin) - m0) <= 1e-12);
  double m1 = 0.0, m2 = 0.0;
  for (double v : fin.cells(0)) m1 += v * fin.mesh().spacing[0];
  for (double v : fin.cells(1)) m2 += v * fin.mesh().spacing[1];
  CHECK(m1 > 0.1);
  CHECK(m1 == doctest::Approx(m2).epsilon(1e-12));
}

TEST_CASE("space-time velocity conserves mass") {
  const auto net = wheatstone();
  SpaceTimeVelocity v{[](std::size_t e, double t, double x) { return 0.5 + 0.4 * std::sin(3.0 * t + x + e); }};
  auto s = init_state(net, EdgeSampler([](std::size_t e, double x) { return e == 0 ? std::sin(3.1 * x) + 1.0 : 0.2; }),
                      v, 0.05);
  const double m0 = total_mass(s);
  SimulationOptions opt;
  opt.t_end = 2.0;
  opt.stride = 7;
  const auto result = simulate(s, JunctionRules::defaults(*net, s.velocity()), opt);
  CHECK(std::abs(total_mass(result.final_state) - m0) <= 1e-12);
  CHECK(result.final_state.time() == 2.0);
  // First, every seventh, and the last step.
  CHECK(result.trajectory.snapshots.size() == 1 + result.steps / 7 + (result.steps % 7 ? 1 : 0));
}

TEST_CASE("property: LWR runs stay within [0, rho_max] on random networks") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 6; ++k) {
    const auto net = shared(oracle::random_connected_graph(rng, 12, 0.5, 3.0));
    const LwrFlux law{0.5 + u(rng), 1.0 + u(rng)};
    const double a = u(rng);
    auto s = init_state(net, EdgeSampler([&](std::size_t e, double x) {
                          return law.rho_max * (0.5 + 0.5 * std::sin(a * 10 * x + e));
                        }),
                        lwr_velocity(*net, law), net->min_edge_length() / 4);
    const double m0 = total_mass(s);
    SimulationOptions opt;
    opt.t_end = 5.0;
    opt.stride = 1000000;
    REQUIRE_NOTHROW(s = simulate(s, JunctionRules::defaults(*net, s.velocity()), opt).final_state);
    for (const auto& cells : s.density())
      for (double v : cells) CHECK((v >= -1e-12 && v <= law.rho_max + 1e-12));
    CHECK(std::abs(total_mass(s) - m0) <= 1e-11);
  }
}

TEST_CASE("simulate argument checks") {
  const auto net = single_edge(1.0);
  auto s = init_state(net, EdgeSampler([](std::size_t, double) { return 0.0; }), uniform_velocity(*net, 1.0), 0.1);
  const auto rules = JunctionRules::defaults(*net, s.velocity());
  SimulationOptions opt;
  opt.stride = 0;
  CHECK(kind_of([&] { simulate(s, rules, opt); }) == ErrorKind::InvalidArgument);
  opt.stride = 1;
  opt.t_end = 0.0;
  CHECK(kind_of([&] { simulate(s, rules, opt); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { step(s, -1.0, rules); }) == ErrorKind::InvalidArgument);
}
