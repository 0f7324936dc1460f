#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <sstream>

#include "kirchnet/calculus.hpp"
#include "kirchnet/cli.hpp"
#include "kirchnet/error.hpp"
#include "kirchnet/io.hpp"
#include "kirchnet/network.hpp"
#include "kirchnet/solver.hpp"
#include "kirchnet/verification.hpp"

namespace py = pybind11;
using namespace kirchnet;

namespace {

using NetPtr = std::shared_ptr<Network>;

NetPtr from_edges(const std::vector<std::tuple<std::string, std::string, std::string, double>>& edges) {
  WeightedGraph g;
  for (const auto& [key, tail, head, w] : edges) {
    for (const auto& v : {tail, head})
      if (std::find(g.vertices.begin(), g.vertices.end(), v) == g.vertices.end()) g.vertices.push_back(v);
    g.edges.push_back({key, tail, head});
    g.weights[key] = w;
  }
  return std::make_shared<Network>(build_network(g));
}

py::dict validate(const NetPtr& net) {
  const auto r = validate_regularity(*net);
  py::dict d;
  d["regular"] = r.regular;
  d["connected"] = r.connected;
  d["component_count"] = r.component_count;
  d["max_degree"] = r.max_degree;
  d["min_edge_length"] = r.min_edge_length;
  d["reasons"] = r.reasons;
  return d;
}

py::tuple path(const NetPtr& net, const std::string& p, const std::string& q) {
  const auto route = shortest_path(*net, parse_point(*net, p), parse_point(*net, q));
  return py::make_tuple(route.length, path_edge_keys(*net, route));
}

py::dict simulate_scenario(const std::filesystem::path& scenario, std::optional<double> t_end,
                           std::optional<double> h) {
  ScenarioConfig cfg = parse_scenario(scenario);
  if (t_end) cfg.t_end = *t_end;
  if (h) cfg.h = *h;
  check_scenario(cfg);
  Scenario sc = load_scenario(cfg);
  SimulationOptions opt;
  opt.t_end = cfg.t_end;
  opt.cfl = cfg.cfl;
  opt.stride = cfg.stride;
  std::vector<double> times, masses;
  const auto result = simulate(sc.initial, sc.rules, opt, [&](const DensityState& s, std::size_t) {
    times.push_back(s.time());
    masses.push_back(total_mass(s));
  });
  double residual = 0.0;
  for (std::size_t v = 0; v < sc.network->vertex_count(); ++v)
    residual = std::max(residual, kirchhoff_residual(result.final_state, v));
  py::dict d;
  d["steps"] = result.steps;
  d["times"] = times;
  d["mass"] = masses;
  d["final_density"] = result.final_state.density();
  d["max_kirchhoff_residual"] = residual;
  return d;
}

py::tuple cli(std::vector<std::string> args) {
  args.insert(args.begin(), "kirchnet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Conservation laws on metric networks";

  auto base = py::register_exception<Error>(m, "KirchnetError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());

  py::class_<Network, NetPtr>(m, "Network")
      .def_property_readonly("vertex_count", &Network::vertex_count)
      .def_property_readonly("edge_count", &Network::edge_count)
      .def_property_readonly("total_length", &Network::total_length)
      .def_property_readonly("min_edge_length", &Network::min_edge_length)
      .def_property_readonly("vertex_ids",
                             [](const Network& n) {
                               std::vector<std::string> ids;
                               for (std::size_t v = 0; v < n.vertex_count(); ++v) ids.push_back(n.vertex_id(v));
                               return ids;
                             })
      .def_property_readonly("edge_keys", [](const Network& n) {
        std::vector<std::string> keys;
        for (const auto& e : n.edges()) keys.push_back(e.key);
        return keys;
      });

  m.def("load_network", [](const std::filesystem::path& p) { return std::make_shared<Network>(load_network(p)); },
        py::arg("path"));
  m.def("network_from_edges", &from_edges, py::arg("edges"),
        "Build a network from (key, tail, head, length) tuples.");
  m.def("validate", &validate, py::arg("network"));
  m.def("distance",
        [](const NetPtr& net, const std::string& p, const std::string& q) {
          return distance(*net, parse_point(*net, p), parse_point(*net, q));
        },
        py::arg("network"), py::arg("p"), py::arg("q"), "Points are 'v:<id>' or 'e:<key>:<x>'.");
  m.def("shortest_path", &path, py::arg("network"), py::arg("p"), py::arg("q"));
  m.def("total_measure", [](const NetPtr& net) { return total_measure(*net); }, py::arg("network"));
  m.def("integrate",
        [](const NetPtr& net, const std::function<double(std::size_t, double)>& f, double h) {
          return integrate(*net, GridFunction::sample(Mesh::uniform(*net, h), Layout::Nodes, f));
        },
        py::arg("network"), py::arg("f"), py::arg("h"), "Trapezoid rule of f(edge_index, x) on a uniform mesh.");

  m.def("upwind_flux", [](double l, double r, double v) { return numerical_flux(l, r, v); }, py::arg("left"),
        py::arg("right"), py::arg("speed"));
  m.def("godunov_flux",
        [](double l, double r, double v_max, double rho_max) { return godunov_flux(LwrFlux{v_max, rho_max}, l, r); },
        py::arg("left"), py::arg("right"), py::arg("v_max") = 1.0, py::arg("rho_max") = 1.0);

  m.def("simulate_scenario", &simulate_scenario, py::arg("scenario"), py::arg("t_end") = py::none(),
        py::arg("h") = py::none());
  m.def("mollifier_error",
        [](const std::function<double(double, double)>& f, double t_end, double gamma) {
          return mollifier_boundary_check(f, t_end, gamma).error;
        },
        py::arg("f"), py::arg("t_end"), py::arg("gamma"));
  m.def("observed_order", &observed_order, py::arg("coarse"), py::arg("fine"), py::arg("ratio") = 2.0);
  m.def("run_cli", &cli, py::arg("args"), "Run the command-line tool in process; returns (code, stdout, stderr).");
}
