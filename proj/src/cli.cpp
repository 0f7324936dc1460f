#include "kirchnet/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "kirchnet/calculus.hpp"
#include "kirchnet/error.hpp"
#include "kirchnet/io.hpp"
#include "kirchnet/svg.hpp"
#include "kirchnet/verification.hpp"
#include "text_util.hpp"

namespace kirchnet {

namespace {

namespace fs = std::filesystem;
using detail::format_double;

constexpr int kOk = 0;
constexpr int kDomainFailure = 1;
constexpr int kInputFailure = 2;

struct Overrides {
  std::optional<std::string> output_dir;
  std::optional<std::size_t> stride;
  std::optional<double> h;
  std::optional<double> cfl;
};

ScenarioConfig scenario_with(const std::string& path, const Overrides& o) {
  ScenarioConfig cfg = parse_scenario(path);
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.stride) cfg.stride = *o.stride;
  if (o.h) cfg.h = *o.h;
  if (o.cfl) cfg.cfl = *o.cfl;
  check_scenario(cfg);
  return cfg;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  return out;
}

double max_ledger_imbalance(const DensityState& state) {
  double worst = 0.0;
  for (const auto& s : state.ledger())
    for (const auto& v : s.vertices) worst = std::max(worst, v.imbalance());
  return worst;
}

SimulationResult run(const Scenario& sc, std::size_t stride) {
  SimulationOptions opt;
  opt.t_end = sc.config.t_end;
  opt.cfl = sc.config.cfl;
  opt.stride = stride;
  return simulate(sc.initial, sc.rules, opt);
}

int cmd_validate(const std::string& path, std::ostream& out) {
  const Network net = load_network(path);
  const RegularityReport report = validate_regularity(net);
  out << report.to_text();
  return report.regular ? kOk : kDomainFailure;
}

int cmd_distance(const std::string& path, const std::string& p_spec, const std::string& q_spec,
                 std::ostream& out, std::ostream& err) {
  const Network net = load_network(path);
  NetworkPoint p, q;
  try {
    p = parse_point(net, p_spec);
    q = parse_point(net, q_spec);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputFailure;
  }
  const NetworkPath route = shortest_path(net, p, q);
  std::ostringstream line;
  line << std::fixed << std::setprecision(12) << route.length;
  out << line.str() << '\n';
  out << "path:";
  for (const auto& key : path_edge_keys(net, route)) out << ' ' << key;
  out << '\n';
  return kOk;
}

int cmd_simulate(const ScenarioConfig& cfg, std::ostream& out) {
  Scenario sc = load_scenario(cfg);
  fs::create_directories(cfg.output_dir);
  const Network& net = *sc.network;

  auto mass_csv = open_output(cfg.output_dir / "mass.csv");
  auto kirchhoff_csv = open_output(cfg.output_dir / "kirchhoff.csv");
  mass_csv << "t,total_mass\n";
  kirchhoff_csv << "t,vertex,residual\n";

  std::vector<std::pair<double, double>> mass_series;
  std::vector<double> pending(net.vertex_count(), 0.0);
  std::size_t written_step = 0;
  bool have_pending = false;

  auto emit = [&](const DensityState& state, std::size_t step_no) {
    const double m = total_mass(state);
    mass_series.emplace_back(state.time(), m);
    mass_csv << format_double(state.time()) << ',' << format_double(m) << '\n';
    if (step_no > 0)
      for (std::size_t v = 0; v < net.vertex_count(); ++v) {
        kirchhoff_csv << format_double(state.time()) << ',' << net.vertex_id(v) << ','
                      << format_double(pending[v]) << '\n';
        pending[v] = 0.0;
      }
    if (cfg.snapshots) {
      char name[32];
      std::snprintf(name, sizeof(name), "density_%06zu.csv", step_no);
      auto snap = open_output(cfg.output_dir / name);
      write_grid_function_csv(snap, net, state.density_function());
    }
    written_step = step_no;
    have_pending = false;
  };

  SimulationOptions opt;
  opt.t_end = cfg.t_end;
  opt.cfl = cfg.cfl;
  opt.stride = cfg.stride;
  std::size_t last_step = 0;
  auto observer = [&](const DensityState& state, std::size_t step_no) {
    last_step = step_no;
    if (step_no > 0) {
      const auto& rec = state.ledger().back();
      for (std::size_t v = 0; v < net.vertex_count(); ++v)
        pending[v] = std::max(pending[v], rec.vertices[v].imbalance());
      have_pending = true;
    }
    if (step_no % cfg.stride == 0) emit(state, step_no);
  };
  SimulationResult result = simulate(sc.initial, sc.rules, opt, observer);
  if (have_pending && written_step != last_step) emit(result.final_state, last_step);

  auto svg = open_output(cfg.output_dir / "summary.svg");
  write_summary_svg(svg, mass_series, result.final_state);

  const double m0 = mass_series.front().second;
  out << "steps: " << result.steps << '\n';
  out << "final time: " << format_double(result.final_state.time()) << '\n';
  out << "mass drift: " << format_double(std::abs(mass_series.back().second - m0)) << '\n';
  out << "max kirchhoff residual: " << format_double(max_ledger_imbalance(result.final_state))
      << '\n';
  out << "output: " << cfg.output_dir.string() << '\n';
  return kOk;
}

struct Metric {
  std::string name;
  double value;
  double threshold;
  bool upper;  // value must stay below the threshold

  bool passes() const { return upper ? value <= threshold : value >= threshold; }
};

Scenario at_resolution(ScenarioConfig cfg, double h) {
  cfg.h = h;
  return load_scenario(cfg);
}

std::vector<Metric> orders(const std::string& what, const std::vector<double>& errors, double min_order) {
  std::vector<Metric> out;
  for (std::size_t k = 0; k + 1 < errors.size(); ++k)
    out.push_back({what + " order h/" + std::to_string(1u << k) + "->h/" +
                       std::to_string(1u << (k + 1)),
                   observed_order(errors[k], errors[k + 1]), min_order, false});
  return out;
}

std::vector<Metric> suite_kirchhoff(const ScenarioConfig& cfg) {
  std::vector<Metric> m;
  for (double h : {cfg.h, cfg.h / 2}) {
    const auto result = run(at_resolution(cfg, h), cfg.stride);
    m.push_back({"kirchhoff residual h=" + format_double(h),
                 max_ledger_imbalance(result.final_state), 1e-12, true});
  }
  return m;
}

std::vector<Metric> suite_mass(const ScenarioConfig& cfg) {
  std::vector<Metric> m;
  for (double h : {cfg.h, cfg.h / 2}) {
    const Scenario sc = at_resolution(cfg, h);
    const double m0 = total_mass(sc.initial);
    const auto result = run(sc, cfg.stride);
    m.push_back({"mass drift h=" + format_double(h),
                 std::abs(total_mass(result.final_state) - m0), 1e-12, true});
  }
  return m;
}

std::vector<Metric> suite_weakform(const ScenarioConfig& cfg) {
  const Scenario coarse = at_resolution(cfg, cfg.h);
  const auto phis = test_functions_near_mass(coarse.initial, 5, cfg.t_end, 20240611);
  std::vector<double> errors;
  for (double h : {cfg.h, cfg.h / 2, cfg.h / 4}) {
    const auto result = run(at_resolution(cfg, h), 1);
    double sum = 0.0;
    for (const auto& phi : phis) sum += weak_residual(result.trajectory, phi);
    errors.push_back(sum);
  }
  std::vector<Metric> m;
  for (std::size_t k = 0; k < errors.size(); ++k)
    m.push_back({"weak residual h/" + std::to_string(1u << k), errors[k], HUGE_VAL, true});
  auto o = orders("weak residual", errors, 0.8);
  m.insert(m.end(), o.begin(), o.end());
  return m;
}

std::vector<Metric> suite_classical(const ScenarioConfig& cfg) {
  std::vector<double> errors;
  double end_flux = 0.0;
  for (double h : {cfg.h, cfg.h / 2, cfg.h / 4}) {
    const auto result = run(at_resolution(cfg, h), 1);
    errors.push_back(classical_residual(result.trajectory));
    const auto& mesh = result.trajectory.mesh;
    for (std::size_t e = 0; e < mesh.edge_count(); ++e) {
      if (mesh.cells[e] < 2) continue;
      for (EndSide side : {EndSide::Tail, EndSide::Head})
        for (double q : boundary_trace(result.trajectory, e, side))
          end_flux = std::max(end_flux, std::abs(q));
    }
  }
  std::vector<Metric> m;
  for (std::size_t k = 0; k < errors.size(); ++k)
    m.push_back({"classical residual h/" + std::to_string(1u << k), errors[k], HUGE_VAL, true});
  auto o = orders("classical residual", errors, 0.8);
  m.insert(m.end(), o.begin(), o.end());
  m.push_back({"max end flux", end_flux, 1e-12, true});
  return m;
}

std::vector<Metric> suite_ibp(const ScenarioConfig& cfg) {
  const Network net = load_network(cfg.network);
  std::vector<double> errors;
  for (double h : {cfg.h, cfg.h / 2, cfg.h / 4}) {
    const auto [f, g] = windowed_sin_cos(net, h);
    errors.push_back(integration_by_parts_residual(net, f, g));
  }
  std::vector<Metric> m;
  for (std::size_t k = 0; k < errors.size(); ++k)
    m.push_back({"ibp residual h/" + std::to_string(1u << k), errors[k], HUGE_VAL, true});
  auto o = orders("ibp residual", errors, 1.8);
  m.insert(m.end(), o.begin(), o.end());
  return m;
}

int cmd_verify(const ScenarioConfig& cfg, const std::string& suite, std::ostream& out) {
  std::vector<Metric> metrics;
  if (suite == "kirchhoff") metrics = suite_kirchhoff(cfg);
  else if (suite == "mass") metrics = suite_mass(cfg);
  else if (suite == "weakform") metrics = suite_weakform(cfg);
  else if (suite == "classical") metrics = suite_classical(cfg);
  else if (suite == "ibp") metrics = suite_ibp(cfg);

  bool ok = true;
  for (const auto& m : metrics) {
    out << m.name << ": " << format_double(m.value);
    if (std::isfinite(m.threshold))
      out << (m.upper ? " (<= " : " (>= ") << format_double(m.threshold) << ")"
          << (m.passes() ? "" : " FAILED");
    out << '\n';
    ok = ok && m.passes();
  }
  out << suite << ": " << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? kOk : kDomainFailure;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conservation laws on metric networks"};
  app.name("kirchnet");
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("--output-dir", o.output_dir, "Directory for simulation output");
  app.add_option("--stride", o.stride, "Store every k-th step")->check(CLI::PositiveNumber);
  app.add_option("--h", o.h, "Target mesh width")->check(CLI::PositiveNumber);
  app.add_option("--cfl", o.cfl, "CFL number in (0, 1]")->check(CLI::Range(0.0, 1.0));

  std::string net_path, scenario, p_spec, q_spec, suite;
  auto* validate = app.add_subcommand("validate", "Check that a network is regular");
  validate->add_option("net", net_path, "Network file")->required();

  auto* dist = app.add_subcommand("distance", "Path distance and one shortest path");
  dist->add_option("net", net_path, "Network file")->required();
  dist->add_option("p", p_spec, "v:<id> or e:<key>:<x>")->required();
  dist->add_option("q", q_spec, "v:<id> or e:<key>:<x>")->required();

  auto* sim = app.add_subcommand("simulate", "Run a scenario and write CSV and SVG output");
  sim->add_option("scenario", scenario, "Scenario file")->required();

  auto* verify = app.add_subcommand("verify", "Run a verification suite at several resolutions");
  verify->add_option("scenario", scenario, "Scenario file")->required();
  verify->add_option("suite", suite, "kirchhoff | mass | weakform | classical | ibp")
      ->required()
      ->check(CLI::IsMember({"kirchhoff", "mass", "weakform", "classical", "ibp"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputFailure;
  }

  try {
    if (*validate) return cmd_validate(net_path, out);
    if (*dist) return cmd_distance(net_path, p_spec, q_spec, out, err);
    if (*sim) return cmd_simulate(scenario_with(scenario, o), out);
    if (*verify) return cmd_verify(scenario_with(scenario, o), suite, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::Io ? kInputFailure : kDomainFailure;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kInputFailure;
  }
  return kInputFailure;
}

}  // namespace kirchnet
