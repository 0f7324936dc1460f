#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "kirchnet/network.hpp"
#include "kirchnet/solver.hpp"

namespace kirchnet {

/// Line format: `V <id>` or `E <key> <tail> <head> <weight>`, `#` starts a
/// comment. Edge endpoints need not be declared with `V`.
WeightedGraph parse_graph(const std::filesystem::path& path);
WeightedGraph parse_graph_text(std::string_view text, const std::string& source = "<graph>");
/// Vertices first, then edges, weights in shortest round-trip form.
void write_graph(std::ostream& out, const WeightedGraph& graph);

/// Parses and builds the network, reporting domain errors with file context.
Network load_network(const std::filesystem::path& path);

struct VelocitySpec {
  enum class Kind { Constant, Lwr };
  Kind kind = Kind::Constant;
  double speed = 1.0;
  LwrFlux lwr;
  std::map<EdgeKey, double> edge_speed;
  std::map<EdgeKey, LwrFlux> edge_lwr;
};

struct InitialSpec {
  enum class Kind { Constant, Bump, Csv };
  Kind kind = Kind::Constant;
  double value = 0.0;
  EdgeKey bump_edge;
  double bump_x = 0.0;
  double bump_width = 1.0;
  double bump_amplitude = 1.0;
  std::filesystem::path csv;
};

struct JunctionSpec {
  VertexId vertex;
  JunctionMode mode = JunctionMode::Distribute;
  /// Row-major, one row per out-edge; empty means equal split.
  std::vector<double> entries;
  std::size_t line = 0;
};

struct ScenarioConfig {
  std::filesystem::path network;
  VelocitySpec velocity;
  InitialSpec initial;
  std::vector<JunctionSpec> junctions;
  double t_end = 1.0;
  double h = 0.1;
  double cfl = 0.9;
  std::size_t stride = 1;
  std::filesystem::path output_dir = "out";
  bool snapshots = false;
  std::string source;
};

/// Keyword-per-line scenario description. Relative paths are resolved against
/// `base_dir` (the scenario file's directory for `parse_scenario`).
ScenarioConfig parse_scenario(const std::filesystem::path& path);
ScenarioConfig parse_scenario_text(std::string_view text, const std::string& source,
                                   const std::filesystem::path& base_dir);
/// Throws InvalidArgument unless T > 0, h > 0, cfl in (0, 1] and stride >= 1.
void check_scenario(const ScenarioConfig& config);

VelocityModel build_velocity(const Network& net, const VelocitySpec& spec);
/// Closed-form sampler for constant and bump data; CSV data (`edge,x,value`)
/// is interpolated linearly along each edge and held constant past the first
/// and last sample. Edges absent from the file start empty.
EdgeSampler build_initial(std::shared_ptr<const Network> net, const InitialSpec& spec);
JunctionRules build_rules(const Network& net, const VelocityModel& model,
                          const std::vector<JunctionSpec>& specs, const std::string& source = {});

struct Scenario {
  ScenarioConfig config;
  std::shared_ptr<const Network> network;
  JunctionRules rules;
  DensityState initial;
};

/// Loads the network file and builds model, rules and initial state at the
/// configured h.
Scenario load_scenario(const ScenarioConfig& config);

}  // namespace kirchnet
