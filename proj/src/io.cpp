#include "kirchnet/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "kirchnet/error.hpp"
#include "kirchnet/verification.hpp"
#include "text_util.hpp"

namespace kirchnet {

namespace {

using detail::format_double;
using detail::parse_double;
using detail::strip_comment;
using detail::tokens;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

template <class F>
void for_each_line(std::string_view text, F&& f) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    f(line_no, text.substr(start, end - start));
    start = end + 1;
  }
}

class LineReader {
 public:
  LineReader(const std::string& source, std::size_t line, std::vector<std::string_view> toks)
      : source_(source), line_(line), toks_(std::move(toks)) {}

  [[noreturn]] void fail(const std::string& msg, ErrorKind cause = ErrorKind::Parse) const {
    throw ParseError(source_, line_, msg, cause);
  }
  std::size_t size() const { return toks_.size(); }
  void expect(std::size_t n) const {
    if (toks_.size() != n)
      fail("'" + std::string(toks_[0]) + "' expects " + std::to_string(n - 1) + " argument(s)");
  }
  void expect_at_least(std::size_t n) const {
    if (toks_.size() < n)
      fail("'" + std::string(toks_[0]) + "' expects at least " + std::to_string(n - 1) +
           " argument(s)");
  }
  std::string str(std::size_t i) const { return std::string(toks_.at(i)); }
  double number(std::size_t i) const {
    auto v = parse_double(toks_.at(i));
    if (!v || !std::isfinite(*v)) fail("not a number: '" + std::string(toks_.at(i)) + "'");
    return *v;
  }
  double positive(std::size_t i) const {
    const double v = number(i);
    if (!(v > 0.0)) fail("expected a positive number, got '" + std::string(toks_.at(i)) + "'");
    return v;
  }
  std::size_t line() const { return line_; }

 private:
  const std::string& source_;
  std::size_t line_;
  std::vector<std::string_view> toks_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

// Nodal samples of one edge, sorted by coordinate.
struct EdgeSamples {
  std::vector<std::pair<double, double>> points;

  double at(double x) const {
    if (points.empty()) return 0.0;
    if (x <= points.front().first) return points.front().second;
    if (x >= points.back().first) return points.back().second;
    auto hi = std::lower_bound(points.begin(), points.end(), std::make_pair(x, -HUGE_VAL));
    auto lo = std::prev(hi);
    if (hi->first == lo->first) return hi->second;
    const double s = (x - lo->first) / (hi->first - lo->first);
    return (1.0 - s) * lo->second + s * hi->second;
  }
};

std::vector<EdgeSamples> read_density_csv(const std::filesystem::path& path, const Network& net) {
  const std::string text = read_file(path);
  const std::string source = path.string();
  std::vector<EdgeSamples> samples(net.edge_count());
  bool first = true;
  for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
    const auto line = detail::trim(raw);
    if (line.empty()) return;
    const auto cols = detail::split(line, ',');
    const bool header = first && (cols.size() < 2 || !parse_double(cols[1]));
    first = false;
    if (header) return;
    if (cols.size() != 3) throw ParseError(source, line_no, "expected edge,x,value");
    const auto e = net.find_edge(cols[0]);
    if (!e)
      throw ParseError(source, line_no, "unknown edge '" + std::string(cols[0]) + "'",
                       ErrorKind::UnknownEdge);
    const auto x = parse_double(cols[1]);
    const auto v = parse_double(cols[2]);
    if (!x || !v) throw ParseError(source, line_no, "malformed number");
    if (*x < 0.0 || *x > net.edge(*e).length)
      throw ParseError(source, line_no, "coordinate outside the edge",
                       ErrorKind::CoordinateOutOfRange);
    samples[*e].points.emplace_back(*x, *v);
  });
  for (auto& s : samples) std::stable_sort(s.points.begin(), s.points.end(),
                                           [](auto& a, auto& b) { return a.first < b.first; });
  return samples;
}

JunctionMode parse_mode(const LineReader& r, std::string_view word) {
  if (word == "pass-through") return JunctionMode::PassThrough;
  if (word == "distribute") return JunctionMode::Distribute;
  if (word == "supply-demand") return JunctionMode::SupplyDemand;
  r.fail("unknown junction mode '" + std::string(word) + "'");
}

}  // namespace

WeightedGraph parse_graph_text(std::string_view text, const std::string& source) {
  WeightedGraph graph;
  std::unordered_map<std::string, std::size_t> declared_at;
  std::set<std::string> seen_vertices;
  std::set<std::string> touched;

  auto add_vertex = [&](const std::string& id) {
    if (seen_vertices.insert(id).second) graph.vertices.push_back(id);
  };

  for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
    auto toks = tokens(strip_comment(raw));
    if (toks.empty()) return;
    LineReader r(source, line_no, toks);
    if (toks[0] == "V") {
      r.expect(2);
      const std::string id = r.str(1);
      declared_at.emplace(id, line_no);
      add_vertex(id);
    } else if (toks[0] == "E") {
      r.expect(5);
      GraphEdge e{r.str(1), r.str(2), r.str(3)};
      const double w = r.number(4);
      if (!(w > 0.0))
        r.fail("edge '" + e.key + "' has non-positive weight " + r.str(4),
               ErrorKind::NonPositiveWeight);
      if (graph.weights.count(e.key))
        r.fail("duplicate edge key '" + e.key + "'", ErrorKind::DuplicateEdgeKey);
      add_vertex(e.tail);
      add_vertex(e.head);
      touched.insert(e.tail);
      touched.insert(e.head);
      graph.weights.emplace(e.key, w);
      graph.edges.push_back(std::move(e));
    } else {
      r.fail("unknown record '" + std::string(toks[0]) + "'");
    }
  });

  if (graph.vertices.empty()) throw ParseError(source, 0, "no vertices");
  for (const auto& [id, line_no] : declared_at)
    if (!touched.count(id))
      throw ParseError(source, line_no, "vertex '" + id + "' has no incident edge",
                       ErrorKind::IsolatedVertex);
  return graph;
}

WeightedGraph parse_graph(const std::filesystem::path& path) {
  return parse_graph_text(read_file(path), path.string());
}

void write_graph(std::ostream& out, const WeightedGraph& graph) {
  for (const auto& v : graph.vertices) out << "V " << v << '\n';
  for (const auto& e : graph.edges)
    out << "E " << e.key << ' ' << e.tail << ' ' << e.head << ' '
        << format_double(graph.weights.at(e.key)) << '\n';
}

Network load_network(const std::filesystem::path& path) {
  return build_network(parse_graph(path));
}

ScenarioConfig parse_scenario_text(std::string_view text, const std::string& source,
                                   const std::filesystem::path& base_dir) {
  ScenarioConfig cfg;
  cfg.source = source;
  bool have_network = false;

  for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
    auto toks = tokens(strip_comment(raw));
    if (toks.empty()) return;
    LineReader r(source, line_no, toks);
    const std::string_view key = toks[0];
    if (key == "network") {
      r.expect(2);
      cfg.network = resolve(base_dir, r.str(1));
      have_network = true;
    } else if (key == "velocity") {
      r.expect_at_least(2);
      if (toks[1] == "constant") {
        r.expect(3);
        cfg.velocity.kind = VelocitySpec::Kind::Constant;
        cfg.velocity.speed = r.number(2);
      } else if (toks[1] == "lwr") {
        r.expect(4);
        cfg.velocity.kind = VelocitySpec::Kind::Lwr;
        cfg.velocity.lwr = LwrFlux{r.positive(2), r.positive(3)};
      } else {
        r.fail("unknown velocity kind '" + r.str(1) + "'");
      }
    } else if (key == "edge-velocity") {
      r.expect(3);
      cfg.velocity.edge_speed[r.str(1)] = r.number(2);
    } else if (key == "edge-lwr") {
      r.expect(4);
      cfg.velocity.edge_lwr[r.str(1)] = LwrFlux{r.positive(2), r.positive(3)};
    } else if (key == "initial") {
      r.expect_at_least(2);
      if (toks[1] == "constant") {
        r.expect(3);
        cfg.initial.kind = InitialSpec::Kind::Constant;
        cfg.initial.value = r.number(2);
      } else if (toks[1] == "bump") {
        r.expect(6);
        cfg.initial.kind = InitialSpec::Kind::Bump;
        cfg.initial.bump_edge = r.str(2);
        cfg.initial.bump_x = r.number(3);
        cfg.initial.bump_width = r.positive(4);
        cfg.initial.bump_amplitude = r.number(5);
      } else if (toks[1] == "csv") {
        r.expect(3);
        cfg.initial.kind = InitialSpec::Kind::Csv;
        cfg.initial.csv = resolve(base_dir, r.str(2));
      } else {
        r.fail("unknown initial condition '" + r.str(1) + "'");
      }
    } else if (key == "junction") {
      r.expect_at_least(3);
      JunctionSpec j;
      j.vertex = r.str(1);
      j.mode = parse_mode(r, toks[2]);
      for (std::size_t i = 3; i < r.size(); ++i) j.entries.push_back(r.number(i));
      j.line = line_no;
      cfg.junctions.push_back(std::move(j));
    } else if (key == "T") {
      r.expect(2);
      cfg.t_end = r.positive(1);
    } else if (key == "h") {
      r.expect(2);
      cfg.h = r.positive(1);
    } else if (key == "cfl") {
      r.expect(2);
      cfg.cfl = r.number(1);
      if (!(cfg.cfl > 0.0 && cfg.cfl <= 1.0)) r.fail("cfl must lie in (0, 1]");
    } else if (key == "stride") {
      r.expect(2);
      const double s = r.number(1);
      if (!(s >= 1.0) || s != std::floor(s)) r.fail("stride must be a positive integer");
      cfg.stride = static_cast<std::size_t>(s);
    } else if (key == "output-dir") {
      r.expect(2);
      cfg.output_dir = resolve(base_dir, r.str(1));
    } else if (key == "snapshots") {
      r.expect(2);
      if (toks[1] == "on") cfg.snapshots = true;
      else if (toks[1] == "off") cfg.snapshots = false;
      else r.fail("snapshots must be 'on' or 'off'");
    } else {
      r.fail("unknown key '" + std::string(key) + "'");
    }
  });

  if (!have_network) throw ParseError(source, 0, "missing 'network' entry");
  return cfg;
}

ScenarioConfig parse_scenario(const std::filesystem::path& path) {
  auto base = path.parent_path();
  if (base.empty()) base = ".";
  return parse_scenario_text(read_file(path), path.string(), base);
}

void check_scenario(const ScenarioConfig& c) {
  if (!(c.t_end > 0.0)) throw Error(ErrorKind::InvalidArgument, "T must be positive");
  if (!(c.h > 0.0)) throw Error(ErrorKind::InvalidArgument, "h must be positive");
  if (!(c.cfl > 0.0 && c.cfl <= 1.0)) throw Error(ErrorKind::InvalidArgument, "cfl must lie in (0, 1]");
  if (c.stride < 1) throw Error(ErrorKind::InvalidArgument, "stride must be at least 1");
}

VelocityModel build_velocity(const Network& net, const VelocitySpec& spec) {
  if (spec.kind == VelocitySpec::Kind::Constant) {
    if (!spec.edge_lwr.empty())
      throw Error(ErrorKind::InvalidArgument, "edge-lwr needs 'velocity lwr'");
    ConstantVelocity v{std::vector<double>(net.edge_count(), spec.speed)};
    for (const auto& [key, s] : spec.edge_speed) v.speed[net.edge_index(key)] = s;
    return v;
  }
  if (!spec.edge_speed.empty())
    throw Error(ErrorKind::InvalidArgument, "edge-velocity needs 'velocity constant'");
  QuasiLinearVelocity v{std::vector<LwrFlux>(net.edge_count(), spec.lwr)};
  for (const auto& [key, f] : spec.edge_lwr) v.flux[net.edge_index(key)] = f;
  return v;
}

EdgeSampler build_initial(std::shared_ptr<const Network> net, const InitialSpec& spec) {
  switch (spec.kind) {
    case InitialSpec::Kind::Constant: {
      const double c = spec.value;
      return [c](std::size_t, double) { return c; };
    }
    case InitialSpec::Kind::Bump: {
      auto field = std::make_shared<DistanceField>(*net, locate(*net, spec.bump_edge, spec.bump_x));
      const double width = spec.bump_width;
      const double amp = spec.bump_amplitude;
      return [field, width, amp](std::size_t e, double x) {
        return amp * smooth_bump(field->at(e, x) / width);
      };
    }
    case InitialSpec::Kind::Csv: {
      auto samples = std::make_shared<std::vector<EdgeSamples>>(read_density_csv(spec.csv, *net));
      return [samples](std::size_t e, double x) { return (*samples)[e].at(x); };
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown initial condition");
}

JunctionRules build_rules(const Network& net, const VelocityModel& model,
                          const std::vector<JunctionSpec>& specs, const std::string& source) {
  JunctionRules rules = JunctionRules::defaults(net, model);
  for (const auto& spec : specs) {
    try {
      const std::size_t v = net.vertex_index(spec.vertex);
      const auto& inc = net.incidence(v);
      JunctionRule rule;
      rule.mode = spec.mode;
      if (spec.mode == JunctionMode::PassThrough && spec.entries.empty()) {
        rule = JunctionRule::pass_through();
      } else if (spec.entries.empty()) {
        rule = JunctionRule::equal_split(spec.mode, inc.out.size(), inc.in.size());
      } else {
        const std::size_t rows = inc.out.size();
        const std::size_t cols = inc.in.size();
        if (spec.entries.size() != rows * cols)
          throw Error(ErrorKind::RuleShapeMismatch,
                      "vertex '" + spec.vertex + "' needs " + std::to_string(rows) + "x" +
                          std::to_string(cols) + " matrix entries, got " +
                          std::to_string(spec.entries.size()));
        rule.matrix.assign(rows, std::vector<double>(cols));
        for (std::size_t i = 0; i < rows; ++i)
          for (std::size_t j = 0; j < cols; ++j) rule.matrix[i][j] = spec.entries[i * cols + j];
      }
      rules.set(net, model, v, std::move(rule));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      if (source.empty()) throw;
      throw ParseError(source, spec.line, e.message(), e.kind());
    }
  }
  return rules;
}

Scenario load_scenario(const ScenarioConfig& config) {
  check_scenario(config);
  auto net = std::make_shared<const Network>(load_network(config.network));
  VelocityModel model = build_velocity(*net, config.velocity);
  JunctionRules rules = build_rules(*net, model, config.junctions, config.source);
  EdgeSampler initial = build_initial(net, config.initial);
  DensityState state = init_state(net, initial, std::move(model), config.h);
  return Scenario{config, std::move(net), std::move(rules), std::move(state)};
}

}  // namespace kirchnet
