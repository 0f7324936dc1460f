#include "kirchnet/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "kirchnet/error.hpp"

namespace kirchnet {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kColumnSumTolerance = 1e-12;
constexpr double kBoundsTolerance = 1e-12;

std::size_t model_edge_count(const VelocityModel& model) {
  return std::visit(Overloaded{
                        [](const ConstantVelocity& m) { return m.speed.size(); },
                        [](const SpaceTimeVelocity&) { return std::size_t{0}; },
                        [](const QuasiLinearVelocity& m) { return m.flux.size(); },
                    },
                    model);
}

void require_model_fits(const Network& net, const VelocityModel& model) {
  if (const auto* st = std::get_if<SpaceTimeVelocity>(&model)) {
    if (!st->speed) throw Error(ErrorKind::InvalidArgument, "space-time velocity has no callable");
    return;
  }
  if (model_edge_count(model) != net.edge_count())
    throw Error(ErrorKind::InvalidArgument, "velocity model has " +
                                                std::to_string(model_edge_count(model)) +
                                                " edges, network has " +
                                                std::to_string(net.edge_count()));
  if (const auto* q = std::get_if<QuasiLinearVelocity>(&model)) {
    for (const LwrFlux& f : q->flux)
      if (!(f.v_max > 0.0) || !(f.rho_max > 0.0))
        throw Error(ErrorKind::InvalidArgument, "LWR parameters must be positive");
  }
}

double speed_at(const VelocityModel& model, std::size_t edge, double t, double x) {
  return std::visit(Overloaded{
                        [&](const ConstantVelocity& m) { return m.speed[edge]; },
                        [&](const SpaceTimeVelocity& m) { return m.speed(edge, t, x); },
                        [&](const QuasiLinearVelocity&) { return 0.0; },
                    },
                    model);
}

std::vector<double> matrix_column(const JunctionRule& rule, std::size_t col) {
  std::vector<double> c(rule.matrix.size());
  for (std::size_t r = 0; r < rule.matrix.size(); ++r) c[r] = rule.matrix[r][col];
  return c;
}

JunctionFluxes linear_junction(std::span<const EndState> in_ends,
                               std::span<const EndState> out_ends, const JunctionRule& rule) {
  JunctionFluxes result{std::vector<double>(in_ends.size(), 0.0),
                        std::vector<double>(out_ends.size(), 0.0)};

  // Receivers: nominal out-ends (speed > 0) and reversed in-ends (speed < 0).
  struct Receiver {
    bool is_out;
    std::size_t index;
  };
  std::vector<Receiver> receivers;
  for (std::size_t j = 0; j < out_ends.size(); ++j)
    if (out_ends[j].speed > 0.0) receivers.push_back({true, j});
  for (std::size_t i = 0; i < in_ends.size(); ++i)
    if (in_ends[i].speed < 0.0) receivers.push_back({false, i});
  if (receivers.empty()) return result;  // closed: feeders see a wall

  std::vector<double> received(receivers.size(), 0.0);
  auto spread = [&](double q, const std::vector<double>* column) {
    std::vector<double> share(receivers.size(), 0.0);
    double sum = 0.0;
    if (column) {
      for (std::size_t r = 0; r < receivers.size(); ++r)
        if (receivers[r].is_out) sum += share[r] = (*column)[receivers[r].index];
    }
    if (sum > 0.0) {
      for (double& s : share) s /= sum;
    } else {
      std::fill(share.begin(), share.end(), 1.0 / static_cast<double>(receivers.size()));
    }
    for (std::size_t r = 0; r < receivers.size(); ++r) received[r] += share[r] * q;
  };

  // Nominal feeders: in-ends moving towards the vertex; the matrix column
  // applies, restricted to the receivers that are active.
  for (std::size_t i = 0; i < in_ends.size(); ++i) {
    if (!(in_ends[i].speed > 0.0)) continue;
    const double q = in_ends[i].speed * in_ends[i].rho;
    result.in[i] = q;
    const auto column = matrix_column(rule, i);
    spread(q, &column);
  }
  // Reversed feeders: out-ends whose flow runs head to tail.
  for (std::size_t j = 0; j < out_ends.size(); ++j) {
    if (!(out_ends[j].speed < 0.0)) continue;
    const double q = -out_ends[j].speed * out_ends[j].rho;
    result.out[j] = -q;
    spread(q, nullptr);
  }

  for (std::size_t r = 0; r < receivers.size(); ++r) {
    if (receivers[r].is_out)
      result.out[receivers[r].index] = received[r];
    else
      result.in[receivers[r].index] = -received[r];
  }
  return result;
}

JunctionFluxes supply_demand_junction(std::span<const EndState> in_ends,
                                      std::span<const EndState> out_ends,
                                      const JunctionRule& rule) {
  JunctionFluxes result{std::vector<double>(in_ends.size(), 0.0),
                        std::vector<double>(out_ends.size(), 0.0)};
  if (in_ends.empty() || out_ends.empty()) return result;

  std::vector<double> demand(in_ends.size());
  for (std::size_t i = 0; i < in_ends.size(); ++i) demand[i] = in_ends[i].lwr->demand(in_ends[i].rho);

  // Scale all demands by one factor so that no outgoing supply is exceeded.
  double theta = 1.0;
  for (std::size_t j = 0; j < out_ends.size(); ++j) {
    double requested = 0.0;
    for (std::size_t i = 0; i < in_ends.size(); ++i) requested += rule.matrix[j][i] * demand[i];
    const double supply = out_ends[j].lwr->supply(out_ends[j].rho);
    if (requested > supply) theta = std::min(theta, supply / requested);
  }

  for (std::size_t i = 0; i < in_ends.size(); ++i) result.in[i] = theta * demand[i];
  for (std::size_t j = 0; j < out_ends.size(); ++j) {
    double f = 0.0;
    for (std::size_t i = 0; i < in_ends.size(); ++i) f += rule.matrix[j][i] * result.in[i];
    result.out[j] = f;
  }
  return result;
}

}  // namespace

VelocityModel uniform_velocity(const Network& net, double speed) {
  return ConstantVelocity{std::vector<double>(net.edge_count(), speed)};
}

VelocityModel lwr_velocity(const Network& net, const LwrFlux& flux) {
  return QuasiLinearVelocity{std::vector<LwrFlux>(net.edge_count(), flux)};
}

bool is_quasi_linear(const VelocityModel& model) noexcept {
  return std::holds_alternative<QuasiLinearVelocity>(model);
}

InterfaceModel interface_model(const VelocityModel& model, std::size_t edge, double t, double x) {
  if (const auto* q = std::get_if<QuasiLinearVelocity>(&model)) return q->flux.at(edge);
  return speed_at(model, edge, t, x);
}

double upwind_flux(double speed, double rho_left, double rho_right) noexcept {
  return speed >= 0.0 ? speed * rho_left : speed * rho_right;
}

double godunov_flux(const LwrFlux& law, double rho_left, double rho_right) noexcept {
  return std::min(law.demand(rho_left), law.supply(rho_right));
}

double numerical_flux(double rho_left, double rho_right, const InterfaceModel& model) {
  return std::visit(Overloaded{
                        [&](double speed) { return upwind_flux(speed, rho_left, rho_right); },
                        [&](const LwrFlux& law) { return godunov_flux(law, rho_left, rho_right); },
                    },
                    model);
}

JunctionRule JunctionRule::pass_through() { return {JunctionMode::PassThrough, {{1.0}}}; }

JunctionRule JunctionRule::equal_split(JunctionMode mode, std::size_t n_out, std::size_t n_in) {
  const double share = n_out > 0 ? 1.0 / static_cast<double>(n_out) : 0.0;
  return {mode, std::vector<std::vector<double>>(n_out, std::vector<double>(n_in, share))};
}

void validate_rule(const JunctionRule& rule, std::size_t n_in, std::size_t n_out,
                   bool quasi_linear) {
  auto fail = [](const std::string& why) { return Error(ErrorKind::RuleShapeMismatch, why); };
  switch (rule.mode) {
    case JunctionMode::PassThrough:
      if (n_in != 1 || n_out != 1)
        throw fail("pass-through needs exactly one in-edge and one out-edge, got " +
                   std::to_string(n_in) + "/" + std::to_string(n_out));
      break;
    case JunctionMode::Distribute:
      if (quasi_linear) throw fail("distribute applies to linear velocity models only");
      break;
    case JunctionMode::SupplyDemand:
      if (!quasi_linear) throw fail("supply-demand applies to quasi-linear models only");
      break;
  }
  if (rule.matrix.size() != n_out)
    throw fail("matrix has " + std::to_string(rule.matrix.size()) + " rows, vertex has " +
               std::to_string(n_out) + " out-edges");
  for (const auto& row : rule.matrix) {
    if (row.size() != n_in)
      throw fail("matrix row has " + std::to_string(row.size()) + " columns, vertex has " +
                 std::to_string(n_in) + " in-edges");
    for (double a : row)
      if (!(a >= 0.0) || !std::isfinite(a)) throw fail("matrix entries must be nonnegative");
  }
  if (n_out == 0) return;
  for (std::size_t c = 0; c < n_in; ++c) {
    double sum = 0.0;
    for (const auto& row : rule.matrix) sum += row[c];
    if (std::abs(sum - 1.0) > kColumnSumTolerance)
      throw fail("matrix column " + std::to_string(c) + " sums to " + std::to_string(sum));
  }
}

JunctionRules JunctionRules::defaults(const Network& net, const VelocityModel& model) {
  const JunctionMode split =
      is_quasi_linear(model) ? JunctionMode::SupplyDemand : JunctionMode::Distribute;
  JunctionRules rules;
  rules.rules_.reserve(net.vertex_count());
  for (std::size_t v = 0; v < net.vertex_count(); ++v) {
    const Incidence& inc = net.incidence(v);
    if (inc.in.size() == 1 && inc.out.size() == 1)
      rules.rules_.push_back(JunctionRule::pass_through());
    else
      rules.rules_.push_back(JunctionRule::equal_split(split, inc.out.size(), inc.in.size()));
  }
  return rules;
}

void JunctionRules::set(const Network& net, const VelocityModel& model, std::size_t vertex,
                        JunctionRule rule) {
  if (vertex >= net.vertex_count())
    throw Error(ErrorKind::UnknownVertex, "vertex index " + std::to_string(vertex));
  const Incidence& inc = net.incidence(vertex);
  validate_rule(rule, inc.in.size(), inc.out.size(), is_quasi_linear(model));
  for (std::size_t c = 0; c < inc.in.size() && !rule.matrix.empty(); ++c) {
    double sum = 0.0;
    for (const auto& row : rule.matrix) sum += row[c];
    for (auto& row : rule.matrix) row[c] /= sum;
  }
  if (rules_.size() != net.vertex_count()) *this = defaults(net, model);
  rules_[vertex] = std::move(rule);
}

JunctionFluxes junction_fluxes(std::span<const EndState> in_ends,
                               std::span<const EndState> out_ends, const JunctionRule& rule) {
  const bool any_lwr = std::any_of(in_ends.begin(), in_ends.end(), [](auto& s) { return s.lwr.has_value(); }) ||
                       std::any_of(out_ends.begin(), out_ends.end(), [](auto& s) { return s.lwr.has_value(); });
  const bool all_lwr = std::all_of(in_ends.begin(), in_ends.end(), [](auto& s) { return s.lwr.has_value(); }) &&
                       std::all_of(out_ends.begin(), out_ends.end(), [](auto& s) { return s.lwr.has_value(); });
  if (any_lwr && !all_lwr)
    throw Error(ErrorKind::InvalidArgument, "junction mixes linear and quasi-linear edges");

  // Dead ends carry no flux.
  if (in_ends.size() + out_ends.size() <= 1)
    return {std::vector<double>(in_ends.size(), 0.0), std::vector<double>(out_ends.size(), 0.0)};

  validate_rule(rule, in_ends.size(), out_ends.size(), all_lwr);
  return all_lwr ? supply_demand_junction(in_ends, out_ends, rule)
                 : linear_junction(in_ends, out_ends, rule);
}

double VertexFluxRecord::imbalance() const noexcept {
  const double sum_in = std::accumulate(in.begin(), in.end(), 0.0);
  const double sum_out = std::accumulate(out.begin(), out.end(), 0.0);
  return std::abs(sum_in - sum_out);
}

DensityState::DensityState(std::shared_ptr<const Network> net, Mesh mesh,
                           std::shared_ptr<const VelocityModel> velocity,
                           std::vector<std::vector<double>> density, double time)
    : net_(std::move(net)),
      mesh_(std::move(mesh)),
      velocity_(std::move(velocity)),
      density_(std::move(density)),
      time_(time) {
  if (!net_ || !velocity_) throw Error(ErrorKind::InvalidArgument, "null network or velocity");
  require_mesh_fits(*net_, mesh_);
  require_model_fits(*net_, *velocity_);
  if (density_.size() != mesh_.edge_count())
    throw Error(ErrorKind::MeshMismatch, "density arrays do not match the mesh");
  for (std::size_t e = 0; e < density_.size(); ++e)
    if (density_[e].size() != mesh_.cells[e])
      throw Error(ErrorKind::MeshMismatch, "density array of edge '" + net_->edge(e).key +
                                               "' does not match its cell count");
}

GridFunction DensityState::density_function() const {
  return GridFunction(mesh_, Layout::Cells, density_);
}

DensityState init_state(std::shared_ptr<const Network> net, const InitialDensity& initial,
                        VelocityModel velocity, double h) {
  if (!net) throw Error(ErrorKind::InvalidArgument, "null network");
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "mesh width must be positive");
  if (h > net->min_edge_length() * (1.0 + 1e-12))
    throw Error(ErrorKind::MeshTooCoarse, "h = " + std::to_string(h) +
                                              " exceeds the shortest edge length " +
                                              std::to_string(net->min_edge_length()));
  require_model_fits(*net, velocity);
  Mesh mesh = Mesh::uniform(*net, h);

  std::vector<std::vector<double>> rho(net->edge_count());
  if (const auto* sampler = std::get_if<EdgeSampler>(&initial)) {
    rho = [&] {
      const GridFunction g = GridFunction::sample(mesh, Layout::Cells, *sampler);
      std::vector<std::vector<double>> v(g.edge_count());
      for (std::size_t e = 0; e < g.edge_count(); ++e) v[e].assign(g.values(e).begin(), g.values(e).end());
      return v;
    }();
  } else {
    const auto& g = std::get<GridFunction>(initial);
    if (!(g.mesh() == mesh))
      throw Error(ErrorKind::MeshMismatch, "initial density lives on a different mesh");
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      const auto v = g.values(e);
      if (g.layout() == Layout::Cells) {
        rho[e].assign(v.begin(), v.end());
      } else {
        rho[e].resize(mesh.cells[e]);
        for (std::size_t i = 0; i < mesh.cells[e]; ++i) rho[e][i] = 0.5 * (v[i] + v[i + 1]);
      }
    }
  }

  const auto* lwr = std::get_if<QuasiLinearVelocity>(&velocity);
  for (std::size_t e = 0; e < rho.size(); ++e) {
    for (double r : rho[e]) {
      if (!(r >= 0.0) || !std::isfinite(r))
        throw Error(ErrorKind::DensityOutOfRange,
                    "negative or non-finite density on edge '" + net->edge(e).key + "'");
      if (lwr && r > lwr->flux[e].rho_max)
        throw Error(ErrorKind::DensityOutOfRange,
                    "density above rho_max on edge '" + net->edge(e).key + "'");
    }
  }

  auto model = std::make_shared<const VelocityModel>(std::move(velocity));
  return DensityState(std::move(net), std::move(mesh), std::move(model), std::move(rho));
}

double cfl_dt(const DensityState& state, double cfl, double t_end) {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw Error(ErrorKind::InvalidArgument, "cfl must be in (0, 1]");
  const double remaining = t_end - state.time();
  if (!(remaining > 0.0)) throw Error(ErrorKind::InvalidArgument, "no simulation time left");

  const Network& net = state.network();
  const Mesh& mesh = state.mesh();
  double s = 0.0;
  std::visit(Overloaded{
                 [&](const ConstantVelocity& m) {
                   for (double v : m.speed) s = std::max(s, std::abs(v));
                 },
                 [&](const SpaceTimeVelocity& m) {
                   for (std::size_t e = 0; e < net.edge_count(); ++e)
                     for (std::size_t i = 0; i <= mesh.cells[e]; ++i) {
                       const double x = i == mesh.cells[e] ? mesh.lengths[e]
                                                           : mesh.spacing[e] * static_cast<double>(i);
                       s = std::max(s, std::abs(m.speed(e, state.time(), x)));
                     }
                 },
                 [&](const QuasiLinearVelocity& m) {
                   // Walls and junctions feed boundary fluxes from anywhere in
                   // [0, rho_max], so the bound covers the whole admissible range
                   // rather than the densities present in the state.
                   for (const LwrFlux& f : m.flux)
                     s = std::max({s, std::abs(f.derivative(0.0)), std::abs(f.derivative(f.rho_max))});
                 },
             },
             state.velocity());

  if (s == 0.0) return remaining;
  return std::min(cfl * mesh.min_spacing() / s, remaining);
}

DensityState step(DensityState state, double dt, const JunctionRules& rules) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
  const Network& net = *state.net_;
  const Mesh& mesh = state.mesh_;
  const VelocityModel& model = *state.velocity_;
  const double t = state.time_;
  if (rules.size() != net.vertex_count())
    throw Error(ErrorKind::RuleShapeMismatch, "junction rules do not cover every vertex");

  const auto* lwr = std::get_if<QuasiLinearVelocity>(&model);
  auto end_state = [&](std::size_t e, EndSide side) {
    const auto& rho = state.density_[e];
    EndState s;
    s.rho = side == EndSide::Tail ? rho.front() : rho.back();
    if (lwr) {
      s.lwr = lwr->flux[e];
    } else {
      s.speed = speed_at(model, e, t, side == EndSide::Tail ? 0.0 : mesh.lengths[e]);
    }
    return s;
  };

  // Phase 1: junction fluxes; reads edge-end cells only.
  std::vector<double> tail_flux(net.edge_count(), 0.0);
  std::vector<double> head_flux(net.edge_count(), 0.0);
  LedgerStep record{t, dt, std::vector<VertexFluxRecord>(net.vertex_count())};
  std::vector<EndState> in_states;
  std::vector<EndState> out_states;
  for (std::size_t v = 0; v < net.vertex_count(); ++v) {
    const Incidence& inc = net.incidence(v);
    in_states.clear();
    out_states.clear();
    for (std::size_t e : inc.in) in_states.push_back(end_state(e, EndSide::Head));
    for (std::size_t e : inc.out) out_states.push_back(end_state(e, EndSide::Tail));
    JunctionFluxes fluxes = junction_fluxes(in_states, out_states, rules.at(v));
    for (std::size_t i = 0; i < inc.in.size(); ++i) head_flux[inc.in[i]] = fluxes.in[i];
    for (std::size_t j = 0; j < inc.out.size(); ++j) tail_flux[inc.out[j]] = fluxes.out[j];
    record.vertices[v] = VertexFluxRecord{std::move(fluxes.in), std::move(fluxes.out)};
  }

  // Phase 2: conservative update per edge.
  std::vector<double> flux;
  for (std::size_t e = 0; e < net.edge_count(); ++e) {
    auto& rho = state.density_[e];
    const std::size_t n = rho.size();
    const double h = mesh.spacing[e];
    flux.assign(n + 1, 0.0);
    flux[0] = tail_flux[e];
    flux[n] = head_flux[e];
    for (std::size_t i = 1; i < n; ++i)
      flux[i] = numerical_flux(rho[i - 1], rho[i],
                               interface_model(model, e, t, h * static_cast<double>(i)));
    const double ratio = dt / h;
    for (std::size_t i = 0; i < n; ++i) rho[i] -= ratio * (flux[i + 1] - flux[i]);

    if (lwr) {
      const double rho_max = lwr->flux[e].rho_max;
      for (std::size_t i = 0; i < n; ++i)
        if (rho[i] < -kBoundsTolerance || rho[i] > rho_max + kBoundsTolerance)
          throw Error(ErrorKind::CFLViolation,
                      "density " + std::to_string(rho[i]) + " left [0, rho_max] on edge '" +
                          net.edge(e).key + "' at t = " + std::to_string(t + dt));
    }
  }

  state.ledger_.push_back(std::move(record));
  state.time_ = t + dt;
  return state;
}

double total_mass(const DensityState& state) {
  double mass = 0.0;
  for (std::size_t e = 0; e < state.mesh().edge_count(); ++e) {
    double sum = 0.0;
    for (double r : state.cells(e)) sum += r;
    mass += state.mesh().spacing[e] * sum;
  }
  return mass;
}

double kirchhoff_residual(const DensityState& state, std::size_t vertex) {
  if (vertex >= state.network().vertex_count())
    throw Error(ErrorKind::UnknownVertex, "vertex index " + std::to_string(vertex));
  if (state.ledger().empty()) throw Error(ErrorKind::EmptyLedger, "no steps recorded yet");
  double worst = 0.0;
  for (const LedgerStep& s : state.ledger())
    worst = std::max(worst, s.vertices.at(vertex).imbalance());
  return worst;
}

void Trajectory::record(const DensityState& state) {
  if (!network) {
    network = state.network_ptr();
    mesh = state.mesh();
    velocity = state.velocity_ptr();
  }
  snapshots.push_back({state.time(), state.density()});
}

SimulationResult simulate(DensityState initial, const JunctionRules& rules,
                          const SimulationOptions& options, const StepObserver& observer) {
  if (options.stride == 0) throw Error(ErrorKind::InvalidArgument, "stride must be at least 1");
  if (!(options.t_end > initial.time()))
    throw Error(ErrorKind::InvalidArgument, "t_end must lie after the initial time");

  SimulationResult result{std::move(initial), Trajectory{}, 0};
  result.trajectory.record(result.final_state);
  if (observer) observer(result.final_state, 0);

  const double t_end = options.t_end;
  const double eps = 1e-12 * std::max(1.0, std::abs(t_end));
  while (t_end - result.final_state.time() > eps) {
    const double remaining = t_end - result.final_state.time();
    double dt = options.fixed_dt ? std::min(*options.fixed_dt, remaining)
                                 : cfl_dt(result.final_state, options.cfl, t_end);
    // Absorb a sliver that would otherwise become its own tiny step.
    if (remaining - dt <= eps) dt = remaining;
    result.final_state = step(std::move(result.final_state), dt, rules);
    ++result.steps;
    const bool last = t_end - result.final_state.time() <= eps;
    if (result.steps % options.stride == 0 || last)
      result.trajectory.record(result.final_state);
    if (observer) observer(result.final_state, result.steps);
  }
  return result;
}

}  // namespace kirchnet
