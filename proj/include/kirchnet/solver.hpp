#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "kirchnet/grid_function.hpp"
#include "kirchnet/network.hpp"

namespace kirchnet {

/// Lighthill-Whitham-Richards closure: speed v_max (1 - rho / rho_max),
/// flux rho * speed, concave on [0, rho_max] with its maximum at rho_max / 2.
struct LwrFlux {
  double v_max = 1.0;
  double rho_max = 1.0;

  double speed(double rho) const noexcept { return v_max * (1.0 - rho / rho_max); }
  double flux(double rho) const noexcept { return rho * speed(rho); }
  double derivative(double rho) const noexcept { return v_max * (1.0 - 2.0 * rho / rho_max); }
  double critical_density() const noexcept { return 0.5 * rho_max; }
  double capacity() const noexcept { return flux(critical_density()); }
  /// Largest flux an upstream cell at density rho can send.
  double demand(double rho) const noexcept {
    return rho <= critical_density() ? flux(rho) : capacity();
  }
  /// Largest flux a downstream cell at density rho can take.
  double supply(double rho) const noexcept {
    return rho <= critical_density() ? capacity() : flux(rho);
  }
};

/// Per-edge speed, signed relative to the edge orientation.
struct ConstantVelocity {
  std::vector<double> speed;
};

/// nu(edge, t, x); must stay bounded.
struct SpaceTimeVelocity {
  std::function<double(std::size_t edge, double t, double x)> speed;
};

/// nu = nu~(rho) per edge.
struct QuasiLinearVelocity {
  std::vector<LwrFlux> flux;
};

using VelocityModel = std::variant<ConstantVelocity, SpaceTimeVelocity, QuasiLinearVelocity>;

VelocityModel uniform_velocity(const Network& net, double speed);
VelocityModel lwr_velocity(const Network& net, const LwrFlux& flux);
bool is_quasi_linear(const VelocityModel& model) noexcept;

/// A signed linear speed, or a concave flux law.
using InterfaceModel = std::variant<double, LwrFlux>;

InterfaceModel interface_model(const VelocityModel& model, std::size_t edge, double t, double x);

double upwind_flux(double speed, double rho_left, double rho_right) noexcept;
/// Godunov flux of a concave law: min(demand(left), supply(right)).
double godunov_flux(const LwrFlux& law, double rho_left, double rho_right) noexcept;
double numerical_flux(double rho_left, double rho_right, const InterfaceModel& model);

enum class JunctionMode { PassThrough, Distribute, SupplyDemand };

/// Coupling at one vertex. `matrix` has one row per out-edge and one column per
/// in-edge, both in `Network::incidence` order; columns are stochastic.
struct JunctionRule {
  JunctionMode mode = JunctionMode::Distribute;
  std::vector<std::vector<double>> matrix;

  static JunctionRule pass_through();
  static JunctionRule equal_split(JunctionMode mode, std::size_t n_out, std::size_t n_in);
};

/// Throws RuleShapeMismatch when the rule does not fit a vertex with the
/// given in/out degrees or the velocity model class.
void validate_rule(const JunctionRule& rule, std::size_t n_in, std::size_t n_out,
                   bool quasi_linear);

class JunctionRules {
 public:
  /// PassThrough at 1-in/1-out vertices, equal split elsewhere (Distribute for
  /// linear models, SupplyDemand for quasi-linear ones).
  static JunctionRules defaults(const Network& net, const VelocityModel& model);

  /// Validates, then renormalizes matrix columns to sum to one.
  void set(const Network& net, const VelocityModel& model, std::size_t vertex, JunctionRule rule);
  const JunctionRule& at(std::size_t vertex) const { return rules_.at(vertex); }
  std::size_t size() const noexcept { return rules_.size(); }

 private:
  std::vector<JunctionRule> rules_;
};

/// Density of the cell touching the vertex and the model evaluated at the end.
struct EndState {
  double rho = 0.0;
  double speed = 0.0;
  std::optional<LwrFlux> lwr;
};

/// Fluxes in the edge orientation: `in[i]` is the flux at the head of the i-th
/// in-edge, `out[j]` the flux at the tail of the j-th out-edge.
struct JunctionFluxes {
  std::vector<double> in;
  std::vector<double> out;
};

JunctionFluxes junction_fluxes(std::span<const EndState> in_ends,
                               std::span<const EndState> out_ends, const JunctionRule& rule);

struct VertexFluxRecord {
  std::vector<double> in;
  std::vector<double> out;

  double imbalance() const noexcept;
};

struct LedgerStep {
  double time = 0.0;
  double dt = 0.0;
  std::vector<VertexFluxRecord> vertices;
};

class DensityState {
 public:
  DensityState(std::shared_ptr<const Network> net, Mesh mesh,
               std::shared_ptr<const VelocityModel> velocity,
               std::vector<std::vector<double>> density, double time = 0.0);

  const Network& network() const noexcept { return *net_; }
  const std::shared_ptr<const Network>& network_ptr() const noexcept { return net_; }
  const Mesh& mesh() const noexcept { return mesh_; }
  const VelocityModel& velocity() const noexcept { return *velocity_; }
  const std::shared_ptr<const VelocityModel>& velocity_ptr() const noexcept { return velocity_; }

  double time() const noexcept { return time_; }
  std::span<const double> cells(std::size_t e) const { return density_.at(e); }
  const std::vector<std::vector<double>>& density() const noexcept { return density_; }
  GridFunction density_function() const;

  const std::vector<LedgerStep>& ledger() const noexcept { return ledger_; }
  /// Direct ledger access, used to check that the Kirchhoff diagnostics detect
  /// corrupted records.
  std::vector<LedgerStep>& mutable_ledger() noexcept { return ledger_; }

 private:
  friend DensityState step(DensityState state, double dt, const JunctionRules& rules);

  std::shared_ptr<const Network> net_;
  Mesh mesh_;
  std::shared_ptr<const VelocityModel> velocity_;
  std::vector<std::vector<double>> density_;
  double time_ = 0.0;
  std::vector<LedgerStep> ledger_;
};

using InitialDensity = std::variant<GridFunction, EdgeSampler>;

/// Cell averages by midpoint sampling on `Mesh::uniform(net, h)`. Nodal grid
/// functions are averaged over each cell's two nodes.
DensityState init_state(std::shared_ptr<const Network> net, const InitialDensity& initial,
                        VelocityModel velocity, double h);

/// cfl * min_e h_e / s with s the largest characteristic speed, clamped to the
/// remaining time t_end - t. For LWR, s = max |f'| over [0, rho_max] = v_max.
/// Returns the remaining time when s = 0.
double cfl_dt(const DensityState& state, double cfl, double t_end);

/// One forward-Euler finite-volume step with junction coupling.
DensityState step(DensityState state, double dt, const JunctionRules& rules);

double total_mass(const DensityState& state);

/// Max over recorded steps of |sum_in F - sum_out F| at the vertex.
double kirchhoff_residual(const DensityState& state, std::size_t vertex);

struct Snapshot {
  double time = 0.0;
  std::vector<std::vector<double>> density;
};

/// Stored states of one run; shares the network, mesh and velocity model.
struct Trajectory {
  std::shared_ptr<const Network> network;
  Mesh mesh;
  std::shared_ptr<const VelocityModel> velocity;
  std::vector<Snapshot> snapshots;

  void record(const DensityState& state);
};

struct SimulationOptions {
  double t_end = 1.0;
  double cfl = 0.9;
  /// Store every stride-th step (plus the first and the last).
  std::size_t stride = 1;
  std::optional<double> fixed_dt;
};

struct SimulationResult {
  DensityState final_state;
  Trajectory trajectory;
  std::size_t steps = 0;
};

using StepObserver = std::function<void(const DensityState&, std::size_t step)>;

SimulationResult simulate(DensityState initial, const JunctionRules& rules,
                          const SimulationOptions& options, const StepObserver& observer = {});

}  // namespace kirchnet
