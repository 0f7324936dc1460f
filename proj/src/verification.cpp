#include "kirchnet/verification.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "kirchnet/error.hpp"

namespace kirchnet {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Flux nu * rho at a cell centre.
double cell_flux(const VelocityModel& model, std::size_t edge, double t, double x, double rho) {
  return std::visit(Overloaded{
                        [&](const ConstantVelocity& m) { return m.speed[edge] * rho; },
                        [&](const SpaceTimeVelocity& m) { return m.speed(edge, t, x) * rho; },
                        [&](const QuasiLinearVelocity& m) { return m.flux[edge].flux(rho); },
                    },
                    model);
}

void require_snapshots(const Trajectory& trajectory, std::size_t minimum) {
  if (!trajectory.network || !trajectory.velocity)
    throw Error(ErrorKind::InvalidArgument, "trajectory has no recorded states");
  if (trajectory.snapshots.size() < minimum)
    throw Error(ErrorKind::InvalidArgument, "trajectory needs at least " +
                                                std::to_string(minimum) + " stored states");
}

double cell_center(const Mesh& mesh, std::size_t e, std::size_t i) {
  return mesh.spacing[e] * (static_cast<double>(i) + 0.5);
}

// Composite trapezoid weights on [a, b] with n intervals, applied to g.
template <class F>
double trapezoid(F&& g, double a, double b, std::size_t n) {
  const double h = (b - a) / static_cast<double>(n);
  double sum = 0.5 * (g(a) + g(b));
  for (std::size_t k = 1; k < n; ++k) sum += g(a + h * static_cast<double>(k));
  return h * sum;
}

}  // namespace

double smooth_bump(double s) noexcept {
  if (!(std::abs(s) < 1.0)) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double smooth_bump_derivative(double s) noexcept {
  if (!(std::abs(s) < 1.0)) return 0.0;
  const double q = 1.0 - s * s;
  return smooth_bump(s) * (-2.0 * s / (q * q));
}

TestFunction::TestFunction(std::shared_ptr<const Network> net, NetworkPoint center, double radius,
                           TimeWindow window)
    : net_(std::move(net)),
      center_(center),
      radius_(radius),
      window_(window),
      field_(net_ ? DistanceField(*net_, center_)
                  : throw Error(ErrorKind::InvalidArgument, "null network")) {
  if (!(radius_ > 0.0) || !(radius_ < 0.5 * net_->min_edge_length()))
    throw Error(ErrorKind::SupportTooWide,
                "radius " + std::to_string(radius_) + " must lie in (0, " +
                    std::to_string(0.5 * net_->min_edge_length()) + ")");
  if (!(window_.half_width > 0.0))
    throw Error(ErrorKind::InvalidArgument, "time window must have positive width");
}

double TestFunction::value(double t, std::size_t edge, double x) const {
  const double tau = smooth_bump((t - window_.center) / window_.half_width);
  if (tau == 0.0) return 0.0;
  return tau * smooth_bump(field_.at(edge, x) / radius_);
}

double TestFunction::dt(double t, std::size_t edge, double x) const {
  const double dtau =
      smooth_bump_derivative((t - window_.center) / window_.half_width) / window_.half_width;
  if (dtau == 0.0) return 0.0;
  return dtau * smooth_bump(field_.at(edge, x) / radius_);
}

double TestFunction::dx(double t, std::size_t edge, double x) const {
  const double tau = smooth_bump((t - window_.center) / window_.half_width);
  if (tau == 0.0) return 0.0;
  const auto [d, slope] = field_.at_with_slope(edge, x);
  return tau * smooth_bump_derivative(d / radius_) / radius_ * slope;
}

std::vector<TestFunction> random_test_functions(std::shared_ptr<const Network> net,
                                                std::size_t count, double t_end,
                                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<TestFunction> out;
  out.reserve(count);
  const double lmin = net->min_edge_length();
  for (std::size_t k = 0; k < count; ++k) {
    NetworkPoint center;
    if (unit(rng) < 0.3) {
      center = VertexPoint{static_cast<std::size_t>(unit(rng) * static_cast<double>(net->vertex_count())) %
                           net->vertex_count()};
    } else {
      const std::size_t e =
          static_cast<std::size_t>(unit(rng) * static_cast<double>(net->edge_count())) %
          net->edge_count();
      const double len = net->edge(e).length;
      center = locate(*net, e, len * (0.1 + 0.8 * unit(rng)));
    }
    const double radius = lmin * (0.2 + 0.25 * unit(rng));
    const TimeWindow window{t_end * (0.2 + 0.6 * unit(rng)), t_end * (0.3 + 0.5 * unit(rng))};
    out.emplace_back(net, center, radius, window);
  }
  return out;
}

std::vector<TestFunction> test_functions_near_mass(const DensityState& state, std::size_t count,
                                                   double t_end, std::uint64_t seed) {
  const Mesh& mesh = state.mesh();
  double peak = 0.0;
  for (const auto& cells : state.density())
    for (double v : cells) peak = std::max(peak, std::abs(v));
  std::vector<std::pair<std::size_t, std::size_t>> heavy;
  for (std::size_t e = 0; e < mesh.edge_count(); ++e)
    for (std::size_t i = 0; i < mesh.cells[e]; ++i)
      if (peak > 0.0 && std::abs(state.density()[e][i]) >= 0.5 * peak) heavy.emplace_back(e, i);
  if (heavy.empty()) throw Error(ErrorKind::InvalidArgument, "state carries no mass");

  const auto net = state.network_ptr();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<TestFunction> out;
  out.reserve(count);
  const double lmin = net->min_edge_length();
  for (std::size_t k = 0; k < count; ++k) {
    const auto [e, i] = heavy[static_cast<std::size_t>(unit(rng) * static_cast<double>(heavy.size())) %
                              heavy.size()];
    const NetworkPoint center = locate(*net, e, cell_center(mesh, e, i));
    const double radius = lmin * (0.2 + 0.25 * unit(rng));
    const TimeWindow window{t_end * (0.1 + 0.4 * unit(rng)), t_end * (0.3 + 0.3 * unit(rng))};
    out.emplace_back(net, center, radius, window);
  }
  return out;
}

double weak_residual(const Trajectory& trajectory, const TestFunction& phi) {
  require_snapshots(trajectory, 2);
  const Mesh& mesh = trajectory.mesh;
  const VelocityModel& model = *trajectory.velocity;

  auto space_integral = [&](const Snapshot& s) {
    double sum = 0.0;
    for (std::size_t e = 0; e < mesh.edge_count(); ++e) {
      double edge_sum = 0.0;
      for (std::size_t i = 0; i < mesh.cells[e]; ++i) {
        const double x = cell_center(mesh, e, i);
        const double rho = s.density[e][i];
        if (rho == 0.0) continue;
        edge_sum += rho * phi.dt(s.time, e, x) + cell_flux(model, e, s.time, x, rho) * phi.dx(s.time, e, x);
      }
      sum += mesh.spacing[e] * edge_sum;
    }
    return sum;
  };
  auto mass_against_phi = [&](const Snapshot& s) {
    double sum = 0.0;
    for (std::size_t e = 0; e < mesh.edge_count(); ++e) {
      double edge_sum = 0.0;
      for (std::size_t i = 0; i < mesh.cells[e]; ++i)
        edge_sum += s.density[e][i] * phi.value(s.time, e, cell_center(mesh, e, i));
      sum += mesh.spacing[e] * edge_sum;
    }
    return sum;
  };

  const auto& snaps = trajectory.snapshots;
  double time_integral = 0.0;
  double previous = space_integral(snaps.front());
  for (std::size_t n = 1; n < snaps.size(); ++n) {
    const double current = space_integral(snaps[n]);
    time_integral += 0.5 * (snaps[n].time - snaps[n - 1].time) * (previous + current);
    previous = current;
  }
  const double boundary = mass_against_phi(snaps.back()) - mass_against_phi(snaps.front());
  return std::abs(time_integral - boundary);
}

std::vector<double> boundary_trace(const Trajectory& trajectory, std::size_t edge, EndSide end) {
  require_snapshots(trajectory, 1);
  if (edge >= trajectory.mesh.edge_count())
    throw Error(ErrorKind::UnknownEdge, "edge index " + std::to_string(edge));
  const std::size_t n = trajectory.mesh.cells[edge];
  if (n < 2)
    throw Error(ErrorKind::TooFewCells,
                "edge '" + trajectory.network->edge(edge).key + "' has a single cell");

  const std::size_t near = end == EndSide::Tail ? 0 : n - 1;
  const std::size_t far = end == EndSide::Tail ? 1 : n - 2;
  std::vector<double> trace;
  trace.reserve(trajectory.snapshots.size());
  for (const Snapshot& s : trajectory.snapshots) {
    const double q_near = cell_flux(*trajectory.velocity, edge, s.time,
                                   cell_center(trajectory.mesh, edge, near), s.density[edge][near]);
    const double q_far = cell_flux(*trajectory.velocity, edge, s.time,
                                  cell_center(trajectory.mesh, edge, far), s.density[edge][far]);
    trace.push_back(1.5 * q_near - 0.5 * q_far);
  }
  return trace;
}

double classical_residual(const Trajectory& trajectory) {
  require_snapshots(trajectory, 3);
  const Mesh& mesh = trajectory.mesh;
  const auto& snaps = trajectory.snapshots;
  double total = 0.0;
  for (std::size_t k = 1; k + 1 < snaps.size(); ++k) {
    const double span = snaps[k + 1].time - snaps[k - 1].time;
    for (std::size_t e = 0; e < mesh.edge_count(); ++e) {
      const double h = mesh.spacing[e];
      const auto& now = snaps[k].density[e];
      for (std::size_t i = 1; i + 1 < mesh.cells[e]; ++i) {
        const double rho_t = (snaps[k + 1].density[e][i] - snaps[k - 1].density[e][i]) / span;
        const double f_right = cell_flux(*trajectory.velocity, e, snaps[k].time,
                                         cell_center(mesh, e, i + 1), now[i + 1]);
        const double f_left = cell_flux(*trajectory.velocity, e, snaps[k].time,
                                        cell_center(mesh, e, i - 1), now[i - 1]);
        total += std::abs(rho_t + (f_right - f_left) / (2.0 * h)) * h * 0.5 * span;
      }
    }
  }
  return total;
}

MollifierCheck mollifier_boundary_check(const std::function<double(double t, double x)>& f,
                                        double t_end, double gamma) {
  if (!(t_end > 0.0)) throw Error(ErrorKind::InvalidArgument, "T must be positive");
  if (!(gamma > 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma must be positive");
  constexpr std::size_t kNodes = 800;

  // Integrands vanish smoothly at both ends of their supports, where the
  // trapezoid rule converges faster than any power of the node spacing.
  auto tau = [&](double t) { return smooth_bump((t - 0.5 * t_end) / (0.5 * t_end)); };
  auto w_raw = [](double s) { return smooth_bump(2.0 * s - 1.0); };
  const double w_mass = trapezoid(w_raw, 0.0, 1.0, 4 * kNodes);

  MollifierCheck check;
  check.trace_integral = trapezoid([&](double t) { return f(t, 0.0) * tau(t); }, 0.0, t_end, kNodes);
  // Substituting x = s / gamma maps the support (0, 1/gamma) onto (0, 1).
  check.mollified_integral = trapezoid(
      [&](double t) {
        const double tt = tau(t);
        if (tt == 0.0) return 0.0;
        return tt * trapezoid([&](double s) { return f(t, s / gamma) * w_raw(s); }, 0.0, 1.0, kNodes) /
               w_mass;
      },
      0.0, t_end, kNodes);
  check.error = std::abs(check.mollified_integral - check.trace_integral);
  return check;
}

double observed_order(double coarse_error, double fine_error, double ratio) {
  return std::log(coarse_error / fine_error) / std::log(ratio);
}

std::pair<GridFunction, GridFunction> windowed_sin_cos(const Network& net, double h) {
  const Mesh mesh = Mesh::uniform(net, h);
  auto window = [&](std::size_t e, double x) {
    const Edge& ed = net.edge(e);
    const bool at_tail = net.degree(ed.tail) >= 2;
    const bool at_head = net.degree(ed.head) >= 2;
    const double s = x / ed.length;
    constexpr double pi = std::numbers::pi;
    if (at_tail && at_head) return std::pow(std::sin(pi * s), 2);
    if (at_head) return std::pow(std::cos(0.5 * pi * s), 2);
    if (at_tail) return std::pow(std::sin(0.5 * pi * s), 2);
    return 1.0;
  };
  auto f = GridFunction::sample(mesh, Layout::Nodes,
                                [&](std::size_t e, double x) { return std::sin(x) * window(e, x); });
  auto g = GridFunction::sample(mesh, Layout::Nodes,
                                [&](std::size_t e, double x) { return std::cos(x) * window(e, x); });
  return {std::move(f), std::move(g)};
}

}  // namespace kirchnet
