#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "kirchnet/grid_function.hpp"
#include "kirchnet/network.hpp"
#include "kirchnet/solver.hpp"

namespace kirchnet {

/// exp(1 - 1 / (1 - s^2)) on (-1, 1), zero outside; smooth, peak 1 at s = 0.
double smooth_bump(double s) noexcept;
double smooth_bump_derivative(double s) noexcept;

/// tau(t) = smooth_bump((t - center) / half_width). The window may reach past
/// [0, T], in which case the test function is nonzero at the time boundary.
struct TimeWindow {
  double center = 0.5;
  double half_width = 0.5;
};

/// phi(t, x) = tau(t) * smooth_bump(d(center, x) / radius). Radially symmetric
/// around its centre, so its spatial derivative vanishes at a centre vertex and
/// phi is admissible at vertices of any degree.
class TestFunction {
 public:
  /// Throws SupportTooWide unless radius < min edge length / 2.
  TestFunction(std::shared_ptr<const Network> net, NetworkPoint center, double radius,
               TimeWindow window);

  double value(double t, std::size_t edge, double x) const;
  double dt(double t, std::size_t edge, double x) const;
  /// Derivative in the tail-to-head direction.
  double dx(double t, std::size_t edge, double x) const;

  const NetworkPoint& center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }

 private:
  std::shared_ptr<const Network> net_;
  NetworkPoint center_;
  double radius_;
  TimeWindow window_;
  DistanceField field_;
};

/// Test functions with random centre (vertex or edge point), radius in
/// [0.2, 0.45] * min edge length and a time window covering part of [0, T].
std::vector<TestFunction> random_test_functions(std::shared_ptr<const Network> net,
                                                std::size_t count, double t_end,
                                                std::uint64_t seed);

/// As above, but centred on cells holding at least half the peak density of
/// `state`, with windows opening early, so every function meets the mass.
std::vector<TestFunction> test_functions_near_mass(const DensityState& state, std::size_t count,
                                                   double t_end, std::uint64_t seed);

/// |iint rho (phi_t + nu phi_x) - [int rho phi]_{t=0}^{T}| with the midpoint
/// rule over cells and the trapezoid rule over the stored times.
double weak_residual(const Trajectory& trajectory, const TestFunction& phi);

/// Flux nu * rho extrapolated to the edge end with second order, per snapshot.
/// Throws TooFewCells for edges with a single cell.
std::vector<double> boundary_trace(const Trajectory& trajectory, std::size_t edge, EndSide end);

/// L1 norm over interior cells and interior stored times of the central
/// difference residual rho_t + (nu rho)_x of the discrete solution.
double classical_residual(const Trajectory& trajectory);

struct MollifierCheck {
  double trace_integral = 0.0;      // int f(t, 0) tau(t) dt
  double mollified_integral = 0.0;  // iint f tau_gamma dx dt
  double error = 0.0;
};

/// Quadrature of both sides of the boundary-evaluation limit with
/// tau(t) a bump on [0, T] and tau_gamma(t, x) = gamma tau(t) w(gamma x) for a
/// unit-mass bump w supported on (0, 1).
MollifierCheck mollifier_boundary_check(const std::function<double(double t, double x)>& f,
                                        double t_end, double gamma);

/// log(coarse / fine) / log(ratio).
double observed_order(double coarse_error, double fine_error, double ratio = 2.0);

/// sin and cos of the edge coordinate, windowed by smooth factors so both
/// vanish to first order at every vertex of degree >= 2 while staying nonzero
/// at dead ends. Nodal samples on `Mesh::uniform(net, h)`.
std::pair<GridFunction, GridFunction> windowed_sin_cos(const Network& net, double h);

}  // namespace kirchnet
